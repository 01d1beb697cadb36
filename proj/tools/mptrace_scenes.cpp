// SPDX-License-Identifier: Apache-2.0
//
// mptrace - image-based ray tracing for radio propagation with diffraction-aware path search
// Copyright (C) 2026 mptrace contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Writes the bundled reference scenes as JSON files.

#include "mptrace/reference_scenes.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <vector>

namespace
{

void write_scene(const std::filesystem::path &path, const mptrace::Scene &scene)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string());
    const std::string text = mptrace::serialize_scene(scene);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"write the bundled reference scenes as JSON"};
    std::string out_dir = "data";
    std::vector<double> widths = {15.0, 10.0, 14.4};
    double facade_width = 12.0;
    bool ground = false;
    app.add_option("--out-dir", out_dir, "Output directory");
    app.add_option("--widths", widths, "Urban rooftop widths in meters (west, middle, east)")
        ->expected(3);
    app.add_option("--facade-width", facade_width, "Urban full-facade building width in meters");
    app.add_flag("--ground", ground, "Include the street-level plane in the urban scenes");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_scene(dir / "two_mirror.json", mptrace::make_two_mirror_scene());
    mptrace::UrbanParams params;
    params.widths = {widths[0], widths[1], widths[2]};
    params.ground = ground;
    write_scene(dir / "urban.json", mptrace::make_urban_scene(params));
    mptrace::UrbanParams facades;
    facades.widths = {facade_width, facade_width, facade_width};
    facades.facades = true;
    facades.ground = ground;
    write_scene(dir / "urban_facades.json", mptrace::make_urban_scene(facades));
    return 0;
}
