#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "droplab/grid.hpp"

namespace droplab::io {

using json = nlohmann::json;

/// {"nx","ny","x0","y0","h","name"}
json grid_sidecar(const Grid2D& g, const std::string& name);
Grid2D grid_from_sidecar(const json& j);

/// Writes <dir>/<name>.f64 (raw little-endian doubles, row-major) and
/// <dir>/<name>.json. Undefined nodes are written as 0.
void write_field(const std::filesystem::path& dir, const std::string& name, const ScalarField& f);
/// Accepts either the sidecar path or the common stem (with or without
/// extension); the raw file is the sidecar path with extension .f64.
ScalarField read_field(const std::filesystem::path& path);

/// Writes <dir>/<name>.pgm (binary P5, maxval 255, 255 = member) and
/// <dir>/<name>.json. Row 0 of the image is grid row 0.
void write_mask(const std::filesystem::path& dir, const std::string& name, const RegionMask& m);
RegionMask read_mask(const std::filesystem::path& path);

void write_json(const std::filesystem::path& file, const json& j);
void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace droplab::io
