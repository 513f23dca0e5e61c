// OFF / OBJ geometry readers and writers. Only vertex positions and faces
// are read; normals, texture coordinates, colors and materials are skipped.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "meshmend/mesh.hpp"

namespace meshmend {

enum class MeshFormat { Off, Obj };

// Infers the format from the file extension (case-insensitive).
std::optional<MeshFormat> format_from_extension(const std::filesystem::path& path);

// Polygons are fan-triangulated from their first vertex. OBJ indices
// (1-based, or negative/relative) are rebased to zero.
Mesh read_off(std::istream& in);
Mesh read_obj(std::istream& in);
void write_off(std::ostream& out, const Mesh& mesh);
void write_obj(std::ostream& out, const Mesh& mesh);

Mesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format = std::nullopt);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path,
               std::optional<MeshFormat> format = std::nullopt);

}  // namespace meshmend
