#pragma once

#include <filesystem>

#include "syncap/hull/marching_cubes.hpp"

namespace syncap::hull {

enum class MeshFormat { Obj, Ply };

/// OBJ is text with 1-based faces; PLY is binary little-endian with double
/// coordinates and normals. Both are byte-identical for equal meshes.
/// Throws IoFailure.
void export_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path, MeshFormat format);

/// Reads back a PLY written by export_mesh. Throws IoFailure.
SurfaceMesh read_ply(const std::filesystem::path& path);

}  // namespace syncap::hull
