#pragma once

#include <filesystem>
#include <string>

#include "nirom/geometry_ffd.hpp"

namespace nirom::io {

/// ASCII STL (solid/facet/outer loop/vertex/endloop/endfacet/endsolid).
/// Bit-identical vertex coordinates are merged so the triangle soup becomes
/// an indexed mesh. Facet normals are ignored on read and recomputed on write.
ffd::TriMesh read_stl(const std::filesystem::path& path);
void write_stl(const std::filesystem::path& path, const ffd::TriMesh& mesh, const std::string& solid_name = "nirom");

/// Point cloud CSV with an "x,y,z" header; the returned mesh has no triangles.
ffd::TriMesh read_point_csv(const std::filesystem::path& path);
void write_point_csv(const std::filesystem::path& path, const ffd::TriMesh& mesh);

/// Dispatches on extension: ".stl" or ".csv".
ffd::TriMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const ffd::TriMesh& mesh);

}  // namespace nirom::io
