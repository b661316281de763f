#include "syncap/hull/mesh_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "syncap/common/bytes.hpp"
#include "syncap/common/error.hpp"

namespace syncap::hull {

namespace {

std::string obj_text(const SurfaceMesh& mesh) {
  std::string out = "# syncap visual hull\n";
  char line[160];
  for (const auto& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out += line;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(line, sizeof line, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += line;
  }
  return out;
}

std::string ply_header(std::size_t vertices, std::size_t faces) {
  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\n"
    << "element vertex " << vertices << "\n"
    << "property double x\nproperty double y\nproperty double z\n"
    << "property double nx\nproperty double ny\nproperty double nz\n"
    << "element face " << faces << "\n"
    << "property list uchar uint vertex_indices\nend_header\n";
  return h.str();
}

}  // namespace

void export_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  if (format == MeshFormat::Obj) {
    out << obj_text(mesh);
  } else {
    out << ply_header(mesh.vertices.size(), mesh.triangles.size());
    std::vector<std::uint8_t> bytes;
    ByteWriter w(bytes);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Eigen::Vector3d n = i < mesh.normals.size() ? mesh.normals[i] : Eigen::Vector3d::Zero();
      for (int a = 0; a < 3; ++a) w.f64(mesh.vertices[i][a]);
      for (int a = 0; a < 3; ++a) w.f64(n[a]);
    }
    for (const auto& t : mesh.triangles) {
      w.u8(3);
      for (auto v : t) w.u32(v);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) fail(ErrorCode::IoFailure, "write failed for " + path.string());
}

SurfaceMesh read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  std::size_t vertices = 0, faces = 0;
  std::string line;
  bool ok = false;
  while (std::getline(in, line)) {
    if (line.rfind("element vertex ", 0) == 0) vertices = std::stoul(line.substr(15));
    if (line.rfind("element face ", 0) == 0) faces = std::stoul(line.substr(13));
    if (line == "end_header") {
      ok = true;
      break;
    }
  }
  if (!ok) fail(ErrorCode::IoFailure, "no PLY header in " + path.string());
  std::vector<std::uint8_t> body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (body.size() != vertices * 48 + faces * 13) fail(ErrorCode::IoFailure, "PLY body size mismatch");

  SurfaceMesh mesh;
  ByteReader r{std::span<const std::uint8_t>(body)};
  for (std::size_t i = 0; i < vertices; ++i) {
    Eigen::Vector3d p, n;
    for (int a = 0; a < 3; ++a) p[a] = r.f64();
    for (int a = 0; a < 3; ++a) n[a] = r.f64();
    mesh.vertices.push_back(p);
    mesh.normals.push_back(n);
  }
  for (std::size_t f = 0; f < faces; ++f) {
    if (r.u8() != 3) fail(ErrorCode::IoFailure, "only triangles are supported");
    std::array<std::uint32_t, 3> t;
    for (auto& v : t) {
      v = r.u32();
      if (v >= vertices) fail(ErrorCode::IoFailure, "face index out of range");
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

}  // namespace syncap::hull
