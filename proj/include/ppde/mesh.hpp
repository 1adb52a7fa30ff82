#pragma once

#include <Eigen/Core>
#include <array>
#include <stdexcept>
#include <vector>

namespace ppde {

// Structured triangulation of the closed unit square. Vertices form an n x n
// lattice stored row-major (index j*n + i for lattice coordinates (i, j));
// each lattice cell is split along its lower-left -> upper-right diagonal
// into two counterclockwise triangles.
struct Mesh {
  int n = 0;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;

  int dof_count() const { return n * n; }
  int vertex_index(int i, int j) const { return j * n + i; }
};

inline Mesh build_mesh(int n) {
  if (n < 3) throw std::invalid_argument("build_mesh: grid side must be at least 3");
  Mesh mesh;
  mesh.n = n;
  mesh.vertices.reserve(static_cast<std::size_t>(n) * n);
  mesh.boundary.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // i / (n-1) hits 0 and 1 exactly on the boundary lattice lines.
      mesh.vertices.emplace_back(static_cast<double>(i) / (n - 1), static_cast<double>(j) / (n - 1));
      mesh.boundary.push_back(i == 0 || j == 0 || i == n - 1 || j == n - 1);
    }
  }
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n - 1) * (n - 1));
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const int v00 = mesh.vertex_index(i, j);
      const int v10 = mesh.vertex_index(i + 1, j);
      const int v01 = mesh.vertex_index(i, j + 1);
      const int v11 = mesh.vertex_index(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

inline double signed_area(const Mesh& mesh, const std::array<int, 3>& tri) {
  const Eigen::Vector2d& a = mesh.vertices[tri[0]];
  const Eigen::Vector2d& b = mesh.vertices[tri[1]];
  const Eigen::Vector2d& c = mesh.vertices[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

inline Eigen::Vector2d barycenter(const Mesh& mesh, const std::array<int, 3>& tri) {
  return (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
}

}  // namespace ppde
