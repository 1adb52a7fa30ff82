#pragma once

// Independent oracles shared by the unit and acceptance suites. Everything
// here recomputes quantities from scratch; none of it reuses the assembly
// path under test.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

#include "ppde/fem.hpp"
#include "ppde/mesh.hpp"

namespace ppde::testing {

// H1 energy of an FE function by per-element integration: the gradient comes
// from solving the 2x2 plane equations directly, the mass part uses the
// edge-midpoint rule (exact for quadratics).
inline double element_loop_h1_squared(const Mesh& mesh, const Eigen::VectorXd& nodal) {
  double total = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Eigen::Vector2d& a = mesh.vertices[tri[0]];
    const Eigen::Vector2d& b = mesh.vertices[tri[1]];
    const Eigen::Vector2d& c = mesh.vertices[tri[2]];
    const double va = nodal[tri[0]], vb = nodal[tri[1]], vc = nodal[tri[2]];

    Eigen::Matrix2d edges;
    edges.row(0) = (b - a).transpose();
    edges.row(1) = (c - a).transpose();
    const Eigen::Vector2d grad = edges.inverse() * Eigen::Vector2d(vb - va, vc - va);
    const double area = 0.5 * std::abs(edges.row(0).x() * edges.row(1).y() -
                                       edges.row(0).y() * edges.row(1).x());

    const double mab = 0.5 * (va + vb), mbc = 0.5 * (vb + vc), mca = 0.5 * (vc + va);
    total += area / 3.0 * (mab * mab + mbc * mbc + mca * mca);
    total += area * grad.squaredNorm();
  }
  return total;
}

// Degree-5 seven-point Gauss rule on the reference triangle, in barycentric
// coordinates; weights sum to 1 and scale by the element area.
struct TriQuadPoint {
  double l0, l1, l2, w;
};

inline const std::array<TriQuadPoint, 7>& tri_quad_degree5() {
  static const double a1 = 0.0597158717897698, b1 = 0.4701420641051151, w1 = 0.1323941527885062;
  static const double a2 = 0.7974269853530873, b2 = 0.1012865073234563, w2 = 0.1259391805448271;
  static const std::array<TriQuadPoint, 7> rule = {{
      {1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40},
      {a1, b1, b1, w1},
      {b1, a1, b1, w1},
      {b1, b1, a1, w1},
      {a2, b2, b2, w2},
      {b2, a2, b2, w2},
      {b2, b2, a2, w2},
  }};
  return rule;
}

// Full H1 error |u_h - u|_{H1} against an analytic solution with gradient.
inline double h1_error_vs_exact(const Mesh& mesh, const Eigen::VectorXd& u_h,
                                const std::function<double(const Eigen::Vector2d&)>& exact,
                                const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& exact_grad) {
  double total = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Eigen::Vector2d& a = mesh.vertices[tri[0]];
    const Eigen::Vector2d& b = mesh.vertices[tri[1]];
    const Eigen::Vector2d& c = mesh.vertices[tri[2]];
    const double va = u_h[tri[0]], vb = u_h[tri[1]], vc = u_h[tri[2]];

    Eigen::Matrix2d edges;
    edges.row(0) = (b - a).transpose();
    edges.row(1) = (c - a).transpose();
    const Eigen::Vector2d grad_h = edges.inverse() * Eigen::Vector2d(vb - va, vc - va);
    const double area = 0.5 * std::abs(edges.row(0).x() * edges.row(1).y() -
                                       edges.row(0).y() * edges.row(1).x());

    double elem = 0.0;
    for (const auto& q : tri_quad_degree5()) {
      const Eigen::Vector2d x = q.l0 * a + q.l1 * b + q.l2 * c;
      const double vh = q.l0 * va + q.l1 * vb + q.l2 * vc;
      const double diff = vh - exact(x);
      elem += q.w * (diff * diff + (grad_h - exact_grad(x)).squaredNorm());
    }
    total += area * elem;
  }
  return std::sqrt(total);
}

struct ManufacturedCase {
  // -div(grad u) = f with u = sin(pi x1) sin(pi x2), f = 2 pi^2 u.
  static double exact(const Eigen::Vector2d& x) {
    return std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y());
  }
  static Eigen::Vector2d exact_grad(const Eigen::Vector2d& x) {
    const double pi = std::numbers::pi;
    return {pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
            pi * std::sin(pi * x.x()) * std::cos(pi * x.y())};
  }
  static double rhs(const Eigen::Vector2d& x) {
    return 2.0 * std::numbers::pi * std::numbers::pi * exact(x);
  }
};

struct ManufacturedResult {
  double h1_error = 0.0;
  double rel_residual = 0.0;
};

inline ManufacturedResult solve_manufactured(int n) {
  const Mesh mesh = build_mesh(n);
  const std::vector<double> ones(mesh.triangles.size(), 1.0);
  const FemSystem system = assemble_system(mesh, ones, ManufacturedCase::rhs);
  const FeVector u = solve(system);
  ManufacturedResult result;
  result.h1_error = h1_error_vs_exact(mesh, u, ManufacturedCase::exact, ManufacturedCase::exact_grad);
  result.rel_residual = (system.stiffness * u - system.load).norm() / system.load.norm();
  return result;
}

}  // namespace ppde::testing
