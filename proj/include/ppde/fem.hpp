#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppde/mesh.hpp"

namespace ppde {

using FeVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct EllipticityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Galerkin system for one diffusion coefficient: Dirichlet-constrained
// stiffness matrix, load vector, and the (unconstrained) H1 Gram matrix.
struct FemSystem {
  SparseMatrix stiffness;
  FeVector load;
  SparseMatrix gram;
  int D = 0;
  std::vector<bool> boundary;
};

namespace detail {

// Gradients of the P1 barycentric basis on one triangle, grad(lambda_i) =
// (y_j - y_k, x_k - x_j) / (2A) for (i, j, k) cyclic.
inline std::array<Eigen::Vector2d, 3> p1_gradients(const Mesh& mesh, const std::array<int, 3>& tri,
                                                   double area) {
  std::array<Eigen::Vector2d, 3> grads;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d& pj = mesh.vertices[tri[(i + 1) % 3]];
    const Eigen::Vector2d& pk = mesh.vertices[tri[(i + 2) % 3]];
    grads[i] = Eigen::Vector2d(pj.y() - pk.y(), pk.x() - pj.x()) / (2.0 * area);
  }
  return grads;
}

}  // namespace detail

// H1 Gram matrix: exact P1 mass matrix plus unit-coefficient stiffness.
inline SparseMatrix assemble_gram(const Mesh& mesh) {
  const int D = mesh.dof_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const double area = signed_area(mesh, tri);
    const auto grads = detail::p1_gradients(mesh, tri, area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double mass = (i == j ? 2.0 : 1.0) * area / 12.0;
        const double stiff = area * grads[i].dot(grads[j]);
        triplets.emplace_back(tri[i], tri[j], mass + stiff);
      }
    }
  }
  SparseMatrix gram(D, D);
  gram.setFromTriplets(triplets.begin(), triplets.end());
  gram.makeCompressed();
  return gram;
}

// Assembles the stiffness matrix and load vector for a coefficient given by
// one value per triangle (barycenter evaluation) and imposes homogeneous
// Dirichlet conditions by identity rows/columns on boundary dofs.
inline FemSystem assemble_system(const Mesh& mesh, std::span<const double> coeff_at_barycenters,
                                 const std::function<double(const Eigen::Vector2d&)>& rhs,
                                 SparseMatrix gram) {
  const int D = mesh.dof_count();
  if (coeff_at_barycenters.size() != mesh.triangles.size())
    throw std::invalid_argument("assemble_system: one coefficient value per triangle required");

  FemSystem system;
  system.D = D;
  system.boundary = mesh.boundary;
  system.gram = std::move(gram);
  system.load = FeVector::Zero(D);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9 + D);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double a_T = coeff_at_barycenters[t];
    if (!(a_T > 0.0))
      throw EllipticityError("assemble_system: non-positive coefficient on triangle " + std::to_string(t));
    const double area = signed_area(mesh, tri);
    const auto grads = detail::p1_gradients(mesh, tri, area);
    const double f_T = rhs(barycenter(mesh, tri)) * area / 3.0;
    for (int i = 0; i < 3; ++i) {
      if (mesh.boundary[tri[i]]) continue;
      system.load[tri[i]] += f_T;
      for (int j = 0; j < 3; ++j) {
        if (mesh.boundary[tri[j]]) continue;
        triplets.emplace_back(tri[i], tri[j], a_T * area * grads[i].dot(grads[j]));
      }
    }
  }
  for (int i = 0; i < D; ++i)
    if (mesh.boundary[i]) triplets.emplace_back(i, i, 1.0);

  system.stiffness.resize(D, D);
  system.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  system.stiffness.makeCompressed();
  return system;
}

inline FemSystem assemble_system(const Mesh& mesh, std::span<const double> coeff_at_barycenters,
                                 const std::function<double(const Eigen::Vector2d&)>& rhs) {
  return assemble_system(mesh, coeff_at_barycenters, rhs, assemble_gram(mesh));
}

// Direct sparse factorization up to D = 20000 dofs, conjugate gradients
// beyond. Always verifies the relative residual.
inline FeVector solve(const FemSystem& system) {
  constexpr double kResidualTol = 1e-10;
  const double load_norm = system.load.norm();
  FeVector u;
  if (system.D <= 20000) {
    Eigen::SimplicialLDLT<SparseMatrix> solver(system.stiffness);
    if (solver.info() != Eigen::Success)
      throw NumericalFailure("solve: sparse factorization failed");
    u = solver.solve(system.load);
    // One step of iterative refinement if roundoff left a visible residual.
    if (load_norm > 0.0 && (system.stiffness * u - system.load).norm() > kResidualTol * load_norm)
      u += solver.solve(system.load - system.stiffness * u);
  } else {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> solver;
    solver.setTolerance(kResidualTol);
    solver.setMaxIterations(static_cast<int>(50.0 * std::sqrt(static_cast<double>(system.D))));
    solver.compute(system.stiffness);
    u = solver.solve(system.load);
    if (solver.info() != Eigen::Success)
      throw NumericalFailure("solve: conjugate gradients did not converge within iteration cap");
  }
  if (load_norm > 0.0) {
    const double rel_residual = (system.stiffness * u - system.load).norm() / load_norm;
    if (!(rel_residual <= kResidualTol))
      throw NumericalFailure("solve: relative residual " + std::to_string(rel_residual) + " above tolerance");
  }
  for (int i = 0; i < system.D; ++i)
    if (system.boundary[i]) u[i] = 0.0;
  return u;
}

// |v|_G = sqrt(v^T G v), via one sparse matvec; no matrix square root.
inline double gram_norm(const FeVector& v, const SparseMatrix& gram) {
  if (v.size() != gram.rows() || gram.rows() != gram.cols())
    throw std::invalid_argument("gram_norm: dimension mismatch");
  const double sq = v.dot(gram * v);
  return std::sqrt(std::max(sq, 0.0));
}

inline double relative_error(const FeVector& x1, const FeVector& x2, const SparseMatrix& gram) {
  if (x1.size() != x2.size())
    throw std::invalid_argument("relative_error: dimension mismatch");
  const double denom = gram_norm(x2, gram);
  if (denom == 0.0)
    throw std::domain_error("relative_error: reference vector has zero Gram norm");
  return gram_norm(x1 - x2, gram) / denom;
}

}  // namespace ppde
