#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppde/rng.hpp"

namespace ppde {

// The five parametrized diffusion coefficient sets. Tag values double as the
// on-disk family tag in dataset files.
enum class FamilyVariant : std::uint8_t {
  TrigPoly = 1,
  Chessboard = 2,
  CookiesFixed = 3,
  CookiesVariable = 4,
  ClippedPoly = 5,
};

struct ParametricFamily {
  FamilyVariant variant = FamilyVariant::TrigPoly;
  int p = 0;          // parameter dimension
  double sigma = 0;   // frequency weighting exponent (TrigPoly)
  double mu = 0;      // ellipticity shift / clipping value, > 0
  double r = 0;       // radius factor in (0,1] (CookiesFixed)
  int s = 0;          // partition side (Chessboard, Cookies)
  int k = 0;          // polynomial degree (ClippedPoly)
};

inline void validate(const ParametricFamily& f) {
  if (!(f.mu > 0.0)) throw std::invalid_argument("family: mu must be positive");
  switch (f.variant) {
    case FamilyVariant::TrigPoly:
      if (f.p < 1) throw std::invalid_argument("family: p must be at least 1");
      break;
    case FamilyVariant::Chessboard:
      if (f.s < 1 || f.p != f.s * f.s) throw std::invalid_argument("family: chessboard requires p = s^2");
      break;
    case FamilyVariant::CookiesFixed:
      if (f.s < 1 || f.p != f.s * f.s) throw std::invalid_argument("family: fixed cookies require p = s^2");
      if (!(f.r > 0.0 && f.r <= 1.0)) throw std::invalid_argument("family: radius factor must lie in (0,1]");
      break;
    case FamilyVariant::CookiesVariable:
      if (f.s < 1 || f.p != 2 * f.s * f.s) throw std::invalid_argument("family: variable cookies require p = 2s^2");
      break;
    case FamilyVariant::ClippedPoly:
      if (f.k < 0 || f.p != (f.k + 1) * (f.k + 2) / 2)
        throw std::invalid_argument("family: clipped polynomials require p = (k+1)(k+2)/2");
      break;
    default:
      throw std::invalid_argument("family: unknown variant");
  }
}

inline ParametricFamily trig_poly(int p, double sigma, double mu) {
  ParametricFamily f{FamilyVariant::TrigPoly, p, sigma, mu, 0, 0, 0};
  validate(f);
  return f;
}

inline ParametricFamily chessboard(int s, double mu) {
  ParametricFamily f{FamilyVariant::Chessboard, s * s, 0, mu, 0, s, 0};
  validate(f);
  return f;
}

inline ParametricFamily cookies_fixed(int s, double mu, double r) {
  ParametricFamily f{FamilyVariant::CookiesFixed, s * s, 0, mu, r, s, 0};
  validate(f);
  return f;
}

inline ParametricFamily cookies_variable(int s, double mu) {
  ParametricFamily f{FamilyVariant::CookiesVariable, 2 * s * s, 0, mu, 0, s, 0};
  validate(f);
  return f;
}

inline ParametricFamily clipped_poly(int k, double mu) {
  ParametricFamily f{FamilyVariant::ClippedPoly, (k + 1) * (k + 2) / 2, 0, mu, 0, 0, k};
  validate(f);
  return f;
}

inline bool is_affine(FamilyVariant v) {
  return v == FamilyVariant::TrigPoly || v == FamilyVariant::Chessboard ||
         v == FamilyVariant::CookiesFixed;
}

inline std::string variant_name(FamilyVariant v) {
  switch (v) {
    case FamilyVariant::TrigPoly: return "t1";
    case FamilyVariant::Chessboard: return "t2";
    case FamilyVariant::CookiesFixed: return "t3f";
    case FamilyVariant::CookiesVariable: return "t3v";
    case FamilyVariant::ClippedPoly: return "t4";
  }
  return "?";
}

struct ParameterBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int dim() const { return static_cast<int>(lower.size()); }
};

inline ParameterBox parameter_box(const ParametricFamily& f) {
  validate(f);
  ParameterBox box;
  box.lower = Eigen::VectorXd::Zero(f.p);
  box.upper = Eigen::VectorXd::Ones(f.p);
  switch (f.variant) {
    case FamilyVariant::ClippedPoly:
      box.lower.setConstant(-1.0);
      break;
    case FamilyVariant::CookiesVariable:
      // s^2 indicator weights in [0,1], then s^2 radius parameters in [0.5, 0.9].
      box.lower.tail(f.s * f.s).setConstant(0.5);
      box.upper.tail(f.s * f.s).setConstant(0.9);
      break;
    default:
      break;
  }
  return box;
}

// mu + sum_i y_i i^sigma (1 + a_i(x)),  a_i(x) = sin(floor((i+2)/2) pi x1) sin(ceil((i+2)/2) pi x2)
inline double eval_trig_poly(const ParametricFamily& f, const Eigen::VectorXd& y,
                             const Eigen::Vector2d& x) {
  double value = f.mu;
  for (int i = 1; i <= f.p; ++i) {
    const double a_i = std::sin(((i + 2) / 2) * std::numbers::pi * x.x()) *
                       std::sin(((i + 3) / 2) * std::numbers::pi * x.y());
    value += y[i - 1] * std::pow(static_cast<double>(i), f.sigma) * (1.0 + a_i);
  }
  return value;
}

namespace detail {

// Row-major cell index of x in the s x s partition; cells are half-open
// except along the top/right edge.
inline int partition_cell(int s, const Eigen::Vector2d& x) {
  const int col = std::min(static_cast<int>(x.x() * s), s - 1);
  const int row = std::min(static_cast<int>(x.y() * s), s - 1);
  return row * s + col;
}

// Center of disk i (1-based, i = k*s + l with k in {0..s-1}, l in {1..s}).
inline Eigen::Vector2d disk_center(int s, int i) {
  const int k = (i - 1) / s;
  const int l = i - k * s;
  return {(2.0 * k + 1.0) / (2.0 * s), (2.0 * l - 1.0) / (2.0 * s)};
}

}  // namespace detail

inline double eval_chessboard(const ParametricFamily& f, const Eigen::VectorXd& y,
                              const Eigen::Vector2d& x) {
  return f.mu + y[detail::partition_cell(f.s, x)];
}

inline double eval_cookies_fixed(const ParametricFamily& f, const Eigen::VectorXd& y,
                                 const Eigen::Vector2d& x) {
  const double radius = f.r / (2.0 * f.s);
  double value = f.mu;
  for (int i = 1; i <= f.p; ++i)
    if ((x - detail::disk_center(f.s, i)).norm() < radius) value += y[i - 1];
  return value;
}

inline double eval_cookies_variable(const ParametricFamily& f, const Eigen::VectorXd& y,
                                    const Eigen::Vector2d& x) {
  const int m = f.s * f.s;
  double value = f.mu;
  for (int i = 1; i <= m; ++i) {
    const double radius = y[m + i - 1] / (2.0 * f.s);
    if ((x - detail::disk_center(f.s, i)).norm() < radius) value += y[i - 1];
  }
  return value;
}

// max{mu, sum_i y_i m_i(x)} over the monomial basis of degree <= k in
// graded-lexicographic order: 1, x1, x2, x1^2, x1 x2, x2^2, ...
inline double eval_clipped_poly(const ParametricFamily& f, const Eigen::VectorXd& y,
                                const Eigen::Vector2d& x) {
  double sum = 0.0;
  int idx = 0;
  for (int deg = 0; deg <= f.k; ++deg)
    for (int a = deg; a >= 0; --a, ++idx)
      sum += y[idx] * std::pow(x.x(), a) * std::pow(x.y(), deg - a);
  return std::max(f.mu, sum);
}

inline double evaluate(const ParametricFamily& f, const Eigen::VectorXd& y,
                       const Eigen::Vector2d& x) {
  if (y.size() != f.p) throw std::invalid_argument("evaluate: parameter dimension mismatch");
  switch (f.variant) {
    case FamilyVariant::TrigPoly: return eval_trig_poly(f, y, x);
    case FamilyVariant::Chessboard: return eval_chessboard(f, y, x);
    case FamilyVariant::CookiesFixed: return eval_cookies_fixed(f, y, x);
    case FamilyVariant::CookiesVariable: return eval_cookies_variable(f, y, x);
    case FamilyVariant::ClippedPoly: return eval_clipped_poly(f, y, x);
  }
  throw std::invalid_argument("evaluate: unknown variant");
}

// count i.i.d. uniform draws from the parameter box. Sample j depends only on
// (seed, j), so prefixes are stable and generation may be parallelized.
inline std::vector<Eigen::VectorXd> sample_parameters(const ParametricFamily& f, int count,
                                                      std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_parameters: count must be positive");
  const ParameterBox box = parameter_box(f);
  std::vector<Eigen::VectorXd> samples(count);
  for (int j = 0; j < count; ++j) {
    std::mt19937_64 gen(mix_seed(seed, static_cast<std::uint64_t>(j)));
    Eigen::VectorXd y(f.p);
    for (int i = 0; i < f.p; ++i) y[i] = uniform(gen, box.lower[i], box.upper[i]);
    samples[j] = std::move(y);
  }
  return samples;
}

}  // namespace ppde
