#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace kpd {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

constexpr double kDefaultEigTol = 1e-9;    // relative to spectral radius
constexpr double kDefaultIsoTol = 1e-9;    // relative isotropy test
constexpr double kFdStepScale = 1e-4;      // finite-difference base step

/// Thrown when an input violates a documented precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative or numerical procedure cannot reach its target.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Deterministic stream derived from a base seed and a task tag.
inline Rng make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
  // splitmix step decorrelates nearby seeds
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27; x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return Rng(x);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Complex unit_complex(Rng& rng) {
  double th = uniform(rng, 0.0, 2.0 * M_PI);
  return {std::cos(th), std::sin(th)};
}

inline CVec random_cvec(Rng& rng, int n) {
  CVec v(n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

inline RVec random_rvec(Rng& rng, int n) {
  RVec v(n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

/// sin of the Hermitian angle between the lines spanned by u and v;
/// 0 means the same projective point.
inline double projective_gap(const CVec& u, const CVec& v) {
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw PreconditionError("projective_gap: zero vector");
  Complex ip = (u.conjugate().array() * v.array()).sum();
  CVec r = v / nv - u * (ip / (nu * nu * nv));
  return std::min(1.0, r.norm());
}

/// Canonical representative of a projective point: unit Euclidean norm,
/// coordinate of largest modulus rotated to positive real axis
/// (lowest index wins ties).
inline CVec normalize_projective(const CVec& v) {
  double n = v.norm();
  if (n == 0.0) throw PreconditionError("normalize_projective: zero vector");
  CVec u = v / n;
  int k = 0;
  double best = -1.0;
  for (int i = 0; i < u.size(); ++i) {
    double m = std::abs(u[i]);
    if (m > best + 1e-15) { best = m; k = i; }
  }
  Complex ph = u[k] / std::abs(u[k]);
  return u / ph;
}

}  // namespace kpd
