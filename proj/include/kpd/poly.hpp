#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kpd/types.hpp"

namespace kpd {

/// Dense univariate polynomial, coefficients ascending in degree.
class Poly {
 public:
  Poly() : c_{Complex(0.0)} {}
  explicit Poly(std::vector<Complex> coeffs);
  static Poly constant(Complex a) { return Poly({a}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<Complex>& coeffs() const { return c_; }

  Complex eval(Complex z) const;
  Poly derivative() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(Complex a) const;

  /// p(a z + b)
  Poly affine_substitute(Complex a, Complex b) const;
  /// p(z^k)
  Poly power_substitute(int k) const;
  /// p(z) / (z - root)^m by synthetic division; remainder must vanish
  /// within tol at each stage.
  Poly deflate(Complex root, int m, double tol = 1e-8) const;

 private:
  std::vector<Complex> c_;
  void trim();
};

/// Polynomial map C -> C^n given by one polynomial per coordinate.
class PolyCurve {
 public:
  PolyCurve() = default;
  explicit PolyCurve(std::vector<Poly> components);

  int ambient_dim() const { return static_cast<int>(comp_.size()); }
  const std::vector<Poly>& components() const { return comp_; }
  int degree() const;

  CVec eval(Complex z) const;
  PolyCurve derivative() const;
  PolyCurve affine_substitute(Complex a, Complex b) const;
  PolyCurve power_substitute(int k) const;

  /// Apply a constant matrix on the left: z -> M c(z).
  PolyCurve linear_map(const CMat& m) const;

  static PolyCurve from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<Poly> comp_;
};

/// Roots via the companion-matrix eigenproblem; degree 0 gives none.
std::vector<Complex> poly_roots(const Poly& p, double coeff_tol = 1e-13);

}  // namespace kpd
