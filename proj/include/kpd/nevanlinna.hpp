#pragma once

#include <functional>
#include <vector>

#include "kpd/poly.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"

namespace kpd {

// Value-convention growth theory for entire polynomial curves. A hermitian
// metric h contributes the (1,1)-form i*ddbar of its potential, whose area
// density is 2*h(f', f'); characteristics integrate that density against the
// Nevanlinna weight, normalized so that a unit point mass of i*ddbar log|z|^2
// contributes exactly log r.

/// Fubini-Study density 2 * d_z d_zbar log ||c(z)||^2 along the curve.
double density_fs(const PolyCurve& curve, Complex z);

/// Density 2 * h(c'(z), c'(z)) of the canonical metric along the curve.
/// Negative where the derivative spans a negative line.
double density_omega(const QuadraticSpace& space, const PolyCurve& curve,
                     Complex z);

/// Mean of g over the circle of the given radius (periodic trapezoid).
double circle_mean(const std::function<double(Complex)>& g, double radius,
                   int nodes = 1024);

/// (1/2pi) * integral over the disk of radius r of rho(z) (log r - log+ |z|),
/// base radius 1. Polar grid: 256 angular nodes, adaptive radial refinement
/// (doubling) until the relative change drops below rel_tol.
double characteristic_of_density(const std::function<double(Complex)>& rho,
                                 double r, double rel_tol = 1e-6);

enum class CharMetric { kOmegaMetric, kFubiniStudy, kEpsilon };

/// Characteristic T(r) of the curve for one of the three metrics.
double characteristic(const QuadraticSpace& space, const PolyCurve& curve,
                      CharMetric metric, double r, double eps = 0.0,
                      double rel_tol = 1e-6);

/// Circle-mean difference mean_r(phi o curve) - mean_1(phi o curve): the
/// Jensen route to the characteristic of i*ddbar(phi), up to the measured
/// constant kappa_jensen.
double characteristic_via_jensen(
    const PolyCurve& curve, const std::function<double(const CVec&)>& potential,
    double r, int nodes = 1024);

/// The single constant relating the two characteristic routes, measured on
/// three reference potentials (log|z|^2, log|z-a|^2, log(1+|z|^2)); throws
/// NumericError if the three measurements disagree beyond 1e-6 relative.
double calibrate_kappa_jensen(double r = 8.0);

/// phi([x]) = ||x||^2 / q(x, conj x): the ratio of the compact reference
/// potential to the form, >= 1 on the positive cone in standard form.
double phi_potential(const QuadraticSpace& space, const CVec& x);

/// p_f(r): circle integral (not mean) of log phi along the curve.
double proximity(const QuadraticSpace& space, const PolyCurve& curve, double r,
                 int angular_samples = 1024);

struct CharacteristicRow {
  double r;
  double t_fs;
  double t_omega;
  double p_f;
  double residual;
};

struct CharacteristicTable {
  double kappa;
  std::vector<CharacteristicRow> rows;
};

/// T_fs + T_omega - kappa * p_f/(2pi) per radius; the residual column is
/// constant in r for curves staying in the positive cone.
CharacteristicTable verify_prop67(const QuadraticSpace& space,
                                  const PolyCurve& curve,
                                  const std::vector<double>& radii,
                                  double kappa);

/// Norm density of the normal component of the curve's acceleration: with
/// L the derivative line, w = pr_{L-perp}(f'' + A f') for the chart
/// connection A = h^{-1} dh, returns h(w,w)/h(f',f'). May be negative: the
/// h-orthogonal complement of a positive line carries signature (p-1, 2).
double second_fundamental_density(const QuadraticSpace& space,
                                  const PolyCurve& curve, Complex z);

/// Same value at a point where the derivative vanishes to the given order:
/// the direction field f'(z)/(z - root)^multiplicity replaces f'.
double second_fundamental_density_at_root(const QuadraticSpace& space,
                                          const PolyCurve& curve, Complex root,
                                          int multiplicity);

struct IdentityCheck {
  double lhs;        // (log h(f',f'))_{z zbar} by finite differences
  double curvature;  // gamma * h(f',f')
  double normal;     // second fundamental density
  double residual;   // |lhs - curvature - normal| / max(1, |lhs|, |rhs|)
};

/// The curvature identity for the derivative line bundle at one point.
IdentityCheck theorem615_identity_at(const QuadraticSpace& space,
                                     const PolyCurve& curve, Complex z,
                                     double gamma);

/// Max relative residual of the identity over the samples.
double theorem615_identity_check(const QuadraticSpace& space,
                                 const PolyCurve& curve,
                                 const std::vector<Complex>& z_samples,
                                 double gamma);

struct SmtRow {
  double r;
  double gamma_t_omega;
  double t_sigma;
  double error_term;  // log r + log T_omega
};

/// Diagnostic growth table: gamma*T_omega(r), the characteristic of twice
/// the second fundamental density, and the error-term scale.
std::vector<SmtRow> smt_report(const QuadraticSpace& space,
                               const PolyCurve& curve,
                               const std::vector<double>& radii, double gamma);

/// The interpolating pairing <v,w>_eps with the first three (positive)
/// coordinates scaled by 1+eps. Standard-form spaces only.
class EpsilonMetric {
 public:
  EpsilonMetric(const QuadraticSpace& space, double eps);

  double eps() const { return eps_; }
  const QuadraticSpace& space() const { return *space_; }

  /// v^T G_eps conj(w).
  Complex pairing(const CVec& v, const CVec& w) const;

  /// Induced line metric at sigma (requires <sigma,sigma>_eps > 0):
  /// -[<v,w> S - <v,sigma><sigma,w>]/S^2 with S = <sigma,sigma>_eps.
  Complex line_metric(const CVec& sigma, const CVec& v, const CVec& w) const;

 private:
  const QuadraticSpace* space_;
  double eps_;
  CMat gram_eps_;
};

/// True when the tangent line [v] at the point sigma is eps-positive.
bool epsilon_cone_test(const EpsilonMetric& em, const CVec& sigma,
                       const CVec& v);

/// phi_eps([x]) = ||x||^2 / <x,x>_eps.
double phi_eps(const EpsilonMetric& em, const CVec& x);

/// Max of phi_eps over randomly sampled points of the positive cone.
double phi_eps_bound(const EpsilonMetric& em, int samples, Rng& rng);

}  // namespace kpd
