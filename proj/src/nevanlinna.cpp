#include "kpd/nevanlinna.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kpd/fd.hpp"
#include "kpd/period_domain.hpp"

namespace kpd {

namespace {

constexpr int kAngularNodes = 256;
constexpr int kMinRadialLevel = 6;
constexpr int kMaxRadialLevel = 15;

double fs_value(const CVec& f, const CVec& fd) {
  double n2 = f.squaredNorm();
  double d2 = fd.squaredNorm();
  Complex ip = (f.conjugate().array() * fd.array()).sum();
  return (d2 * n2 - std::norm(ip)) / (n2 * n2);
}

Complex hval(const CMat& m, const CVec& u, const CVec& v) {
  return (u.transpose() * m * v.conjugate())(0, 0);
}

/// Metric value matrix at an affine representative, pivot row/col removed:
/// the remaining coordinates are an affine chart around the point.
CMat chart_metric_minor(const QuadraticSpace& space, const CVec& aff,
                        int pivot, double s) {
  const CMat& g = space.gram_c();
  CVec gs = g * aff;
  CVec gsb = g * aff.conjugate();
  int n = space.dim();
  CMat amb = -(g * s - gsb * gs.transpose()) / (s * s);
  CMat out(n - 1, n - 1);
  for (int j = 0, jj = 0; j < n; ++j) {
    if (j == pivot) continue;
    for (int k = 0, kk = 0; k < n; ++k) {
      if (k == pivot) continue;
      out(jj, kk) = amb(j, k);
      ++kk;
    }
    ++jj;
  }
  return out;
}

/// h(w, w)/h(a, a) for w the a-perpendicular part of the covariant
/// derivative of the direction field a along f, in the pivot chart at f(z).
double normal_density_impl(const QuadraticSpace& space, const PolyCurve& f,
                           const PolyCurve& fd, const PolyCurve& a,
                           const PolyCurve& ad, Complex z) {
  CVec fv = f.eval(z);
  CVec fdv = fd.eval(z);
  CVec av = a.eval(z);
  CVec adv = ad.eval(z);
  int n = space.dim();

  int piv = 0;
  double best = -1.0;
  for (int j = 0; j < n; ++j) {
    double m = std::abs(fv[j]);
    if (m > best) { best = m; piv = j; }
  }
  if (best <= 0.0)
    throw NumericError("second_fundamental_density: curve vanishes at the sample");

  Complex fp = fv[piv], fdp = fdv[piv], ap = av[piv], adp = adv[piv];
  CVec aff = fv / fp;
  double s = space.pairing(aff, aff).real();
  if (s <= 0.0)
    throw NumericError("second_fundamental_density: sample outside the positive cone");

  CVec gd_full = (fdv - aff * fdp) / fp;
  CVec al_full = (av - aff * ap) / fp;
  CVec ald_full = (adv - gd_full * ap - aff * adp) / fp - al_full * (fdp / fp);

  auto drop = [&](const CVec& v) {
    CVec o(n - 1);
    for (int j = 0, jj = 0; j < n; ++j)
      if (j != piv) o[jj++] = v[j];
    return o;
  };
  CVec al = drop(al_full);
  CVec ald = drop(ald_full);

  double h_step = kFdStepScale * std::max(1.0, std::abs(z));
  auto mat_at = [&](Complex dz) {
    CVec ft = f.eval(z + dz);
    Complex ftp = ft[piv];
    if (std::abs(ftp) == 0.0)
      throw NumericError("second_fundamental_density: pivot vanishes inside the stencil");
    CVec at = ft / ftp;
    double st = space.pairing(at, at).real();
    if (st <= 0.0)
      throw NumericError("second_fundamental_density: stencil leaves the positive cone");
    return chart_metric_minor(space, at, piv, st);
  };
  CMat m0 = mat_at(Complex(0.0));
  CMat dm = fd_dz<CMat>(mat_at, h_step);

  CVec gamma_al = m0.transpose().partialPivLu().solve(dm.transpose() * al);
  CVec nab = ald + gamma_al;

  double den = hval(m0, al, al).real();
  double den_scale =
      m0.cwiseAbs().maxCoeff() * al.squaredNorm() + 1e-300;
  if (std::abs(den) < 1e-10 * den_scale)
    throw NumericError("second_fundamental_density: derivative line is null");

  Complex c = hval(m0, nab, al) / den;
  CVec w = nab - c * al;
  return hval(m0, w, w).real() / den;
}

/// Adaptive trapezoid with one Richardson step on [a, b]; doubles panels
/// until consecutive extrapolations agree to rel_tol (relative to
/// max(1, |value|)).
double refine_segment(const std::function<double(double)>& f, double a,
                      double b, double rel_tol) {
  if (b <= a) return 0.0;
  double prev_trap = 0.5 * (b - a) * (f(a) + f(b));
  double prev_extrap = prev_trap;
  int panels = 1;
  for (int level = 1; level <= kMaxRadialLevel; ++level) {
    double mid_sum = 0.0;
    double step = (b - a) / panels;
    for (int j = 0; j < panels; ++j) mid_sum += f(a + (j + 0.5) * step);
    double trap = 0.5 * prev_trap + 0.5 * step * mid_sum;
    panels *= 2;
    double extrap = (4.0 * trap - prev_trap) / 3.0;
    if (level >= kMinRadialLevel &&
        std::abs(extrap - prev_extrap) <=
            rel_tol * std::max(1.0, std::abs(extrap)))
      return extrap;
    prev_trap = trap;
    prev_extrap = extrap;
  }
  throw NumericError("characteristic: radial quadrature did not converge");
}

}  // namespace

double density_fs(const PolyCurve& curve, Complex z) {
  CVec f = curve.eval(z);
  CVec fd = curve.derivative().eval(z);
  if (f.squaredNorm() == 0.0)
    throw NumericError("density_fs: curve vanishes at the sample");
  return 2.0 * fs_value(f, fd);
}

double density_omega(const QuadraticSpace& space, const PolyCurve& curve,
                     Complex z) {
  CVec f = curve.eval(z);
  CVec fd = curve.derivative().eval(z);
  double s = space.pairing(f, f).real();
  if (s <= 0.0)
    throw NumericError("density_omega: curve leaves the positive cone");
  return 2.0 * gs_metric(space, f, fd, fd).real();
}

double circle_mean(const std::function<double(Complex)>& g, double radius,
                   int nodes) {
  if (radius <= 0.0 || nodes < 4)
    throw PreconditionError("circle_mean: need radius > 0 and nodes >= 4");
  double acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    double th = 2.0 * M_PI * j / nodes;
    acc += g(radius * Complex(std::cos(th), std::sin(th)));
  }
  return acc / nodes;
}

double characteristic_of_density(const std::function<double(Complex)>& rho,
                                 double r, double rel_tol) {
  if (r < 1.0)
    throw PreconditionError("characteristic_of_density: r must be >= 1");
  if (rel_tol <= 0.0)
    throw PreconditionError("characteristic_of_density: rel_tol must be > 0");
  if (r == 1.0) return 0.0;
  double logr = std::log(r);
  auto ring = [&](double t) {
    if (t == 0.0) return rho(Complex(0.0));
    return circle_mean(rho, t, kAngularNodes);
  };
  auto inner = [&](double t) { return ring(t) * logr * t; };
  auto outer = [&](double t) { return ring(t) * (logr - std::log(t)) * t; };
  return refine_segment(inner, 0.0, 1.0, rel_tol) +
         refine_segment(outer, 1.0, r, rel_tol);
}

double characteristic(const QuadraticSpace& space, const PolyCurve& curve,
                      CharMetric metric, double r, double eps,
                      double rel_tol) {
  if (curve.ambient_dim() != space.dim())
    throw PreconditionError("characteristic: curve/space dimension mismatch");
  PolyCurve fd = curve.derivative();
  std::function<double(Complex)> rho;
  switch (metric) {
    case CharMetric::kFubiniStudy:
      rho = [curve, fd](Complex z) {
        CVec f = curve.eval(z);
        if (f.squaredNorm() == 0.0)
          throw NumericError("characteristic: curve vanishes at a sample");
        return 2.0 * fs_value(f, fd.eval(z));
      };
      break;
    case CharMetric::kOmegaMetric:
      rho = [&space, curve, fd](Complex z) {
        CVec f = curve.eval(z);
        double s = space.pairing(f, f).real();
        if (s <= 0.0)
          throw NumericError("characteristic: curve leaves the positive cone");
        return 2.0 * gs_metric(space, f, fd.eval(z), fd.eval(z)).real();
      };
      break;
    case CharMetric::kEpsilon: {
      if (eps <= 0.0)
        throw PreconditionError("characteristic: kEpsilon requires eps > 0");
      EpsilonMetric em(space, eps);
      rho = [em, curve, fd](Complex z) {
        CVec f = curve.eval(z);
        CVec d = fd.eval(z);
        return 2.0 * em.line_metric(f, d, d).real();
      };
      break;
    }
  }
  return characteristic_of_density(rho, r, rel_tol);
}

double characteristic_via_jensen(
    const PolyCurve& curve, const std::function<double(const CVec&)>& potential,
    double r, int nodes) {
  if (r < 1.0)
    throw PreconditionError("characteristic_via_jensen: r must be >= 1");
  auto u = [&](Complex z) { return potential(curve.eval(z)); };
  return circle_mean(u, r, nodes) - circle_mean(u, 1.0, nodes);
}

double calibrate_kappa_jensen(double r) {
  if (r <= 1.0)
    throw PreconditionError("calibrate_kappa_jensen: r must be > 1");
  PolyCurve id({Poly({Complex(0.0), Complex(1.0)})});
  double logr = std::log(r);

  // point mass at the origin: T = log r exactly
  auto u1 = [](const CVec& x) { return std::log(std::norm(x[0])); };
  double k1 = logr / characteristic_via_jensen(id, u1, r);

  // point mass at an interior point, off-center circle means
  Complex a(0.3, 0.4);
  auto u2 = [a](const CVec& x) { return std::log(std::norm(x[0] - a)); };
  double k2 = logr / characteristic_via_jensen(id, u2, r);

  // smooth density, both sides numerical
  auto rho3 = [](Complex z) {
    double t = 1.0 + std::norm(z);
    return 2.0 / (t * t);
  };
  auto u3 = [](const CVec& x) { return std::log(1.0 + std::norm(x[0])); };
  double k3 = characteristic_of_density(rho3, r, 1e-8) /
              characteristic_via_jensen(id, u3, r);

  double mean = (k1 + k2 + k3) / 3.0;
  double lo = std::min({k1, k2, k3}), hi = std::max({k1, k2, k3});
  if (hi - lo > 1e-6 * std::abs(mean))
    throw NumericError("calibrate_kappa_jensen: reference routes disagree");
  return mean;
}

double phi_potential(const QuadraticSpace& space, const CVec& x) {
  double s = space.pairing(x, x).real();
  if (s <= 0.0)
    throw NumericError("phi_potential: point outside the positive cone");
  return x.squaredNorm() / s;
}

double proximity(const QuadraticSpace& space, const PolyCurve& curve, double r,
                 int angular_samples) {
  if (curve.ambient_dim() != space.dim())
    throw PreconditionError("proximity: curve/space dimension mismatch");
  auto g = [&](Complex z) {
    return std::log(phi_potential(space, curve.eval(z)));
  };
  return 2.0 * M_PI * circle_mean(g, r, angular_samples);
}

CharacteristicTable verify_prop67(const QuadraticSpace& space,
                                  const PolyCurve& curve,
                                  const std::vector<double>& radii,
                                  double kappa) {
  if (radii.empty())
    throw PreconditionError("verify_prop67: empty radius list");
  if (kappa <= 0.0)
    throw PreconditionError("verify_prop67: kappa must be positive");
  CharacteristicTable table;
  table.kappa = kappa;
  for (double r : radii) {
    if (r < 1.0) throw PreconditionError("verify_prop67: radii must be >= 1");
    CharacteristicRow row;
    row.r = r;
    row.t_fs = characteristic(space, curve, CharMetric::kFubiniStudy, r);
    row.t_omega = characteristic(space, curve, CharMetric::kOmegaMetric, r);
    row.p_f = proximity(space, curve, r);
    row.residual = row.t_fs + row.t_omega - kappa * row.p_f / (2.0 * M_PI);
    table.rows.push_back(row);
  }
  return table;
}

double second_fundamental_density(const QuadraticSpace& space,
                                  const PolyCurve& curve, Complex z) {
  if (curve.ambient_dim() != space.dim())
    throw PreconditionError(
        "second_fundamental_density: curve/space dimension mismatch");
  PolyCurve fd = curve.derivative();
  PolyCurve fdd = fd.derivative();
  return normal_density_impl(space, curve, fd, fd, fdd, z);
}

double second_fundamental_density_at_root(const QuadraticSpace& space,
                                          const PolyCurve& curve, Complex root,
                                          int multiplicity) {
  if (curve.ambient_dim() != space.dim())
    throw PreconditionError(
        "second_fundamental_density_at_root: curve/space dimension mismatch");
  if (multiplicity < 1)
    throw PreconditionError(
        "second_fundamental_density_at_root: multiplicity must be >= 1");
  PolyCurve fd = curve.derivative();
  std::vector<Poly> deflated;
  deflated.reserve(fd.components().size());
  for (const Poly& c : fd.components())
    deflated.push_back(c.deflate(root, multiplicity));
  PolyCurve a(std::move(deflated));
  PolyCurve ad = a.derivative();
  return normal_density_impl(space, curve, fd, a, ad, root);
}

IdentityCheck theorem615_identity_at(const QuadraticSpace& space,
                                     const PolyCurve& curve, Complex z,
                                     double gamma) {
  if (curve.ambient_dim() != space.dim())
    throw PreconditionError("theorem615: curve/space dimension mismatch");
  PolyCurve fd = curve.derivative();
  auto speed = [&](Complex dz) {
    CVec f = curve.eval(z + dz);
    double s = space.pairing(f, f).real();
    if (s <= 0.0)
      throw NumericError("theorem615: stencil leaves the positive cone");
    CVec d = fd.eval(z + dz);
    double v = gs_metric(space, f, d, d).real();
    if (v <= 0.0)
      throw NumericError("theorem615: derivative norm not positive on the stencil");
    return v;
  };
  double s0 = speed(Complex(0.0));
  double h_step = kFdStepScale * std::max(1.0, std::abs(z));
  double lhs = fd_mixed([&](Complex dz) { return std::log(speed(dz)); }, h_step);

  IdentityCheck out;
  out.lhs = lhs;
  out.curvature = gamma * s0;
  out.normal = second_fundamental_density(space, curve, z);
  double rhs = out.curvature + out.normal;
  out.residual =
      std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-8});
  return out;
}

double theorem615_identity_check(const QuadraticSpace& space,
                                 const PolyCurve& curve,
                                 const std::vector<Complex>& z_samples,
                                 double gamma) {
  if (z_samples.empty())
    throw PreconditionError("theorem615: empty sample list");
  double worst = 0.0;
  for (Complex z : z_samples)
    worst = std::max(worst,
                     theorem615_identity_at(space, curve, z, gamma).residual);
  return worst;
}

std::vector<SmtRow> smt_report(const QuadraticSpace& space,
                               const PolyCurve& curve,
                               const std::vector<double>& radii, double gamma) {
  if (radii.empty()) throw PreconditionError("smt_report: empty radius list");
  auto rho_sigma = [&space, curve](Complex z) {
    return 2.0 * second_fundamental_density(space, curve, z);
  };
  std::vector<SmtRow> rows;
  for (double r : radii) {
    if (r <= 1.0) throw PreconditionError("smt_report: radii must be > 1");
    double t_om = characteristic(space, curve, CharMetric::kOmegaMetric, r);
    if (t_om <= 0.0)
      throw NumericError("smt_report: non-positive characteristic");
    SmtRow row;
    row.r = r;
    row.gamma_t_omega = gamma * t_om;
    row.t_sigma = characteristic_of_density(rho_sigma, r, 1e-6);
    row.error_term = std::log(r) + std::log(t_om);
    rows.push_back(row);
  }
  return rows;
}

EpsilonMetric::EpsilonMetric(const QuadraticSpace& space, double eps)
    : space_(&space), eps_(eps) {
  if (eps < 0.0) throw PreconditionError("EpsilonMetric: eps must be >= 0");
  RMat expected = -RMat::Identity(space.dim(), space.dim());
  expected(0, 0) = expected(1, 1) = expected(2, 2) = 1.0;
  if ((space.gram() - expected).cwiseAbs().maxCoeff() > 0.0)
    throw PreconditionError("EpsilonMetric: standard-form Gram required");
  gram_eps_ = space.gram_c();
  for (int j = 0; j < 3; ++j) gram_eps_(j, j) = Complex(1.0 + eps);
}

Complex EpsilonMetric::pairing(const CVec& v, const CVec& w) const {
  return (v.transpose() * gram_eps_ * w.conjugate())(0, 0);
}

Complex EpsilonMetric::line_metric(const CVec& sigma, const CVec& v,
                                   const CVec& w) const {
  double s = pairing(sigma, sigma).real();
  if (s <= 0.0)
    throw NumericError("EpsilonMetric: point outside the eps-positive cone");
  return -(pairing(v, w) * s - pairing(v, sigma) * pairing(sigma, w)) / (s * s);
}

bool epsilon_cone_test(const EpsilonMetric& em, const CVec& sigma,
                       const CVec& v) {
  return em.line_metric(sigma, v, v).real() > 0.0;
}

double phi_eps(const EpsilonMetric& em, const CVec& x) {
  double s = em.pairing(x, x).real();
  if (s <= 0.0)
    throw NumericError("phi_eps: point outside the eps-positive cone");
  return x.squaredNorm() / s;
}

double phi_eps_bound(const EpsilonMetric& em, int samples, Rng& rng) {
  if (samples < 1) throw PreconditionError("phi_eps_bound: samples must be >= 1");
  double best = 0.0;
  for (int j = 0; j < samples; ++j) {
    PeriodPoint pt = sample_omega_point(em.space(), rng);
    best = std::max(best, phi_eps(em, pt.rep()));
  }
  return best;
}

}  // namespace kpd
