#include "kpd/curvature.hpp"

#include <cmath>

#include "kpd/fd.hpp"

namespace kpd {

namespace {

// Ambient matrix of the canonical metric at sigma: h(e_a, e_b) entry-wise,
// value convention v^T M conj(w).
CMat ambient_metric_matrix(const QuadraticSpace& space, const CVec& sigma) {
  double s = space.norm2(sigma);
  CVec u = space.gram_c() * sigma.conjugate();
  CVec w = space.gram_c() * sigma;
  CMat m = -(space.gram_c() * s - u * w.transpose()) / (s * s);
  return m;
}

// sigma(z) = e_pivot + sum_{j != pivot} z_j e_j.
CVec chart_point_pivot(const QuadraticSpace& space, const CVec& z, int pivot) {
  const int n = space.dim();
  CVec sigma(n);
  sigma[pivot] = 1.0;
  int col = 0;
  for (int j = 0; j < n; ++j) {
    if (j == pivot) continue;
    sigma[j] = z[col++];
  }
  return sigma;
}

// Chart metric around an arbitrary pivot coordinate, x^T M conj(y) convention.
CMat chart_metric_pivot(const QuadraticSpace& space, const CVec& z, int pivot) {
  const int n = space.dim();
  CVec sigma = chart_point_pivot(space, z, pivot);
  CMat full = ambient_metric_matrix(space, sigma);
  CMat m(n - 1, n - 1);
  int row = 0;
  for (int j = 0; j < n; ++j) {
    if (j == pivot) continue;
    int col = 0;
    for (int k = 0; k < n; ++k) {
      if (k == pivot) continue;
      m(row, col++) = full(j, k);
    }
    ++row;
  }
  return m;
}

}  // namespace

Calibration curvature_factor_calibrate(const QuadraticSpace& space, int samples,
                                       Rng& rng) {
  const int m = space.dim() - 1;
  std::vector<double> ratios;
  for (int it = 0; it < samples; ++it) {
    CVec z0;
    CVec sigma;
    do {
      z0 = 0.25 / std::sqrt(2.0 * m) * random_cvec(rng, m);
      sigma = from_chart(space, z0);
    } while (space.norm2(sigma) < 0.2);
    CMat a = random_cvec(rng, m * m).reshaped(m, m);
    a += CMat::Identity(m, m);
    auto f = [&](const CVec& w) {
      return std::log(space.norm2(from_chart(space, CVec(z0 + a * w))));
    };
    CMat hess = fd_hermitian_hessian(f, m, kFdStepScale);
    CMat pull = a.transpose() * metric_matrix_chart(space, z0, DomainKind::kOmega) *
                a.conjugate();
    double top = pull.cwiseAbs().maxCoeff();
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        if (std::abs(pull(j, k)) < 0.05 * top) continue;
        Complex r = -2.0 * hess(j, k) / pull(j, k);
        ratios.push_back(r.real());
        if (std::abs(r.imag()) > 1e-4 * std::abs(r.real()))
          throw NumericError("curvature_factor_calibrate: ratio is not real");
      }
  }
  if (ratios.empty())
    throw NumericError("curvature_factor_calibrate: no usable entries");
  double lo = ratios[0], hi = ratios[0], sum = 0.0;
  for (double r : ratios) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
  }
  double mean = sum / static_cast<double>(ratios.size());
  double spread = (hi - lo) / std::abs(mean);
  if (spread >= 1e-4)
    throw NumericError("curvature_factor_calibrate: ratio is not constant");
  return Calibration{mean, spread};
}

double hsc_of_metric(const std::function<CMat(const CVec&)>& hfun,
                     const CVec& z0, const CVec& u0, double step) {
  if (u0.norm() == 0.0) throw PreconditionError("hsc_of_metric: zero direction");
  CVec u = u0 / u0.norm();
  double h = step * std::max(1.0, z0.cwiseAbs().maxCoeff());
  auto theta = [&](Complex t) -> CMat {
    CMat ht = hfun(CVec(z0 + t * u));
    CMat dh = fd_dz<CMat>(
        [&](Complex s) { return hfun(CVec(z0 + (t + s) * u)); }, h);
    return CMat(ht.inverse() * dh);
  };
  CMat curv = -fd_dzbar<CMat>(theta, h);
  CMat h0 = hfun(z0);
  Complex num = (u.adjoint() * h0 * (curv * u)).value();
  double den = (u.adjoint() * h0 * u).value().real();
  return num.real() / (den * den);
}

namespace {

int largest_coordinate(const CVec& v) {
  int k = 0;
  double best = -1.0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) { best = std::abs(v[i]); k = i; }
  return k;
}

// Chart coordinates of sigma around pivot, and the chart image of an ambient
// tangent vector there.
std::pair<CVec, CVec> chart_coords_and_direction(const CVec& rep, const CVec& v,
                                                 int pivot) {
  const int n = static_cast<int>(rep.size());
  CVec z(n - 1), u(n - 1);
  int col = 0;
  for (int j = 0; j < n; ++j) {
    if (j == pivot) continue;
    z[col] = rep[j] / rep[pivot];
    u[col] = (v[j] - z[col] * v[pivot]) / rep[pivot];
    ++col;
  }
  return {z, u};
}

void check_nonisotropic_direction(const PeriodPoint& point, const CVec& v,
                                  double tol) {
  if (v.size() != point.space().dim())
    throw PreconditionError("hsc: dimension mismatch");
  double hv = gs_metric(point.space(), point.rep(), v, v).real();
  double scale = gram_scale(point.space()) / point.s() * v.squaredNorm();
  if (std::abs(hv) <= tol * std::max(scale, 1e-300))
    throw PreconditionError("hsc: direction is h-isotropic");
}

}  // namespace

double hsc(const PeriodPoint& point, const CVec& v, double tol) {
  check_nonisotropic_direction(point, v, tol);
  const QuadraticSpace& space = point.space();
  int pivot = largest_coordinate(point.rep());
  auto [z0, u] = chart_coords_and_direction(point.rep(), v, pivot);
  if (u.norm() == 0.0)
    throw PreconditionError("hsc: direction is along the line itself");
  auto hfun = [&space, pivot](const CVec& z) {
    return CMat(chart_metric_pivot(space, z, pivot).transpose());
  };
  return hsc_of_metric(hfun, z0, u);
}

double hsc_domain_restricted(const PeriodPoint& point, const CVec& v, double tol) {
  if (!point.isotropic())
    throw PreconditionError("hsc_domain_restricted: point is not in D");
  check_nonisotropic_direction(point, v, tol);
  const QuadraticSpace& space = point.space();
  const int n = space.dim();
  int pivot = largest_coordinate(point.rep());
  auto [z0, u_full] = chart_coords_and_direction(point.rep(), v, pivot);

  // solve the quadric for the chart coordinate with the largest gradient
  CVec grad = space.gram_c() * point.rep();
  int m_amb = -1;
  double best = -1.0;
  int col = 0;
  std::vector<int> amb(n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == pivot) continue;
    amb[col] = j;
    if (std::abs(grad[j]) > best) { best = std::abs(grad[j]); m_amb = col; }
    ++col;
  }
  if (best <= 1e-10 * grad.norm())
    throw NumericError("hsc_domain_restricted: quadric gradient vanishes");
  const int mi = m_amb;
  Complex zm0 = z0[mi];

  auto solve_chart = [&, mi](const CVec& w) -> CVec {
    CVec z(n - 1);
    int c = 0;
    for (int j = 0; j < n - 1; ++j) z[j] = (j == mi) ? Complex(0) : w[c++];
    CVec base = chart_point_pivot(space, z, pivot);
    CVec em = CVec::Zero(n);
    em[amb[mi]] = 1.0;
    Complex qa = space.bilinear(em, em);
    Complex qb = 2.0 * space.bilinear(em, base);
    Complex qc = space.bilinear(base, base);
    Complex zm;
    if (std::abs(qa) < 1e-14) {
      zm = -qc / qb;
    } else {
      Complex disc = std::sqrt(qb * qb - 4.0 * qa * qc);
      Complex r1 = (-qb + disc) / (2.0 * qa);
      Complex r2 = (-qb - disc) / (2.0 * qa);
      zm = (std::abs(r1 - zm0) <= std::abs(r2 - zm0)) ? r1 : r2;
    }
    z[mi] = zm;
    return z;
  };

  auto hfun = [&, mi](const CVec& w) -> CMat {
    CVec z = solve_chart(w);
    CVec sigma = chart_point_pivot(space, z, pivot);
    CVec coeff = space.gram_c() * sigma;
    CMat jac = CMat::Zero(n, n - 2);
    int c = 0;
    for (int j = 0; j < n - 1; ++j) {
      if (j == mi) continue;
      jac(amb[j], c) = 1.0;
      jac(amb[mi], c) = -coeff[amb[j]] / coeff[amb[mi]];
      ++c;
    }
    CMat full = ambient_metric_matrix(space, sigma);
    CMat m = jac.transpose() * full * jac.conjugate();
    return CMat(m.transpose());
  };

  CVec w0(n - 2), uw(n - 2);
  int c = 0;
  for (int j = 0; j < n - 1; ++j) {
    if (j == mi) continue;
    w0[c] = z0[j];
    uw[c] = u_full[j];
    ++c;
  }
  if (uw.norm() == 0.0)
    throw PreconditionError("hsc_domain_restricted: direction collapses in the chart");
  return hsc_of_metric(hfun, w0, uw);
}

Calibration gamma_constant(const QuadraticSpace& space, int points,
                           int directions, Rng& rng) {
  std::vector<double> vals;
  for (int i = 0; i < points; ++i) {
    PeriodPoint pt = sample_omega_point(space, rng);
    double scale = gram_scale(space) / pt.s();
    for (int j = 0; j < directions; ++j) {
      CVec v;
      double hv;
      do {
        v = random_cvec(rng, space.dim());
        v /= v.norm();
        hv = gs_metric(space, pt.rep(), v, v).real();
      } while (hv <= 0.01 * scale);
      vals.push_back(-hsc(pt, v));
    }
  }
  double lo = vals[0], hi = vals[0], sum = 0.0;
  for (double g : vals) {
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    sum += g;
  }
  double mean = sum / static_cast<double>(vals.size());
  double spread = (hi - lo) / std::abs(mean);
  if (spread >= 1e-4)
    throw NumericError("gamma_constant: sectional curvature is not constant");
  return Calibration{mean, spread};
}

}  // namespace kpd
