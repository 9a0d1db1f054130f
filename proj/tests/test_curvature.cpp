#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "kpd/curvature.hpp"
#include "kpd/period_domain.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"

using namespace kpd;

namespace {

CVec positive_tangent(const PeriodPoint& pt, Rng& rng) {
  const QuadraticSpace& space = pt.space();
  while (true) {
    CVec raw = random_cvec(rng, space.dim());
    double m = gs_metric(space, pt.rep(), raw, raw).real();
    if (m > 1e-2 * raw.squaredNorm() / pt.s()) return raw;
  }
}

}  // namespace

TEST_CASE("fubini-study oracle for the curvature engine") {
  // round metric on the projective line: constant sectional curvature +2
  auto fs = [](const CVec& z) {
    CMat h(1, 1);
    double d = 1.0 + std::norm(z[0]);
    h(0, 0) = 1.0 / (d * d);
    return h;
  };
  CVec u = CVec::Ones(1);
  for (Complex z0 : {Complex(0.0), Complex(0.3, -0.2), Complex(-0.9, 0.4)}) {
    CVec z(1);
    z[0] = z0;
    CHECK(std::abs(hsc_of_metric(fs, z, u) - 2.0) < 1e-6);
  }
}

TEST_CASE("curvature factor calibration") {
  Rng rng = make_rng(13, 1);
  Calibration cal = curvature_factor_calibrate(QuadraticSpace::standard(1),
                                               20, rng);
  CHECK(cal.spread < 1e-4);
  CHECK(std::abs(cal.value - 2.0) < 1e-4);

  Rng rng2 = make_rng(13, 2);
  Calibration cal2 = curvature_factor_calibrate(QuadraticSpace::standard(2),
                                                10, rng2);
  CHECK(cal2.spread < 1e-4);
  CHECK(std::abs(cal2.value - cal.value) < 1e-4);
}

TEST_CASE("sectional curvature is constant on positive directions") {
  Rng rng = make_rng(13, 3);
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint pt = sample_omega_point(space, rng);

  CVec v = positive_tangent(pt, rng);
  double first = hsc(pt, v);
  CHECK(first < 0.0);

  CVec w = positive_tangent(pt, rng);
  CHECK(std::abs(hsc(pt, w) - first) < 1e-4 * std::abs(first));

  // depends only on the tangent line
  Complex phase = std::polar(1.0, 1.1);
  CHECK(std::abs(hsc(pt, CVec(phase * v)) - first) < 1e-4 * std::abs(first));
  CHECK(std::abs(hsc(pt, CVec(3.0 * v)) - first) < 1e-4 * std::abs(first));

  PeriodPoint pt2 = sample_omega_point(space, rng);
  CVec v2 = positive_tangent(pt2, rng);
  CHECK(std::abs(hsc(pt2, v2) - first) < 1e-4 * std::abs(first));
}

TEST_CASE("isotropic directions are rejected") {
  QuadraticSpace space = QuadraticSpace::standard(1);
  RVec e1 = RVec::Zero(4), e2 = RVec::Zero(4);
  e1[0] = 1.0;
  e2[1] = 1.0;
  PeriodPoint o = from_positive_2plane(space, e1, e2);
  // at the base point the chart directions e3 +- e4 are null for the metric
  CVec null_dir = CVec::Zero(4);
  null_dir[2] = 1.0;
  null_dir[3] = 1.0;
  CHECK(std::abs(gs_metric(space, o.rep(), null_dir, null_dir)) < 1e-12);
  CHECK_THROWS_AS(hsc(o, null_dir), PreconditionError);
}

TEST_CASE("the same constant on negative directions") {
  Rng rng = make_rng(13, 4);
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint pt = sample_omega_point(space, rng);
  CVec pos = positive_tangent(pt, rng);
  double gamma = -hsc(pt, pos);
  for (int trial = 0; trial < 5; ++trial) {
    CVec raw = random_cvec(rng, space.dim());
    double m = gs_metric(space, pt.rep(), raw, raw).real();
    if (m > -1e-2 * raw.squaredNorm() / pt.s()) continue;
    CHECK(std::abs(-hsc(pt, raw) - gamma) < 1e-4 * gamma);
  }
}

TEST_CASE("gamma constant per dimension") {
  for (int p : {1, 2}) {
    Rng rng = make_rng(13, 10 + p);
    Calibration g = gamma_constant(QuadraticSpace::standard(p), 3, 8, rng);
    CHECK(g.spread < 1e-4);
    CHECK(g.value > 0.0);
    CHECK(std::abs(g.value - 2.0) < 1e-4);
  }
}

TEST_CASE("restricted-route curvature is line homogeneous") {
  Rng rng = make_rng(13, 5);
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint pt = sample_domain_point(space, rng);
  CVec v = positive_tangent(pt, rng);
  CVec sigma = pt.rep();
  CVec tangent = v - (space.bilinear(v, sigma) / pt.s()) * sigma.conjugate();
  double k1 = hsc_domain_restricted(pt, tangent);
  CHECK(std::isfinite(k1));
  double k2 = hsc_domain_restricted(pt, CVec(2.0 * tangent));
  CHECK(std::abs(k2 - k1) < 1e-4 * std::max(1.0, std::abs(k1)));
}
