#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "kpd/period_domain.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"
#include "kpd/walls.hpp"

using namespace kpd;

namespace {

RVec unit(int n, int k) {
  RVec v = RVec::Zero(n);
  v[k] = 1.0;
  return v;
}

CVec cunit(int n, int k) {
  CVec v = CVec::Zero(n);
  v[k] = 1.0;
  return v;
}

PeriodPoint base_point(const QuadraticSpace& space) {
  return from_positive_2plane(space, unit(space.dim(), 0),
                              unit(space.dim(), 1));
}

// Random tangent vector at a point, canonical (no line component).
CVec random_tangent(const PeriodPoint& pt, Rng& rng) {
  const QuadraticSpace& space = pt.space();
  const CVec& sigma = pt.rep();
  CVec raw = random_cvec(rng, space.dim());
  CVec v = raw - (space.bilinear(raw, sigma) / pt.s()) * sigma.conjugate();
  if (pt.isotropic())
    v -= (space.pairing(v, sigma) / pt.s()) * sigma;
  return v;
}

}  // namespace

TEST_CASE("membership classification") {
  QuadraticSpace space = QuadraticSpace::standard(1);
  const Complex i(0, 1);
  CVec e1 = cunit(4, 0), e2 = cunit(4, 1), e4 = cunit(4, 3);

  CHECK(membership(space, e1 + i * e2) == Membership::IN_D);
  CHECK(membership(space, e1) == Membership::IN_OMEGA_ONLY);
  CHECK(membership(space, e1 + e4) == Membership::IN_BOUNDARY_QUADRIC);
  CHECK(membership(space, e4) == Membership::OUTSIDE);
  CHECK_THROWS_AS(membership(space, CVec(CVec::Zero(4))), PreconditionError);
}

TEST_CASE("points from positive 2-planes") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint o = base_point(space);
  CHECK(o.isotropic());
  CHECK(membership(space, o.rep()) == Membership::IN_D);

  // orientation reversal gives a different point
  PeriodPoint rev = from_positive_2plane(space, unit(5, 1), unit(5, 0));
  CHECK(projective_gap(o.rep(), rev.rep()) > 0.5);

  auto [u, v] = to_positive_2plane(o);
  CHECK(std::abs(space.bilinear(u, u) - 1.0) < 1e-12);
  CHECK(std::abs(space.bilinear(v, v) - 1.0) < 1e-12);
  CHECK(std::abs(space.bilinear(u, v)) < 1e-12);
  PeriodPoint back = from_positive_2plane(space, u, v);
  CHECK(projective_gap(o.rep(), back.rep()) < 1e-12);

  CHECK_THROWS_AS(from_positive_2plane(space, unit(5, 0), unit(5, 3)),
                  PreconditionError);

  Rng rng = make_rng(11, 1);
  for (int trial = 0; trial < 20; ++trial) {
    RMat w = sample_positive_3plane(space, rng);
    std::vector<RVec> pair = q_orthonormalize(space, {w.col(0), w.col(1)});
    PeriodPoint pt = from_positive_2plane(space, pair[0], pair[1]);
    CHECK(membership(space, pt.rep()) == Membership::IN_D);
  }
}

TEST_CASE("hodge projection") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint o = base_point(space);

  HodgeSplit s1 = hodge_project(o, o.rep());
  CHECK(std::abs(s1.c20 - 1.0) < 1e-12);
  CHECK(s1.h11.norm() < 1e-12);
  CHECK(std::abs(s1.c02) < 1e-12);

  HodgeSplit s2 = hodge_project(o, cunit(5, 2));
  CHECK(std::abs(s2.c20) < 1e-12);
  CHECK(std::abs(s2.c02) < 1e-12);
  CHECK((s2.h11 - cunit(5, 2)).norm() < 1e-12);

  // e1 = (sigma + conj sigma) / 2 after scaling to the canonical rep
  HodgeSplit s3 = hodge_project(o, cunit(5, 0));
  CVec rebuilt = s3.c20 * o.rep() + s3.h11 +
                 s3.c02 * o.rep().conjugate();
  CHECK((rebuilt - cunit(5, 0)).norm() < 1e-12);
  CHECK(s3.h11.norm() < 1e-12);
  CHECK(std::abs(s3.c20 - std::conj(s3.c02)) < 1e-12);
}

TEST_CASE("metric closed form at the base point") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  CVec sigma = cunit(5, 0) + Complex(0, 1) * cunit(5, 1);
  CVec e3 = cunit(5, 2), e4 = cunit(5, 3);

  CHECK(std::abs(gs_metric(space, sigma, e3, e3) + 0.5) < 1e-12);
  CHECK(std::abs(gs_metric(space, sigma, e4, e4) - 0.5) < 1e-12);
  CHECK(std::abs(gs_metric(space, sigma, e3, e4)) < 1e-12);
}

TEST_CASE("metric is hermitian and representative independent") {
  QuadraticSpace space = QuadraticSpace::standard(3);
  Rng rng = make_rng(11, 2);
  for (int trial = 0; trial < 50; ++trial) {
    PeriodPoint pt = sample_domain_point(space, rng);
    CVec v = random_tangent(pt, rng);
    CVec w = random_tangent(pt, rng);

    Complex hvw = gs_metric(space, pt.rep(), v, w);
    Complex hwv = gs_metric(space, pt.rep(), w, v);
    CHECK(std::abs(hvw - std::conj(hwv)) < 1e-10);
    CHECK(std::abs(gs_metric(space, pt.rep(), v, v).imag()) < 1e-12);

    Complex c = unit_complex(rng) * uniform(rng, 0.0, 3.0);
    CVec shifted = v + c * pt.rep();
    CHECK(std::abs(gs_metric(space, pt.rep(), shifted, w) - hvw) < 1e-10);

    TangentRep tv = tangent_at(pt, v);
    TangentRep tw = tangent_at(pt, w);
    CHECK(std::abs(gs_metric(tv, tw) - hvw) < 1e-12);
    TangentRep cv = canonical_tangent(tv);
    CHECK(std::abs(space.pairing(cv.vec, pt.rep())) < 1e-9 * cv.vec.norm());
    CHECK(std::abs(gs_metric(cv, tw) - hvw) < 1e-10);
  }
}

TEST_CASE("tangency is enforced at isotropic points") {
  QuadraticSpace space = QuadraticSpace::standard(1);
  PeriodPoint o = base_point(space);
  CHECK_THROWS_AS(tangent_at(o, cunit(4, 0)), PreconditionError);
}

TEST_CASE("chart matrices at the base point") {
  QuadraticSpace space = QuadraticSpace::standard(19);
  int n = space.dim();
  CVec chart = CVec::Zero(n - 1);
  chart[0] = Complex(0, 1);

  CMat omega = metric_matrix_chart(space, chart, DomainKind::kOmega);
  REQUIRE(omega.rows() == n - 1);
  RVec pattern(n - 1);
  pattern[0] = -0.5;
  pattern[1] = -1.0;
  for (int k = 2; k < n - 1; ++k) pattern[k] = 1.0;
  double ratio = omega(1, 1).real() / pattern[1];
  for (int k = 0; k < n - 1; ++k)
    for (int l = 0; l < n - 1; ++l) {
      Complex want = (k == l) ? Complex(ratio * pattern[k]) : Complex(0);
      CHECK(std::abs(omega(k, l) - want) < 1e-9);
    }

  CMat dmat = metric_matrix_chart(space, chart, DomainKind::kD);
  REQUIRE(dmat.rows() == n - 2);
  double dratio = dmat(0, 0).real() / -1.0;
  CHECK(std::abs(dratio - ratio) < 1e-9);
  for (int k = 0; k < n - 2; ++k)
    for (int l = 0; l < n - 2; ++l) {
      double pat = (k == l) ? (k == 0 ? -1.0 : 1.0) : 0.0;
      CHECK(std::abs(dmat(k, l) - dratio * pat) < 1e-9);
    }

  // hermitian symmetry away from the base point
  Rng rng = make_rng(11, 3);
  PeriodPoint pt = sample_omega_point(space, rng);
  CVec z = to_chart(pt);
  CMat m = metric_matrix_chart(space, z, DomainKind::kOmega);
  CHECK((m - m.adjoint()).norm() < 1e-10 * m.norm());
}

TEST_CASE("metric signatures across dimensions") {
  Rng rng = make_rng(11, 4);
  for (int p : {1, 2, 5, 19}) {
    QuadraticSpace space = QuadraticSpace::standard(p);
    for (int trial = 0; trial < 25; ++trial) {
      PeriodPoint dp = sample_domain_point(space, rng);
      Signature sd = metric_signature_at(dp);
      CHECK(sd == Signature{p, 1, 0});
      PeriodPoint op = sample_omega_point(space, rng);
      Signature so = metric_signature_at(op);
      CHECK(so == Signature{p, 2, 0});
    }
  }
}

TEST_CASE("metric is invariant under isometries") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  Rng rng = make_rng(11, 5);
  int n = space.dim();
  for (int trial = 0; trial < 100; ++trial) {
    PeriodPoint pt = sample_domain_point(space, rng);
    auto [u, v] = to_positive_2plane(pt);
    RMat pplane(n, 2), qplane(n, 2);
    pplane.col(0) = u;
    pplane.col(1) = v;
    PeriodPoint target = sample_domain_point(space, rng);
    auto [tu, tv] = to_positive_2plane(target);
    qplane.col(0) = tu;
    qplane.col(1) = tv;
    RMat g = isometry_fixing_N(space, {}, pplane, qplane);

    CVec gsigma = g.cast<Complex>() * pt.rep();
    CHECK(membership(space, gsigma) == Membership::IN_D);
    CVec w1 = random_tangent(pt, rng);
    CVec w2 = random_tangent(pt, rng);
    Complex before = gs_metric(space, pt.rep(), w1, w2);
    Complex after = gs_metric(space, gsigma, CVec(g.cast<Complex>() * w1),
                              CVec(g.cast<Complex>() * w2));
    CHECK(std::abs(after - before) <= 1e-9 * std::max(1.0, std::abs(before)));
  }
}

TEST_CASE("twistor parametrization") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  Rng rng = make_rng(11, 6);
  RMat w = sample_positive_3plane(space, rng);
  TwistorLine line = TwistorLine::from_frame(space, w);

  CVec at_infinity = twistor_value(line, Complex(1), Complex(0));
  CVec expect = w.col(0).cast<Complex>() +
                Complex(0, 1) * w.col(1).cast<Complex>();
  CHECK(projective_gap(at_infinity, expect) < 1e-12);

  PolyCurve conic = twistor_parametrize(line);
  PolyCurve dconic = conic.derivative();
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k < 50; ++k) {
    Complex z = std::polar(uniform(rng, 0.0, 2.0), uniform(rng, 0.0, 6.28));
    CVec sigma = conic.eval(z);
    CHECK(membership(space, sigma) == Membership::IN_D);
    double dens = gs_metric(space, sigma, dconic.eval(z), dconic.eval(z)).real();
    CHECK(dens < 0.0);
    double s2 = std::norm(z) + 1.0;
    double ratio = dens * s2 * s2;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK((hi - lo) / std::abs(0.5 * (hi + lo)) < 1e-6);

  // the line is parametrization independent: a rotated frame of the same
  // 3-plane traces the same set of points
  double th = 0.7;
  RMat rot(3, 3);
  rot << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
  TwistorLine rline = TwistorLine::from_frame(space, RMat(w * rot));
  PolyCurve rconic = twistor_parametrize(rline);
  for (int k = 0; k < 10; ++k) {
    Complex z(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
    PeriodPoint pt = PeriodPoint::from_vector(space, rconic.eval(z));
    CHECK(line.contains(pt));
  }

  PeriodPoint dp = sample_domain_point(space, rng);
  std::vector<RVec> perp =
      orthogonal_complement_real(space, {RVec(dp.rep().real().eval()),
                                         RVec(dp.rep().imag().eval())});
  auto a = positive_vector_in(space, perp);
  REQUIRE(a.has_value());
  TwistorLine through = twistor_line_through(dp, *a);
  CHECK(through.contains(dp));
}

TEST_CASE("tangent split at a positive class") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint o = base_point(space);
  TangentSplit split = tangent_split(o, unit(5, 2));
  REQUIRE(split.alpha_perp.size() == 2);

  for (const CVec& av : split.alpha_perp) {
    Complex cross = gs_metric(space, o.rep(), av, split.twistor_direction);
    CHECK(std::abs(cross) < 1e-10);
    CHECK(gs_metric(space, o.rep(), av, av).real() > 0.0);
  }
  double neg = gs_metric(space, o.rep(), split.twistor_direction,
                         split.twistor_direction).real();
  CHECK(neg < 0.0);

  QuadraticSpace big = QuadraticSpace::standard(5);
  Rng rng = make_rng(11, 7);
  PeriodPoint pt = sample_domain_point(big, rng);
  std::vector<RVec> perp =
      orthogonal_complement_real(big, {RVec(pt.rep().real().eval()),
                                       RVec(pt.rep().imag().eval())});
  auto a = positive_vector_in(big, perp);
  REQUIRE(a.has_value());
  TangentSplit s2 = tangent_split(pt, *a);
  CHECK(s2.alpha_perp.size() == static_cast<size_t>(big.p()));
  for (const CVec& av : s2.alpha_perp) {
    CHECK(std::abs(gs_metric(big, pt.rep(), av, s2.twistor_direction)) <
          1e-10);
    CHECK(gs_metric(big, pt.rep(), av, av).real() > 0.0);
  }
  CHECK(gs_metric(big, pt.rep(), s2.twistor_direction,
                  s2.twistor_direction).real() < 0.0);
}

TEST_CASE("two-dimensional subdomain embedding") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  PeriodPoint o = base_point(space);
  SubdomainEmbedding emb = subdomain_embed(o);
  REQUIRE(emb.basis.cols() == 4);

  RMat restricted = emb.basis.transpose() * space.gram() * emb.basis;
  CHECK(signature_of(restricted) == Signature{3, 1, 0});

  CVec model = emb.to_model(o.rep());
  QuadraticSpace sub{restricted};
  CHECK(membership(sub, model) == Membership::IN_D);
  CHECK(projective_gap(emb.to_ambient(model), o.rep()) < 1e-10);

  Rng rng = make_rng(11, 8);
  QuadraticSpace big = QuadraticSpace::standard(5);
  PeriodPoint pt = sample_domain_point(big, rng);
  SubdomainEmbedding emb2 = subdomain_embed(pt);
  RMat g2 = emb2.basis.transpose() * big.gram() * emb2.basis;
  CHECK(signature_of(g2) == Signature{3, 1, 0});
  CHECK(projective_gap(emb2.to_ambient(emb2.to_model(pt.rep())), pt.rep()) <
        1e-10);
}

TEST_CASE("chart round trips") {
  QuadraticSpace space = QuadraticSpace::standard(3);
  Rng rng = make_rng(11, 9);
  for (int trial = 0; trial < 20; ++trial) {
    PeriodPoint pt = sample_omega_point(space, rng);
    CVec z = to_chart(pt);
    CHECK(projective_gap(from_chart(space, z), pt.rep()) < 1e-10);
    PeriodPoint dp = sample_domain_point(space, rng);
    CVec zd = to_chart(dp);
    CHECK(projective_gap(from_chart(space, zd), dp.rep()) < 1e-10);
  }
}

TEST_CASE("point json round trip") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  Rng rng = make_rng(11, 10);
  PeriodPoint pt = sample_domain_point(space, rng);
  PeriodPoint back = PeriodPoint::from_json(space, pt.to_json());
  CHECK((back.rep() - pt.rep()).norm() < 1e-15);
  CHECK(back.isotropic() == pt.isotropic());
}
