#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "kpd/period_domain.hpp"
#include "kpd/walls.hpp"

using namespace kpd;

namespace {

RVec unit(int n, int k) { return RVec::Unit(n, k); }

RVec combo(const std::vector<RVec>& basis, Rng& rng) {
  RVec v = RVec::Zero(basis[0].size());
  for (const RVec& b : basis) v += uniform(rng, -1.0, 1.0) * b;
  return v;
}

RVec random_positive_unit(const QuadraticSpace& space,
                          const std::vector<RVec>& basis, Rng& rng,
                          const RVec* against) {
  for (int attempt = 0; attempt < 4000; ++attempt) {
    RVec v = combo(basis, rng);
    if (against != nullptr) v -= space.bilinear(v, *against) * (*against);
    double q = space.bilinear(v, v);
    if (q > 0.04 * v.squaredNorm()) return v / std::sqrt(q);
  }
  throw NumericError("random_positive_unit: no well-conditioned vector found");
}

std::pair<RVec, RVec> random_positive_pair_in(const QuadraticSpace& space,
                                              const std::vector<RVec>& basis,
                                              Rng& rng) {
  RVec u = random_positive_unit(space, basis, rng, nullptr);
  RVec v = random_positive_unit(space, basis, rng, &u);
  return {u, v};
}

RMat plane_of(const RVec& u, const RVec& v) {
  RMat plane(u.size(), 2);
  plane.col(0) = u;
  plane.col(1) = v;
  return plane;
}

std::vector<RVec> full_basis(int n) {
  std::vector<RVec> basis;
  for (int k = 0; k < n; ++k) basis.push_back(unit(n, k));
  return basis;
}

void check_isometry(const QuadraticSpace& space, const RMat& g,
                    const std::vector<RVec>& n_basis, const RMat& plane_p,
                    const RMat& plane_q) {
  RMat gram = space.gram();
  CHECK((g.transpose() * gram * g - gram).cwiseAbs().maxCoeff() < 1e-9);
  for (const RVec& n : n_basis) CHECK((g * n - n).norm() < 1e-9 * n.norm());
  RMat moved = g * plane_p;
  Eigen::Matrix2d c = (plane_q.transpose() * plane_q)
                          .ldlt()
                          .solve(plane_q.transpose() * moved);
  CHECK((plane_q * c - moved).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(c.determinant() > 0.0);
}

}  // namespace

TEST_CASE("hyperbolic completion of an isotropic vector") {
  QuadraticSpace space = QuadraticSpace::standard(1);
  int n = space.dim();
  RVec n0 = unit(n, 0) + unit(n, 3);
  RVec v = hyperbolic_completion(space, n0);
  CHECK((v - 0.5 * (unit(n, 0) - unit(n, 3))).norm() < 1e-12);
  CHECK(std::abs(space.bilinear(v, v)) < 1e-12);
  CHECK(std::abs(space.bilinear(n0, v) - 1.0) < 1e-12);

  RMat pair_gram(2, 2);
  pair_gram << space.bilinear(n0, n0), space.bilinear(n0, v),
      space.bilinear(v, n0), space.bilinear(v, v);
  RMat expected(2, 2);
  expected << 0, 1, 1, 0;
  CHECK((pair_gram - expected).cwiseAbs().maxCoeff() < 1e-12);
  Signature sig = signature_of(pair_gram);
  CHECK(sig.positive == 1);
  CHECK(sig.negative == 1);

  QuadraticSpace wide = QuadraticSpace::standard(2);
  Rng rng = make_rng(29, 1);
  for (int k = 0; k < 20; ++k) {
    double th = uniform(rng, 0.0, 2.0 * M_PI);
    double ph = uniform(rng, 0.0, 2.0 * M_PI);
    RVec iso = std::cos(th) * unit(5, 0) + std::sin(th) * unit(5, 1) +
               std::cos(ph) * unit(5, 3) + std::sin(ph) * unit(5, 4);
    RVec w = hyperbolic_completion(wide, iso);
    CHECK(std::abs(wide.bilinear(w, w)) < 1e-10);
    CHECK(std::abs(wide.bilinear(iso, w) - 1.0) < 1e-10);
  }

  CHECK_THROWS_AS(hyperbolic_completion(space, unit(n, 0)), PreconditionError);
  CHECK_THROWS_AS(hyperbolic_completion(space, RVec::Zero(n)),
                  PreconditionError);
}

TEST_CASE("isometries fixing a subspace, non-degenerate branch") {
  Rng rng = make_rng(29, 2);
  for (int p : {2, 5}) {
    QuadraticSpace space = QuadraticSpace::standard(p);
    int n = space.dim();

    std::vector<RVec> fix = {unit(n, 2)};
    std::vector<RVec> comp = orthogonal_complement_real(space, fix);
    for (int k = 0; k < 10; ++k) {
      auto [u1, v1] = random_positive_pair_in(space, comp, rng);
      auto [u2, v2] = random_positive_pair_in(space, comp, rng);
      RMat g = isometry_fixing_N(space, fix, plane_of(u1, v1), plane_of(u2, v2));
      check_isometry(space, g, fix, plane_of(u1, v1), plane_of(u2, v2));
    }

    std::vector<RVec> fix2 = {unit(n, 2), unit(n, 3)};
    std::vector<RVec> comp2 = orthogonal_complement_real(space, fix2);
    auto [u1, v1] = random_positive_pair_in(space, comp2, rng);
    auto [u2, v2] = random_positive_pair_in(space, comp2, rng);
    RMat g = isometry_fixing_N(space, fix2, plane_of(u1, v1), plane_of(u2, v2));
    check_isometry(space, g, fix2, plane_of(u1, v1), plane_of(u2, v2));

    auto [a, b] = random_positive_pair_in(space, full_basis(n), rng);
    RMat h = isometry_fixing_N(space, {}, plane_of(a, b), plane_of(a, b));
    check_isometry(space, h, {}, plane_of(a, b), plane_of(a, b));
  }
}

TEST_CASE("isometries fixing a subspace, degenerate branch") {
  Rng rng = make_rng(29, 3);
  QuadraticSpace space = QuadraticSpace::standard(2);
  int n = space.dim();

  std::vector<RVec> fix = {unit(n, 0) + unit(n, 3)};
  std::vector<RVec> comp = orthogonal_complement_real(space, fix);
  for (int k = 0; k < 10; ++k) {
    auto [u1, v1] = random_positive_pair_in(space, comp, rng);
    auto [u2, v2] = random_positive_pair_in(space, comp, rng);
    RMat g = isometry_fixing_N(space, fix, plane_of(u1, v1), plane_of(u2, v2));
    check_isometry(space, g, fix, plane_of(u1, v1), plane_of(u2, v2));
  }

  std::vector<RVec> mixed = {unit(n, 0) + unit(n, 3), unit(n, 4)};
  std::vector<RVec> comp2 = orthogonal_complement_real(space, mixed);
  for (int k = 0; k < 10; ++k) {
    auto [u1, v1] = random_positive_pair_in(space, comp2, rng);
    auto [u2, v2] = random_positive_pair_in(space, comp2, rng);
    RMat g = isometry_fixing_N(space, mixed, plane_of(u1, v1), plane_of(u2, v2));
    check_isometry(space, g, mixed, plane_of(u1, v1), plane_of(u2, v2));
  }

  std::vector<RVec> doubly = {unit(n, 0) + unit(n, 3), unit(n, 1) + unit(n, 4)};
  RMat any_plane = plane_of(unit(n, 1), unit(n, 2));
  CHECK_THROWS_AS(isometry_fixing_N(space, doubly, any_plane, any_plane),
                  PreconditionError);

  RMat bad = plane_of(unit(n, 0), unit(n, 1));
  CHECK_THROWS_AS(isometry_fixing_N(space, fix, bad, bad), PreconditionError);
}

TEST_CASE("wall sets validate their classes") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  int n = space.dim();
  WallSet walls = make_wall_set(
      space, {unit(n, 3), unit(n, 4), 0.5 * unit(n, 2) - unit(n, 4)});
  CHECK(walls.classes.size() == 3);

  CHECK_THROWS_AS(make_wall_set(space, {unit(n, 2)}), PreconditionError);
  CHECK_THROWS_AS(make_wall_set(space, {RVec::Zero(n)}), PreconditionError);
  CHECK_THROWS_AS(make_wall_set(space, {unit(n, 3), 2.0 * unit(n, 3)}),
                  PreconditionError);

  WallSet back = WallSet::from_json(space, walls.to_json());
  REQUIRE(back.classes.size() == walls.classes.size());
  for (size_t k = 0; k < walls.classes.size(); ++k)
    CHECK((back.classes[k] - walls.classes[k]).norm() == 0.0);
}

TEST_CASE("chamber signs at a point") {
  QuadraticSpace space = QuadraticSpace::standard(1);
  int n = space.dim();
  PeriodPoint o = from_positive_2plane(space, unit(n, 0), unit(n, 1));

  WallSet active_wall = make_wall_set(space, {unit(n, 3)});
  RVec kappa = unit(n, 2) + 0.5 * unit(n, 3);
  ChamberSignVector signs = chamber_signs(o, kappa, active_wall);
  REQUIRE(signs.wall_indices.size() == 1);
  CHECK(signs.wall_indices[0] == 0);
  CHECK(signs.signs[0] == -1);

  ChamberSignVector doubled = chamber_signs(o, 2.0 * kappa, active_wall);
  CHECK(doubled.signs == signs.signs);

  WallSet inactive = make_wall_set(space, {unit(n, 0) - 2.0 * unit(n, 3)});
  ChamberSignVector empty = chamber_signs(o, kappa, inactive);
  CHECK(empty.wall_indices.empty());

  CHECK_THROWS(chamber_signs(o, unit(n, 2), active_wall));
  CHECK_THROWS(chamber_signs(o, unit(n, 0), active_wall));
  CHECK_THROWS(chamber_signs(o, unit(n, 3), active_wall));
}

TEST_CASE("transport along a constant path changes nothing") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  int n = space.dim();
  PeriodPoint o = from_positive_2plane(space, unit(n, 0), unit(n, 1));
  WallSet walls = make_wall_set(space, {unit(n, 3), unit(n, 4)});
  RVec kappa = unit(n, 2) + 0.4 * unit(n, 3) + 0.2 * unit(n, 4);
  ChamberSignVector initial = chamber_signs(o, kappa, walls);

  std::vector<PeriodPoint> path(5, o);
  Rng rng = make_rng(29, 4);
  TransportResult res = transport_chamber(path, walls, initial, rng);
  CHECK(res.status == TransportStatus::kOk);
  CHECK(res.log.empty());
  CHECK(!res.coarse_sampling);
  CHECK(res.final_signs.wall_indices == initial.wall_indices);
  CHECK(res.final_signs.signs == initial.signs);
  CHECK(res.witnesses.size() == path.size());
}

TEST_CASE("a wall leaving the active set is logged and dropped") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  int n = space.dim();
  WallSet walls = make_wall_set(
      space, {unit(n, 3), unit(n, 4), 0.5 * unit(n, 2) - unit(n, 4)});

  auto point_at = [&](double t) {
    CVec sig = CVec::Zero(n);
    sig[0] = std::cos(t);
    sig[2] = std::sin(t);
    sig[1] = Complex(0, 1);
    return PeriodPoint::from_vector(space, sig);
  };
  std::vector<PeriodPoint> path;
  for (int i = 0; i < 41; ++i) path.push_back(point_at(0.8 * i / 40.0));

  RVec kappa = unit(n, 2) + 0.4 * unit(n, 3) + 0.2 * unit(n, 4);
  ChamberSignVector initial = chamber_signs(path.front(), kappa, walls);
  REQUIRE(initial.wall_indices == std::vector<int>({0, 1, 2}));

  Rng rng = make_rng(29, 5);
  TransportResult res = transport_chamber(path, walls, initial, rng);
  CHECK(res.status == TransportStatus::kOk);
  CHECK(!res.coarse_sampling);
  REQUIRE(res.log.size() == 1);
  CHECK(res.log[0].sample_index == 1);
  CHECK(res.log[0].wall_index == 2);
  CHECK(res.log[0].event == "deactivated");
  CHECK(res.final_signs.wall_indices == std::vector<int>({0, 1}));
  CHECK(res.final_signs.signs == std::vector<int>({-1, -1}));

  std::string csv = transport_log_csv(res);
  CHECK(csv == "sample_index,wall_index,event\n1,2,deactivated\n");

  std::vector<PeriodPoint> back(path.rbegin(), path.rend());
  RVec kappa_end = -std::sin(0.8) * unit(n, 0) + std::cos(0.8) * unit(n, 2) +
                   0.4 * unit(n, 3) + 0.2 * unit(n, 4);
  ChamberSignVector at_end = chamber_signs(back.front(), kappa_end, walls);
  REQUIRE(at_end.wall_indices == std::vector<int>({0, 1}));
  TransportResult rev = transport_chamber(back, walls, at_end, rng);
  CHECK(rev.status == TransportStatus::kOk);
  CHECK(!rev.coarse_sampling);
  REQUIRE(rev.log.size() == 2);
  CHECK(rev.log[0].event == "activated");
  CHECK(rev.log[0].wall_index == 2);
  CHECK(rev.log[0].sample_index == 40);
  bool sign_event = rev.log[1].event == "sign+" || rev.log[1].event == "sign-";
  CHECK(sign_event);
  CHECK(rev.final_signs.wall_indices == std::vector<int>({0, 1, 2}));

  for (size_t k = 0; k < res.witnesses.size(); ++k) {
    const RVec& w = res.witnesses[k];
    CHECK(space.bilinear(w, w) > 0.0);
    CHECK(std::abs(space.pairing(w.cast<Complex>(), path[k].rep())) <
          1e-7 * w.norm());
  }
}

TEST_CASE("signs are constant along paths orthogonal to their walls") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  Rng rng = make_rng(29, 6);
  int n = space.dim();
  int done = 0;
  while (done < 50) {
    RVec wall = RVec::Zero(n);
    while (space.bilinear(wall, wall) > -0.1) wall = random_rvec(rng, n);
    WallSet walls = make_wall_set(space, {wall});
    std::vector<RVec> comp = orthogonal_complement_real(space, {wall});

    auto [u0, v0] = random_positive_pair_in(space, comp, rng);
    auto [u1, v1] = random_positive_pair_in(space, comp, rng);
    std::vector<PeriodPoint> path;
    try {
      for (int i = 0; i < 9; ++i) {
        double t = i / 8.0;
        RVec u = (1.0 - t) * u0 + t * u1;
        RVec v = (1.0 - t) * v0 + t * v1;
        std::vector<RVec> ons = q_orthonormalize(space, {u, v});
        if (space.bilinear(ons[0], ons[0]) < 0.5 ||
            space.bilinear(ons[1], ons[1]) < 0.5)
          throw NumericError("interpolation left the positive cone");
        path.push_back(from_positive_2plane(space, ons[0], ons[1]));
      }
    } catch (const NumericError&) {
      continue;
    }

    std::vector<RVec> rest = orthogonal_complement_real(space, {u0, v0});
    std::optional<RVec> kappa0 = positive_vector_in(space, rest);
    REQUIRE(kappa0.has_value());
    RVec kappa = *kappa0;
    if (std::abs(space.bilinear(kappa, wall)) < 1e-4 * kappa.norm())
      kappa += 0.05 * wall;

    ChamberSignVector initial;
    try {
      initial = chamber_signs(path.front(), kappa, walls);
    } catch (const PreconditionError&) {
      continue;
    }
    REQUIRE(initial.wall_indices == std::vector<int>({0}));

    TransportResult res = transport_chamber(path, walls, initial, rng);
    CHECK(res.status == TransportStatus::kOk);
    CHECK(res.log.empty());
    CHECK(!res.coarse_sampling);
    CHECK(res.final_signs.wall_indices == initial.wall_indices);
    CHECK(res.final_signs.signs == initial.signs);
    REQUIRE(res.witnesses.size() == path.size());
    for (const RVec& w : res.witnesses) {
      double v = space.bilinear(w, wall);
      CHECK((v > 0 ? 1 : -1) == initial.signs[0]);
    }
    ++done;
  }
}

TEST_CASE("coarse sampling and missed crossings are flagged") {
  QuadraticSpace space = QuadraticSpace::standard(2);
  int n = space.dim();
  WallSet walls = make_wall_set(
      space, {unit(n, 3), unit(n, 4), 0.5 * unit(n, 2) - unit(n, 4)});

  auto point_at = [&](double t) {
    CVec sig = CVec::Zero(n);
    sig[0] = std::cos(t);
    sig[2] = std::sin(t);
    sig[1] = Complex(0, 1);
    return PeriodPoint::from_vector(space, sig);
  };

  auto kappa_at = [&](double t) {
    return RVec(-std::sin(t) * unit(n, 0) + std::cos(t) * unit(n, 2) +
                0.4 * unit(n, 3) + 0.2 * unit(n, 4));
  };
  Rng rng = make_rng(29, 7);

  std::vector<PeriodPoint> jump = {point_at(0.8), point_at(0.0)};
  ChamberSignVector initial = chamber_signs(jump.front(), kappa_at(0.8), walls);
  TransportResult res = transport_chamber(jump, walls, initial, rng);
  CHECK(res.status == TransportStatus::kOk);
  CHECK(res.coarse_sampling);

  WallSet crossing = make_wall_set(space, {unit(n, 2) - 2.0 * unit(n, 3)});
  std::vector<PeriodPoint> straddle = {point_at(-0.3), point_at(0.3)};
  ChamberSignVector none = chamber_signs(straddle.front(), kappa_at(-0.3), crossing);
  CHECK(none.wall_indices.empty());
  TransportResult miss = transport_chamber(straddle, crossing, none, rng);
  CHECK(miss.status == TransportStatus::kOk);
  CHECK(miss.coarse_sampling);
  REQUIRE(miss.log.size() == 1);
  CHECK(miss.log[0].event == "crossing_missed");
  CHECK(miss.log[0].wall_index == 0);
  CHECK(miss.final_signs.wall_indices.empty());
}

TEST_CASE("contradictory sign requirements are infeasible") {
  QuadraticSpace space = QuadraticSpace::standard(1);
  int n = space.dim();
  PeriodPoint o = from_positive_2plane(space, unit(n, 0), unit(n, 1));
  WallSet walls = make_wall_set(
      space, {unit(n, 3), 0.6 * unit(n, 2) + unit(n, 3),
              -0.6 * unit(n, 2) + unit(n, 3)});

  ChamberSignVector wanted;
  wanted.wall_indices = {0, 1, 2};
  wanted.signs = {-1, 1, 1};
  Rng rng = make_rng(29, 8);
  std::vector<PeriodPoint> path = {o};
  TransportResult res = transport_chamber(path, walls, wanted, rng);
  CHECK(res.status == TransportStatus::kInfeasible);
  CHECK(res.witnesses.empty());
}
