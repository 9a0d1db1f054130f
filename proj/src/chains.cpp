#include "kpd/chains.hpp"

#include "kpd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kpd {

namespace {

constexpr Complex kChainAlpha{1.0, 1.0};

double c_alpha_of(Complex alpha) {
  if (!(alpha.real() > 0.0))
    throw PreconditionError("positivity constant requires Re alpha > 0");
  return (std::abs(alpha) - std::abs(alpha.imag())) /
         (std::abs(alpha) * alpha.real());
}

// Numerically stable roots of a z^2 + b z + c, a != 0.
std::pair<Complex, Complex> quadratic_roots(Complex a, Complex b, Complex c) {
  Complex disc = std::sqrt(b * b - 4.0 * a * c);
  Complex qq = (std::real(std::conj(b) * disc) >= 0.0) ? -0.5 * (b + disc)
                                                       : -0.5 * (b - disc);
  if (std::abs(qq) == 0.0) return {Complex(0.0), Complex(0.0)};
  return {qq / a, c / qq};
}

// Minimum sampled lift speed of a unit-disk curve: 64 x 64 polar grid
// including the boundary circle, then a tenfold local refinement around the
// sampled minimum.
double sample_min_speed(const QuadraticSpace& space, const PolyCurve& curve) {
  PolyCurve deriv = curve.derivative();
  auto speed = [&](double r, double th) -> double {
    Complex z = std::polar(r, th);
    CVec sigma = curve.eval(z);
    double s = space.pairing(sigma, sigma).real();
    if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
    CVec v = deriv.eval(z);
    return gs_metric(space, sigma, v, v).real();
  };
  constexpr int kRad = 64, kAng = 64;
  const double hr = 1.0 / (kRad - 1);
  const double hth = 2.0 * M_PI / kAng;
  double best = std::numeric_limits<double>::infinity();
  double br = 0.0, bth = 0.0;
  for (int i = 0; i < kRad; ++i) {
    double r = i * hr;
    for (int j = 0; j < kAng; ++j) {
      double val = speed(r, j * hth);
      if (val < best) {
        best = val;
        br = r;
        bth = j * hth;
      }
      if (r == 0.0) break;
    }
  }
  for (int di = -10; di <= 10; ++di) {
    double r = std::clamp(br + di * hr / 10.0, 0.0, 1.0);
    for (int dj = -10; dj <= 10; ++dj) {
      double val = speed(r, bth + dj * hth / 10.0);
      if (val < best) best = val;
    }
  }
  return best;
}

Mat2 inverse2(const Mat2& m) {
  Mat2 out;
  out << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return out;
}

Mat2 random_su2(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Complex a(g(rng), g(rng)), b(g(rng), g(rng));
  double nn = std::sqrt(std::norm(a) + std::norm(b));
  if (nn < 1e-12) {
    a = 1.0;
    b = 0.0;
    nn = 1.0;
  }
  a /= nn;
  b /= nn;
  Mat2 m;
  m << a, b, -std::conj(b), std::conj(a);
  return m;
}

// The model action of a unimodular matrix as a linear map of the ambient
// C^4, through conjugation of the rank-one matrix model.
CMat ambient_sl2_matrix(const Mat2& a) {
  CMat out(4, 4);
  for (int k = 0; k < 4; ++k) {
    CVec e = CVec::Zero(4);
    e[k] = 1.0;
    out.col(k) = h_to_vector(Mat2(a * h_matrix(e) * a.adjoint()));
  }
  return out;
}

std::optional<Complex> affine_of(const Pair2& pr) {
  if (std::abs(pr[1]) < 1e-6 * pr.norm()) return std::nullopt;
  return pr[0] / pr[1];
}

// Transport sending (u, w) -> base point and (v, w) -> the unipotent image
// of the base point, for affine values u, v on the first factor and a common
// affine value w on the second. Returns the inverse transport T with
// T(base) = (u, w), T(unipotent image) = (v, w).
std::optional<Mat2> solve_leg_moebius(Complex u, Complex v, Complex w) {
  Complex den = 1.0 - u * std::conj(w);
  if (std::abs(den) < 1e-8 * (1.0 + std::abs(u) * std::abs(w)))
    return std::nullopt;
  Complex a = 1.0 / std::sqrt(den);
  Mat2 m;
  m << a, -a * u, -a * std::conj(w), a;
  Complex rden = 1.0 - v * std::conj(w);
  if (std::abs(rden) < 1e-8 * (1.0 + std::abs(v) * std::abs(w)))
    return std::nullopt;
  Complex rho = (v - u) / rden;
  if (std::abs(rho) < 1e-13) return std::nullopt;
  Complex delta = std::sqrt(rho);
  Mat2 d;
  d << delta, 0.0, 0.0, 1.0 / delta;
  return inverse2(m) * d;
}

struct ModelLeg {
  std::vector<ChainLink> links;
  std::vector<CVec> endpoints;
};

ModelLeg transported_leg(const DiskChain& base, Complex u, Complex v, Complex w,
                         bool swapped, const CMat& outer) {
  auto t = solve_leg_moebius(u, v, w);
  if (!t) throw NumericError("connect: degenerate leg configuration");
  CMat lin = ambient_sl2_matrix(*t);
  if (swapped) {
    CMat flip = CMat::Identity(4, 4);
    flip(2, 2) = -1.0;
    lin = flip * lin;
  }
  lin = outer * lin;
  ModelLeg leg;
  for (const ChainLink& link : base.links) {
    PolyCurve curve = link.disk.curve.linear_map(lin);
    double cert = sample_min_speed(d2_space(), curve);
    if (!(cert > 0.0))
      throw NumericError("connect: transported disk lost positivity");
    leg.links.push_back({PositiveDisk{std::move(curve), link.disk.radius, cert},
                         link.a, link.b, 0.0, link.n_used});
  }
  for (const CVec& e : base.endpoints)
    leg.endpoints.push_back(normalize_projective(CVec(lin * e)));
  return leg;
}

// Two-leg route p -> (q_x, p_y) -> q, solved in the frame rotated by
// frame_rot and mapped back.
DiskChain route_via_waypoint(const D2Point& p, const D2Point& q,
                             const DiskChain& base, const Mat2& frame_rot) {
  D2Point pp = sl2_action(frame_rot, p);
  D2Point qq = sl2_action(frame_rot, q);
  auto px = affine_of(pp.x), py = affine_of(pp.y);
  auto qx = affine_of(qq.x), qy = affine_of(qq.y);
  if (!px || !py || !qx || !qy)
    throw NumericError("connect: affine chart unavailable");
  bool leg1 = !pairs_equal(pp.x, qq.x, 1e-12);
  bool leg2 = !pairs_equal(pp.y, qq.y, 1e-12);
  if (!leg1 && !leg2) throw NumericError("connect: endpoints coincide");
  if (leg1 && leg2) {
    double scale = 1.0 + std::abs(*qx) * std::abs(*py);
    if (std::abs(*qx * std::conj(*py) - 1.0) < 1e-6 * scale)
      throw NumericError("connect: waypoint too close to the boundary");
  }
  CMat outer = ambient_sl2_matrix(inverse2(frame_rot));
  DiskChain chain;
  chain.space = &d2_space();
  chain.endpoints.push_back(normalize_projective(iota(p)));
  auto append = [&chain](ModelLeg&& leg) {
    for (ChainLink& link : leg.links) chain.links.push_back(std::move(link));
    for (size_t i = 1; i < leg.endpoints.size(); ++i)
      chain.endpoints.push_back(std::move(leg.endpoints[i]));
  };
  if (leg1) append(transported_leg(base, *px, *qx, *py, false, outer));
  if (leg2) append(transported_leg(base, *py, *qy, *qx, true, outer));
  chain.endpoints.back() = normalize_projective(iota(q));
  for (size_t i = 0; i < chain.links.size(); ++i) {
    ChainLink& link = chain.links[i];
    double ga = projective_gap(link.disk.curve.eval(link.a), chain.endpoints[i]);
    double gb =
        projective_gap(link.disk.curve.eval(link.b), chain.endpoints[i + 1]);
    link.endpoint_residual = std::max(ga, gb);
    if (link.endpoint_residual > 1e-8)
      throw NumericError("connect: endpoint residual too large");
  }
  return chain;
}

long long n_for_target(double leg_target) {
  double nf = std::ceil(std::pow(4.0 / leg_target, 2.0));
  if (!(nf > 10.0)) return 10;
  if (nf > 1e15) throw NumericError("connect: length target out of range");
  return static_cast<long long>(nf);
}

DiskChain concat_chains(DiskChain&& left, DiskChain&& right) {
  DiskChain out = std::move(left);
  for (ChainLink& link : right.links) out.links.push_back(std::move(link));
  for (size_t i = 1; i < right.endpoints.size(); ++i)
    out.endpoints.push_back(std::move(right.endpoints[i]));
  return out;
}

DiskChain connect_d2_impl(const D2Point& p, const D2Point& q, double target,
                          std::optional<long long> fixed_n, Rng& rng,
                          int max_disks, int depth) {
  if (d2_points_equal(p, q, 1e-12)) {
    DiskChain chain;
    chain.space = &d2_space();
    chain.endpoints.push_back(normalize_projective(iota(p)));
    return chain;
  }
  int legs = (pairs_equal(p.x, q.x, 1e-12) ? 0 : 1) +
             (pairs_equal(p.y, q.y, 1e-12) ? 0 : 1);
  if (legs == 0) legs = 1;
  if (2 * legs > max_disks)
    throw NumericError("connect: disk budget exhausted");
  double leg_target = target / legs;
  long long n = fixed_n ? *fixed_n : n_for_target(leg_target);
  DiskChain base = lemma57_chain(kChainAlpha, kChainAlpha, n);
  if (!fixed_n) {
    for (int i = 0; i < 6 && chain_length(base) > leg_target; ++i) {
      n *= 4;
      base = lemma57_chain(kChainAlpha, kChainAlpha, n);
    }
    if (chain_length(base) > leg_target)
      throw NumericError("connect: cannot reach the length target");
  }
  for (int attempt = 0; attempt < 4; ++attempt) {
    Mat2 rot = attempt == 0 ? Mat2(Mat2::Identity()) : random_su2(rng);
    try {
      return route_via_waypoint(p, q, base, rot);
    } catch (const NumericError&) {
    }
  }
  if (depth <= 0) throw NumericError("connect: retry depth exhausted");
  std::normal_distribution<double> g(0.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Pair2 zx, zy;
    zx << Complex(0.25 * g(rng), 0.25 * g(rng)), Complex(1.0, 0.0);
    zy << Complex(0.25 * g(rng), 0.25 * g(rng)), Complex(1.0, 0.0);
    D2Point z = d2_point(zx, zy);
    if (boundary_test(z, 1e-3)) continue;
    if (d2_points_equal(z, p, 1e-9) || d2_points_equal(z, q, 1e-9)) continue;
    try {
      DiskChain left = connect_d2_impl(p, z, target / 2, fixed_n, rng,
                                       max_disks / 2, depth - 1);
      DiskChain right = connect_d2_impl(z, q, target / 2, fixed_n, rng,
                                        max_disks / 2, depth - 1);
      return concat_chains(std::move(left), std::move(right));
    } catch (const NumericError&) {
    }
  }
  throw NumericError("connect_d2: failed to build a chain within budget");
}

void require_same_space(const PeriodPoint& a, const PeriodPoint& b,
                        const char* who) {
  if (&a.space() == &b.space()) return;
  if (a.space().dim() == b.space().dim() &&
      (a.space().gram() - b.space().gram()).cwiseAbs().maxCoeff() == 0.0)
    return;
  throw PreconditionError(std::string(who) +
                          ": points live in different spaces");
}

struct PlaneNode {
  RMat frame;  // n x 2, q-orthonormal positive
  PeriodPoint point;
};

RMat plane_frame_of(const PeriodPoint& pt) {
  auto [u, v] = to_positive_2plane(pt);
  RMat f(u.size(), 2);
  f.col(0) = u;
  f.col(1) = v;
  return f;
}

struct PrincipalPair {
  double sigma;  // smallest principal q-cosine between the two planes
  RVec u, v;     // realizing directions, q-unit
};

PrincipalPair smallest_principal(const QuadraticSpace& space, const RMat& fa,
                                 const RMat& fb) {
  Eigen::Matrix2d m = fa.transpose() * space.gram() * fb;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  PrincipalPair out;
  out.sigma = svd.singularValues()(1);
  out.u = fa * svd.matrixU().col(1);
  out.v = fb * svd.matrixV().col(1);
  return out;
}

PlaneNode interpolated_node(const QuadraticSpace& space, const RMat& fa,
                            const RMat& fb, Rng& rng) {
  RMat target = fb;
  for (int attempt = 0; attempt < 8; ++attempt) {
    RMat mix = 0.5 * (fa + target);
    try {
      std::vector<RVec> cols =
          q_orthonormalize(space, {RVec(mix.col(0)), RVec(mix.col(1))});
      if (space.bilinear(cols[0], cols[0]) > 0.0 &&
          space.bilinear(cols[1], cols[1]) > 0.0) {
        RMat f(fa.rows(), 2);
        f.col(0) = cols[0];
        f.col(1) = cols[1];
        return PlaneNode{f, from_positive_2plane(space, cols[0], cols[1])};
      }
    } catch (const NumericError&) {
    } catch (const PreconditionError&) {
    }
    double th = uniform(rng, 0.0, 2.0 * M_PI);
    Eigen::Matrix2d rot;
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    target = fb * rot;
  }
  throw NumericError("twistor_chain: could not interpolate plane frames");
}

void chain_rec(const QuadraticSpace& space, const PlaneNode& from,
               const PlaneNode& to, int depth, Rng& rng,
               std::vector<TwistorStep>& out) {
  const double kMargin = 1e-6;
  RMat joint(space.dim(), 4);
  joint << from.frame, to.frame;
  Eigen::JacobiSVD<RMat> svd(joint, Eigen::ComputeThinU);
  int rank = 0;
  double top = svd.singularValues()(0);
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * top) ++rank;
  if (rank <= 2) {
    // same plane: one line through both points
    std::vector<RVec> comp = orthogonal_complement_real(
        space, {RVec(from.frame.col(0)), RVec(from.frame.col(1))});
    std::optional<RVec> w = positive_vector_in(space, comp);
    if (!w)
      throw NumericError("twistor_chain: no positive extension of the plane");
    RMat f(space.dim(), 3);
    f << from.frame, *w;
    out.push_back({TwistorLine::from_frame(space, f), to.point});
    return;
  }
  if (rank == 3) {
    RMat span3 = svd.matrixU().leftCols(3);
    RMat restricted = span3.transpose() * space.gram() * span3;
    Signature sig = signature_of(restricted);
    if (sig.positive == 3) {
      out.push_back({TwistorLine::from_frame(space, span3), to.point});
      return;
    }
  } else {
    PrincipalPair pp = smallest_principal(space, from.frame, to.frame);
    if (pp.sigma < 1.0 - kMargin) {
      RVec r2 = pp.v - pp.sigma * pp.u;
      double qn = space.bilinear(r2, r2);
      if (qn > 0.0) {
        r2 /= std::sqrt(qn);
        RMat f1(space.dim(), 3), f2(space.dim(), 3);
        f1 << from.frame, pp.v;
        f2 << to.frame, pp.u;
        try {
          TwistorLine w1 = TwistorLine::from_frame(space, f1);
          TwistorLine w2 = TwistorLine::from_frame(space, f2);
          PeriodPoint r = from_positive_2plane(space, pp.u, r2);
          out.push_back({w1, r});
          out.push_back({w2, to.point});
          return;
        } catch (const PreconditionError&) {
        } catch (const NumericError&) {
        }
      }
    }
  }
  if (depth <= 0) {
    std::ostringstream os;
    os << "twistor_chain: subdivision floor reached between planes"
       << " (smallest principal cosine "
       << smallest_principal(space, from.frame, to.frame).sigma << ")";
    throw NumericError(os.str());
  }
  PlaneNode mid = interpolated_node(space, from.frame, to.frame, rng);
  chain_rec(space, from, mid, depth - 1, rng, out);
  chain_rec(space, mid, to, depth - 1, rng, out);
}

std::vector<TwistorStep> twistor_chain_impl(const PeriodPoint& p,
                                            const PeriodPoint& q, Rng& rng,
                                            int restarts) {
  const QuadraticSpace& space = p.space();
  PlaneNode a{plane_frame_of(p), p};
  PlaneNode b{plane_frame_of(q), q};
  try {
    std::vector<TwistorStep> out;
    chain_rec(space, a, b, 20, rng, out);
    return out;
  } catch (const NumericError&) {
    if (restarts <= 0) throw;
  }
  PeriodPoint mid = sample_domain_point(space, rng);
  std::vector<TwistorStep> left = twistor_chain_impl(p, mid, rng, restarts - 1);
  std::vector<TwistorStep> right =
      twistor_chain_impl(mid, q, rng, restarts - 1);
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

}  // namespace

double poincare_distance(Complex a, Complex b) {
  if (std::abs(a) >= 1.0 || std::abs(b) >= 1.0)
    throw PreconditionError(
        "poincare_distance: arguments must lie in the open unit disk");
  double m = std::abs((a - b) / (1.0 - std::conj(a) * b));
  return std::atanh(m);
}

D2Curve f_lambda(Complex lambda, double tol) {
  if (std::abs(lambda.imag()) <= tol && lambda.real() >= -tol)
    throw PreconditionError(
        "f_lambda: lambda on the nonnegative real axis is degenerate");
  D2Curve c;
  c.x0 = Poly({Complex(0.0), Complex(1.0)});
  c.x1 = Poly::constant(Complex(1.0));
  c.y0 = Poly({Complex(0.0), lambda});
  c.y1 = Poly::constant(Complex(1.0));
  return c;
}

double positivity_profile(Complex lambda, Complex t) {
  Complex d = lambda * std::norm(t) - 1.0;
  return 2.0 * (lambda / (d * d)).real();
}

double positivity_radius(Complex alpha, long long n) {
  if (n < 1) throw PreconditionError("positivity_radius: n must be positive");
  return c_alpha_of(alpha) * std::sqrt(static_cast<double>(n));
}

PositiveDisk certify_disk(const QuadraticSpace& space, const PolyCurve& curve,
                          double radius) {
  if (!(radius > 0.0))
    throw PreconditionError("certify_disk: radius must be positive");
  if (curve.ambient_dim() != space.dim())
    throw PreconditionError("certify_disk: dimension mismatch");
  PolyCurve unit = (radius == 1.0)
                       ? curve
                       : curve.affine_substitute(Complex(radius), Complex(0.0));
  double cert = sample_min_speed(space, unit);
  if (!(cert > 0.0)) {
    std::ostringstream os;
    os << "certify_disk: sampled lift speed is not positive (min " << cert
       << ")";
    throw NumericError(os.str());
  }
  return PositiveDisk{std::move(unit), radius, cert};
}

double chain_length(const DiskChain& chain) {
  double total = 0.0;
  for (const ChainLink& link : chain.links)
    total += poincare_distance(link.a, link.b);
  return total;
}

std::string chain_report_csv(const DiskChain& chain) {
  CsvDoc doc({"link_index", "n", "a", "b", "delta", "cumulative_length",
              "endpoint_residual", "min_positivity"});
  auto cnum = [](Complex z) {
    return csv_num(z.real()) + (z.imag() < 0.0 ? "" : "+") +
           csv_num(z.imag()) + "i";
  };
  double cum = 0.0;
  for (size_t i = 0; i < chain.links.size(); ++i) {
    const ChainLink& link = chain.links[i];
    cum += poincare_distance(link.a, link.b);
    doc.row({csv_int(static_cast<long long>(i)), csv_int(link.n_used),
             cnum(link.a), cnum(link.b),
             csv_num(poincare_distance(link.a, link.b)), csv_num(cum),
             csv_num(link.endpoint_residual),
             csv_num(link.disk.certificate)});
  }
  return doc.str();
}

void verify_chain(const DiskChain& chain, double tol) {
  if (chain.space == nullptr)
    throw PreconditionError("verify_chain: chain has no space");
  if (chain.endpoints.size() != chain.links.size() + 1)
    throw NumericError("verify_chain: endpoint count mismatch");
  const QuadraticSpace& space = *chain.space;
  for (size_t i = 0; i < chain.links.size(); ++i) {
    const ChainLink& link = chain.links[i];
    if (std::abs(link.a) >= 1.0 || std::abs(link.b) >= 1.0)
      throw NumericError("verify_chain: anchor outside the open unit disk");
    if (!(link.disk.certificate > 0.0))
      throw NumericError("verify_chain: non-positive certificate");
    if (curve_speed(space, link.disk.curve, link.a) <= 0.0 ||
        curve_speed(space, link.disk.curve, link.b) <= 0.0)
      throw NumericError("verify_chain: lift speed not positive at an anchor");
    double ga = projective_gap(link.disk.curve.eval(link.a), chain.endpoints[i]);
    double gb =
        projective_gap(link.disk.curve.eval(link.b), chain.endpoints[i + 1]);
    if (ga > tol || gb > tol)
      throw NumericError("verify_chain: anchor does not meet its endpoint");
  }
}

DiskChain lemma57_chain(Complex alpha, Complex beta, long long n) {
  if (n < 1) throw PreconditionError("lemma57_chain: n must be positive");
  double ca = c_alpha_of(alpha);
  double cb = c_alpha_of(beta);
  Complex lam = alpha / static_cast<double>(n);
  double rho1 = 0.999 * std::sqrt(ca * static_cast<double>(n));
  double rho2 = 0.999 * std::sqrt(cb);

  // meeting equation: lam beta s^2 + (lam beta + lam - beta) s + lam = 0,
  // the intersection parameter of the two families at t = s + 1
  Complex qa = lam * beta, qb = lam * beta + lam - beta, qc = lam;
  auto [r1, r2] = quadratic_roots(qa, qb, qc);
  Complex s = std::abs(r1) <= std::abs(r2) ? r1 : r2;
  Complex t = s + 1.0;
  double eqres = std::abs((qa * s + qb) * s + qc) /
                 std::max({1.0, std::abs(qa * s * s), std::abs(qb * s)});
  if (eqres > 1e-10) {
    std::ostringstream os;
    os << "lemma57_chain: meeting equation residual " << eqres;
    throw NumericError(os.str());
  }
  if (std::abs(t) >= rho1)
    throw NumericError(
        "lemma57_chain: meeting parameter escapes the first disk");
  if (std::abs(s) >= rho2)
    throw NumericError(
        "lemma57_chain: meeting parameter escapes the second disk");

  D2Curve f1 = f_lambda(lam);
  Mat2 unip;
  unip << 1.0, 1.0, 0.0, 1.0;
  D2Curve g2 = f_lambda(beta).sl2_apply(unip);

  PositiveDisk d1 = certify_disk(d2_space(), f1.push(), rho1);
  PositiveDisk d2 = certify_disk(d2_space(), g2.push(), rho2);

  Complex a1 = 0.0, b1 = t / rho1;
  Complex a2 = s / rho2, b2 = 0.0;
  CVec e0 = normalize_projective(d1.curve.eval(a1));
  CVec e1 = normalize_projective(d1.curve.eval(b1));
  CVec e2 = normalize_projective(d2.curve.eval(b2));
  double meet_gap = projective_gap(d2.curve.eval(a2), e1);

  DiskChain chain;
  chain.space = &d2_space();
  chain.links.push_back({std::move(d1), a1, b1, 0.0, n});
  chain.links.push_back({std::move(d2), a2, b2, meet_gap, 0});
  chain.endpoints = {e0, e1, e2};
  return chain;
}

DiskChain connect_d2(const D2Point& p, const D2Point& q, double target_length,
                     Rng& rng, int max_disks) {
  if (!(target_length > 0.0))
    throw PreconditionError("connect_d2: target length must be positive");
  if (boundary_test(p) || boundary_test(q))
    throw PreconditionError("connect_d2: endpoint on the boundary");
  DiskChain chain =
      connect_d2_impl(p, q, target_length, std::nullopt, rng, max_disks, 3);
  verify_chain(chain, 1e-9);
  return chain;
}

std::vector<std::pair<long long, double>> kobayashi_upper_bound_series(
    const D2Point& p, const D2Point& q, const std::vector<long long>& schedule,
    Rng& rng) {
  if (boundary_test(p) || boundary_test(q))
    throw PreconditionError(
        "kobayashi_upper_bound_series: endpoint on the boundary");
  std::vector<std::pair<long long, double>> out;
  out.reserve(schedule.size());
  for (long long n : schedule) {
    if (n < 1)
      throw PreconditionError("kobayashi_upper_bound_series: n must be positive");
    DiskChain chain =
        connect_d2_impl(p, q, std::numeric_limits<double>::infinity(), n, rng,
                        64, 3);
    verify_chain(chain, 1e-9);
    out.emplace_back(n, chain_length(chain));
  }
  return out;
}

std::vector<TwistorStep> twistor_chain(const PeriodPoint& p,
                                       const PeriodPoint& q, Rng& rng) {
  require_same_space(p, q, "twistor_chain");
  if (!p.isotropic() || !q.isotropic())
    throw PreconditionError(
        "twistor_chain: endpoints must be points of the isotropic domain");
  if (projective_gap(p.rep(), q.rep()) < 1e-12) return {};
  return twistor_chain_impl(p, q, rng, 3);
}

DiskChain connect_D(const PeriodPoint& p, const PeriodPoint& q,
                    double target_length, Rng& rng, int max_disks) {
  if (!(target_length > 0.0))
    throw PreconditionError("connect_D: target length must be positive");
  require_same_space(p, q, "connect_D");
  if (!p.isotropic() || !q.isotropic())
    throw PreconditionError(
        "connect_D: endpoints must be points of the isotropic domain");
  const QuadraticSpace& space = p.space();
  DiskChain chain;
  chain.space = &space;
  chain.endpoints.push_back(normalize_projective(p.rep()));
  if (projective_gap(p.rep(), q.rep()) < 1e-12) return chain;

  std::vector<TwistorStep> steps = twistor_chain(p, q, rng);
  int m = static_cast<int>(steps.size());
  double leg_target = target_length / m;
  int used = 0;
  PeriodPoint prev = p;
  for (int i = 0; i < m; ++i) {
    const TwistorStep& step = steps[i];
    std::vector<RVec> wcols = {RVec(step.line.frame().col(0)),
                               RVec(step.line.frame().col(1)),
                               RVec(step.line.frame().col(2))};
    std::vector<RVec> comp = orthogonal_complement_real(space, wcols);
    if (comp.empty()) throw NumericError("connect_D: no envelope direction");
    RVec nu = comp[0];
    double qn = space.bilinear(nu, nu);
    if (!(qn < 0.0))
      throw NumericError("connect_D: envelope direction is not negative");
    nu /= std::sqrt(-qn);
    RMat basis(space.dim(), 4);
    basis << step.line.frame(), nu;
    CMat bc = basis.cast<Complex>();
    auto to_model = [&](const CVec& sigma) -> CVec {
      CVec c = bc.transpose() * (space.gram_c() * sigma);
      c[3] = -c[3];
      double resid = (bc * c - sigma).norm();
      if (resid > 1e-8 * sigma.norm())
        throw NumericError("connect_D: point leaves its envelope");
      return c;
    };
    CVec ca = to_model(prev.rep());
    CVec cb = to_model(step.point.rep());
    D2Point pa = iota_inverse(ca);
    D2Point pb = iota_inverse(cb);
    int leg_budget = std::max(8, (max_disks - used) / (m - i));
    DiskChain leg = connect_d2(pa, pb, leg_target, rng, leg_budget);
    used += static_cast<int>(leg.links.size());
    if (used > max_disks)
      throw NumericError("connect_D: disk budget exhausted");
    for (ChainLink& link : leg.links) {
      PolyCurve amb = link.disk.curve.linear_map(bc);
      double cert = sample_min_speed(space, amb);
      if (!(cert > 0.0))
        throw NumericError("connect_D: embedded disk lost positivity");
      chain.links.push_back({PositiveDisk{std::move(amb), link.disk.radius,
                                          cert},
                             link.a, link.b, link.endpoint_residual,
                             link.n_used});
    }
    for (size_t k = 1; k < leg.endpoints.size(); ++k)
      chain.endpoints.push_back(
          normalize_projective(CVec(bc * leg.endpoints[k])));
    chain.endpoints.back() = normalize_projective(step.point.rep());
    prev = step.point;
  }
  for (size_t i = 0; i < chain.links.size(); ++i) {
    ChainLink& link = chain.links[i];
    link.endpoint_residual = std::max(
        projective_gap(link.disk.curve.eval(link.a), chain.endpoints[i]),
        projective_gap(link.disk.curve.eval(link.b), chain.endpoints[i + 1]));
  }
  verify_chain(chain, 1e-9);
  return chain;
}

PolyCurve isotropic_line_through(const PeriodPoint& point) {
  if (!point.isotropic())
    throw PreconditionError(
        "isotropic_line_through: point of the isotropic domain required");
  SubdomainEmbedding emb = subdomain_embed(point);
  CVec model = emb.to_model(point.rep());
  D2Point base = iota_inverse(model);
  D2Curve fiber;
  fiber.x0 = Poly::constant(base.x[0]);
  fiber.x1 = Poly::constant(base.x[1]);
  fiber.y0 = Poly({base.y[0], std::conj(base.x[1])});
  fiber.y1 = Poly({base.y[1], std::conj(base.x[0])});
  return fiber.push().linear_map(emb.basis.cast<Complex>());
}

}  // namespace kpd
