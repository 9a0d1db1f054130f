#include "kpd/period_domain.hpp"

#include <nlohmann/json.hpp>

namespace kpd {

const char* to_string(Membership m) {
  switch (m) {
    case Membership::IN_D: return "IN_D";
    case Membership::IN_BOUNDARY_QUADRIC: return "IN_BOUNDARY_QUADRIC";
    case Membership::IN_OMEGA_ONLY: return "IN_OMEGA_ONLY";
    case Membership::OUTSIDE: return "OUTSIDE";
  }
  return "?";
}

Membership membership(const QuadraticSpace& space, const CVec& sigma, double tol) {
  if (sigma.size() != space.dim())
    throw PreconditionError("membership: dimension mismatch");
  double scale = gram_scale(space) * sigma.squaredNorm();
  if (scale == 0.0) throw PreconditionError("membership: zero vector");
  double s = space.norm2(sigma);
  bool iso = std::abs(space.bilinear(sigma, sigma)) <= tol * scale;
  bool pos = s > tol * scale;
  if (iso) return pos ? Membership::IN_D : Membership::IN_BOUNDARY_QUADRIC;
  return pos ? Membership::IN_OMEGA_ONLY : Membership::OUTSIDE;
}

PeriodPoint PeriodPoint::from_vector(const QuadraticSpace& space, const CVec& sigma,
                                     double tol) {
  Membership m = membership(space, sigma, tol);
  if (m != Membership::IN_D && m != Membership::IN_OMEGA_ONLY)
    throw PreconditionError(std::string("PeriodPoint: vector is ") + to_string(m));
  CVec rep = normalize_projective(sigma);
  return PeriodPoint(&space, rep, m == Membership::IN_D, space.norm2(rep));
}

PeriodPoint PeriodPoint::from_json(const QuadraticSpace& space, const nlohmann::json& j) {
  auto rows = j.at("sigma").get<std::vector<std::array<double, 2>>>();
  CVec v(static_cast<int>(rows.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = Complex(rows[i][0], rows[i][1]);
  return from_vector(space, v);
}

nlohmann::json PeriodPoint::to_json() const {
  std::vector<std::array<double, 2>> rows;
  rows.reserve(rep_.size());
  for (int i = 0; i < rep_.size(); ++i) rows.push_back({rep_[i].real(), rep_[i].imag()});
  return nlohmann::json{{"sigma", rows}};
}

PeriodPoint from_positive_2plane(const QuadraticSpace& space, const RVec& e1,
                                 const RVec& e2, double tol) {
  if (e1.size() != space.dim() || e2.size() != space.dim())
    throw PreconditionError("from_positive_2plane: dimension mismatch");
  double scale = gram_scale(space);
  if (std::abs(space.bilinear(e1, e1) - 1.0) > tol * scale ||
      std::abs(space.bilinear(e2, e2) - 1.0) > tol * scale ||
      std::abs(space.bilinear(e1, e2)) > tol * scale)
    throw PreconditionError("from_positive_2plane: pair is not q-orthonormal positive");
  CVec sigma = e1.cast<Complex>() + Complex(0, 1) * e2.cast<Complex>();
  return PeriodPoint::from_vector(space, sigma);
}

std::pair<RVec, RVec> to_positive_2plane(const PeriodPoint& point) {
  if (!point.isotropic())
    throw PreconditionError("to_positive_2plane: point is not on the quadric");
  RVec u = point.rep().real();
  RVec v = point.rep().imag();
  double scale = std::sqrt(2.0 / point.s());
  return {u * scale, v * scale};
}

TangentRep tangent_at(const PeriodPoint& base, const CVec& vec, double tol) {
  if (vec.size() != base.space().dim())
    throw PreconditionError("tangent_at: dimension mismatch");
  if (base.isotropic()) {
    double scale = gram_scale(base.space()) * vec.norm() * base.rep().norm();
    if (std::abs(base.space().bilinear(vec, base.rep())) > tol * std::max(scale, 1e-300))
      throw PreconditionError("tangent_at: vector is not tangent to the quadric");
  }
  return TangentRep{base, vec};
}

TangentRep canonical_tangent(const TangentRep& t) {
  const CVec& sigma = t.base.rep();
  Complex lambda = t.base.space().pairing(t.vec, sigma) / t.base.s();
  return TangentRep{t.base, t.vec - lambda * sigma};
}

HodgeSplit hodge_project(const PeriodPoint& point, const CVec& v) {
  if (!point.in_domain())
    throw PreconditionError("hodge_project: point is not in D");
  if (v.size() != point.space().dim())
    throw PreconditionError("hodge_project: dimension mismatch");
  const CVec& sigma = point.rep();
  double s = point.s();
  Complex c20 = point.space().pairing(v, sigma) / s;
  Complex c02 = point.space().bilinear(v, sigma) / s;
  return HodgeSplit{c20, v - c20 * sigma - c02 * sigma.conjugate(), c02};
}

Complex gs_metric(const QuadraticSpace& space, const CVec& sigma, const CVec& v,
                  const CVec& w) {
  double s = space.norm2(sigma);
  Complex num = space.pairing(v, w) * s - space.pairing(v, sigma) * space.pairing(sigma, w);
  return -num / (s * s);
}

Complex gs_metric(const TangentRep& v, const TangentRep& w, double tol) {
  if (&v.base.space() != &w.base.space() ||
      projective_gap(v.base.rep(), w.base.rep()) > tol)
    throw PreconditionError("gs_metric: base-point mismatch");
  return gs_metric(v.base.space(), v.base.rep(), v.vec, w.vec);
}

double curve_speed(const QuadraticSpace& space, const PolyCurve& curve, Complex z) {
  CVec sigma = curve.eval(z);
  CVec d = curve.derivative().eval(z);
  return gs_metric(space, sigma, d, d).real();
}

CVec from_chart(const QuadraticSpace& space, const CVec& z) {
  if (z.size() != space.dim() - 1)
    throw PreconditionError("from_chart: expected dim-1 coordinates");
  CVec sigma(space.dim());
  sigma[0] = 1.0;
  sigma.tail(space.dim() - 1) = z;
  return sigma;
}

CVec to_chart(const PeriodPoint& point, double tol) {
  const CVec& rep = point.rep();
  if (std::abs(rep[0]) <= tol)
    throw PreconditionError("to_chart: first homogeneous coordinate vanishes");
  return rep.tail(rep.size() - 1) / rep[0];
}

CMat chart_tangency_basis(const QuadraticSpace& space, const CVec& z) {
  const int n = space.dim();
  CVec sigma = from_chart(space, z);
  CVec coeff = (space.gram_c() * sigma).tail(n - 1);
  int m = 0;
  double best = -1.0;
  for (int k = 0; k < n - 1; ++k) {
    double a = std::abs(coeff[k]);
    if (a > best) { best = a; m = k; }
  }
  if (best <= 1e-12 * (space.gram_c() * sigma).norm())
    throw NumericError("chart_tangency_basis: tangency form vanishes on the chart");
  CMat b = CMat::Zero(n - 1, n - 2);
  int col = 0;
  for (int k = 0; k < n - 1; ++k) {
    if (k == m) continue;
    b(k, col) = 1.0;
    b(m, col) = -coeff[k] / coeff[m];
    ++col;
  }
  return b;
}

CMat metric_matrix_chart(const QuadraticSpace& space, const CVec& z,
                         DomainKind which, double tol) {
  const int n = space.dim();
  CVec sigma = from_chart(space, z);
  double s = space.norm2(sigma);
  if (s <= tol * gram_scale(space) * sigma.squaredNorm())
    throw PreconditionError("metric_matrix_chart: chart point is not positive");
  if (which == DomainKind::kD &&
      std::abs(space.bilinear(sigma, sigma)) > tol * gram_scale(space) * sigma.squaredNorm())
    throw PreconditionError("metric_matrix_chart: chart point is off the quadric");
  CVec u = (space.gram_c() * sigma.conjugate()).tail(n - 1);  // u_j = q(d_j, conj sigma)
  CVec w = (space.gram_c() * sigma).tail(n - 1);              // w_k = q(sigma, conj d_k)^-
  CMat block = space.gram_c().bottomRightCorner(n - 1, n - 1);
  CMat m = -(block * s - u * w.transpose()) / (s * s);
  if (which == DomainKind::kD) {
    CMat b = chart_tangency_basis(space, z);
    m = b.transpose() * m * b.conjugate();
  }
  return 0.5 * (m + m.adjoint().eval());
}

namespace {

// Euclidean-orthonormal basis of the orthogonal complement of the columns.
CMat euclidean_complement(const CMat& cols, int keep) {
  Eigen::JacobiSVD<CMat> svd(cols, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(keep);
}

}  // namespace

Signature metric_signature_at(const PeriodPoint& point, double tol_rel) {
  const QuadraticSpace& space = point.space();
  const int n = space.dim();
  const CVec& sigma = point.rep();
  CMat basis;
  if (point.isotropic()) {
    // tangent vectors satisfy q(., sigma) = 0; remove the sigma direction
    auto comp = orthogonal_complement(space, {sigma});
    CMat v(n, static_cast<int>(comp.size()));
    for (int i = 0; i < v.cols(); ++i) v.col(i) = comp[i];
    CVec unit = sigma / sigma.norm();
    v -= unit * (unit.adjoint() * v);
    Eigen::JacobiSVD<CMat> svd(v, Eigen::ComputeThinU);
    double top = svd.singularValues()(0);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-10 * top) ++rank;
    if (rank != n - 2)
      throw NumericError("metric_signature_at: tangent basis extraction failed");
    basis = svd.matrixU().leftCols(rank);
  } else {
    basis = euclidean_complement(sigma, n - 1);
  }
  CMat h(basis.cols(), basis.cols());
  for (int j = 0; j < basis.cols(); ++j)
    for (int k = 0; k <= j; ++k) {
      h(j, k) = gs_metric(space, sigma, basis.col(j), basis.col(k));
      h(k, j) = std::conj(h(j, k));
    }
  Signature sig = signature_of(h, tol_rel);
  if (sig.null > 0)
    throw NumericError("metric_signature_at: degenerate metric matrix");
  return sig;
}

TwistorLine TwistorLine::from_frame(const QuadraticSpace& space, const RMat& frame,
                                    double tol) {
  if (frame.rows() != space.dim() || frame.cols() != 3)
    throw PreconditionError("TwistorLine: frame must be dim x 3");
  std::vector<RVec> cols;
  for (int i = 0; i < 3; ++i) cols.push_back(frame.col(i));
  std::vector<RVec> onb;
  try {
    onb = q_orthonormalize(space, cols, tol);
  } catch (const NumericError&) {
    throw PreconditionError("TwistorLine: frame is degenerate");
  }
  RMat f(space.dim(), 3);
  for (int i = 0; i < 3; ++i) {
    if (space.bilinear(onb[i], onb[i]) <= 0)
      throw PreconditionError("TwistorLine: span is not positive definite");
    f.col(i) = onb[i];
  }
  return TwistorLine(&space, f);
}

bool TwistorLine::contains(const PeriodPoint& point, double tol) const {
  CMat f = frame_.cast<Complex>();
  CVec c = f.colPivHouseholderQr().solve(point.rep());
  return (point.rep() - f * c).norm() <= tol * point.rep().norm();
}

PolyCurve twistor_parametrize(const TwistorLine& line) {
  const RMat& f = line.frame();
  std::vector<Poly> comp;
  comp.reserve(f.rows());
  for (int i = 0; i < f.rows(); ++i) {
    Complex w1 = f(i, 0), w2 = f(i, 1), w3 = f(i, 2);
    comp.push_back(Poly({w1 + Complex(0, 1) * w2, 2.0 * w3, -w1 + Complex(0, 1) * w2}));
  }
  return PolyCurve(std::move(comp));
}

CVec twistor_value(const TwistorLine& line, Complex s, Complex t) {
  const RMat& f = line.frame();
  CVec w1 = f.col(0).cast<Complex>(), w2 = f.col(1).cast<Complex>(),
       w3 = f.col(2).cast<Complex>();
  return (s * s - t * t) * w1 + Complex(0, 1) * (s * s + t * t) * w2 +
         2.0 * s * t * w3;
}

namespace {

void check_hodge11_direction(const PeriodPoint& point, const RVec& a, double tol) {
  const QuadraticSpace& space = point.space();
  if (a.size() != space.dim())
    throw PreconditionError("direction: dimension mismatch");
  if (!point.isotropic())
    throw PreconditionError("direction: point is not in D");
  double qa = space.bilinear(a, a);
  if (qa <= tol * gram_scale(space) * a.squaredNorm())
    throw PreconditionError("direction: q(a, a) must be positive");
  double scale = gram_scale(space) * a.norm() * point.rep().norm();
  if (std::abs(space.bilinear(a.cast<Complex>(), point.rep())) > tol * scale)
    throw PreconditionError("direction: a is not Hodge-(1,1) at the point");
}

}  // namespace

TwistorLine twistor_line_through(const PeriodPoint& point, const RVec& a, double tol) {
  check_hodge11_direction(point, a, tol);
  auto [u, v] = to_positive_2plane(point);
  RMat frame(point.space().dim(), 3);
  frame.col(0) = u;
  frame.col(1) = v;
  frame.col(2) = a;
  return TwistorLine::from_frame(point.space(), frame, tol);
}

TangentSplit tangent_split(const PeriodPoint& point, const RVec& a, double tol) {
  check_hodge11_direction(point, a, tol);
  const QuadraticSpace& space = point.space();
  CVec ac = a.cast<Complex>();
  auto perp = orthogonal_complement(
      space, {point.rep(), point.rep().conjugate(), ac});
  CVec dir = ac / std::sqrt(space.bilinear(a, a));
  return TangentSplit{std::move(perp), dir};
}

CVec SubdomainEmbedding::to_model(const CVec& ambient, double tol) const {
  CMat b = basis.cast<Complex>();
  CVec c = b.colPivHouseholderQr().solve(ambient);
  if ((ambient - b * c).norm() > tol * ambient.norm())
    throw PreconditionError("SubdomainEmbedding: vector is outside the subspace");
  return c;
}

CVec SubdomainEmbedding::to_ambient(const CVec& model) const {
  return basis.cast<Complex>() * model;
}

SubdomainEmbedding subdomain_embed(const PeriodPoint& point) {
  const QuadraticSpace& space = point.space();
  auto [u, v] = to_positive_2plane(point);
  auto comp = orthogonal_complement_real(space, {u, v});
  // first q-positive and first q-negative Gram-Schmidt survivors, in order
  std::vector<RVec> kept;
  std::optional<RVec> w_plus, w_minus;
  for (RVec w : comp) {
    for (const RVec& k : kept) {
      double sgn = space.bilinear(k, k) > 0 ? 1.0 : -1.0;
      w -= sgn * space.bilinear(w, k) * k;
    }
    double n2 = space.bilinear(w, w);
    if (std::abs(n2) <= 1e-10 * gram_scale(space) * w.squaredNorm()) continue;
    w /= std::sqrt(std::abs(n2));
    kept.push_back(w);
    if (n2 > 0 && !w_plus) w_plus = w;
    if (n2 < 0 && !w_minus) w_minus = w;
    if (w_plus && w_minus) break;
  }
  if (!w_plus || !w_minus)
    throw NumericError("subdomain_embed: no signature (1,1) complement found");
  RMat basis(space.dim(), 4);
  basis.col(0) = u;
  basis.col(1) = v;
  basis.col(2) = *w_plus;
  basis.col(3) = *w_minus;
  return SubdomainEmbedding{basis};
}

RMat sample_positive_3plane(const QuadraticSpace& space, Rng& rng) {
  const int n = space.dim();
  const int p = space.p();
  // positive 3-planes are graphs of operator-norm contractions R^3 -> R^p
  // over the positive factor of a diagonalizing basis
  Eigen::SelfAdjointEigenSolver<RMat> es(space.gram());
  RMat pos(n, 3), neg(n, p);
  int ip = 0, in = 0;
  for (int i = 0; i < n; ++i) {
    RVec dir = es.eigenvectors().col(i) / std::sqrt(std::abs(es.eigenvalues()(i)));
    if (es.eigenvalues()(i) > 0) pos.col(ip++) = dir;
    else neg.col(in++) = dir;
  }
  RMat t(p, 3);
  for (int j = 0; j < 3; ++j) t.col(j) = random_rvec(rng, p);
  Eigen::JacobiSVD<RMat> svd(t);
  t *= 0.9 * uniform(rng, 0.05, 1.0) / svd.singularValues()(0);
  RMat frame = pos + neg * t;
  std::vector<RVec> cols{frame.col(0), frame.col(1), frame.col(2)};
  auto onb = q_orthonormalize(space, cols);
  RMat out(n, 3);
  for (int j = 0; j < 3; ++j) out.col(j) = onb[j];
  return out;
}

PeriodPoint sample_omega_point(const QuadraticSpace& space, Rng& rng) {
  RMat w = sample_positive_3plane(space, rng);
  for (;;) {
    CVec c = random_cvec(rng, 3);
    CVec sigma = w.cast<Complex>() * c;
    if (membership(space, sigma) == Membership::IN_OMEGA_ONLY)
      return PeriodPoint::from_vector(space, sigma);
  }
}

PeriodPoint sample_domain_point(const QuadraticSpace& space, Rng& rng) {
  RMat w = sample_positive_3plane(space, rng);
  TwistorLine line = TwistorLine::from_frame(space, w);
  for (;;) {
    Complex s(uniform(rng, -1, 1), uniform(rng, -1, 1));
    Complex t(uniform(rng, -1, 1), uniform(rng, -1, 1));
    if (std::abs(s) < 1e-3 && std::abs(t) < 1e-3) continue;
    CVec sigma = twistor_value(line, s, t);
    if (membership(space, sigma) == Membership::IN_D)
      return PeriodPoint::from_vector(space, sigma);
  }
}

}  // namespace kpd
