#include "kpd/quadratic_space.hpp"

#include <nlohmann/json.hpp>

namespace kpd {

Signature signature_of(const RMat& sym, double tol_rel) {
  if (sym.rows() != sym.cols()) throw PreconditionError("signature_of: matrix not square");
  double asym = (sym - sym.transpose()).cwiseAbs().maxCoeff();
  double scale = std::max(sym.cwiseAbs().maxCoeff(), 1e-300);
  if (asym > 1e-12 * scale) throw PreconditionError("signature_of: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> es(sym, Eigen::EigenvaluesOnly);
  const RVec& ev = es.eigenvalues();
  double rho = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Signature s;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= tol_rel * rho) ++s.null;
    else if (ev[i] > 0) ++s.positive;
    else ++s.negative;
  }
  return s;
}

Signature signature_of(const CMat& herm, double tol_rel) {
  if (herm.rows() != herm.cols()) throw PreconditionError("signature_of: matrix not square");
  double asym = (herm - herm.adjoint()).cwiseAbs().maxCoeff();
  double scale = std::max(herm.cwiseAbs().maxCoeff(), 1e-300);
  if (asym > 1e-12 * scale) throw PreconditionError("signature_of: matrix not hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
  const RVec& ev = es.eigenvalues();
  double rho = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Signature s;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= tol_rel * rho) ++s.null;
    else if (ev[i] > 0) ++s.positive;
    else ++s.negative;
  }
  return s;
}

QuadraticSpace QuadraticSpace::standard(int p) {
  if (p < 1) throw PreconditionError("QuadraticSpace: p must be >= 1");
  RVec d(3 + p);
  d.head(3).setOnes();
  d.tail(p).setConstant(-1.0);
  return QuadraticSpace(RMat(d.asDiagonal()));
}

QuadraticSpace::QuadraticSpace(RMat gram, double eig_tol)
    : gram_(std::move(gram)), eig_tol_(eig_tol) {
  const int n = dim();
  if (n < 4) throw PreconditionError("QuadraticSpace: dim must be >= 4 (p >= 1)");
  if (n > 67) throw PreconditionError("QuadraticSpace: p > 64 unsupported");
  double det = gram_.determinant();
  if (std::abs(det) < 1e-12) throw PreconditionError("QuadraticSpace: gram is degenerate");
  Signature s = signature_of(gram_, eig_tol_);
  if (s.positive != 3 || s.negative != n - 3)
    throw PreconditionError("QuadraticSpace: signature must be (3, p)");
  gram_c_ = gram_.cast<Complex>();
}

Complex QuadraticSpace::bilinear(const CVec& v, const CVec& w) const {
  return (v.transpose() * gram_c_ * w).value();
}

double QuadraticSpace::bilinear(const RVec& v, const RVec& w) const {
  return v.dot(gram_ * w);
}

Complex QuadraticSpace::pairing(const CVec& v, const CVec& w) const {
  return (v.transpose() * gram_c_ * w.conjugate()).value();
}

QuadraticSpace QuadraticSpace::from_json(const nlohmann::json& j) {
  int p = j.at("p").get<int>();
  if (!j.contains("gram") || (j["gram"].is_string() && j["gram"] == "standard"))
    return standard(p);
  auto rows = j.at("gram").get<std::vector<std::vector<double>>>();
  const int n = static_cast<int>(rows.size());
  if (n != 3 + p) throw PreconditionError("QuadraticSpace: gram size does not match p");
  RMat g(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n)
      throw PreconditionError("QuadraticSpace: gram is not square");
    for (int k = 0; k < n; ++k) g(i, k) = rows[i][k];
  }
  return QuadraticSpace(std::move(g));
}

nlohmann::json QuadraticSpace::to_json() const {
  nlohmann::json j;
  j["p"] = p();
  RMat std_gram = RMat(QuadraticSpace::standard(p()).gram());
  if ((gram_ - std_gram).cwiseAbs().maxCoeff() == 0.0) {
    j["gram"] = "standard";
    return j;
  }
  std::vector<std::vector<double>> rows(dim(), std::vector<double>(dim()));
  for (int i = 0; i < dim(); ++i)
    for (int k = 0; k < dim(); ++k) rows[i][k] = gram_(i, k);
  j["gram"] = rows;
  return j;
}

namespace {

// Kernel basis of an m x n complex matrix via column-pivoted elimination;
// pivots follow coordinate order so the basis is reproducible.
std::vector<CVec> kernel_basis(CMat a, double tol) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < n && r < m; ++c) {
    int arg = r;
    double best = 0.0;
    for (int i = r; i < m; ++i) {
      double v = std::abs(a(i, c));
      if (v > best) { best = v; arg = i; }
    }
    if (best <= tol * scale) continue;
    a.row(r).swap(a.row(arg));
    a.row(r) /= a(r, c);
    for (int i = 0; i < m; ++i)
      if (i != r) a.row(i) -= a(i, c) * a.row(r);
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_col) is_pivot[c] = true;
  std::vector<CVec> basis;
  for (int c = 0; c < n; ++c) {
    if (is_pivot[c]) continue;
    CVec v = CVec::Zero(n);
    v[c] = 1.0;
    for (int i = 0; i < r; ++i) v[pivot_col[i]] = -a(i, c);
    basis.push_back(v / v.norm());
  }
  return basis;
}

}  // namespace

std::vector<CVec> orthogonal_complement(const QuadraticSpace& space,
                                        const std::vector<CVec>& vectors,
                                        double tol) {
  const int n = space.dim();
  const int k = static_cast<int>(vectors.size());
  if (k == 0) throw PreconditionError("orthogonal_complement: empty input");
  CMat v(n, k);
  for (int i = 0; i < k; ++i) {
    if (vectors[i].size() != n)
      throw PreconditionError("orthogonal_complement: dimension mismatch");
    v.col(i) = vectors[i];
  }
  Eigen::JacobiSVD<CMat> svd(v);
  if (svd.rank() < k ||
      svd.singularValues()(k - 1) < tol * svd.singularValues()(0))
    throw PreconditionError("orthogonal_complement: input vectors are dependent");
  // rows are (G v_i)^T, so the kernel is { w : q(w, v_i) = 0 }
  CMat rows(k, n);
  for (int i = 0; i < k; ++i) rows.row(i) = (space.gram_c() * v.col(i)).transpose();
  return kernel_basis(rows, tol);
}

std::vector<RVec> orthogonal_complement_real(const QuadraticSpace& space,
                                             const std::vector<RVec>& vectors,
                                             double tol) {
  std::vector<CVec> cv;
  cv.reserve(vectors.size());
  for (const auto& v : vectors) cv.push_back(v.cast<Complex>());
  auto basis = orthogonal_complement(space, cv, tol);
  // complex kernel of a real system has a real basis; elimination on real
  // rows returns real vectors up to roundoff
  std::vector<RVec> out;
  out.reserve(basis.size());
  for (const auto& b : basis) {
    if (b.imag().cwiseAbs().maxCoeff() > 1e-10)
      throw NumericError("orthogonal_complement_real: complex kernel vector");
    out.push_back(b.real());
  }
  return out;
}

std::optional<RVec> positive_vector_in(const QuadraticSpace& space,
                                       const std::vector<RVec>& basis) {
  const int k = static_cast<int>(basis.size());
  if (k == 0) return std::nullopt;
  RMat b(space.dim(), k);
  for (int i = 0; i < k; ++i) b.col(i) = basis[i];
  RMat restricted = b.transpose() * space.gram() * b;
  restricted = 0.5 * (restricted + restricted.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(restricted);
  double rho = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  int top = k - 1;  // eigenvalues ascend
  if (es.eigenvalues()(top) <= space.eig_tol() * rho) return std::nullopt;
  RVec w = b * es.eigenvectors().col(top);
  return w / w.norm();
}

std::vector<RVec> q_orthonormalize(const QuadraticSpace& space,
                                   const std::vector<RVec>& vectors,
                                   double tol) {
  std::vector<RVec> out;
  out.reserve(vectors.size());
  for (RVec v : vectors) {
    if (v.size() != space.dim())
      throw PreconditionError("q_orthonormalize: dimension mismatch");
    for (const RVec& w : out) {
      double sgn = space.bilinear(w, w) > 0 ? 1.0 : -1.0;
      v -= sgn * space.bilinear(v, w) * w;
    }
    double n2 = space.bilinear(v, v);
    double euclid = v.squaredNorm();
    if (euclid == 0.0 || std::abs(n2) <= tol * gram_scale(space) * euclid)
      throw NumericError("q_orthonormalize: q-null residual");
    out.push_back(v / std::sqrt(std::abs(n2)));
  }
  return out;
}

double gram_scale(const QuadraticSpace& space) {
  return space.gram().cwiseAbs().maxCoeff();
}

}  // namespace kpd
