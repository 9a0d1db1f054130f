#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kpd/types.hpp"

namespace kpd {

/// Inertia of a real symmetric form.
struct Signature {
  int positive = 0;
  int negative = 0;
  int null = 0;
  bool operator==(const Signature&) const = default;
};

/// Eigenvalue-count signature of a real symmetric matrix. Eigenvalues with
/// |lambda| below tol_rel * spectral_radius count as null. Rejects
/// non-symmetric input.
Signature signature_of(const RMat& sym, double tol_rel = kDefaultEigTol);

/// Hermitian variant.
Signature signature_of(const CMat& herm, double tol_rel = kDefaultEigTol);

/// Real quadratic form of signature (3, p) on R^{3+p}, extended complex-
/// bilinearly to C^{3+p}. The default model is diag(1,1,1,-1,...,-1).
class QuadraticSpace {
 public:
  /// Standard form diag(1,1,1,-1,...,-1), p >= 1.
  static QuadraticSpace standard(int p);

  /// General symmetric Gram matrix; must be non-degenerate of signature
  /// (3, dim-3) with dim >= 4.
  explicit QuadraticSpace(RMat gram, double eig_tol = kDefaultEigTol);

  int dim() const { return static_cast<int>(gram_.rows()); }
  int p() const { return dim() - 3; }
  const RMat& gram() const { return gram_; }
  const CMat& gram_c() const { return gram_c_; }
  double eig_tol() const { return eig_tol_; }

  /// q(v, w) = v^T G w, complex-bilinear in both slots.
  Complex bilinear(const CVec& v, const CVec& w) const;
  double bilinear(const RVec& v, const RVec& w) const;

  /// h(v, w) = q(v, conj w); Hermitian, h(v, v) real.
  Complex pairing(const CVec& v, const CVec& w) const;

  /// h(v, v) as a real number.
  double norm2(const CVec& v) const { return pairing(v, v).real(); }

  static QuadraticSpace from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  RMat gram_;
  CMat gram_c_;
  double eig_tol_;
};

/// Basis of { w : q(w, v_i) = 0 for all i }. The input vectors must be
/// linearly independent (rejected otherwise).
std::vector<CVec> orthogonal_complement(const QuadraticSpace& space,
                                        const std::vector<CVec>& vectors,
                                        double tol = 1e-10);

/// Real variant of orthogonal_complement.
std::vector<RVec> orthogonal_complement_real(const QuadraticSpace& space,
                                             const std::vector<RVec>& vectors,
                                             double tol = 1e-10);

/// A real vector w in span(basis) with q(w, w) > 0, found by diagonalizing
/// q restricted to the span; nullopt when the restriction has no positive
/// eigenvalue above tolerance.
std::optional<RVec> positive_vector_in(const QuadraticSpace& space,
                                       const std::vector<RVec>& basis);

/// Gram-Schmidt for q: returns vectors with pairwise q-products 0 and
/// |q(w,w)| = 1, processed in input order. Throws NumericError when a
/// residual is q-null within tol (relative to its Euclidean norm squared).
std::vector<RVec> q_orthonormalize(const QuadraticSpace& space,
                                   const std::vector<RVec>& vectors,
                                   double tol = 1e-9);

/// Largest |gram| entry; reference scale for absolute tolerances.
double gram_scale(const QuadraticSpace& space);

}  // namespace kpd
