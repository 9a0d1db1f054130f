#pragma once

#include <nlohmann/json_fwd.hpp>

#include "kpd/poly.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"

namespace kpd {

using Pair2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2cd;

/// The standard signature (3,1) space underlying the two-dimensional model.
const QuadraticSpace& d2_space();

/// Canonical representative of a projective pair: unit norm, larger-modulus
/// entry rotated positive-real (lower index wins ties).
Pair2 normalize_pair(const Pair2& v);

/// Projective equality via |det[u v]| < tol * |u||v|.
bool pairs_equal(const Pair2& u, const Pair2& v, double tol = 1e-9);

/// A point of the product model: a pair of projective pairs. Points with
/// boundary_test true lie on the boundary divisor, not in the open domain.
struct D2Point {
  Pair2 x, y;

  static D2Point from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

D2Point d2_point(const Pair2& x, const Pair2& y);
bool d2_points_equal(const D2Point& a, const D2Point& b, double tol = 1e-9);

/// The quadric isomorphism into P(C^4):
/// ([x0:x1],[y0:y1]) -> [x0 y0 + x1 y1 : i(x1 y1 - x0 y0) : x1 y0 - x0 y1 :
/// x1 y0 + x0 y1].
CVec iota(const Pair2& x, const Pair2& y);
CVec iota(const D2Point& p);

/// Inverse of iota on the quadric, via the rank-one matrix model.
D2Point iota_inverse(const CVec& X, double tol = 1e-9);

/// The anti-holomorphic boundary involution
/// ([x0:x1],[y0:y1]) -> ([conj y1 : conj y0], [conj x1 : conj x0]).
D2Point tau(const D2Point& p);

/// True iff tau fixes the point, i.e. [y0:y1] = [conj x1 : conj x0].
bool boundary_test(const D2Point& p, double tol = 1e-9);

/// Metric matrix in the affine chart (x, y) = (x0/x1, y0/y1):
/// [[0, 1/(x conj(y) - 1)^2], [1/(y conj(x) - 1)^2, 0]],
/// value convention v^T M conj(w). Rejects x conj(y) = 1.
Mat2 metric_matrix(Complex x, Complex y, double tol = 1e-12);

/// The matrix model of a quadric vector:
/// H(X) = [[i(x4 - x3), -x2 + i x1], [x2 + i x1, i(x4 + x3)]], det H = q(X,X).
Mat2 h_matrix(const CVec& X);
CVec h_to_vector(const Mat2& h);

/// A.[x0:x1] on the first factor, [[conj d, conj c],[conj b, conj a]] on the
/// second; A must be unimodular within 1e-10.
D2Point sl2_action(const Mat2& a, const D2Point& p);

/// Same action through conjugation of the matrix model: X -> A H(X) A^dagger,
/// then inversion. Cross-check route.
D2Point sl2_action_via_h(const Mat2& a, const D2Point& p);

/// Exchanges the two factors; an isometry of the model.
D2Point swap(const D2Point& p);

/// Polynomial family s -> ([x0(s):x1(s)], [y0(s):y1(s)]).
struct D2Curve {
  Poly x0, x1, y0, y1;

  D2Point eval(Complex s) const;
  D2Curve sl2_apply(const Mat2& a) const;
  D2Curve swap_factors() const;
  D2Curve affine_substitute(Complex scale, Complex shift) const;
  /// Composition with iota, as a 4-component polynomial curve.
  PolyCurve push() const;
};

}  // namespace kpd
