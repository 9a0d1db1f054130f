#pragma once

#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kpd/poly.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"

namespace kpd {

/// Classification of a nonzero vector relative to the period domain:
/// D is the set of isotropic positive lines, Omega the positive ones.
enum class Membership { IN_D, IN_BOUNDARY_QUADRIC, IN_OMEGA_ONLY, OUTSIDE };

const char* to_string(Membership m);

/// IN_D iff isotropic and positive; IN_BOUNDARY_QUADRIC iff isotropic and
/// h(sigma) <= 0; IN_OMEGA_ONLY iff non-isotropic and positive; OUTSIDE
/// otherwise. Isotropy and positivity are relative to gram_scale * |sigma|^2.
Membership membership(const QuadraticSpace& space, const CVec& sigma,
                      double tol = kDefaultIsoTol);

/// A point of D or Omega: a positive line, stored through its canonical
/// projective representative. Immutable value; keeps a pointer to the space,
/// which must outlive the point.
class PeriodPoint {
 public:
  /// Accepts IN_D and IN_OMEGA_ONLY vectors; rejects the rest.
  static PeriodPoint from_vector(const QuadraticSpace& space, const CVec& sigma,
                                 double tol = kDefaultIsoTol);

  const QuadraticSpace& space() const { return *space_; }
  const CVec& rep() const { return rep_; }
  /// True for points of D (isotropic line), false for Omega-only points.
  bool isotropic() const { return isotropic_; }
  bool in_domain() const { return isotropic_; }
  /// q(sigma, conj sigma) of the canonical representative.
  double s() const { return s_; }

  static PeriodPoint from_json(const QuadraticSpace& space, const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  PeriodPoint(const QuadraticSpace* space, CVec rep, bool isotropic, double s)
      : space_(space), rep_(std::move(rep)), isotropic_(isotropic), s_(s) {}
  const QuadraticSpace* space_;
  CVec rep_;
  bool isotropic_;
  double s_;
};

/// Point of D spanned by e1' + i e2' for a q-orthonormal positive pair.
PeriodPoint from_positive_2plane(const QuadraticSpace& space, const RVec& e1,
                                 const RVec& e2, double tol = 1e-9);

/// Oriented q-orthonormal positive pair (u, v) with sigma ~ u + iv.
/// Requires an isotropic point.
std::pair<RVec, RVec> to_positive_2plane(const PeriodPoint& point);

/// Tangent vector at a point, as an ambient vector modulo the line itself.
struct TangentRep {
  PeriodPoint base;
  CVec vec;
};

/// Validates tangency for points of D: q(vec, sigma) = 0 within tol
/// (no constraint at Omega-only points).
TangentRep tangent_at(const PeriodPoint& base, const CVec& vec,
                      double tol = kDefaultIsoTol);

/// Representative with q(vec, conj sigma) = 0: subtracts the line component.
TangentRep canonical_tangent(const TangentRep& t);

/// Hodge coefficients of an ambient vector at a point of D:
/// v = c20 * sigma + h11 + c02 * conj(sigma) with h11 orthogonal to both.
struct HodgeSplit {
  Complex c20;
  CVec h11;
  Complex c02;
};

HodgeSplit hodge_project(const PeriodPoint& point, const CVec& v);

/// The canonical metric pairing at sigma:
///   h(v, w) = -[q(v, conj w) S - q(v, conj sigma) q(sigma, conj w)] / S^2,
/// with S = q(sigma, conj sigma). Hermitian, linear in the first slot;
/// invariant under v -> v + c sigma, and under w -> w + c sigma when
/// q(sigma, sigma) = 0.
Complex gs_metric(const QuadraticSpace& space, const CVec& sigma, const CVec& v,
                  const CVec& w);

/// Same pairing with base-point agreement checked.
Complex gs_metric(const TangentRep& v, const TangentRep& w, double tol = 1e-9);

/// h(c'(z), c'(z)) along a polynomial curve; the certificate quantity for
/// positive disks.
double curve_speed(const QuadraticSpace& space, const PolyCurve& curve, Complex z);

/// Affine chart: sigma(z) = e1 + sum_j z_j e_{1+j}, z of length dim-1.
CVec from_chart(const QuadraticSpace& space, const CVec& z);
/// Chart coordinates of a point; rejects points with vanishing first
/// homogeneous coordinate.
CVec to_chart(const PeriodPoint& point, double tol = 1e-9);

enum class DomainKind { kD, kOmega };

/// Basis (columns) of the chart tangency hyperplane
/// { dz : sum_j q(e_{1+j}, sigma(z)) dz_j = 0 }, eliminating the coordinate
/// with the largest coefficient.
CMat chart_tangency_basis(const QuadraticSpace& space, const CVec& z);

/// Matrix M of the canonical metric in chart coordinates, M_jk = h(d_j, d_k),
/// so that h(v, w) = v^T M conj(w). For kD the matrix is restricted to the
/// tangency hyperplane (the chart point must satisfy the quadric).
CMat metric_matrix_chart(const QuadraticSpace& space, const CVec& z,
                         DomainKind which, double tol = 1e-9);

/// Signature of the canonical metric on the tangent space at the point:
/// (p, 1) on D and (p, 2) on Omega. Degeneracy is a hard failure.
Signature metric_signature_at(const PeriodPoint& point,
                              double tol_rel = 1e-7);

/// A positive real 3-plane W; the points of D inside W_C form a conic.
class TwistorLine {
 public:
  /// q-orthonormalizes the three columns; rejects frames whose span is not
  /// positive definite.
  static TwistorLine from_frame(const QuadraticSpace& space, const RMat& frame,
                                double tol = 1e-9);

  const QuadraticSpace& space() const { return *space_; }
  /// n x 3, q-orthonormal columns.
  const RMat& frame() const { return frame_; }

  /// True when the line of the point lies in W_C.
  bool contains(const PeriodPoint& point, double tol = 1e-9) const;

 private:
  TwistorLine(const QuadraticSpace* space, RMat frame)
      : space_(space), frame_(std::move(frame)) {}
  const QuadraticSpace* space_;
  RMat frame_;
};

/// Degree-2 curve z -> (1 - z^2) w1 + i (1 + z^2) w2 + 2 z w3 landing in D;
/// z = 0 gives w1 + i w2. Covers all of the conic except -w1 + i w2.
PolyCurve twistor_parametrize(const TwistorLine& line);

/// Homogeneous evaluation at [s : t].
CVec twistor_value(const TwistorLine& line, Complex s, Complex t);

/// The twistor line through a point of D in direction a (a real, positive,
/// Hodge-(1,1) at the point).
TwistorLine twistor_line_through(const PeriodPoint& point, const RVec& a,
                                 double tol = 1e-9);

/// h-orthogonal splitting of the tangent space at a point of D determined by
/// a real positive (1,1)-class a: directions tangent to { q(., a) = 0 }
/// and the twistor direction along W = plane(point) + span(a).
struct TangentSplit {
  std::vector<CVec> alpha_perp;  // canonical representatives, h-positive block
  CVec twistor_direction;       // h-negative line
};

TangentSplit tangent_split(const PeriodPoint& point, const RVec& a,
                           double tol = 1e-9);

/// A rank-4 subspace of signature (3,1) containing the plane of the point,
/// with the induced two-dimensional domain model. basis columns are
/// q-orthonormal with signs (+,+,+,-).
struct SubdomainEmbedding {
  RMat basis;  // n x 4
  /// Coordinates of an ambient vector lying in span(basis).
  CVec to_model(const CVec& ambient, double tol = 1e-8) const;
  CVec to_ambient(const CVec& model) const;
};

SubdomainEmbedding subdomain_embed(const PeriodPoint& point);

/// Random q-orthonormal positive 3-frame, drawn as the graph of a random
/// operator-norm contraction over the positive factor; covers every positive
/// 3-plane.
RMat sample_positive_3plane(const QuadraticSpace& space, Rng& rng);

/// Random point of Omega (generic: non-isotropic) on a random positive plane.
PeriodPoint sample_omega_point(const QuadraticSpace& space, Rng& rng);

/// Random point of D: a random parameter on a random twistor conic.
PeriodPoint sample_domain_point(const QuadraticSpace& space, Rng& rng);

}  // namespace kpd
