#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kpd/period_domain.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"

namespace kpd {

/// Completes an isotropic real vector n0 to a hyperbolic pair: returns v
/// with q(n0, v) = 1 and q(v, v) = 0. v is built from the ambient
/// coordinate vector pairing largest against n0 (lowest index on ties).
RVec hyperbolic_completion(const QuadraticSpace& space, const RVec& n0,
                           double tol = 1e-9);

/// Real isometry g of the ambient space with g^T G g = G, g n = n for every
/// n in span(n_basis), mapping the oriented q-positive 2-plane plane_p
/// (ordered columns) onto plane_q. Both planes must be orthogonal to all of
/// n_basis. Works when q restricted to N = span(n_basis) is non-degenerate
/// or has a one-dimensional kernel (completed through a hyperbolic plane);
/// larger kernels are rejected.
RMat isometry_fixing_N(const QuadraticSpace& space,
                       const std::vector<RVec>& n_basis, const RMat& plane_p,
                       const RMat& plane_q, double tol = 1e-9);

/// Finite collection of negative classes.
struct WallSet {
  std::vector<RVec> classes;

  static WallSet from_json(const QuadraticSpace& space, const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Validates: every class has q(a, a) < 0, and no two are proportional.
WallSet make_wall_set(const QuadraticSpace& space, std::vector<RVec> classes,
                      double tol = 1e-9);

/// Signs of q(kappa, alpha) over the walls active at a point, i.e. those
/// with q(alpha, sigma) = 0 within tol.
struct ChamberSignVector {
  std::vector<int> wall_indices;  // ascending
  std::vector<int> signs;         // +1 / -1, parallel to wall_indices
};

/// kappa must pair to zero with the period, satisfy q(kappa, kappa) > 0,
/// and stay off every active wall; a pairing below tolerance is AMBIGUOUS
/// and rejected (perturb kappa and retry).
ChamberSignVector chamber_signs(const PeriodPoint& point, const RVec& kappa,
                                const WallSet& walls, double tol = 1e-9);

enum class TransportStatus { kOk, kAmbiguous, kInfeasible };

struct TransportEvent {
  int sample_index;
  int wall_index;
  std::string event;  // "activated", "deactivated", "sign+", "sign-",
                      // "crossing_missed"
};

struct TransportResult {
  TransportStatus status = TransportStatus::kOk;
  ChamberSignVector final_signs;
  std::vector<TransportEvent> log;
  std::vector<RVec> witnesses;   // accepted kappa per processed sample
  bool coarse_sampling = false;  // an activity flip landed far from zero on
                                 // its far-side sample, or a wall pairing
                                 // passed near zero between two inactive
                                 // samples; the event log may be incomplete
};

/// Transports a chamber sign vector along a sampled path. Walls staying
/// active keep their signs; activations and deactivations are logged, and a
/// newly active wall receives the sign seen by the current witness. The
/// witness kappa is found by maximizing the minimum constraint margin over
/// a random affine slice of the positive cone of the period's orthogonal
/// complement (64 restarts). Margins below 1e-8 stop the transport as
/// AMBIGUOUS; unsatisfiable sign constraints stop it as INFEASIBLE.
TransportResult transport_chamber(const std::vector<PeriodPoint>& path,
                                  const WallSet& walls,
                                  const ChamberSignVector& initial, Rng& rng,
                                  double tol = 1e-9);

/// Event log as CSV with columns sample_index, wall_index, event.
std::string transport_log_csv(const TransportResult& result);

}  // namespace kpd
