#pragma once

#include <functional>

#include "kpd/period_domain.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"

namespace kpd {

struct Calibration {
  double value;
  double spread;  // (max - min) / |mean| over all sampled ratios
};

/// kappa_geom: the constant ratio between the curvature-form density
/// -2 d_w d_wbar log q(s(w), conj s(w)) along random holomorphic sections
/// and the closed-form chart metric pulled back the same way. Asserts
/// relative spread < 1e-4 across samples and matrix entries.
Calibration curvature_factor_calibrate(const QuadraticSpace& space, int samples,
                                       Rng& rng);

/// Holomorphic sectional curvature of the hermitian metric with chart matrix
/// H (value convention h(v, w) = w^dagger H v) at chart point z0 along chart
/// direction u: h(Theta(u, ubar) u, u) / h(u, u)^2 with
/// Theta = -d_ubar(H^{-1} d_u H), by finite differences.
double hsc_of_metric(const std::function<CMat(const CVec&)>& hfun,
                     const CVec& z0, const CVec& u, double step = kFdStepScale);

/// HSC of the canonical metric on Omega at the point along ambient tangent
/// vector v. Rejects h-isotropic directions.
double hsc(const PeriodPoint& point, const CVec& v, double tol = 1e-9);

/// HSC of the metric restricted to D, via a local solve of the quadric for
/// the chart coordinate with the largest gradient. Secondary route.
double hsc_domain_restricted(const PeriodPoint& point, const CVec& v,
                             double tol = 1e-9);

/// -hsc averaged over random positive directions and points of Omega;
/// asserts spread < 1e-4. The curvature constant gamma.
Calibration gamma_constant(const QuadraticSpace& space, int points,
                           int directions, Rng& rng);

}  // namespace kpd
