#pragma once

#include <vector>

#include "kpd/period_domain.hpp"
#include "kpd/product_model.hpp"
#include "kpd/types.hpp"

namespace kpd {

/// Poincare distance artanh|(a-b)/(1 - conj(a) b)| on the open unit disk.
double poincare_distance(Complex a, Complex b);

/// The family [t:1] -> ([t:1], [lambda t:1]); lands in the open domain for
/// every parameter exactly when lambda is not a nonnegative real.
D2Curve f_lambda(Complex lambda, double tol = 1e-12);

/// Closed-form squared speed of f_lambda at t: 2 Re(lambda/(lambda|t|^2-1)^2).
double positivity_profile(Complex lambda, Complex t);

/// C_alpha sqrt(n) with C_alpha = (|alpha| - |Im alpha|)/(|alpha| Re alpha);
/// the guaranteed positivity radius of f_{alpha/n}. Requires Re alpha > 0 and
/// alpha not a nonnegative real.
double positivity_radius(Complex alpha, long long n);

/// A disk whose lift stays positive: an ambient polynomial curve precomposed
/// onto the unit disk, with a sampled positivity certificate.
struct PositiveDisk {
  PolyCurve curve;     // defined on the closed unit disk
  double radius;       // reparametrization scale absorbed into curve
  double certificate;  // sampled minimum of the squared lift speed
};

/// Certifies positivity of the lift over a 64x64 polar grid (including the
/// boundary circle) with tenfold refinement around the sampled minimum.
/// Throws NumericError when the minimum is not positive.
PositiveDisk certify_disk(const QuadraticSpace& space, const PolyCurve& curve,
                          double radius = 1.0);

struct ChainLink {
  PositiveDisk disk;
  Complex a, b;              // anchors in the unit disk
  double endpoint_residual;  // worst projective gap at the two anchors
  long long n_used;          // family index when applicable, else 0
};

struct DiskChain {
  const QuadraticSpace* space = nullptr;
  std::vector<ChainLink> links;
  std::vector<CVec> endpoints;  // normalized representatives, links+1 of them
};

double chain_length(const DiskChain& chain);

/// Per-link report with columns link_index, n, a, b, delta,
/// cumulative_length, endpoint_residual, min_positivity. Complex anchors are
/// serialized as re{+,-}im i in a single field.
std::string chain_report_csv(const DiskChain& chain);

/// Re-checks every link: anchors inside the disk, endpoint residuals,
/// positive certificates, consecutive endpoint agreement.
void verify_chain(const DiskChain& chain, double tol = 1e-9);

/// The two-disk chain from ([0:1],[0:1]) to ([1:1],[1... the unipotent image
/// of the base point: disk one follows f_{alpha/n} on its positivity disk,
/// disk two the unipotent translate of f_beta; the meeting point solves the
/// quadratic intersection equation with the branch continuous in n.
DiskChain lemma57_chain(Complex alpha, Complex beta, long long n);

/// Chain of positive disks from p to q in the product model with total
/// length at most target_length. Routes through the waypoint (q_x, p_y);
/// degenerate configurations retry through a random nearby point.
DiskChain connect_d2(const D2Point& p, const D2Point& q, double target_length,
                     Rng& rng, int max_disks = 64);

/// Lengths of connect-style chains built with a fixed family index n for
/// each entry of the schedule.
std::vector<std::pair<long long, double>> kobayashi_upper_bound_series(
    const D2Point& p, const D2Point& q, const std::vector<long long>& schedule,
    Rng& rng);

/// A step of a twistor-line chain: the line and the point reached on it.
struct TwistorStep {
  TwistorLine line;
  PeriodPoint point;
};

/// Chain of twistor lines from p to q: step[i].line contains both the
/// previous point and step[i].point; the last point is q. Empty for p = q.
std::vector<TwistorStep> twistor_chain(const PeriodPoint& p, const PeriodPoint& q,
                                       Rng& rng);

/// Chain of positive disks from p to q in D with total length at most
/// target_length, built along a twistor-line chain through signature-(3,1)
/// envelopes and the product model.
DiskChain connect_D(const PeriodPoint& p, const PeriodPoint& q,
                    double target_length, Rng& rng, int max_disks = 64);

/// Degree-1 entire curve through the point with identically vanishing
/// pullback metric (an isotropic fiber line of a two-dimensional subdomain).
PolyCurve isotropic_line_through(const PeriodPoint& point);

}  // namespace kpd
