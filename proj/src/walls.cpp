#include "kpd/walls.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

namespace kpd {

namespace {

/// argmax_j |q(n0, basis_j)|, lowest index on ties; the completion
/// v = u1 - (q(u1, u1)/2) n0 with u1 = basis_j / q(n0, basis_j) satisfies
/// q(n0, v) = 1 and q(v, v) = 0 identically.
RVec completion_against(const QuadraticSpace& space, const RVec& n0,
                        const std::vector<RVec>& basis, double tol) {
  int best_j = -1;
  double best = 0.0;
  for (int j = 0; j < static_cast<int>(basis.size()); ++j) {
    double m = std::abs(space.bilinear(n0, basis[j]));
    if (m > best) { best = m; best_j = j; }
  }
  double scale = gram_scale(space) * n0.norm();
  if (best_j < 0 || best <= tol * scale)
    throw PreconditionError(
        "hyperbolic_completion: n0 pairs to zero with the whole basis");
  RVec u1 = basis[best_j] / space.bilinear(n0, basis[best_j]);
  return u1 - 0.5 * space.bilinear(u1, u1) * n0;
}

/// q-orthonormal frame of span(plane + extra) whose first two vectors span
/// the plane (in order); completion vectors are sorted positive norm first.
std::vector<RVec> adapted_frame(const QuadraticSpace& space,
                                const std::vector<RVec>& plane,
                                const std::vector<RVec>& extra, double tol) {
  double gscale = gram_scale(space);
  std::vector<RVec> frame;
  auto reduce = [&](RVec x) {
    for (const RVec& f : frame)
      x -= (space.bilinear(x, f) / space.bilinear(f, f)) * f;
    return x;
  };
  for (const RVec& p : plane) {
    RVec v = reduce(p);
    double nrm = space.bilinear(v, v);
    if (nrm <= tol * gscale * v.squaredNorm() || v.squaredNorm() == 0.0)
      throw PreconditionError(
          "isometry_fixing_N: plane is not an independent positive pair");
    frame.push_back(v / std::sqrt(nrm));
  }
  std::vector<RVec> pending = extra;
  double span_scale = 0.0;
  for (const RVec& x : pending) span_scale = std::max(span_scale, x.norm());
  while (!pending.empty()) {
    int best_i = -1;
    double best_score = 0.0;
    RVec best_res;
    bool leftover = false;
    for (int i = 0; i < static_cast<int>(pending.size()); ++i) {
      RVec r = reduce(pending[i]);
      double r2 = r.squaredNorm();
      if (r2 <= 1e-18 * span_scale * span_scale) continue;
      leftover = true;
      double score = std::abs(space.bilinear(r, r)) / (gscale * r2);
      if (score > best_score) { best_score = score; best_i = i; best_res = r; }
    }
    if (!leftover) break;
    if (best_i < 0 || best_score <= tol)
      throw NumericError(
          "isometry_fixing_N: q-degenerate residual while completing a frame");
    double nrm = space.bilinear(best_res, best_res);
    frame.push_back(best_res / std::sqrt(std::abs(nrm)));
    pending.erase(pending.begin() + best_i);
  }
  std::stable_partition(frame.begin() + plane.size(), frame.end(),
                        [&](const RVec& v) { return space.bilinear(v, v) > 0; });
  return frame;
}

RMat columns(const std::vector<RVec>& vs, int n) {
  RMat m(n, static_cast<int>(vs.size()));
  for (int j = 0; j < m.cols(); ++j) m.col(j) = vs[j];
  return m;
}

void check_plane(const QuadraticSpace& space, const RMat& plane,
                 const std::vector<RVec>& n_basis, double tol,
                 const char* name) {
  if (plane.rows() != space.dim() || plane.cols() != 2)
    throw PreconditionError(std::string("isometry_fixing_N: ") + name +
                            " must be an n x 2 matrix");
  RMat g2 = plane.transpose() * space.gram() * plane;
  Signature sig = signature_of(g2);
  if (sig.positive != 2)
    throw PreconditionError(std::string("isometry_fixing_N: ") + name +
                            " is not a positive 2-plane");
  double gscale = gram_scale(space);
  for (const RVec& nvec : n_basis)
    for (int c = 0; c < 2; ++c)
      if (std::abs(space.bilinear(nvec, RVec(plane.col(c)))) >
          tol * gscale * nvec.norm() * plane.col(c).norm())
        throw PreconditionError(std::string("isometry_fixing_N: ") + name +
                                " is not orthogonal to N");
}

struct WitnessSearch {
  RVec kappa;
  double margin = -1.0;
  bool feasible = false;
};

/// Max-min-margin search for kappa in the real orthogonal complement of the
/// period with q(kappa, kappa) > 0 and prescribed signs against the listed
/// walls. The slice c0 + span(rest) of the positive cone is explored by
/// annealed random ascent from 64 restarts.
WitnessSearch find_witness(const PeriodPoint& point,
                           const std::vector<std::pair<RVec, int>>& constraints,
                           Rng& rng) {
  const QuadraticSpace& space = point.space();
  int n = space.dim();
  double gscale = gram_scale(space);
  const CVec& sigma = point.rep();
  RVec sr = sigma.real(), si = sigma.imag();
  std::vector<RVec> span_vecs = {sr};
  RVec si_res = si - (si.dot(sr) / sr.squaredNorm()) * sr;
  if (si_res.norm() > 1e-9 * (si.norm() + 1e-300)) span_vecs.push_back(si);
  std::vector<RVec> comp = orthogonal_complement_real(space, span_vecs);
  int m = static_cast<int>(comp.size());
  RMat w = columns(comp, n);
  RMat qw = w.transpose() * space.gram() * w;

  Eigen::SelfAdjointEigenSolver<RMat> es(qw);
  RVec ev = es.eigenvalues();
  int top = m - 1;  // eigenvalues ascending
  if (ev[top] <= 1e-12 * std::max(1.0, std::abs(ev[0])))
    return {};  // no positive direction orthogonal to the period
  RVec c0 = es.eigenvectors().col(top) / std::sqrt(ev[top]);

  auto margin_of = [&](const RVec& c) {
    RVec k = w * c;
    if (space.bilinear(k, k) <= 0.0) return -1.0;
    double kn = k.norm();
    double worst = 1e300;
    for (const auto& [alpha, sgn] : constraints) {
      double v = sgn * space.bilinear(k, alpha) / (gscale * kn * alpha.norm());
      worst = std::min(worst, v);
    }
    return constraints.empty() ? 1.0 : worst;
  };

  WitnessSearch out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int restart = 0; restart < 64; ++restart) {
    RVec c = c0;
    if (restart > 0) {
      RVec y(m);
      for (int j = 0; j < m; ++j) y[j] = 0.5 * gauss(rng);
      c = c0 + y - y.dot(c0) / c0.squaredNorm() * c0;
      for (int halve = 0; halve < 60 && space.bilinear(RVec(w * c), RVec(w * c)) <= 0.0;
           ++halve)
        c = 0.5 * (c + c0);
    }
    double cur = margin_of(c);
    double step = 0.5;
    for (int iter = 0; iter < 120; ++iter) {
      RVec d(m);
      for (int j = 0; j < m; ++j) d[j] = gauss(rng);
      RVec cand = c + step * d;
      double v = margin_of(cand);
      if (v > cur) { c = cand; cur = v; } else { step *= 0.96; }
    }
    if (cur > out.margin) {
      out.margin = cur;
      out.kappa = w * c;
      out.kappa /= out.kappa.norm();
    }
  }
  out.feasible = out.margin > 0.0;
  return out;
}

std::vector<int> active_set(const QuadraticSpace& space, const CVec& sigma,
                            const WallSet& walls, double tol) {
  double gscale = gram_scale(space);
  std::vector<int> act;
  for (int i = 0; i < static_cast<int>(walls.classes.size()); ++i) {
    const RVec& alpha = walls.classes[i];
    Complex v = space.bilinear(CVec(alpha.cast<Complex>()), sigma);
    if (std::abs(v) <= tol * gscale * alpha.norm()) act.push_back(i);
  }
  return act;
}

}  // namespace

RVec hyperbolic_completion(const QuadraticSpace& space, const RVec& n0,
                           double tol) {
  if (n0.size() != space.dim())
    throw PreconditionError("hyperbolic_completion: dimension mismatch");
  double n2 = n0.squaredNorm();
  if (n2 == 0.0) throw PreconditionError("hyperbolic_completion: zero vector");
  if (std::abs(space.bilinear(n0, n0)) > tol * gram_scale(space) * n2)
    throw PreconditionError("hyperbolic_completion: n0 is not isotropic");
  std::vector<RVec> basis;
  for (int j = 0; j < space.dim(); ++j)
    basis.push_back(RVec(RVec::Unit(space.dim(), j)));
  return completion_against(space, n0, basis, tol);
}

RMat isometry_fixing_N(const QuadraticSpace& space,
                       const std::vector<RVec>& n_basis, const RMat& plane_p,
                       const RMat& plane_q, double tol) {
  int n = space.dim();
  int k = static_cast<int>(n_basis.size());
  if (k > 0) {
    RMat b = columns(n_basis, n);
    RMat gn = b.transpose() * space.gram() * b;
    Signature nsig = signature_of(gn, tol);
    if (nsig.positive >= 2)
      throw PreconditionError("isometry_fixing_N: N contains a positive 2-plane");
    if (nsig.null > 1)
      throw PreconditionError(
          "isometry_fixing_N: kernel of q restricted to N has dimension > 1");
  }
  check_plane(space, plane_p, n_basis, tol, "plane_p");
  check_plane(space, plane_q, n_basis, tol, "plane_q");

  std::vector<RVec> plane_p_cols = {RVec(plane_p.col(0)), RVec(plane_p.col(1))};
  std::vector<RVec> plane_q_cols = {RVec(plane_q.col(0)), RVec(plane_q.col(1))};

  std::vector<RVec> a_p_cols, a_q_cols;
  if (k == 0) {
    std::vector<RVec> ambient;
    for (int j = 0; j < n; ++j) ambient.push_back(RVec(RVec::Unit(n, j)));
    a_p_cols = adapted_frame(space, plane_p_cols, ambient, tol);
    a_q_cols = adapted_frame(space, plane_q_cols, ambient, tol);
  } else {
    RMat b = columns(n_basis, n);
    RMat gn = b.transpose() * space.gram() * b;
    Eigen::SelfAdjointEigenSolver<RMat> es(gn);
    double spec = es.eigenvalues().cwiseAbs().maxCoeff();
    double thr = tol * std::max(1.0, spec);
    std::vector<RVec> n_prime;
    RVec n0;
    bool degenerate = false;
    for (int i = 0; i < k; ++i) {
      RVec v = b * es.eigenvectors().col(i);
      if (std::abs(es.eigenvalues()[i]) <= thr) {
        n0 = v / v.norm();
        degenerate = true;
      } else {
        n_prime.push_back(v);
      }
    }

    std::vector<RVec> comp = orthogonal_complement_real(space, n_basis);
    if (!degenerate) {
      a_p_cols = n_basis;
      a_q_cols = n_basis;
      std::vector<RVec> fp = adapted_frame(space, plane_p_cols, comp, tol);
      std::vector<RVec> fq = adapted_frame(space, plane_q_cols, comp, tol);
      a_p_cols.insert(a_p_cols.end(), fp.begin(), fp.end());
      a_q_cols.insert(a_q_cols.end(), fq.begin(), fq.end());
    } else {
      std::vector<RVec> around_p = n_prime, around_q = n_prime;
      around_p.insert(around_p.end(), plane_p_cols.begin(), plane_p_cols.end());
      around_q.insert(around_q.end(), plane_q_cols.begin(), plane_q_cols.end());
      std::vector<RVec> v_p = orthogonal_complement_real(space, around_p);
      std::vector<RVec> v_q = orthogonal_complement_real(space, around_q);
      RVec h_p = completion_against(space, n0, v_p, tol);
      RVec h_q = completion_against(space, n0, v_q, tol);

      std::vector<RVec> hyper_p = n_prime, hyper_q = n_prime;
      hyper_p.push_back(n0); hyper_p.push_back(h_p);
      hyper_q.push_back(n0); hyper_q.push_back(h_q);
      std::vector<RVec> t_p = orthogonal_complement_real(space, hyper_p);
      std::vector<RVec> t_q = orthogonal_complement_real(space, hyper_q);
      std::vector<RVec> fp = adapted_frame(space, plane_p_cols, t_p, tol);
      std::vector<RVec> fq = adapted_frame(space, plane_q_cols, t_q, tol);

      a_p_cols = n_prime;
      a_q_cols = n_prime;
      a_p_cols.push_back(n0); a_p_cols.push_back(h_p);
      a_q_cols.push_back(n0); a_q_cols.push_back(h_q);
      a_p_cols.insert(a_p_cols.end(), fp.begin(), fp.end());
      a_q_cols.insert(a_q_cols.end(), fq.begin(), fq.end());
    }
  }

  if (static_cast<int>(a_p_cols.size()) != n ||
      static_cast<int>(a_q_cols.size()) != n)
    throw NumericError("isometry_fixing_N: frame assembly is not full rank");
  RMat a_p = columns(a_p_cols, n);
  RMat a_q = columns(a_q_cols, n);
  RMat g = a_q * a_p.partialPivLu().solve(RMat::Identity(n, n));

  double gscale = gram_scale(space);
  if ((g.transpose() * space.gram() * g - space.gram()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, gscale))
    throw NumericError("isometry_fixing_N: isometry postcondition failed");
  return g;
}

WallSet WallSet::from_json(const QuadraticSpace& space,
                           const nlohmann::json& j) {
  std::vector<RVec> classes;
  for (const auto& row : j.at("walls")) {
    RVec v(space.dim());
    if (static_cast<int>(row.size()) != space.dim())
      throw PreconditionError("WallSet: wall dimension mismatch");
    for (int i = 0; i < space.dim(); ++i) v[i] = row.at(i).get<double>();
    classes.push_back(v);
  }
  return make_wall_set(space, std::move(classes));
}

nlohmann::json WallSet::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const RVec& a : classes) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < a.size(); ++i) row.push_back(a[i]);
    arr.push_back(row);
  }
  return nlohmann::json{{"walls", arr}};
}

WallSet make_wall_set(const QuadraticSpace& space, std::vector<RVec> classes,
                      double tol) {
  double gscale = gram_scale(space);
  for (const RVec& a : classes) {
    if (a.size() != space.dim())
      throw PreconditionError("make_wall_set: wall dimension mismatch");
    if (space.bilinear(a, a) >= -tol * gscale * a.squaredNorm())
      throw PreconditionError("make_wall_set: walls must be negative classes");
  }
  for (size_t i = 0; i < classes.size(); ++i)
    for (size_t j = i + 1; j < classes.size(); ++j) {
      double c = std::abs(classes[i].dot(classes[j]));
      if (c >= (1.0 - 1e-12) * classes[i].norm() * classes[j].norm())
        throw PreconditionError("make_wall_set: proportional walls");
    }
  return WallSet{std::move(classes)};
}

ChamberSignVector chamber_signs(const PeriodPoint& point, const RVec& kappa,
                                const WallSet& walls, double tol) {
  const QuadraticSpace& space = point.space();
  if (kappa.size() != space.dim())
    throw PreconditionError("chamber_signs: kappa dimension mismatch");
  double gscale = gram_scale(space);
  const CVec& sigma = point.rep();
  Complex ks = space.bilinear(CVec(kappa.cast<Complex>()), sigma);
  if (std::abs(ks) > tol * gscale * kappa.norm())
    throw PreconditionError("chamber_signs: kappa is not orthogonal to the period");
  if (space.bilinear(kappa, kappa) <= tol * gscale * kappa.squaredNorm())
    throw PreconditionError("chamber_signs: kappa is not a positive class");

  ChamberSignVector out;
  for (int idx : active_set(space, sigma, walls, tol)) {
    const RVec& alpha = walls.classes[idx];
    double v = space.bilinear(kappa, alpha);
    if (std::abs(v) <= tol * gscale * kappa.norm() * alpha.norm())
      throw PreconditionError(
          "chamber_signs: AMBIGUOUS, kappa lies on active wall " +
          std::to_string(idx) + "; perturb kappa");
    out.wall_indices.push_back(idx);
    out.signs.push_back(v > 0.0 ? 1 : -1);
  }
  return out;
}

TransportResult transport_chamber(const std::vector<PeriodPoint>& path,
                                  const WallSet& walls,
                                  const ChamberSignVector& initial, Rng& rng,
                                  double tol) {
  if (path.empty()) throw PreconditionError("transport_chamber: empty path");
  if (initial.wall_indices.size() != initial.signs.size())
    throw PreconditionError("transport_chamber: malformed initial signs");
  const QuadraticSpace& space = path.front().space();
  double gscale = gram_scale(space);

  std::vector<int> active = active_set(space, path[0].rep(), walls, tol);
  if (active != initial.wall_indices)
    throw PreconditionError(
        "transport_chamber: initial signs do not match the active walls at "
        "the first sample");
  std::map<int, int> signs;
  for (size_t i = 0; i < initial.wall_indices.size(); ++i) {
    int s = initial.signs[i];
    if (s != 1 && s != -1)
      throw PreconditionError("transport_chamber: signs must be +1 or -1");
    signs[initial.wall_indices[i]] = s;
  }

  TransportResult result;
  std::vector<int> prev_active = active;

  // Pairing of every wall with every sample, and each wall's pairing scale
  // along the path. An activity flip is resolved when its far-side sample
  // already sits near zero relative to that scale.
  const int nw = static_cast<int>(walls.classes.size());
  const int ns = static_cast<int>(path.size());
  std::vector<std::vector<Complex>> wall_vals(nw, std::vector<Complex>(ns));
  std::vector<double> wall_scale(nw, 0.0);
  for (int w = 0; w < nw; ++w) {
    CVec alpha = walls.classes[w].cast<Complex>();
    for (int j = 0; j < ns; ++j) {
      wall_vals[w][j] = space.bilinear(alpha, path[j].rep());
      wall_scale[w] = std::max(wall_scale[w], std::abs(wall_vals[w][j]));
    }
  }
  auto resolved_flip = [&](int w, Complex far_side) {
    double floor_ = 32.0 * tol * gscale * walls.classes[w].norm();
    return std::abs(far_side) <= std::max(0.25 * wall_scale[w], floor_);
  };

  for (int i = 0; i < static_cast<int>(path.size()); ++i) {
    const PeriodPoint& pt = path[i];
    std::vector<int> act = active_set(space, pt.rep(), walls, tol);
    std::vector<int> fresh;
    if (i > 0) {
      for (int idx : act)
        if (!std::binary_search(prev_active.begin(), prev_active.end(), idx)) {
          result.log.push_back({i, idx, "activated"});
          fresh.push_back(idx);
          if (!resolved_flip(idx, wall_vals[idx][i - 1]))
            result.coarse_sampling = true;
        }
      for (int idx : prev_active)
        if (!std::binary_search(act.begin(), act.end(), idx)) {
          result.log.push_back({i, idx, "deactivated"});
          if (!resolved_flip(idx, wall_vals[idx][i]))
            result.coarse_sampling = true;
          signs.erase(idx);
        }
      // A pairing that swings past zero between two inactive samples is a
      // crossing the sampling never caught near zero.
      for (int w = 0; w < nw; ++w) {
        if (std::binary_search(act.begin(), act.end(), w) ||
            std::binary_search(prev_active.begin(), prev_active.end(), w))
          continue;
        Complex w1 = wall_vals[w][i - 1], w2 = wall_vals[w][i];
        double floor_ = 32.0 * tol * gscale * walls.classes[w].norm();
        if (std::abs(w1) <= floor_ || std::abs(w2) <= floor_) continue;
        if (std::real(std::conj(w1) * w2) >= 0.0) continue;
        double dist =
            std::abs(std::imag(std::conj(w1) * w2)) / std::abs(w2 - w1);
        if (dist <= 0.05 * wall_scale[w]) {
          result.log.push_back({i, w, "crossing_missed"});
          result.coarse_sampling = true;
        }
      }
    }

    std::vector<std::pair<RVec, int>> constraints;
    for (int idx : act) {
      auto it = signs.find(idx);
      if (it != signs.end())
        constraints.emplace_back(walls.classes[idx], it->second);
    }
    WitnessSearch ws = find_witness(pt, constraints, rng);
    if (!ws.feasible) {
      result.status = TransportStatus::kInfeasible;
      break;
    }
    if (ws.margin < 1e-8) {
      result.status = TransportStatus::kAmbiguous;
      break;
    }
    result.witnesses.push_back(ws.kappa);

    bool stuck = false;
    for (int idx : fresh) {
      double v = space.bilinear(ws.kappa, walls.classes[idx]);
      if (std::abs(v) <=
          1e-8 * gscale * ws.kappa.norm() * walls.classes[idx].norm()) {
        result.status = TransportStatus::kAmbiguous;
        stuck = true;
        break;
      }
      int s = v > 0.0 ? 1 : -1;
      signs[idx] = s;
      result.log.push_back({i, idx, s > 0 ? "sign+" : "sign-"});
    }
    if (stuck) break;
    prev_active = act;
  }

  for (const auto& [idx, s] : signs) {
    result.final_signs.wall_indices.push_back(idx);
    result.final_signs.signs.push_back(s);
  }
  return result;
}

std::string transport_log_csv(const TransportResult& result) {
  std::ostringstream out;
  out << "sample_index,wall_index,event\n";
  for (const TransportEvent& e : result.log)
    out << e.sample_index << "," << e.wall_index << "," << e.event << "\n";
  return out.str();
}

}  // namespace kpd
