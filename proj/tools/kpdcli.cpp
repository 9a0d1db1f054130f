#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kpd/chains.hpp"
#include "kpd/csv.hpp"
#include "kpd/curvature.hpp"
#include "kpd/nevanlinna.hpp"
#include "kpd/period_domain.hpp"
#include "kpd/poly.hpp"
#include "kpd/product_model.hpp"
#include "kpd/quadratic_space.hpp"
#include "kpd/types.hpp"
#include "kpd/walls.hpp"

namespace {

using nlohmann::json;
using namespace kpd;

struct Options {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  bool recalibrate = false;
  json config = json::object();
  std::map<std::string, double> tol;
};

double tol_of(const Options& o, const std::string& name, double dflt) {
  auto it = o.tol.find(name);
  return it == o.tol.end() ? dflt : it->second;
}

json cfg_of(const Options& o, const std::string& command) {
  if (o.config.contains(command)) return o.config.at(command);
  return json::object();
}

template <typename T>
T cfg_get(const json& c, const std::string& key, T dflt) {
  if (c.contains(key)) return c.at(key).get<T>();
  return dflt;
}

void write_file(const Options& o, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(o.out_dir);
  std::filesystem::path p = std::filesystem::path(o.out_dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw PreconditionError("cannot open output file " + p.string());
  f << content;
}

std::filesystem::path constants_path(const Options& o) {
  return std::filesystem::path(o.out_dir) / "constants.json";
}

json load_constants(const Options& o) {
  std::ifstream f(constants_path(o));
  if (!f)
    throw PreconditionError(
        "missing constants cache " + constants_path(o).string() +
        "; run the calibrate command first or pass --recalibrate");
  json j;
  f >> j;
  return j;
}

json compute_constants(const Options& o, const std::vector<int>& p_list) {
  json gamma = json::object();
  for (int p : p_list) {
    QuadraticSpace space = QuadraticSpace::standard(p);
    Rng rng = make_rng(o.seed, 100 + p);
    gamma[std::to_string(p)] = gamma_constant(space, 5, 20, rng).value;
  }
  Rng rng_geom = make_rng(o.seed, 99);
  QuadraticSpace s1 = QuadraticSpace::standard(1);
  json out;
  out["seed"] = o.seed;
  out["kappa_geom"] = curvature_factor_calibrate(s1, 20, rng_geom).value;
  out["kappa_jensen"] = calibrate_kappa_jensen();
  out["gamma"] = gamma;
  return out;
}

/// Constants needed by an analytics command: from the cache, or recomputed
/// (and cached) under --recalibrate.
json constants_for(const Options& o, int p) {
  if (o.recalibrate) {
    json j = compute_constants(o, {p});
    write_file(o, "constants.json", j.dump(2) + "\n");
    return j;
  }
  json j = load_constants(o);
  if (!j.contains("kappa_jensen") || !j.contains("gamma") ||
      !j.at("gamma").contains(std::to_string(p)))
    throw PreconditionError(
        "constants cache has no entry for p=" + std::to_string(p) +
        "; rerun calibrate or pass --recalibrate");
  return j;
}

int cmd_calibrate(const Options& o) {
  json c = cfg_of(o, "calibrate");
  std::vector<int> p_list = cfg_get(c, "p_list", std::vector<int>{1, 2, 19});
  json j = compute_constants(o, p_list);
  write_file(o, "constants.json", j.dump(2) + "\n");
  std::cout << "kappa_geom=" << csv_num(j["kappa_geom"].get<double>())
            << " kappa_jensen=" << csv_num(j["kappa_jensen"].get<double>());
  for (int p : p_list)
    std::cout << " gamma[" << p
              << "]=" << csv_num(j["gamma"][std::to_string(p)].get<double>());
  std::cout << "\n";
  return 0;
}

int cmd_domain(const Options& o) {
  json c = cfg_of(o, "domain");
  int p = cfg_get(c, "p", 1);
  int count = cfg_get(c, "count", 20);
  QuadraticSpace space = QuadraticSpace::standard(p);
  Rng rng = make_rng(o.seed, 1);
  CsvDoc doc({"index", "kind", "membership", "sig_positive", "sig_negative"});
  for (int i = 0; i < count; ++i) {
    PeriodPoint pt = sample_domain_point(space, rng);
    Signature sig = metric_signature_at(pt);
    doc.row({csv_int(i), "D", to_string(membership(space, pt.rep())),
             csv_int(sig.positive), csv_int(sig.negative)});
  }
  for (int i = 0; i < count; ++i) {
    PeriodPoint pt = sample_omega_point(space, rng);
    Signature sig = metric_signature_at(pt);
    doc.row({csv_int(i), "Omega", to_string(membership(space, pt.rep())),
             csv_int(sig.positive), csv_int(sig.negative)});
  }
  write_file(o, "domain.csv", doc.str());
  return 0;
}

int cmd_metric(const Options& o) {
  json c = cfg_of(o, "metric");
  int p = cfg_get(c, "p", 19);
  int count = cfg_get(c, "count", 10);
  QuadraticSpace space = QuadraticSpace::standard(p);
  int n = space.dim();
  PeriodPoint base = from_positive_2plane(space, RVec(RVec::Unit(n, 0)),
                                          RVec(RVec::Unit(n, 1)));
  CsvDoc doc({"point", "sig_positive", "sig_negative"});
  Signature at_o = metric_signature_at(base);
  doc.row({"o", csv_int(at_o.positive), csv_int(at_o.negative)});
  std::cout << at_o.positive << "," << at_o.negative << "\n";
  Rng rng = make_rng(o.seed, 2);
  for (int i = 0; i < count; ++i) {
    PeriodPoint pt = sample_domain_point(space, rng);
    Signature sig = metric_signature_at(pt);
    doc.row({"s" + std::to_string(i), csv_int(sig.positive),
             csv_int(sig.negative)});
  }
  write_file(o, "metric.csv", doc.str());
  return 0;
}

int cmd_hsc(const Options& o) {
  json c = cfg_of(o, "hsc");
  int p = cfg_get(c, "p", 1);
  int points = cfg_get(c, "points", 5);
  int directions = cfg_get(c, "directions", 10);
  QuadraticSpace space = QuadraticSpace::standard(p);
  double gscale = gram_scale(space);
  Rng rng = make_rng(o.seed, 3);
  CsvDoc doc({"point", "direction", "neg_hsc"});
  for (int i = 0; i < points; ++i) {
    PeriodPoint pt = sample_omega_point(space, rng);
    for (int j = 0; j < directions; ++j) {
      CVec v;
      double m = 0.0;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        v = random_cvec(rng, space.dim());
        m = gs_metric(space, pt.rep(), v, v).real();
        if (m > 1e-2 * gscale * v.squaredNorm() / pt.s()) break;
        m = 0.0;
      }
      if (m == 0.0) throw NumericError("hsc: no positive direction found");
      doc.row({csv_int(i), csv_int(j), csv_num(-hsc(pt, v))});
    }
  }
  write_file(o, "hsc.csv", doc.str());
  Rng rng2 = make_rng(o.seed, 4);
  Calibration gamma = gamma_constant(space, points, directions, rng2);
  CsvDoc summary({"gamma", "spread"});
  summary.row({csv_num(gamma.value), csv_num(gamma.spread)});
  write_file(o, "hsc_summary.csv", summary.str());
  std::cout << "gamma=" << csv_num(gamma.value) << "\n";
  return 0;
}

int cmd_d2(const Options& o) {
  json c = cfg_of(o, "d2");
  int samples = cfg_get(c, "samples", 50);
  Rng rng = make_rng(o.seed, 5);
  const QuadraticSpace& space = d2_space();

  auto random_interior = [&](Rng& r) {
    while (true) {
      Pair2 x(Complex(uniform(r, -1, 1), uniform(r, -1, 1)),
              Complex(uniform(r, -1, 1), uniform(r, -1, 1)));
      Pair2 y(Complex(uniform(r, -1, 1), uniform(r, -1, 1)),
              Complex(uniform(r, -1, 1), uniform(r, -1, 1)));
      if (x.norm() < 0.3 || y.norm() < 0.3) continue;
      D2Point pt = d2_point(x, y);
      if (!boundary_test(pt, 1e-3)) return pt;
    }
  };

  double worst_quadric = 0.0, worst_roundtrip = 0.0, worst_tau = 0.0;
  double worst_metric = 0.0, worst_sl2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    D2Point pt = random_interior(rng);
    CVec x = iota(pt);
    worst_quadric = std::max(
        worst_quadric,
        std::abs(space.bilinear(x, x)) / x.squaredNorm());
    D2Point back = iota_inverse(x);
    worst_roundtrip = std::max(
        worst_roundtrip,
        std::max(projective_gap(CVec(back.x), CVec(pt.x)),
                 projective_gap(CVec(back.y), CVec(pt.y))));
    D2Point twice = tau(tau(pt));
    worst_tau = std::max(
        worst_tau, std::max(projective_gap(CVec(twice.x), CVec(pt.x)),
                            projective_gap(CVec(twice.y), CVec(pt.y))));

    // metric correspondence in the affine chart
    Complex xa = pt.x[0] / pt.x[1], ya = pt.y[0] / pt.y[1];
    if (std::abs(pt.x[1]) > 0.3 && std::abs(pt.y[1]) > 0.3 &&
        std::abs(xa * std::conj(ya) - 1.0) > 0.1) {
      Mat2 m = metric_matrix(xa, ya);
      // chart basis vectors push to iota-derivatives
      Poly one = Poly::constant(1.0);
      D2Curve cx{Poly({xa, 1.0}), one, Poly({ya}), one};
      D2Curve cy{Poly({xa}), one, Poly({ya, 1.0}), one};
      PolyCurve px = cx.push(), py = cy.push();
      CVec dx = px.derivative().eval(0.0), dy = py.derivative().eval(0.0);
      CVec base = px.eval(0.0);
      Complex hxy = gs_metric(space, base, dx, dy);
      Complex hxx = gs_metric(space, base, dx, dx);
      worst_metric = std::max(worst_metric, std::abs(hxy - m(0, 1)));
      worst_metric = std::max(worst_metric, std::abs(hxx - m(0, 0)));
    }

    Mat2 a;
    do {
      a(0, 0) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
    } while (std::abs(a(0, 0)) < 0.3);
    a(0, 1) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
    a(1, 0) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
    // make it unimodular: fix d from ad - bc = 1
    a(1, 1) = (Complex(1.0) + a(0, 1) * a(1, 0)) / a(0, 0);
    D2Point r1 = sl2_action(a, pt);
    D2Point r2 = sl2_action_via_h(a, pt);
    worst_sl2 = std::max(
        worst_sl2, std::max(projective_gap(CVec(r1.x), CVec(r2.x)),
                            projective_gap(CVec(r1.y), CVec(r2.y))));
  }
  CsvDoc doc({"check", "max_residual"});
  doc.row({"iota_quadric", csv_num(worst_quadric)});
  doc.row({"iota_inverse_roundtrip", csv_num(worst_roundtrip)});
  doc.row({"tau_involution", csv_num(worst_tau)});
  doc.row({"metric_correspondence", csv_num(worst_metric)});
  doc.row({"sl2_two_routes", csv_num(worst_sl2)});
  write_file(o, "d2.csv", doc.str());
  return 0;
}

int cmd_chain(const Options& o) {
  json c = cfg_of(o, "chain");
  std::vector<double> av = cfg_get(c, "alpha", std::vector<double>{1.0, 1.0});
  std::vector<double> bv = cfg_get(c, "beta", std::vector<double>{1.0, 1.0});
  Complex alpha(av.at(0), av.at(1)), beta(bv.at(0), bv.at(1));
  std::vector<long long> n_list = cfg_get(
      c, "n_list", std::vector<long long>{10, 100, 1000, 10000});
  double meet_tol = tol_of(o, "meeting", 1e-9);

  CsvDoc doc({"n", "length", "links", "certificate_min"});
  for (long long n : n_list) {
    DiskChain chain = lemma57_chain(alpha, beta, n);
    verify_chain(chain, meet_tol);
    double cert = 1e300;
    for (const ChainLink& l : chain.links)
      cert = std::min(cert, l.disk.certificate);
    doc.row({csv_int(n), csv_num(chain_length(chain)),
             csv_int(static_cast<long long>(chain.links.size())),
             csv_num(cert)});
    write_file(o, "lemma57_links_" + std::to_string(n) + ".csv",
               chain_report_csv(chain));
  }
  write_file(o, "lemma57.csv", doc.str());

  double target = cfg_get(c, "target_length", 1e-2);
  Rng rng = make_rng(o.seed, 6);
  D2Point p = d2_point(Pair2(Complex(0), Complex(1)),
                       Pair2(Complex(0), Complex(1)));
  D2Point q = d2_point(Pair2(Complex(1), Complex(1)),
                       Pair2(Complex(0.4, 0.3), Complex(1)));
  DiskChain cd2 = connect_d2(p, q, target, rng);
  verify_chain(cd2, meet_tol);

  int pp = cfg_get(c, "p", 2);
  QuadraticSpace space = QuadraticSpace::standard(pp);
  Rng rng2 = make_rng(o.seed, 7);
  PeriodPoint dp = sample_domain_point(space, rng2);
  PeriodPoint dq = sample_domain_point(space, rng2);
  DiskChain cd = connect_D(dp, dq, target, rng2);
  verify_chain(cd, meet_tol);

  CsvDoc conn({"model", "links", "length"});
  conn.row({"d2", csv_int(static_cast<long long>(cd2.links.size())),
            csv_num(chain_length(cd2))});
  conn.row({"D", csv_int(static_cast<long long>(cd.links.size())),
            csv_num(chain_length(cd))});
  write_file(o, "connect.csv", conn.str());
  write_file(o, "connect_d2_links.csv", chain_report_csv(cd2));
  write_file(o, "connect_D_links.csv", chain_report_csv(cd));
  return 0;
}

int cmd_twistor_chain(const Options& o) {
  json c = cfg_of(o, "twistor-chain");
  int p = cfg_get(c, "p", 2);
  QuadraticSpace space = QuadraticSpace::standard(p);
  Rng rng = make_rng(o.seed, 8);
  PeriodPoint a = sample_domain_point(space, rng);
  PeriodPoint b = sample_domain_point(space, rng);
  std::vector<TwistorStep> steps = twistor_chain(a, b, rng);
  CsvDoc doc({"step", "contains_previous", "contains_current"});
  const PeriodPoint* prev = &a;
  for (size_t i = 0; i < steps.size(); ++i) {
    doc.row({csv_int(static_cast<long long>(i)),
             csv_int(steps[i].line.contains(*prev) ? 1 : 0),
             csv_int(steps[i].line.contains(steps[i].point) ? 1 : 0)});
    prev = &steps[i].point;
  }
  write_file(o, "twistor_chain.csv", doc.str());
  std::cout << "steps=" << steps.size() << "\n";
  return 0;
}

PolyCurve curve_from_coeffs(
    const std::vector<std::vector<Complex>>& comps) {
  std::vector<Poly> ps;
  for (const auto& cc : comps) ps.emplace_back(cc);
  return PolyCurve(ps);
}

int cmd_nevanlinna(const Options& o) {
  json c = cfg_of(o, "nevanlinna");
  int p = cfg_get(c, "p", 1);
  QuadraticSpace space = QuadraticSpace::standard(p);
  json consts = constants_for(o, p);
  double kappa = consts.at("kappa_jensen").get<double>();
  double gamma = consts.at("gamma").at(std::to_string(p)).get<double>();

  std::vector<PolyCurve> curves;
  if (c.contains("curves")) {
    for (const auto& cj : c.at("curves"))
      curves.push_back(PolyCurve::from_json(cj));
  } else {
    curves.push_back(f_lambda(Complex(1.0, 1.0)).push());
    curves.push_back(curve_from_coeffs({{Complex(1.0)},
                                        {Complex(0.0), Complex(1.0)},
                                        {Complex(0.3)},
                                        {Complex(0.2), Complex(0.1)}}));
    curves.push_back(curve_from_coeffs(
        {{Complex(1.0)},
         {Complex(0.0), Complex(1.0)},
         {Complex(0.0), Complex(0.0), Complex(1.0)},
         {Complex(0.0), Complex(0.0), Complex(0.9)}}));
  }
  std::vector<double> radii = cfg_get(
      c, "radii", std::vector<double>{2.0, 5.0, 10.0, 20.0, 35.0, 50.0});

  for (size_t i = 0; i < curves.size(); ++i) {
    CharacteristicTable table = verify_prop67(space, curves[i], radii, kappa);
    CsvDoc doc({"r", "T_fs", "T_omega", "p_f", "residual"});
    for (const CharacteristicRow& row : table.rows)
      doc.row({csv_num(row.r), csv_num(row.t_fs), csv_num(row.t_omega),
               csv_num(row.p_f), csv_num(row.residual)});
    write_file(o, "characteristic_" + std::to_string(i + 1) + ".csv",
               doc.str());
  }

  PolyCurve smt_curve =
      c.contains("smt_curve")
          ? PolyCurve::from_json(c.at("smt_curve"))
          : curve_from_coeffs(
                {{Complex(1.0)},
                 {Complex(0.0), Complex(0.0), Complex(0.01)},
                 {Complex(0.0)},
                 {Complex(0.0), Complex(0.1)}});
  std::vector<double> smt_radii =
      cfg_get(c, "smt_radii", std::vector<double>{2.0, 4.0});
  std::vector<SmtRow> rows = smt_report(space, smt_curve, smt_radii, gamma);
  CsvDoc smt({"r", "gamma_T_omega", "T_sigma", "error_term"});
  for (const SmtRow& row : rows)
    smt.row({csv_num(row.r), csv_num(row.gamma_t_omega), csv_num(row.t_sigma),
             csv_num(row.error_term)});
  write_file(o, "smt.csv", smt.str());
  return 0;
}

int cmd_transport(const Options& o) {
  json c = cfg_of(o, "transport");
  int p = cfg_get(c, "p", 2);
  QuadraticSpace space = QuadraticSpace::standard(p);
  if (space.dim() < 5)
    throw PreconditionError("transport: default scenario needs p >= 2");
  int n = space.dim();
  double active_tol = tol_of(o, "active", 1e-9);

  WallSet walls;
  if (c.contains("walls")) {
    walls = WallSet::from_json(space, c.at("walls"));
  } else {
    RVec a1 = RVec::Unit(n, 3), a2 = RVec::Unit(n, 4);
    RVec a3 = 0.5 * RVec::Unit(n, 2) - RVec::Unit(n, 4);
    walls = make_wall_set(space, {a1, a2, a3});
  }
  write_file(o, "walls.json", walls.to_json().dump(2) + "\n");

  int samples = cfg_get(c, "samples", 41);
  double t_max = cfg_get(c, "t_max", 0.8);
  std::vector<PeriodPoint> path;
  for (int i = 0; i < samples; ++i) {
    double t = t_max * i / (samples - 1);
    CVec sig = CVec::Zero(n);
    sig[0] = std::cos(t);
    sig[2] = std::sin(t);
    sig[1] = Complex(0, 1);
    path.push_back(PeriodPoint::from_vector(space, sig));
  }

  RVec kappa = RVec::Zero(n);
  kappa[2] = 1.0; kappa[3] = 0.4; kappa[4] = 0.2;
  ChamberSignVector initial =
      chamber_signs(path.front(), kappa, walls, active_tol);

  Rng rng = make_rng(o.seed, 9);
  TransportResult res =
      transport_chamber(path, walls, initial, rng, active_tol);
  write_file(o, "transport_log.csv", transport_log_csv(res));
  CsvDoc signs({"wall_index", "sign"});
  for (size_t i = 0; i < res.final_signs.wall_indices.size(); ++i)
    signs.row({csv_int(res.final_signs.wall_indices[i]),
               csv_int(res.final_signs.signs[i])});
  write_file(o, "transport_signs.csv", signs.str());
  const char* status = res.status == TransportStatus::kOk          ? "OK"
                       : res.status == TransportStatus::kAmbiguous ? "AMBIGUOUS"
                                                                   : "INFEASIBLE";
  std::cout << "status=" << status
            << " coarse_sampling=" << (res.coarse_sampling ? 1 : 0) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"period-domain numerics"};
  app.require_subcommand(1);

  Options opt;
  std::string config_path;
  std::vector<std::string> tol_args;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--seed", opt.seed, "base seed");
  app.add_flag("--recalibrate", opt.recalibrate,
               "recompute constants instead of loading the cache");
  app.add_option("--tol", tol_args, "tolerance override NAME=VALUE");

  for (const char* name :
       {"domain", "metric", "hsc", "d2", "chain", "twistor-chain",
        "nevanlinna", "transport", "calibrate"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    nlohmann::json err{{"error", {{"kind", "precondition"},
                                  {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 2;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f)
        throw kpd::PreconditionError("cannot read config " + config_path);
      f >> opt.config;
    }
    for (const std::string& t : tol_args) {
      size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw kpd::PreconditionError("--tol expects NAME=VALUE");
      opt.tol[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }

    std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "domain") return cmd_domain(opt);
    if (cmd == "metric") return cmd_metric(opt);
    if (cmd == "hsc") return cmd_hsc(opt);
    if (cmd == "d2") return cmd_d2(opt);
    if (cmd == "chain") return cmd_chain(opt);
    if (cmd == "twistor-chain") return cmd_twistor_chain(opt);
    if (cmd == "nevanlinna") return cmd_nevanlinna(opt);
    if (cmd == "transport") return cmd_transport(opt);
    if (cmd == "calibrate") return cmd_calibrate(opt);
    throw kpd::PreconditionError("unknown command " + cmd);
  } catch (const kpd::PreconditionError& e) {
    nlohmann::json err{{"error", {{"kind", "precondition"},
                                  {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 2;
  } catch (const kpd::NumericError& e) {
    nlohmann::json err{{"error", {{"kind", "numeric"},
                                  {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"kind", "precondition"},
                                  {"message", e.what()}}}};
    std::cout << err.dump() << "\n";
    return 2;
  }
}
