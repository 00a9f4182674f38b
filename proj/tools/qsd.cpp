#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsd/assumptions.hpp"
#include "qsd/coupling.hpp"
#include "qsd/eigen.hpp"
#include "qsd/errors.hpp"
#include "qsd/io/json_io.hpp"
#include "qsd/mc/monte_carlo.hpp"
#include "qsd/models/diffusion.hpp"
#include "qsd/models/nonuniformity.hpp"
#include "qsd/semigroup.hpp"

namespace fs = std::filesystem;
using namespace qsd;
using io::Json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0, kExitError = 1, kExitRefuted = 2;

struct Options {
  std::string command;
  std::string model, exhaustion, constants, replay_cert;
  std::string out = "qsd_run";
  std::string run_dir;
  std::uint64_t seed = 1;
  double tol = kDefaultTol;
  int threads = 0;
  std::string mu = "delta:1";
  double t_h = 30.0, t_mix = 0.0;
  int n_rn = -1;
  double xi_rn = 1.0;
  double t = 1.0, eps = 0.1, rho = 1.0, dt = 1e-3;
  std::size_t paths = 10000, particles = 1000;
  std::string method = "naive";
  std::vector<std::size_t> heights;
  std::vector<int> levels;
  bool stop_at_witness = false;
  std::vector<double> x0{0.0};
  double n0 = 1.0;
};

// Results of one run: files are written into `dir` and recorded in order.
struct Run {
  fs::path dir;
  std::vector<std::string> outputs;
  Json summary = Json::object();

  void json(const std::string& name, const Json& doc) {
    io::write_json(dir / name, doc);
    outputs.push_back(name);
  }
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    io::write_csv(dir / name, header, rows);
    outputs.push_back(name);
  }
};

Json options_json(const Options& o) {
  return {{"model", o.model},         {"exhaustion", o.exhaustion}, {"constants", o.constants},
          {"replay", o.replay_cert},  {"seed", o.seed},             {"tol", o.tol},
          {"mu", o.mu},               {"t_h", o.t_h},               {"t_mix", o.t_mix},
          {"n_rn", o.n_rn},           {"xi_rn", o.xi_rn},
          {"t", o.t},                 {"eps", o.eps},               {"rho", o.rho},
          {"dt", o.dt},               {"paths", o.paths},           {"particles", o.particles},
          {"method", o.method},       {"heights", o.heights},       {"levels", o.levels},
          {"stop_at_witness", o.stop_at_witness}, {"x0", o.x0},     {"n0", o.n0}};
}

Options options_from_json(const std::string& command, const Json& a) {
  Options o;
  o.command = command;
  o.model = a.at("model");
  o.exhaustion = a.at("exhaustion");
  o.constants = a.at("constants");
  o.replay_cert = a.at("replay");
  o.seed = a.at("seed");
  o.tol = a.at("tol");
  o.mu = a.at("mu");
  o.t_h = a.at("t_h");
  o.t_mix = a.at("t_mix");
  o.n_rn = a.at("n_rn");
  o.xi_rn = a.at("xi_rn");
  o.t = a.at("t");
  o.eps = a.at("eps");
  o.rho = a.at("rho");
  o.dt = a.at("dt");
  o.paths = a.at("paths");
  o.particles = a.at("particles");
  o.method = a.at("method");
  o.heights = a.at("heights").get<std::vector<std::size_t>>();
  o.levels = a.at("levels").get<std::vector<int>>();
  o.stop_at_witness = a.at("stop_at_witness");
  o.x0 = a.at("x0").get<std::vector<double>>();
  o.n0 = a.at("n0");
  return o;
}

const SubMarkovGenerator& need_generator(const io::LoadedModel& m) {
  if (!m.gen) throw ConfigError("model: this task needs a finite generator (diffusion models need a \"grid\")");
  return *m.gen;
}

Exhaustion load_exhaustion(const Options& o, std::size_t n) {
  if (!o.exhaustion.empty()) return io::exhaustion_from_json(io::read_json(o.exhaustion), n);
  if (n < 2) throw ConfigError("exhaustion: a one-state model needs an explicit --exhaustion");
  return Exhaustion::prefix({1, n}, 0, 1, 1);
}

double mix_time(const Options& o, const EigenPair& ep) {
  if (o.t_mix > 0.0) return o.t_mix;
  return std::isfinite(ep.gap_estimate) && ep.gap_estimate > 0.0 ? 1.0 / ep.gap_estimate : 1.0;
}

CouplingOptions coupling_options(const Options& o) {
  CouplingOptions c;
  if (o.n_rn >= 0) c.n_rn = static_cast<std::size_t>(o.n_rn);
  c.xi_rn = o.xi_rn;
  c.tol = o.tol;
  return c;
}

CertificateSet certify(const SubMarkovGenerator& g, const Exhaustion& exh, const EigenPair& ep, double t_mix,
                       double tol) {
  auto grid = default_time_grid(g, ep);
  CertificateSet cs;
  cs.mix = check_mix(g, exh, exh.c, t_mix, std::nullopt, tol);
  if (cs.mix.alpha_c) cs.dc = check_dc(g, exh, *cs.mix.alpha_c, grid.front(), grid, ep, tol);
  else cs.dc.kind = AssumptionKind::Dc;
  cs.et = check_et(g, exh, escape_rate_ceiling(g, exh));
  cs.sv = check_sv(g, exh, grid, tol);
  cs.lj = check_lj();
  return cs;
}

int cmd_solve(const Options& o, Run& run) {
  auto m = io::load_model(o.model);
  const auto& g = need_generator(m);
  auto ep = solve_eigentriple(g, o.tol);
  run.json("eigen.json", io::to_json(ep));
  std::vector<std::vector<double>> rows;
  auto beta = ep.beta();
  for (std::size_t i = 0; i < g.size(); ++i)
    rows.push_back({static_cast<double>(i + 1), ep.alpha[i], ep.eta[i], beta[i]});
  run.csv("eigen.csv", {"state", "alpha", "eta", "beta"}, rows);
  run.summary = {{"lambda0", ep.lambda0},
                 {"residual_left", ep.residual_left},
                 {"residual_right", ep.residual_right},
                 {"gap_estimate", std::isfinite(ep.gap_estimate) ? Json(ep.gap_estimate) : Json("inf")},
                 {"iterations", ep.iterations},
                 {"states", g.size()}};
  std::cout << "lambda0 = " << io::format_double(ep.lambda0) << "\n";
  return kExitOk;
}

int cmd_verify(const Options& o, Run& run) {
  auto m = io::load_model(o.model);
  const auto& g = need_generator(m);
  auto exh = load_exhaustion(o, g.size());
  auto ep = solve_eigentriple(g, std::min(o.tol, 1e-12));
  if (!o.replay_cert.empty()) {
    auto doc = io::read_json(o.replay_cert);
    auto cs = io::certificate_set_from_json(doc);
    Json rep = Json::object();
    bool ok = true;
    for (const auto* c : cs.all()) {
      auto r = replay_certificate(*c, g, exh, ep, o.tol);
      rep[to_string(c->kind)] = {{"ok", r.ok}, {"worst_slack", r.worst_slack}, {"detail", r.detail}};
      ok = ok && r.ok;
      std::cout << to_string(c->kind) << ": " << (r.ok ? "replayed" : "REFUTED") << " (" << r.detail << ")\n";
    }
    rep["all_ok"] = ok;
    run.json("replay.json", rep);
    run.summary = {{"replay", rep}};
    return ok ? kExitOk : kExitRefuted;
  }
  auto cs = certify(g, exh, ep, mix_time(o, ep), o.tol);
  run.json("certificates.json", io::to_json(cs));
  Json summary = {{"lambda0", ep.lambda0}, {"all_hold", cs.all_hold()}};
  Json certs = Json::object();
  for (const auto* c : cs.all()) {
    Json e = {{"verdict", c->holds ? "holds" : "fails"}};
    if (c->counterexample) e["counterexample"] = *c->counterexample + 1;
    certs[to_string(c->kind)] = e;
    std::cout << to_string(c->kind) << ": " << (c->holds ? "holds" : "FAILS") << "\n";
  }
  summary["certificates"] = certs;
  if (cs.et.has("e_T")) summary["e_T"] = cs.et.param("e_T");
  if (cs.et.has("rho")) summary["rho_eT"] = cs.et.param("rho");
  if (cs.sv.has("rho_sv")) summary["rho_sv"] = cs.sv.param("rho_sv");
  summary["gap_estimate"] = std::isfinite(ep.gap_estimate) ? Json(ep.gap_estimate) : Json("inf");
  if (cs.all_hold()) {
    CouplingDiagnostics diag;
    auto k = derive_coupling_constants(g, exh, cs, ep, coupling_options(o), &diag);
    run.json("constants.json", io::to_json(k));
    summary["zeta"] = k.zeta();
    summary["prefactor"] = k.prefactor();
    summary["c_bar"] = k.c_bar();
    std::cout << "zeta = " << io::format_double(k.zeta()) << "\n";
  }
  run.summary = summary;
  return cs.all_hold() ? kExitOk : kExitRefuted;
}

int cmd_couple(const Options& o, Run& run) {
  auto m = io::load_model(o.model);
  const auto& g = need_generator(m);
  auto ep = solve_eigentriple(g, std::min(o.tol, 1e-12));
  CouplingConstants k;
  if (!o.constants.empty()) {
    k = io::coupling_constants_from_json(io::read_json(o.constants));
  } else {
    auto exh = load_exhaustion(o, g.size());
    auto cs = certify(g, exh, ep, mix_time(o, ep), o.tol);
    if (!cs.all_hold()) {
      run.json("certificates.json", io::to_json(cs));
      run.summary = {{"refuted", "assumption certificates fail; no coupling constants"}};
      std::cout << "assumptions refuted; see certificates.json\n";
      return kExitRefuted;
    }
    k = derive_coupling_constants(g, exh, cs, ep, coupling_options(o));
  }
  if (k.alpha_c.size() != g.size()) throw ConfigError("constants.alpha_c: length differs from the state count");
  auto mu = io::parse_measure(o.mu, g.size(), &ep);
  CouplingEngine eng(g, k, o.tol);
  auto r = eng.run(mu, o.t_h);
  std::vector<std::vector<double>> rows;
  double worst_ser = 0.0, worst_id = 0.0;
  for (const auto& row : r.trace) {
    rows.push_back({static_cast<double>(row.j), row.r, row.c, row.min_nu, row.identity, row.ser, row.mass_sum});
    worst_ser = std::max(worst_ser, row.ser);
    worst_id = std::max(worst_id, row.identity);
  }
  run.csv("trace.csv", {"j", "r", "c", "min_nu", "identity", "ser", "mass_sum"}, rows);
  bool dominated = r.completed && r.domination_slack >= -1e-12;
  Json rep = {{"J", eng.horizon_steps(o.t_h)},
              {"t_h", o.t_h},
              {"completed", r.completed},
              {"failure", r.failure ? Json(*r.failure) : Json(nullptr)},
              {"domination_slack", r.domination_slack},
              {"dominated", dominated},
              {"max_ser", worst_ser},
              {"max_identity", worst_id},
              {"c_bar", k.c_bar()},
              {"zeta", k.zeta()},
              {"constants", io::to_json(k)}};
  run.json("coupling.json", rep);
  rep.erase("constants");
  run.summary = rep;
  std::cout << "J = " << eng.horizon_steps(o.t_h) << ", " << (r.completed ? "completed" : "induction broken")
            << ", domination slack " << io::format_double(r.domination_slack) << "\n";
  return dominated ? kExitOk : kExitRefuted;
}

int cmd_simulate(const Options& o, Run& run) {
  auto m = io::load_model(o.model);
  if (m.kind == "diffusion" && !m.gen) {
    const auto& spec = *m.diffusion;
    std::size_t dead = 0;
    std::vector<std::vector<double>> rows;
    std::vector<char> died(o.paths, 0);
    const auto np = static_cast<std::ptrdiff_t>(o.paths);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < np; ++i) {
      RngStream gi(o.seed, static_cast<std::uint64_t>(i));
      auto p = simulate_diffusion(spec, o.x0, o.n0, o.dt, o.t, gi);
      died[static_cast<std::size_t>(i)] = p.extinction_time ? 1 : 0;
    }
    for (char d : died) dead += d;
    RngStream g0(o.seed, 0);
    auto path = simulate_diffusion(spec, o.x0, o.n0, o.dt, o.t, g0);
    for (std::size_t i = 0; i < path.times.size(); ++i) {
      std::vector<double> row{path.times[i], path.n[i]};
      row.insert(row.end(), path.x[i].begin(), path.x[i].end());
      rows.push_back(row);
    }
    std::vector<std::string> header{"t", "n"};
    for (std::size_t d = 0; d < spec.dim; ++d) header.push_back("x" + std::to_string(d + 1));
    run.csv("path.csv", header, rows);
    double p = static_cast<double>(dead) / static_cast<double>(o.paths);
    Json est = {{"estimate", p},
                {"stderr", std::sqrt(p * (1.0 - p) / static_cast<double>(o.paths))},
                {"ess", o.paths},
                {"seed", o.seed},
                {"quantity", "P(extinction <= t)"}};
    run.json("estimate.json", est);
    run.summary = est;
    std::cout << "P(ext <= t) = " << io::format_double(p) << "\n";
    return kExitOk;
  }
  const auto& g = need_generator(m);
  auto ep = solve_eigentriple(g, std::min(o.tol, 1e-12));
  auto mu = io::parse_measure(o.mu, g.size(), &ep);
  auto exact = dcne(g, mu, o.t, o.tol);
  Json est;
  ProbabilityVector law;
  if (o.method == "naive") {
    auto e = estimate_dcne_naive(g, mu, o.t, o.paths, o.seed);
    law = e.estimate;
    est = {{"estimate", e.estimate.weights()}, {"stderr", e.stderr_tv}, {"ess", e.ess}, {"seed", e.seed}};
  } else if (o.method == "fv") {
    auto e = fleming_viot(g, mu, o.t, o.particles, o.seed);
    law = e.empirical(g.size());
    est = {{"estimate", law.weights()},
           {"stderr", std::sqrt(static_cast<double>(g.size()) / static_cast<double>(o.particles))},
           {"ess", o.particles},
           {"seed", o.seed},
           {"lambda0_estimate", e.absorption_rate(0.5 * o.t)},
           {"resamples", e.resample_log}};
  } else {
    throw ConfigError("method: expected naive or fv");
  }
  est["tv_to_exact"] = tv_distance(law, exact);
  est["method"] = o.method;
  run.json("estimate.json", est);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < g.size(); ++i) rows.push_back({static_cast<double>(i + 1), law[i], exact[i]});
  run.csv("law.csv", {"state", "estimate", "exact"}, rows);
  run.summary = est;
  run.summary.erase("estimate");
  std::cout << "TV to exact = " << io::format_double(tv_distance(law, exact)) << "\n";
  return kExitOk;
}

int cmd_nonuniformity(const Options& o, Run& run) {
  auto m = io::load_model(o.model);
  if (!m.bdnu) throw ConfigError("model: nonuniformity needs a bdnu model");
  const auto& p = *m.bdnu;
  auto heights = o.heights;
  if (heights.empty())
    for (std::size_t x = 1; x <= p.n_max; x *= 2) heights.push_back(x);
  auto levels = o.levels;
  if (levels.empty())
    for (int n = 1; (std::size_t{1} << (n + 1)) <= p.n_max && n <= 10; ++n) levels.push_back(n);
  NonuniformityOptions opts;
  opts.stop_at_witness = o.stop_at_witness;
  opts.tol = std::max(o.tol, 1e-12);
  auto rep = nonuniformity_experiment(p, o.t, o.eps, heights, levels, opts);
  std::vector<std::vector<double>> hrows, lrows;
  for (const auto& h : rep.heights) hrows.push_back({static_cast<double>(h.height), h.tv, h.top_mass});
  for (const auto& l : rep.levels) lrows.push_back({static_cast<double>(l.n), l.p, l.bound, l.doob_bound});
  run.csv("heights.csv", {"height", "tv", "top_mass"}, hrows);
  run.csv("levels.csv", {"n", "p", "bound", "doob_bound"}, lrows);
  Json doc = {{"t", rep.t},
              {"eps", rep.eps},
              {"t_v", rep.t_v},
              {"witness", rep.witness ? Json(*rep.witness) : Json(nullptr)},
              {"decreasing", rep.decreasing},
              {"within_bound", rep.within_bound},
              {"warnings", rep.warnings}};
  run.json("nonuniformity.json", doc);
  run.summary = doc;
  std::cout << "witness height: " << (rep.witness ? std::to_string(*rep.witness) : std::string("none")) << "\n";
  return rep.witness && rep.decreasing && rep.within_bound ? kExitOk : kExitRefuted;
}

Json moment_json(const EscapeMomentEstimate& e) {
  return {{"region", to_string(e.region)}, {"sup", e.sup}, {"stderr", e.stderr_}, {"capped", e.capped}};
}

int cmd_escape(const Options& o, Run& run) {
  auto m = io::load_model(o.model);
  if (!m.diffusion) throw ConfigError("model: escape-moments needs a diffusion model");
  TransitoryDecomposition dec = m.regions.value_or(TransitoryDecomposition{});
  dec.sigma_N = m.diffusion->sigma_N;
  EscapeOptions eo;
  eo.dt = o.dt;
  auto rep = escape_report(*m.diffusion, dec, o.rho, o.paths, o.seed, eo);
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"tolerance", c.tolerance}, {"holds", c.holds}});
  const auto& k = rep.k;
  Json doc = {{"E_Y", moment_json(rep.E_Y)},
              {"E_X", moment_json(rep.E_X)},
              {"E_0", moment_json(rep.E_0)},
              {"e_T", rep.e_T},
              {"constants",
               {{"rho", k.rho}, {"t_D", k.t_D}, {"C_Y", k.C_Y}, {"C_X", k.C_X}, {"eps_X", k.eps_X},
                {"p_X", k.p_X}, {"p_Y", k.p_Y}, {"C_0", k.C_0}, {"eps_0", k.eps_0}, {"p_0", k.p_0}}},
              {"checks", checks},
              {"all_hold", rep.all_hold()},
              {"statistical", "95% confidence, Monte Carlo estimates"}};
  run.json("escape.json", doc);
  run.summary = doc;
  for (const auto& c : rep.checks) std::cout << c.name << ": " << (c.holds ? "holds" : "FAILS") << "\n";
  return rep.all_hold() ? kExitOk : kExitRefuted;
}

std::string fmt(const Json& v) {
  if (v.is_number_float()) return io::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string render_summary(const Json& manifest, const Json& s) {
  std::ostringstream md;
  const std::string cmd = manifest.at("command");
  md << "# qsd " << cmd << "\n\n";
  md << "Model: `" << manifest.at("args").value("model", std::string()) << "`, seed "
     << manifest.at("args").at("seed").dump() << ".\n\n";
  md << "| quantity | value |\n|---|---|\n";
  for (auto it = s.begin(); it != s.end(); ++it) {
    if (it.value().is_object() || it.value().is_array()) continue;
    md << "| " << it.key() << " | " << fmt(it.value()) << " |\n";
  }
  if (s.contains("certificates")) {
    md << "\n## Certificates\n\n| assumption | verdict |\n|---|---|\n";
    for (auto it = s["certificates"].begin(); it != s["certificates"].end(); ++it) {
      const Json& c = it.value();
      std::string v = c.at("verdict");
      if (v == "fails") {
        v = "**fails**";
        if (c.contains("counterexample")) v += " at state **" + c["counterexample"].dump() + "**";
      }
      md << "| " << it.key() << " | " << v << " |\n";
    }
  }
  if (cmd == "verify" && s.contains("zeta")) {
    md << "\n## Relations\n\n";
    double l0 = s.at("lambda0"), zeta = s.at("zeta");
    if (s.contains("rho_sv")) {
      double rsv = s["rho_sv"];
      md << "- lambda0 <= rho_sv: " << io::format_double(l0) << " <= " << io::format_double(rsv) << " ("
         << (l0 <= rsv + 1e-12 ? "ok" : "**violated**") << ")\n";
      if (s.contains("rho_eT")) {
        double re = s["rho_eT"];
        md << "- rho_sv < rho (eT): " << io::format_double(rsv) << " < " << io::format_double(re) << " ("
           << (rsv < re ? "ok" : "**violated**") << ")\n";
      }
    }
    if (s.at("gap_estimate").is_number())
      md << "- zeta <= lambda1 - lambda0: " << io::format_double(zeta) << " <= " << fmt(s["gap_estimate"]) << " ("
         << (zeta <= s["gap_estimate"].get<double>() + 1e-9 ? "ok" : "**violated**") << ")\n";
    md << "- C(n, xi) = 2 exp[zeta (t_ps + t_db + t_xt)] = " << fmt(s.at("prefactor")) << "\n";
  }
  if (s.contains("checks")) {
    md << "\n## Inequalities\n\n| check | lhs | rhs | tolerance | holds |\n|---|---|---|---|---|\n";
    for (const auto& c : s["checks"])
      md << "| " << fmt(c["name"]) << " | " << fmt(c["lhs"]) << " | " << fmt(c["rhs"]) << " | "
         << fmt(c["tolerance"]) << " | " << (c["holds"].get<bool>() ? "yes" : "**no**") << " |\n";
  }
  if (cmd == "nonuniformity")
    md << "\nWitness height for (t, eps) = (" << fmt(s.at("t")) << ", " << fmt(s.at("eps"))
       << "): " << fmt(s.at("witness")) << ". Per-height TV in heights.csv, escape levels in levels.csv.\n";
  return md.str();
}

int cmd_report(const fs::path& dir) {
  fs::path mpath = dir / "manifest.json";
  if (!fs::exists(mpath)) throw ConfigError(mpath.string() + ": missing manifest");
  auto manifest = io::read_json(mpath);
  auto md = render_summary(manifest, manifest.at("summary"));
  std::ofstream(dir / "summary.md") << md;
  std::cout << md;
  return kExitOk;
}

void copy_input(const std::string& src, const fs::path& dir, const std::string& name, std::string& field) {
  if (src.empty()) return;
  fs::create_directories(dir / "inputs");
  auto doc = io::read_json(src);
  if (name == "model.json" && doc.is_object() && doc.value("model", std::string()) == "generator" &&
      doc.contains("path")) {
    doc["generator"] = io::read_json(fs::path(src).parent_path() / doc["path"].get<std::string>());
    doc.erase("path");
  }
  io::write_json(dir / "inputs" / name, doc);
  field = (dir / "inputs" / name).string();
}

int execute(Options o, const fs::path& out, int threads) {
  fs::create_directories(out);
  Options rec = o;
  copy_input(o.model, out, "model.json", o.model);
  copy_input(o.exhaustion, out, "exhaustion.json", o.exhaustion);
  copy_input(o.constants, out, "constants.json", o.constants);
  copy_input(o.replay_cert, out, "replay_certificates.json", o.replay_cert);
  Run run{out, {}, Json::object()};
  int code = kExitError;
  if (o.command == "solve") code = cmd_solve(o, run);
  else if (o.command == "verify") code = cmd_verify(o, run);
  else if (o.command == "couple") code = cmd_couple(o, run);
  else if (o.command == "simulate") code = cmd_simulate(o, run);
  else if (o.command == "nonuniformity") code = cmd_nonuniformity(o, run);
  else if (o.command == "escape-moments") code = cmd_escape(o, run);
  auto rel = [](const std::string& s, const char* name) {
    return s.empty() ? std::string() : std::string("inputs/") + name;
  };
  rec.model = rel(o.model, "model.json");
  rec.exhaustion = rel(o.exhaustion, "exhaustion.json");
  rec.constants = rel(o.constants, "constants.json");
  rec.replay_cert = rel(o.replay_cert, "replay_certificates.json");
  Json manifest = {{"schema", io::kSchemaVersion},
                   {"tool", "qsd"},
                   {"version", kVersion},
                   {"command", o.command},
                   {"args", options_json(rec)},
                   {"threads", threads},
                   {"exit_code", code},
                   {"outputs", run.outputs},
                   {"summary", run.summary}};
  io::write_json(out / "manifest.json", manifest);
  std::ofstream(out / "summary.md") << render_summary(manifest, run.summary);
  return code;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

int cmd_replay(const fs::path& dir, const fs::path& out, int threads) {
  auto manifest = io::read_json(dir / "manifest.json");
  Options o = options_from_json(manifest.at("command"), manifest.at("args"));
  for (std::string* f : {&o.model, &o.exhaustion, &o.constants, &o.replay_cert})
    if (!f->empty()) *f = (dir / *f).string();
  int code = execute(o, out, threads);
  bool identical = code == manifest.at("exit_code").get<int>();
  for (const auto& name : manifest.at("outputs")) {
    bool same = same_bytes(dir / name.get<std::string>(), out / name.get<std::string>());
    std::cout << name.get<std::string>() << ": " << (same ? "identical" : "DIFFERS") << "\n";
    identical = identical && same;
  }
  std::cout << (identical ? "replay identical" : "replay differs") << "\n";
  return identical ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-stationary distributions: exact solvers, assumption certificates, coupling and simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  int threads = 0;
  std::string run_dir;

  auto common = [&](CLI::App* s, bool model_required) {
    auto* m = s->add_option("--model", o.model, "model config (JSON)")->check(CLI::ExistingFile);
    if (model_required) m->required();
    s->add_option("--exhaustion", o.exhaustion, "exhaustion config (JSON)")->check(CLI::ExistingFile);
    s->add_option("--seed", o.seed, "random seed");
    s->add_option("--out", o.out, "output directory");
    s->add_option("--tol", o.tol, "numerical tolerance");
    s->add_option("--threads", threads, "worker threads (QSD_THREADS overrides)");
  };

  auto* solve = app.add_subcommand("solve", "eigen-triple (lambda0, alpha, eta)");
  common(solve, true);
  auto* verify = app.add_subcommand("verify", "assumption certificates and coupling constants");
  common(verify, true);
  verify->add_option("--t-mix", o.t_mix, "time for the mixing certificate (0: 1 / gap estimate)");
  verify->add_option("--n-rn", o.n_rn, "exhaustion index of the renewal domain (default: whole space)");
  verify->add_option("--xi-rn", o.xi_rn, "renewal mass threshold in (0, 1]");
  verify->add_option("--replay", o.replay_cert, "re-check a stored certificate set")->check(CLI::ExistingFile);
  auto* couple = app.add_subcommand("couple", "coupling induction up to a horizon");
  common(couple, true);
  couple->add_option("--mu", o.mu, "initial law: delta:k (1-based), uniform, alpha or a JSON array");
  couple->add_option("--t-h", o.t_h, "coupling horizon");
  couple->add_option("--t-mix", o.t_mix, "time for the mixing certificate (0: 1 / gap estimate)");
  couple->add_option("--n-rn", o.n_rn, "exhaustion index of the renewal domain (default: whole space)");
  couple->add_option("--xi-rn", o.xi_rn, "renewal mass threshold in (0, 1]");
  couple->add_option("--constants", o.constants, "coupling constants (JSON)")->check(CLI::ExistingFile);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates against the exact engine");
  common(simulate, true);
  simulate->add_option("--mu", o.mu, "initial law for chains");
  simulate->add_option("--t", o.t, "time");
  simulate->add_option("--paths", o.paths, "number of paths");
  simulate->add_option("--particles", o.particles, "Fleming-Viot particles");
  simulate->add_option("--method", o.method, "naive or fv")->check(CLI::IsMember({"naive", "fv"}));
  simulate->add_option("--dt", o.dt, "diffusion time step");
  simulate->add_option("--x0", o.x0, "initial trait (diffusion)");
  simulate->add_option("--n0", o.n0, "initial population (diffusion)");
  auto* nonu = app.add_subcommand("nonuniformity", "non-uniform convergence on the Malthusian family");
  common(nonu, true);
  nonu->add_option("--t", o.t, "time");
  nonu->add_option("--eps", o.eps, "similarity threshold");
  nonu->add_option("--heights", o.heights, "initial heights (default: powers of two)");
  nonu->add_option("--levels", o.levels, "escape levels n");
  nonu->add_flag("--stop-at-witness", o.stop_at_witness, "stop the height sweep at the first witness");
  auto* escape = app.add_subcommand("escape-moments", "escape-moment inequalities for a diffusion");
  common(escape, true);
  escape->add_option("--rho", o.rho, "exponential rate");
  escape->add_option("--paths", o.paths, "paths per start point");
  escape->add_option("--dt", o.dt, "time step");
  auto* report = app.add_subcommand("report", "markdown summary of a run directory");
  report->add_option("run_dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  auto* replay = app.add_subcommand("replay", "re-run from a manifest and compare outputs byte by byte");
  replay->add_option("run_dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  replay->add_option("--out", o.out, "output directory for the re-run");
  replay->add_option("--threads", threads, "worker threads (QSD_THREADS overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  if (const char* env = std::getenv("QSD_THREADS")) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "error: QSD_THREADS must be an integer\n";
      return kExitError;
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
  try {
    auto* sub = app.get_subcommands().front();
    o.command = sub->get_name();
    if (o.command == "report") return cmd_report(run_dir);
    if (o.command == "replay") return cmd_replay(run_dir, o.out, threads);
    return execute(o, o.out, threads);
  } catch (const qsd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
