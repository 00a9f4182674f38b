#include "qsd/io/json_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd::io {

namespace {

const Json& field(const Json& doc, const std::string& key, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError(where + "." + key + ": missing");
  return *it;
}

double number(const Json& doc, const std::string& key, const std::string& where) {
  const Json& v = field(doc, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double number_or(const Json& doc, const std::string& key, double fallback, const std::string& where) {
  return doc.contains(key) ? number(doc, key, where) : fallback;
}

bool is_index(const Json& v) { return v.is_number_integer() && v.get<long long>() >= 0; }

std::size_t count(const Json& doc, const std::string& key, const std::string& where) {
  const Json& v = field(doc, key, where);
  if (!is_index(v)) throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::size_t count_or(const Json& doc, const std::string& key, std::size_t fallback, const std::string& where) {
  return doc.contains(key) ? count(doc, key, where) : fallback;
}

std::vector<double> numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::size_t> indices(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!is_index(v[i])) throw ConfigError(where + "[" + std::to_string(i) + "]: expected an index");
    out.push_back(v[i].get<std::size_t>());
  }
  return out;
}

void check_schema(const Json& doc, const std::string& where) {
  const Json& s = field(doc, "schema", where);
  if (!s.is_number_integer() || s.get<int>() != kSchemaVersion)
    throw ConfigError(where + ".schema: unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
}

Json number_json(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? Json("nan") : Json(x > 0 ? "inf" : "-inf");
}

double number_from(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw ConfigError(where + ": expected a number");
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot write");
  out << doc.dump(2) << '\n';
}

Json to_json(const SubMarkovGenerator& gen) {
  Json rates = Json::array();
  for (const auto& t : gen.transitions()) rates.push_back({t.from, t.to, t.rate});
  return {{"states", gen.size()}, {"rates", rates}, {"kill", gen.kill_rates()}};
}

SubMarkovGenerator generator_from_json(const Json& doc, const std::string& where) {
  std::size_t n = count(doc, "states", where);
  const Json& r = field(doc, "rates", where);
  if (!r.is_array()) throw ConfigError(where + ".rates: expected an array");
  std::vector<Transition> tr;
  for (std::size_t k = 0; k < r.size(); ++k) {
    std::string w = where + ".rates[" + std::to_string(k) + "]";
    const Json& e = r[k];
    if (!e.is_array() || e.size() != 3 || !is_index(e[0]) || !is_index(e[1]) ||
        !e[2].is_number())
      throw ConfigError(w + ": expected [i, j, q]");
    tr.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
  }
  auto kill = numbers(field(doc, "kill", where), where + ".kill");
  if (kill.size() != n) throw ConfigError(where + ".kill: length differs from states");
  try {
    return SubMarkovGenerator(n, std::move(tr), std::move(kill));
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Json to_json(const EigenPair& ep) {
  return {{"lambda0", ep.lambda0},
          {"alpha", ep.alpha.weights()},
          {"eta", ep.eta},
          {"beta", ep.beta().weights()},
          {"iterations", ep.iterations},
          {"residual_left", ep.residual_left},
          {"residual_right", ep.residual_right},
          {"gap_estimate", number_json(ep.gap_estimate)},
          {"degenerate_spectrum", ep.degenerate_spectrum}};
}

Json to_json(const AssumptionCertificate& cert) {
  Json params = Json::object();
  for (const auto& [k, v] : cert.params) params[k] = number_json(v);
  Json out = {{"kind", to_string(cert.kind)},
              {"verdict", cert.holds ? "holds" : "fails"},
              {"params", params},
              {"t_grid", cert.t_grid},
              {"note", cert.note}};
  out["counterexample"] = cert.counterexample ? Json(*cert.counterexample) : Json(nullptr);
  out["alpha_c"] = cert.alpha_c ? Json(cert.alpha_c->weights()) : Json(nullptr);
  return out;
}

AssumptionCertificate certificate_from_json(const Json& doc, const std::string& where) {
  AssumptionCertificate c;
  const Json& kind = field(doc, "kind", where);
  if (!kind.is_string()) throw ConfigError(where + ".kind: expected a string");
  try {
    c.kind = assumption_kind_from_string(kind.get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(where + ".kind: " + e.what());
  }
  const Json& verdict = field(doc, "verdict", where);
  if (verdict != "holds" && verdict != "fails") throw ConfigError(where + ".verdict: expected holds or fails");
  c.holds = verdict == "holds";
  const Json& params = field(doc, "params", where);
  if (!params.is_object()) throw ConfigError(where + ".params: expected an object");
  for (auto it = params.begin(); it != params.end(); ++it)
    c.params[it.key()] = number_from(it.value(), where + ".params." + it.key());
  if (doc.contains("t_grid")) c.t_grid = numbers(doc["t_grid"], where + ".t_grid");
  if (doc.contains("note") && doc["note"].is_string()) c.note = doc["note"].get<std::string>();
  if (doc.contains("counterexample") && !doc["counterexample"].is_null())
    c.counterexample = count(doc, "counterexample", where);
  if (doc.contains("alpha_c") && !doc["alpha_c"].is_null())
    c.alpha_c = ProbabilityVector(numbers(doc["alpha_c"], where + ".alpha_c"));
  return c;
}

Json to_json(const CertificateSet& certs) {
  return {{"schema", kSchemaVersion},
          {"Mix", to_json(certs.mix)},
          {"Dc", to_json(certs.dc)},
          {"eT", to_json(certs.et)},
          {"Sv", to_json(certs.sv)},
          {"LJ", to_json(certs.lj)},
          {"all_hold", certs.all_hold()}};
}

CertificateSet certificate_set_from_json(const Json& doc) {
  check_schema(doc, "certificates");
  CertificateSet cs;
  cs.mix = certificate_from_json(field(doc, "Mix", "certificates"), "certificates.Mix");
  cs.dc = certificate_from_json(field(doc, "Dc", "certificates"), "certificates.Dc");
  cs.et = certificate_from_json(field(doc, "eT", "certificates"), "certificates.eT");
  cs.sv = certificate_from_json(field(doc, "Sv", "certificates"), "certificates.Sv");
  cs.lj = certificate_from_json(field(doc, "LJ", "certificates"), "certificates.LJ");
  return cs;
}

Json to_json(const CouplingConstants& k) {
  return {{"t_db", k.t_db},   {"c_db", k.c_db},       {"t_ps", k.t_ps},
          {"c_ps", k.c_ps},   {"t_xt", k.t_xt},       {"alpha_c", k.alpha_c.weights()},
          {"n_rn", k.n_rn},   {"xi_rn", k.xi_rn},     {"c_bar", k.c_bar()},
          {"zeta", k.zeta()}, {"prefactor", k.prefactor()}};
}

CouplingConstants coupling_constants_from_json(const Json& doc) {
  const std::string w = "constants";
  CouplingConstants k;
  k.t_db = number(doc, "t_db", w);
  k.c_db = number(doc, "c_db", w);
  k.t_ps = number(doc, "t_ps", w);
  k.c_ps = number(doc, "c_ps", w);
  k.t_xt = number_or(doc, "t_xt", 0.0, w);
  k.alpha_c = ProbabilityVector(numbers(field(doc, "alpha_c", w), w + ".alpha_c"));
  k.n_rn = count_or(doc, "n_rn", 0, w);
  k.xi_rn = number_or(doc, "xi_rn", 1.0, w);
  try {
    k.validate();
  } catch (const Error& e) {
    throw ConfigError(w + ": " + e.what());
  }
  return k;
}

Json to_json(const Exhaustion& exh) {
  return {{"schema", kSchemaVersion}, {"sets", exh.sets}, {"s", exh.s}, {"c", exh.c}, {"m", exh.m}};
}

Exhaustion exhaustion_from_json(const Json& doc, std::size_t n_states) {
  const std::string w = "exhaustion";
  check_schema(doc, w);
  std::size_t s = count(doc, "s", w), c = count(doc, "c", w), m = count(doc, "m", w);
  Exhaustion e;
  if (doc.contains("prefix")) {
    auto sizes = indices(doc["prefix"], w + ".prefix");
    try {
      e = Exhaustion::prefix(sizes, s, c, m);
    } catch (const Error& err) {
      throw ConfigError(w + ".prefix: " + err.what());
    }
  } else {
    const Json& sets = field(doc, "sets", w);
    if (!sets.is_array()) throw ConfigError(w + ".sets: expected an array");
    for (std::size_t k = 0; k < sets.size(); ++k)
      e.sets.push_back(indices(sets[k], w + ".sets[" + std::to_string(k) + "]"));
    e.s = s;
    e.c = c;
    e.m = m;
  }
  try {
    e.validate(n_states);
  } catch (const Error& err) {
    throw ConfigError(w + ": " + err.what());
  }
  return e;
}

RateFamily rate_family_from_json(const Json& doc, const std::string& where) {
  const Json& kind = field(doc, "kind", where);
  if (kind == "constant") return RateFamily::constant(number(doc, "value", where));
  if (kind == "linear") return RateFamily::linear(number(doc, "slope", where), number_or(doc, "intercept", 0.0, where));
  if (kind == "table")
    return RateFamily::tabulated(numbers(field(doc, "values", where), where + ".values"), number(doc, "beyond", where));
  throw ConfigError(where + ".kind: expected constant, linear or table");
}

namespace {

LoadedModel diffusion_model(const Json& doc) {
  const std::string w = "model";
  LoadedModel m;
  m.kind = "diffusion";
  const Json& builtin = field(doc, "builtin", w);
  const Json params = doc.contains("params") ? doc["params"] : Json::object();
  const std::string pw = w + ".params";
  try {
    if (builtin == "quadratic_well") {
      QuadraticWellParams q;
      q.dim = count_or(params, "dim", q.dim, pw);
      q.r0 = number_or(params, "r0", q.r0, pw);
      q.a = number_or(params, "a", q.a, pw);
      q.c = number_or(params, "c", q.c, pw);
      q.sigma_N = number_or(params, "sigma_N", q.sigma_N, pw);
      q.theta = number_or(params, "theta", q.theta, pw);
      q.sigma_X = number_or(params, "sigma_X", q.sigma_X, pw);
      q.rho0 = number_or(params, "rho0", q.rho0, pw);
      q.rho1 = number_or(params, "rho1", q.rho1, pw);
      m.diffusion = quadratic_well(q);
    } else if (builtin == "feller") {
      m.diffusion = feller(number(params, "r_plus", pw), number(params, "sigma", pw));
    } else {
      throw ConfigError(w + ".builtin: expected quadratic_well or feller");
    }
    if (doc.contains("growth_table")) {
      const Json& t = doc["growth_table"];
      m.diffusion = tabulated_growth(*m.diffusion, numbers(field(t, "radii", w + ".growth_table"), w + ".growth_table.radii"),
                                     numbers(field(t, "values", w + ".growth_table"), w + ".growth_table.values"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(w + ": " + e.what());
  }
  if (doc.contains("regions")) {
    const Json& r = doc["regions"];
    TransitoryDecomposition d;
    d.y_inf = number_or(r, "y_inf", d.y_inf, w + ".regions");
    d.n_c = number_or(r, "n_c", d.n_c, w + ".regions");
    d.sigma_N = m.diffusion->sigma_N;
    try {
      d.validate();
    } catch (const Error& e) {
      throw ConfigError(w + ".regions: " + e.what());
    }
    m.regions = d;
  }
  if (doc.contains("grid")) {
    const Json& g = doc["grid"];
    const std::string gw = w + ".grid";
    DiffusionGrid grid;
    grid.x_lo = number_or(g, "x_lo", grid.x_lo, gw);
    grid.x_hi = number_or(g, "x_hi", grid.x_hi, gw);
    grid.x_cells = count_or(g, "x_cells", grid.x_cells, gw);
    grid.n_step = number_or(g, "n_step", grid.n_step, gw);
    grid.n_cells = count_or(g, "n_cells", grid.n_cells, gw);
    try {
      m.gen = discretize_diffusion(*m.diffusion, grid);
    } catch (const Error& e) {
      throw ConfigError(gw + ": " + e.what());
    }
    m.grid = grid;
  }
  return m;
}

}  // namespace

LoadedModel model_from_json(const Json& doc, const std::filesystem::path& base_dir) {
  const std::string w = "model";
  if (doc.is_object() && doc.contains("states") && !doc.contains("schema")) {
    LoadedModel m;
    m.kind = "generator";
    m.gen = generator_from_json(doc);
    m.doc = doc;
    return m;
  }
  check_schema(doc, w);
  const Json& kind = field(doc, "model", w);
  LoadedModel m;
  if (kind == "generator") {
    m.kind = "generator";
    if (doc.contains("path")) {
      const Json& p = doc["path"];
      if (!p.is_string()) throw ConfigError(w + ".path: expected a string");
      auto path = base_dir / p.get<std::string>();
      m.gen = generator_from_json(read_json(path), path.string());
    } else {
      m.gen = generator_from_json(field(doc, "generator", w), w + ".generator");
    }
  } else if (kind == "bdc") {
    m.kind = "bdc";
    BDCParams p;
    p.b = rate_family_from_json(field(doc, "b", w), w + ".b");
    p.d = rate_family_from_json(field(doc, "d", w), w + ".d");
    p.c = rate_family_from_json(field(doc, "c", w), w + ".c");
    p.n_max = count(doc, "n_max", w);
    std::string boundary = doc.value("boundary", std::string("kill_above"));
    if (boundary == "kill_above") p.boundary = BoundaryPolicy::KillAbove;
    else if (boundary == "reflect_above") p.boundary = BoundaryPolicy::ReflectAbove;
    else throw ConfigError(w + ".boundary: expected kill_above or reflect_above");
    try {
      m.gen = build_bdc(p);
    } catch (const Error& e) {
      throw ConfigError(w + ": " + e.what());
    }
  } else if (kind == "bdnu") {
    m.kind = "bdnu";
    BDNUParams p;
    p.b1 = number_or(doc, "b1", p.b1, w);
    p.c1 = number_or(doc, "c1", p.c1, w);
    p.b_bar = number_or(doc, "b_bar", p.b_bar, w);
    p.d_bar = number_or(doc, "d_bar", p.d_bar, w);
    p.c2 = number_or(doc, "c2", p.c2, w);
    p.n_max = count_or(doc, "n_max", p.n_max, w);
    try {
      m.gen = build_bdnu(p);
    } catch (const Error& e) {
      throw ConfigError(w + ": " + e.what());
    }
    m.bdnu = p;
  } else if (kind == "diffusion") {
    m = diffusion_model(doc);
  } else {
    throw ConfigError(w + ".model: expected generator, bdc, bdnu or diffusion");
  }
  m.doc = doc;
  return m;
}

LoadedModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path), path.parent_path());
}

ProbabilityVector parse_measure(const std::string& text, std::size_t n_states, const EigenPair* ep) {
  if (text.rfind("delta:", 0) == 0) {
    std::size_t k = 0;
    auto s = text.substr(6);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
    if (ec != std::errc() || p != s.data() + s.size() || k < 1 || k > n_states)
      throw ConfigError("mu: delta:k needs a state label in 1.." + std::to_string(n_states));
    return ProbabilityVector::delta(n_states, k - 1);
  }
  if (text == "uniform") return ProbabilityVector::uniform(n_states);
  if (text == "alpha") {
    if (!ep) throw ConfigError("mu: alpha needs the eigen-triple");
    return ep->alpha;
  }
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error&) {
    throw ConfigError("mu: expected delta:k, uniform, alpha or a JSON array");
  }
  auto w = numbers(doc, "mu");
  if (w.size() != n_states) throw ConfigError("mu: length differs from the state count");
  try {
    return ProbabilityVector(std::move(w));
  } catch (const Error& e) {
    throw ConfigError(std::string("mu: ") + e.what());
  }
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot write");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

}  // namespace qsd::io
