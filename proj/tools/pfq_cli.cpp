// pfq: command-line front end.  Every subcommand resolves its parameters as
// defaults < --config file < explicit flags, writes CSV/JSON into the output
// directory and leaves a manifest.json that can be fed back via --config.

#include "pfq/pfq.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string k, const std::string& msg) : std::runtime_error(msg), key(std::move(k)) {}
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { integer, unsigned_integer, real, text, boolean };

struct Key {
  std::string name;
  Kind kind;
  json fallback;
  std::string help;
};

// ---------------------------------------------------------------------------
// formatting

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

json cplx(pfq::Complex c) { return json::array({c.real(), c.imag()}); }

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cplx(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f << content;
    f.close();
    if (!f) throw IoError("write failed for " + p.string());
    files_.push_back(name);
  }

  void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------
// parameter resolution

json convert_text(const Key& k, const std::string& s) {
  std::size_t used = 0;
  try {
    switch (k.kind) {
      case Kind::integer: {
        const long v = std::stol(s, &used);
        if (used == s.size()) return v;
        break;
      }
      case Kind::unsigned_integer: {
        if (!s.empty() && s[0] == '-') break;
        const unsigned long long v = std::stoull(s, &used);
        if (used == s.size()) return v;
        break;
      }
      case Kind::real: {
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
        break;
      }
      case Kind::text:
        return s;
      case Kind::boolean:
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        break;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(k.name, "invalid value '" + s + "' for key '" + k.name + "'");
}

json convert_json(const Key& k, const json& v) {
  if (v.is_null() && k.fallback.is_null()) return v;  // optional key left unset, as manifests record it
  switch (k.kind) {
    case Kind::integer:
      if (v.is_number_integer()) return v.get<long>();
      break;
    case Kind::unsigned_integer:
      if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) return v.get<unsigned long long>();
      break;
    case Kind::real:
      if (v.is_number()) return v.get<double>();
      break;
    case Kind::text:
      if (v.is_string()) return v;
      break;
    case Kind::boolean:
      if (v.is_boolean()) return v;
      break;
  }
  throw ConfigError(k.name, "wrong type for key '" + k.name + "': " + v.dump());
}

json load_config_file(const std::string& path, const std::string& command) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "config file must hold a JSON object");
  // a manifest from an earlier run
  if (j.contains("subcommand") && j.contains("config")) {
    if (j["subcommand"] != command)
      throw ConfigError("subcommand", "manifest is for '" + j["subcommand"].get<std::string>() + "', not '" + command + "'");
    return j["config"];
  }
  return j;
}

struct Command {
  std::string name;  // full name, e.g. "rydberg evolve"
  std::vector<Key> keys;
  std::function<void(const json&, Output&)> run;

  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> raw;
  std::map<std::string, bool> flags;
};

std::string default_output_dir() {
  const char* env = std::getenv("PFQ_OUTPUT_DIR");
  return env && *env ? env : ".";
}

void register_command(CLI::App& parent, const std::string& sub, const std::string& description, Command& cmd) {
  cmd.app = parent.add_subcommand(sub, description);
  cmd.app->add_option("--config", cmd.config_path, "JSON file of key/value overrides (a manifest.json works too)");
  for (const auto& k : cmd.keys) {
    const std::string flag = "--" + k.name;
    if (k.kind == Kind::boolean) {
      cmd.app->add_flag(flag, cmd.flags[k.name], k.help);
    } else {
      std::string help = k.help;
      if (!k.fallback.is_null()) help += " [default: " + (k.fallback.is_string() ? k.fallback.get<std::string>() : k.fallback.dump()) + "]";
      cmd.app->add_option(flag, cmd.raw[k.name], help);
    }
  }
}

json resolve(Command& cmd) {
  json cfg = json::object();
  for (const auto& k : cmd.keys) cfg[k.name] = k.fallback;
  if (!cmd.config_path.empty()) {
    const json file = load_config_file(cmd.config_path, cmd.name);
    for (auto it = file.begin(); it != file.end(); ++it) {
      const auto k = std::find_if(cmd.keys.begin(), cmd.keys.end(), [&](const Key& x) { return x.name == it.key(); });
      if (k == cmd.keys.end()) throw ConfigError(it.key(), "unknown key '" + it.key() + "' for " + cmd.name);
      cfg[it.key()] = convert_json(*k, it.value());
    }
  }
  for (const auto& k : cmd.keys) {
    const std::string flag = "--" + k.name;
    if (cmd.app->count(flag) == 0) continue;
    cfg[k.name] = k.kind == Kind::boolean ? json(cmd.flags[k.name]) : convert_text(k, cmd.raw[k.name]);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// shared key helpers

const Key kOut{"out", Kind::text, json(), "output directory [default: $PFQ_OUTPUT_DIR or .]"};
const Key kWorkers{"workers", Kind::integer, 1, "worker threads (does not change outputs)"};

unsigned workers_of(const json& cfg) {
  const long w = cfg["workers"].get<long>();
  if (w < 1 || w > 256) throw ConfigError("workers", "workers must be in [1, 256]");
  return static_cast<unsigned>(w);
}

double real_of(const json& cfg, const std::string& key) {
  const double v = cfg[key].get<double>();
  if (!std::isfinite(v)) throw ConfigError(key, key + " must be finite");
  return v;
}

pfq::ChainSpec chain_of(const json& cfg, double f) {
  const long l = cfg["L"].get<long>();
  if (l < 1 || l > pfq::kMaxChainLength)
    throw ConfigError("L", "L must be in [1, " + std::to_string(pfq::kMaxChainLength) + "]");
  const double j = real_of(cfg, "J");
  if (j < 0) throw ConfigError("J", "J must be >= 0");
  if (!(f >= 0)) throw ConfigError("f", "f must be >= 0");
  return pfq::ChainSpec::uniform(static_cast<int>(l), f, j, real_of(cfg, "phi"), real_of(cfg, "phi-hat"));
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  auto fail = [&] { return ConfigError("f-grid", "f-grid must be start:stop:step or a comma list, got '" + s + "'"); };
  try {
    if (s.find(':') != std::string::npos) {
      double a, b, h;
      char c1, c2;
      std::istringstream is(s);
      if (!(is >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(h > 0) || b < a) throw fail();
      std::string rest;
      if (is >> rest) throw fail();
      const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
      if (n > 100000) throw fail();
      for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
    } else {
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw fail();
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw fail();
  }
  if (out.empty()) throw fail();
  return out;
}

// ---------------------------------------------------------------------------
// subcommands

std::vector<Key> chain_keys() {
  return {{"L", Kind::integer, 2, "chain length"},
          {"J", Kind::real, 1.0, "bond coupling"},
          {"phi", Kind::real, pfq::kPi / 6, "bond chiral angle"},
          {"phi-hat", Kind::real, pfq::kPi / 6, "flip chiral angle"}};
}

void run_spectrum(const json& cfg, Output& out) {
  const double f = real_of(cfg, "f");
  const auto spec = chain_of(cfg, f);
  const auto res = pfq::diagonalize(spec);
  std::ostringstream csv;
  csv << "f,J,phi,phi_hat,level_index,eigenvalue,parity_label\n";
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
    csv << num(f) << ',' << num(spec.bond.empty() ? 0.0 : spec.bond[0]) << ',' << num(spec.phi) << ','
        << num(spec.phi_hat) << ',' << i << ',' << num(res.eigenvalues[i]) << ',' << res.parity_labels[i] << '\n';
  out.write("spectrum.csv", csv.str());
  ordered_json s;
  s["dimension"] = spec.dimension();
  s["ground_energy"] = res.eigenvalues.front();
  s["ground_degeneracy"] = res.ground_degeneracy();
  s["parity_resolved"] = res.parity_labels.front() >= 0;
  out.write_json("spectrum.json", s);
}

void run_effective(const json& cfg, Output& out) {
  const auto grid = parse_grid(cfg["f-grid"].get<std::string>());
  const auto tmpl = chain_of(cfg, 0.0);
  if (tmpl.length != 2) throw ConfigError("L", "effective compares spectra for L = 2 only");
  for (double f : grid)
    if (f < 0) throw ConfigError("f-grid", "f-grid values must be >= 0");
  const auto rows = pfq::spectrum_comparison(tmpl, grid, workers_of(cfg));
  std::ostringstream csv;
  csv << "f,E0_exact,E1_exact,E2_exact,E0_pert,E1_pert,E2_pert,flag_nonperturbative\n";
  for (const auto& r : rows) {
    csv << num(r.f);
    for (double e : r.exact) csv << ',' << num(e);
    for (double e : r.perturbative) csv << ',' << num(e);
    csv << ',' << (r.nonperturbative ? 1 : 0) << '\n';
  }
  out.write("effective.csv", csv.str());

  const double f = real_of(cfg, "f");
  const auto spec = chain_of(cfg, f);
  const auto c = pfq::coupling_report(spec);
  ordered_json s;
  s["rows"] = rows.size();
  s["energy_reference"] = "E0(bonds) + second-order shift";
  ordered_json coup;
  coup["f"] = f;
  coup["decimation"] = c.decimation;
  coup["second_order"] = c.second_order;
  coup["measured"] = c.measured;
  s["coupling"] = coup;
  s["second_order_matrix"] = matrix_json(pfq::closed_form_second(spec).total());
  s["third_order_matrix"] = matrix_json(pfq::closed_form_third(spec).total());
  out.write_json("effective.json", s);
}

pfq::Rational parse_fraction(const std::string& s) {
  auto fail = [&] { return ConfigError("theta", "theta must be a fraction p/q of 2 pi, got '" + s + "'"); };
  const auto slash = s.find('/');
  try {
    std::size_t u1 = 0, u2 = 0;
    const std::string ps = s.substr(0, slash);
    const long p = std::stol(ps, &u1);
    long q = 1;
    if (slash != std::string::npos) {
      const std::string qs = s.substr(slash + 1);
      q = std::stol(qs, &u2);
      if (u2 != qs.size()) throw fail();
    }
    if (u1 != ps.size() || q == 0) throw fail();
    return pfq::Rational(p, q);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw fail();
  }
}

void run_gate_level(const json& cfg, Output& out) {
  const std::string theta_s = cfg["theta"].get<std::string>();
  const bool has_beta = !cfg["beta-t"].is_null();
  if (theta_s.empty() == !has_beta) throw ConfigError("theta", "give exactly one of theta (p/q of 2 pi) or beta-t");
  const long k_max = cfg["k-max"].get<long>();
  if (k_max < 1 || k_max > pfq::kDefaultHierarchyBound) throw ConfigError("k-max", "k-max must be in [1, 8]");

  ordered_json s;
  pfq::Qutrit gate;
  if (has_beta) {
    const double bt = real_of(cfg, "beta-t");
    const auto g = pfq::dynamical_gate(bt);
    gate = g.matrix;
    s["input"] = "beta_t";
    s["beta_t"] = bt;
    s["theta"] = g.theta;
    s["global_phase"] = cplx(g.global_phase);
  } else {
    const auto r = parse_fraction(theta_s);
    gate = pfq::ud_gate(pfq::kTwoPi * r.value());
    s["input"] = "theta";
    s["theta_over_2pi"] = std::to_string(r.num) + "/" + std::to_string(r.den);
    s["theta"] = pfq::wrap_angle(pfq::kTwoPi * r.value());
    try {
      const auto cl = pfq::diagonal_level({pfq::Rational(0), pfq::Rational(0), r}, static_cast<int>(k_max));
      s["closed_form_level"] = cl.level ? json(*cl.level) : json();
    } catch (const pfq::DomainError&) {
      s["closed_form_level"] = nullptr;  // denominator not a power of 3
    }
  }
  pfq::HierarchyClassifier classifier;
  const auto v = classifier.level(gate, static_cast<int>(k_max));
  s["k_max"] = k_max;
  s["level"] = v.level ? json(*v.level) : json();
  s["exceeds_k_max"] = v.exceeds();
  ordered_json chain = ordered_json::array();
  for (const auto& w : classifier.witness_chain(gate, static_cast<int>(k_max))) {
    ordered_json step;
    step["pauli"] = {w.pauli.x, w.pauli.z};
    step["level"] = w.level;
    chain.push_back(step);
  }
  s["witness_chain"] = chain;
  s["gate"] = matrix_json(gate);
  out.write_json("gate_level.json", s);
}

pfq::SamplerConfig sampler_of(const json& cfg) {
  pfq::SamplerConfig sc;
  sc.seed = cfg["seed"].get<std::uint64_t>();
  const long n = cfg["n"].get<long>();
  if (n < 1) throw ConfigError("n", "n must be positive");
  const long len = cfg["len"].get<long>();
  if (len < 0) throw ConfigError("len", "len must be >= 0");
  sc.n = static_cast<std::size_t>(n);
  sc.length = static_cast<std::size_t>(len);
  sc.theta = real_of(cfg, "theta");
  sc.workers = workers_of(cfg);
  return sc;
}

std::vector<Key> sampler_keys(long n) {
  return {{"seed", Kind::unsigned_integer, 7, "sampler seed"},
          {"n", Kind::integer, n, "number of words"},
          {"len", Kind::integer, 50, "word length"},
          {"theta", Kind::real, 1.0, "angle of the U letter, H ud(theta) H^dag"}};
}

ordered_json nearest_json(const std::array<pfq::NearestStrange, 3>& near, const std::vector<pfq::SampleRecord>& recs) {
  ordered_json a = ordered_json::array();
  for (const auto& n : near) {
    ordered_json e;
    e["label"] = n.label;
    e["word_index"] = n.word_index;
    e["word"] = recs[n.word_index].word;
    e["distance"] = n.distance;
    e["score_M"] = n.score_m;
    e["wigner_min"] = n.wigner_min;
    a.push_back(e);
  }
  return a;
}

void run_sample(const json& cfg, Output& out) {
  auto sc = sampler_of(cfg);
  sc.clifford_only = cfg["clifford-only"].get<bool>();
  const long bins = cfg["bins"].get<long>();
  if (bins < 1 || bins > 1000) throw ConfigError("bins", "bins must be in [1, 1000]");
  const auto recs = pfq::sample_words(sc);
  std::ostringstream csv;
  csv << "word_index,alpha,beta,gamma,delta1,delta2,score_M,wigner_min,dist_Sa,dist_Sb,dist_Sc\n";
  for (const auto& r : recs)
    csv << r.word_index << ',' << num(r.state.alpha()) << ',' << num(r.state.beta()) << ',' << num(r.state.gamma())
        << ',' << num(r.state.delta1()) << ',' << num(r.state.delta2()) << ',' << num(r.score_m) << ','
        << num(r.wigner_min) << ',' << num(r.strange_distance[0]) << ',' << num(r.strange_distance[1]) << ','
        << num(r.strange_distance[2]) << '\n';
  out.write("sample.csv", csv.str());

  const auto cov = pfq::coverage_stats(recs, static_cast<int>(bins));
  ordered_json s;
  s["records"] = recs.size();
  s["distinct_states"] = pfq::count_distinct(pfq::states_of(recs));
  ordered_json c;
  c["bins"] = cov.bins;
  c["phase_cells_occupied"] = cov.phase_cells_occupied;
  c["phase_cells_total"] = cov.phase_cells_total;
  c["phase_occupancy"] = cov.phase_occupancy();
  c["magnitude_cells_occupied"] = cov.magnitude_cells_occupied;
  c["magnitude_cells_total"] = cov.magnitude_cells_total;
  c["magnitude_occupancy"] = cov.magnitude_occupancy();
  c["negative_wigner_records"] = cov.negative_wigner;
  s["coverage"] = c;
  s["nearest_strange"] = nearest_json(pfq::nearest_strange_report(recs), recs);
  out.write_json("sample.json", s);
}

void run_magic_report(const json& cfg, Output& out) {
  const auto sc = sampler_of(cfg);
  ordered_json s;
  ordered_json strange = ordered_json::array();
  const auto states = pfq::strange_states();
  const char* labels[3] = {"S_a", "S_b", "S_c"};
  std::array<double, 3> oracle{};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto w = pfq::wigner(states[k].density());
    const auto sc_k = pfq::contextuality_score(states[k]);
    oracle[k] = sc_k.score_m;
    ordered_json e;
    e["label"] = labels[k];
    e["amplitudes"] = json::array({cplx(states[k].amplitudes()(0)), cplx(states[k].amplitudes()(1)),
                                   cplx(states[k].amplitudes()(2))});
    e["wigner"] = w.values;
    e["wigner_min_entry"] = w.min();
    e["score_M"] = sc_k.score_m;
    e["wigner_min"] = sc_k.wigner_min;
    strange.push_back(e);
  }
  s["strange_states"] = strange;
  const auto stab = pfq::stabilizer_states();
  double stab_min = 1.0;
  for (const auto& st : stab) stab_min = std::min(stab_min, pfq::wigner(st.density()).min());
  s["stabilizer_states"] = {{"count", stab.size()}, {"min_wigner_entry", stab_min}};

  const auto recs = pfq::sample_words(sc);
  const auto near = pfq::nearest_strange_report(recs);
  auto table = nearest_json(near, recs);
  std::ostringstream csv;
  csv << "label,word_index,distance,score_M,wigner_min,oracle_score_M\n";
  for (std::size_t k = 0; k < 3; ++k) {
    table[k]["oracle_score_M"] = oracle[k];
    table[k]["score_gap"] = std::abs(near[k].score_m - oracle[k]);
    csv << near[k].label << ',' << near[k].word_index << ',' << num(near[k].distance) << ',' << num(near[k].score_m)
        << ',' << num(near[k].wigner_min) << ',' << num(oracle[k]) << '\n';
  }
  s["nearest_sampled"] = table;
  out.write("magic_report.csv", csv.str());
  out.write_json("magic_report.json", s);
}

std::vector<Key> rydberg_field_keys() {
  std::vector<Key> k;
  const double om[4] = {0.0, 0.0, 1.0, 1.0};
  const double de[4] = {0.0, 0.0, 20.0, 20.0};
  for (int i = 1; i <= 4; ++i) k.push_back({"omega" + std::to_string(i), Kind::real, om[i - 1], "Rabi frequency"});
  for (int i = 1; i <= 4; ++i) k.push_back({"delta" + std::to_string(i), Kind::real, de[i - 1], "detuning"});
  for (int i = 1; i <= 4; ++i) k.push_back({"phi" + std::to_string(i), Kind::real, 0.0, "field phase"});
  return k;
}

pfq::RydbergParams rydberg_params_of(const json& cfg) {
  pfq::RydbergParams p;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string s = std::to_string(i + 1);
    p.omega[i] = real_of(cfg, "omega" + s);
    p.delta[i] = real_of(cfg, "delta" + s);
    p.phase[i] = real_of(cfg, "phi" + s);
  }
  if (std::abs(p.resonance_residual()) > 1e-12 * std::max(1.0, std::abs(p.delta[3])))
    throw ConfigError("delta4", "four-photon resonance needs delta4 = delta1 + delta2 + delta3 (residual " +
                                    num(p.resonance_residual()) + ")");
  return p;
}

void run_rydberg_evolve(const json& cfg, Output& out) {
  const auto p = rydberg_params_of(cfg);
  const std::string model = cfg["model"].get<std::string>();
  if (model != "full" && model != "eliminated") throw ConfigError("model", "model must be 'full' or 'eliminated'");
  const long start = cfg["psi0"].get<long>();
  const long dim = model == "full" ? 4 : 3;
  if (start < 0 || start >= dim) throw ConfigError("psi0", "psi0 must index a basis state of the model");
  const Eigen::MatrixXcd h = model == "full" ? Eigen::MatrixXcd(pfq::rotating_hamiltonian(p))
                                             : Eigen::MatrixXcd(pfq::adiabatic_eliminate(p));
  double t = real_of(cfg, "T");
  if (t < 0) throw ConfigError("T", "T must be >= 0 (0 picks 10/|Omega_R|)");
  if (t == 0) {
    const double r = std::abs(p.effective_rabi());
    t = std::isfinite(r) && r > 0 ? 10.0 / r : 10.0;
  }
  double dt = real_of(cfg, "dt");
  if (dt < 0) throw ConfigError("dt", "dt must be >= 0 (0 picks 0.02/||H||)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  const double hn = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  if (dt == 0) dt = 0.02 / std::max(1.0, hn);
  if (dt * hn >= 0.1) throw ConfigError("dt", "dt*||H|| = " + num(dt * hn) + " violates the 0.1 stability guard");
  long stride = cfg["stride"].get<long>();
  if (stride < 0) throw ConfigError("stride", "stride must be >= 0 (0 keeps about 1000 rows)");
  const auto steps = static_cast<long>(std::ceil(t / dt - 1e-12));
  if (stride == 0) stride = std::max(1L, steps / 1000);

  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(dim);
  psi0(start) = 1.0;
  const auto tr = pfq::evolve(h, psi0, t, dt, {static_cast<std::size_t>(stride), true});
  std::ostringstream csv;
  csv << "t,p0,p1,p2,p3,arg_c2,arg_c3\n";
  double leak = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const auto& s = tr.states[i];
    const pfq::Complex c3 = dim == 4 ? s(3) : pfq::Complex(0.0);
    leak = std::max(leak, std::norm(c3));
    csv << num(tr.times[i]) << ',' << num(std::norm(s(0))) << ',' << num(std::norm(s(1))) << ',' << num(std::norm(s(2)))
        << ',' << num(std::norm(c3)) << ',' << num(std::arg(s(2))) << ',' << num(std::arg(c3)) << '\n';
  }
  out.write("rydberg_trajectory.csv", csv.str());
  ordered_json j;
  j["model"] = model;
  j["T"] = t;
  j["dt"] = dt;
  j["steps"] = tr.steps;
  j["stride"] = stride;
  j["boost"] = p.boost();
  j["effective_rabi"] = cplx(p.effective_rabi());
  j["max_rydberg_population_sampled"] = leak;
  j["final_norm"] = tr.final_state.norm();
  const auto warn = pfq::elimination_warning(p);
  j["elimination_warning"] = warn ? json(*warn) : json();
  out.write_json("rydberg_evolve.json", j);
  if (warn) std::cerr << "warning: " << *warn << "\n";
}

void run_rydberg_berry(const json& cfg, Output& out) {
  const double d = real_of(cfg, "D");
  if (d < 0) throw ConfigError("D", "D must be >= 0");
  const long branch = cfg["branch"].get<long>();
  if (branch != 1 && branch != -1) throw ConfigError("branch", "branch must be +1 or -1");
  const long winding = cfg["winding"].get<long>();
  if (winding == 0 || std::abs(winding) > 100) throw ConfigError("winding", "winding must be nonzero and at most 100");
  const auto loop = pfq::BerryLoop::constant(d, real_of(cfg, "splitting"), static_cast<int>(branch), static_cast<int>(winding));
  const double gap = 2.0 * loop.half_gap(0.0);
  if (gap <= 0) throw ConfigError("splitting", "levels are degenerate (splitting = D = 0)");
  double t = real_of(cfg, "T");
  if (t < 0) throw ConfigError("T", "T must be >= 0 (0 picks T*gap = 200)");
  if (t == 0) t = 200.0 / gap;
  const double dt = real_of(cfg, "dt");
  if (dt < 0) throw ConfigError("dt", "dt must be >= 0");
  if (dt > 0 && dt * 0.5 * gap >= 0.1) throw ConfigError("dt", "dt*||H|| violates the 0.1 stability guard");
  const auto c = pfq::compare_berry(loop, t, dt);
  ordered_json j;
  j["gamma_closed"] = c.gamma_closed;
  j["gamma_numeric"] = c.gamma_numeric;
  j["T"] = t;
  j["residual"] = c.residual;
  j["relative_error"] = c.relative;
  j["gap"] = gap;
  j["adiabatic_warning"] = c.adiabatic_warning;
  out.write_json("rydberg_berry.json", j);
  if (c.adiabatic_warning) std::cerr << "warning: T*gap < 20, loop is not adiabatic\n";
}

void run_rydberg_mapping(const json& cfg, Output& out) {
  const double g = real_of(cfg, "g");
  if (!(g > 0)) throw ConfigError("g", "g must be positive");
  const auto rep = pfq::verify_mapping(g);
  ordered_json j;
  j["g"] = g;
  j["literal_matrix"] = matrix_json(rep.literal);
  j["target_matrix"] = matrix_json(g * pfq::interaction_matrix());
  ordered_json vars = ordered_json::array();
  for (const auto& v : rep.variants) {
    ordered_json e;
    e["convention"] = v.name();
    e["residual"] = v.residual;
    e["identity_shift"] = v.shift;
    vars.push_back(e);
  }
  j["variants"] = vars;
  j["best_convention"] = rep.best_variant().name();
  j["best_residual"] = rep.best_variant().residual;
  j["literal_residual"] = rep.variants[0].residual;
  j["exact_match"] = rep.exact();
  out.write_json("rydberg_mapping.json", j);
}

void run_rydberg_design(const json& cfg, Output& out) {
  const double g = real_of(cfg, "g");
  if (!(g > 0)) throw ConfigError("g", "g must be positive");
  const double k = real_of(cfg, "detuning-scale");
  if (k < 0) throw ConfigError("detuning-scale", "detuning-scale must be >= 0 (0 picks the default)");
  const auto r = pfq::inverse_design(g * pfq::interaction_matrix(), k);
  ordered_json j;
  j["g"] = g;
  j["omega"] = r.params.omega;
  j["delta"] = r.params.delta;
  j["phi"] = r.params.phase;
  j["identity_shift"] = r.shift;
  j["residual"] = r.residual;
  j["reachable"] = r.reachable();
  j["elimination_ratio"] = pfq::elimination_ratio(r.params);
  out.write_json("rydberg_design.json", j);
  if (!r.reachable()) throw ConfigError("g", "target unreachable, residual " + num(r.residual));
}

std::vector<Key> with_common(std::vector<Key> k) {
  k.push_back(kOut);
  k.push_back(kWorkers);
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parafermion qutrit workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pfq::kVersion);

  std::vector<Command> cmds;
  cmds.reserve(16);

  auto add = [&](CLI::App& parent, const std::string& sub, const std::string& full, const std::string& desc,
                 std::vector<Key> keys, std::function<void(const json&, Output&)> run) {
    Command c;
    c.name = full;
    c.keys = with_common(std::move(keys));
    c.run = std::move(run);
    cmds.push_back(std::move(c));
    register_command(parent, sub, desc, cmds.back());
  };

  {
    auto k = chain_keys();
    k.insert(k.begin() + 1, {"f", Kind::real, 0.1, "uniform flip coupling"});
    add(app, "spectrum", "spectrum", "full spectrum of a uniform chain with parity labels", k, run_spectrum);
  }
  {
    auto k = chain_keys();
    k.push_back({"f-grid", Kind::text, "0:0.3:0.01", "flip values, start:stop:step or comma list"});
    k.push_back({"f", Kind::real, 0.1, "flip value for the coupling summary"});
    add(app, "effective", "effective", "exact vs perturbative ground levels over a grid of f (L = 2)", k, run_effective);
  }
  add(app, "gate-level", "gate-level", "Clifford-hierarchy level of ud(theta) or of the dynamical gate",
      {{"theta", Kind::text, "", "p/q: theta = 2 pi p / q"},
       {"beta-t", Kind::real, json(), "interaction strength times time"},
       {"k-max", Kind::integer, pfq::kDefaultHierarchyBound, "largest level searched"}},
      run_gate_level);
  {
    auto k = sampler_keys(5000);
    k.push_back({"clifford-only", Kind::boolean, false, "letters X, S, H only"});
    k.push_back({"bins", Kind::integer, 12, "coverage grid resolution"});
    add(app, "sample", "sample", "random words over {X, S, H, U} applied to |0>", k, run_sample);
  }
  add(app, "magic-report", "magic-report", "strange-state oracle values and the nearest sampled states",
      sampler_keys(10000), run_magic_report);

  CLI::App* ryd = app.add_subcommand("rydberg", "four-level Rydberg scheme");
  ryd->require_subcommand(1);
  {
    auto k = rydberg_field_keys();
    k.push_back({"T", Kind::real, 0.0, "duration, 0 picks 10/|Omega_R|"});
    k.push_back({"dt", Kind::real, 0.0, "time step, 0 picks 0.02/||H||"});
    k.push_back({"psi0", Kind::integer, 0, "initial basis state"});
    k.push_back({"stride", Kind::integer, 0, "rows kept every stride steps, 0 keeps about 1000"});
    k.push_back({"model", Kind::text, "full", "full (4-level) or eliminated (3-level)"});
    add(*ryd, "evolve", "rydberg evolve", "time evolution in the rotating frame", k, run_rydberg_evolve);
  }
  add(*ryd, "berry", "rydberg berry", "Berry phase of a constant-envelope loop, numeric vs closed form",
      {{"D", Kind::real, 1.0, "coupling magnitude"},
       {"splitting", Kind::real, 2.0, "level splitting of the pair"},
       {"branch", Kind::integer, 1, "closed-form branch, +1 or -1"},
       {"winding", Kind::integer, 1, "turns of the coupling phase"},
       {"T", Kind::real, 0.0, "loop duration, 0 picks T*gap = 200"},
       {"dt", Kind::real, 0.0, "time step, 0 picks automatically"}},
      run_rydberg_berry);
  add(*ryd, "mapping", "rydberg mapping", "check the quoted field parameters against g H_int",
      {{"g", Kind::real, 1.0, "target coupling"}}, run_rydberg_mapping);
  add(*ryd, "design", "rydberg design", "field parameters realizing g H_int",
      {{"g", Kind::real, 1.0, "target coupling"}, {"detuning-scale", Kind::real, 0.0, "delta4, 0 picks the default"}},
      run_rydberg_design);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (auto& cmd : cmds) {
    if (!cmd.app->parsed()) continue;
    try {
      const json cfg = resolve(cmd);
      const std::string dir = cfg["out"].is_null() ? default_output_dir() : cfg["out"].get<std::string>();
      Output out(dir);
      cmd.run(cfg, out);
      ordered_json m;
      m["artifact"] = "pfq";
      m["version"] = pfq::kVersion;
      m["subcommand"] = cmd.name;
      m["config"] = ordered_json::parse(cfg.dump());
      m["outputs"] = out.files();
      out.write_json("manifest.json", m);
      return 0;
    } catch (const ConfigError& e) {
      std::cerr << "config error [" << e.key << "]: " << e.what() << "\n";
      return 2;
    } catch (const pfq::DomainError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    } catch (const IoError& e) {
      std::cerr << "i/o error: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
