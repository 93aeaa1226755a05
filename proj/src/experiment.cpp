#include "catbrw/experiment.h"

#include <cmath>
#include <set>
#include <sstream>

#include "catbrw/acceptance.h"
#include "catbrw/errors.h"
#include "catbrw/io.h"
#include "catbrw/kernels.h"
#include "catbrw/moments.h"
#include "catbrw/volterra.h"

namespace catbrw {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in '" + where + "'");
}

template <class T>
void take(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

const char* mode_name(ExcursionMode m) { return m == ExcursionMode::Spatial ? "spatial" : "tabulated"; }

std::map<std::string, double> parse_key_values(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IntegrityError("malformed constants line: " + line);
    kv[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
  }
  return kv;
}

}  // namespace

WalkSpec ExperimentConfig::make_walk() const {
  try {
    const int d = walk.at("dimension").get<int>();
    if (walk.contains("preset")) {
      if (walk.at("preset").get<std::string>() != "simple") throw ConfigError("unknown walk preset");
      return WalkSpec::simple(d, walk.value("rate", 1.0));
    }
    std::vector<Jump> jumps;
    for (const auto& jj : walk.at("jumps")) jumps.push_back({jj.at("x").get<std::vector<int>>(), jj.at("rate").get<double>()});
    return WalkSpec(d, std::move(jumps));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("walk section: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("walk section: ") + e.what());
  }
}

OffspringLaw ExperimentConfig::make_offspring() const {
  try {
    if (offspring.contains("coefficients")) return OffspringLaw(offspring.at("coefficients").get<std::vector<double>>());
    const auto preset = offspring.at("preset").get<std::string>();
    if (preset == "binary") return OffspringLaw::binary(offspring.value("p2", 1.0));
    if (preset == "geometric") return OffspringLaw::geometric(offspring.at("p").get<double>(), offspring.value("tail", 1e-17));
    throw ConfigError("unknown offspring preset '" + preset + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("offspring section: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("offspring section: ") + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["walk"] = walk;
  j["offspring"] = offspring;
  j["sandwich"] = {{"epsilon", epsilon}};
  j["calibration"] = {{"excursions", calibration.excursions}, {"horizon", calibration.horizon},
                      {"grid_first", calibration.grid_first}, {"grid_ratio", calibration.grid_ratio},
                      {"splice", calibration.splice},         {"min_count", calibration.min_count}};
  j["solver"] = {{"step", solver.step}, {"t_max", solver.t_max}};
  j["moments"] = {{"max_order", max_moment}};
  j["mc"] = {{"replicates", mc.replicates}, {"window", mc.window}, {"probes", mc.probes},
             {"mode", mode_name(mc.mode)},  {"explosion_cap", mc.explosion_cap}};
  j["seed"] = seed;
  return j;
}

std::string ExperimentConfig::hash() const { return sha256_hex(to_json().dump()); }

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.walk = {{"preset", "simple"}, {"dimension", 4}, {"rate", 1.0}};
  c.offspring = {{"preset", "binary"}, {"p2", 1.0}};
  return c;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c = default_config();
  reject_unknown(j, {"walk", "offspring", "sandwich", "calibration", "solver", "moments", "mc", "seed"}, "config");
  if (j.contains("walk")) {
    reject_unknown(j["walk"], {"preset", "dimension", "rate", "jumps"}, "walk");
    c.walk = j["walk"];
    if (!c.walk.contains("dimension")) c.walk["dimension"] = 4;
    if (!c.walk.contains("jumps") && !c.walk.contains("preset")) c.walk["preset"] = "simple";
    if (c.walk.contains("preset") && !c.walk.contains("rate")) c.walk["rate"] = 1.0;
  }
  if (j.contains("offspring")) {
    reject_unknown(j["offspring"], {"preset", "p2", "p", "tail", "coefficients"}, "offspring");
    c.offspring = j["offspring"];
  }
  if (j.contains("sandwich")) {
    reject_unknown(j["sandwich"], {"epsilon"}, "sandwich");
    take(j["sandwich"], "epsilon", c.epsilon, "sandwich");
  }
  if (j.contains("calibration")) {
    const auto& s = j["calibration"];
    reject_unknown(s, {"excursions", "horizon", "grid_first", "grid_ratio", "splice", "min_count"}, "calibration");
    take(s, "excursions", c.calibration.excursions, "calibration");
    take(s, "horizon", c.calibration.horizon, "calibration");
    take(s, "grid_first", c.calibration.grid_first, "calibration");
    take(s, "grid_ratio", c.calibration.grid_ratio, "calibration");
    take(s, "splice", c.calibration.splice, "calibration");
    take(s, "min_count", c.calibration.min_count, "calibration");
  }
  if (j.contains("solver")) {
    reject_unknown(j["solver"], {"step", "t_max"}, "solver");
    take(j["solver"], "step", c.solver.step, "solver");
    take(j["solver"], "t_max", c.solver.t_max, "solver");
  }
  if (j.contains("moments")) {
    reject_unknown(j["moments"], {"max_order"}, "moments");
    take(j["moments"], "max_order", c.max_moment, "moments");
  }
  if (j.contains("mc")) {
    const auto& s = j["mc"];
    reject_unknown(s, {"replicates", "window", "probes", "mode", "explosion_cap"}, "mc");
    take(s, "replicates", c.mc.replicates, "mc");
    take(s, "window", c.mc.window, "mc");
    take(s, "probes", c.mc.probes, "mc");
    take(s, "explosion_cap", c.mc.explosion_cap, "mc");
    if (s.contains("mode")) {
      std::string m;
      take(s, "mode", m, "mc");
      if (m == "spatial") c.mc.mode = ExcursionMode::Spatial;
      else if (m == "tabulated") c.mc.mode = ExcursionMode::Tabulated;
      else throw ConfigError("mc.mode must be 'spatial' or 'tabulated'");
    }
  }
  take(j, "seed", c.seed, "config");

  // Schema-level checks so bad values fail before any work starts.
  (void)c.make_walk();
  (void)c.make_offspring();
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("sandwich.epsilon must lie in (0,1)");
  if (c.calibration.excursions < 1) throw ConfigError("calibration.excursions must be positive");
  if (!(c.calibration.splice > c.calibration.grid_first) || c.calibration.splice > c.calibration.horizon)
    throw ConfigError("calibration grid must satisfy grid_first < splice <= horizon");
  if (!(c.calibration.grid_ratio > 1.0)) throw ConfigError("calibration.grid_ratio must exceed 1");
  if (!(c.solver.step > 0.0) || !(c.solver.t_max > c.solver.step)) throw ConfigError("solver grid is invalid");
  if (std::abs(std::round(c.solver.t_max / c.solver.step) * c.solver.step - c.solver.t_max) > 1e-9 * c.solver.t_max)
    throw ConfigError("solver.t_max must be a multiple of solver.step");
  if (c.max_moment < 1 || c.max_moment > kDefaultMaxMomentOrder) throw ConfigError("moments.max_order must lie in [1,6]");
  if (c.mc.replicates < 1 || !(c.mc.window > 0.0)) throw ConfigError("mc replicates and window must be positive");
  if (c.mc.window > c.solver.t_max) throw ConfigError("mc.window must not exceed solver.t_max");
  for (std::size_t i = 0; i < c.mc.probes.size(); ++i)
    if (c.mc.probes[i] < 0.0 || c.mc.probes[i] > c.mc.window || (i && c.mc.probes[i] <= c.mc.probes[i - 1]))
      throw ConfigError("mc.probes must be increasing and inside [0, window]");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DependencyError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

McSummary McSummary::from(const SimulationResult& r) {
  McSummary s;
  s.probes = r.probes;
  s.exploded = r.exploded;
  for (std::size_t i = 0; i < r.probes.size(); ++i) {
    s.survival.push_back(r.survival(i));
    s.mean.push_back(r.mean(i));
    s.factorial2.push_back(r.factorial2(i));
    s.survivors.push_back(r.tallies[i].survivors);
    s.histograms.emplace_back(r.tallies[i].histogram.begin(), r.tallies[i].histogram.end());
  }
  return s;
}

Pipeline::Pipeline(ExperimentConfig cfg, std::filesystem::path out, int threads)
    : cfg_(std::move(cfg)), out_(std::move(out)), threads_(threads), hash_(cfg_.hash()) {}

Metadata Pipeline::base_meta() const {
  return {{"config_hash", hash_}, {"config", cfg_.to_json().dump()}, {"seed", std::to_string(cfg_.seed)}};
}

json Pipeline::read_manifest() const {
  const auto path = out_ / "manifest.json";
  if (!std::filesystem::exists(path)) return json::object();
  try {
    return json::parse(read_file(path));
  } catch (const json::exception&) {
    throw IntegrityError("manifest.json is corrupt");
  }
}

void Pipeline::record(const std::string& step, const std::string& name, const std::string& suffix,
                      const std::string& bytes) {
  const std::string file = step + "-" + hash_.substr(0, 12) + suffix;
  write_file(out_ / file, bytes);
  json m = read_manifest();
  if (m.value("config_hash", std::string()) != hash_) m = {{"config_hash", hash_}, {"artifacts", json::object()}};
  m["artifacts"][step][name] = {{"file", file}, {"sha256", sha256_hex(bytes)}};
  write_file(out_ / "manifest.json", m.dump(2) + "\n");
}

std::string Pipeline::load_artifact(const std::string& step, const std::string& name) const {
  const json m = read_manifest();
  if (m.value("config_hash", std::string()) != hash_)
    throw DependencyError("no artifacts for this configuration in " + out_.string() + "; run '" + step + "' first");
  if (!m["artifacts"].contains(step) || !m["artifacts"][step].contains(name))
    throw DependencyError("missing '" + step + "' artifact '" + name + "'; run '" + step + "' first");
  const auto& entry = m["artifacts"][step][name];
  const auto path = out_ / entry.at("file").get<std::string>();
  if (!std::filesystem::exists(path)) throw DependencyError("artifact " + path.string() + " is missing; rerun '" + step + "'");
  std::string bytes = read_file(path);
  if (sha256_hex(bytes) != entry.at("sha256").get<std::string>())
    throw IntegrityError("artifact " + path.string() + " does not match its recorded hash");
  return bytes;
}

Calibration Pipeline::calibrate() {
  const WalkSpec walk = cfg_.make_walk();
  const OffspringLaw f = cfg_.make_offspring();
  (void)calibrate_alpha(f.mean(), 1.0);  // rejects m1 < 1 before any sampling
  if (walk.dimension() <= 2) throw UnsupportedDimensionError("calibration requires d >= 3");

  const GammaEstimate gamma = gamma_d(walk);
  const auto grid = geometric_grid(cfg_.calibration.grid_first, cfg_.calibration.grid_ratio, cfg_.calibration.splice);
  ReturnTableOptions opts;
  opts.min_count = static_cast<std::size_t>(cfg_.calibration.min_count);
  opts.threads = threads_;
  opts.gamma = gamma.value;
  const ReturnTable rt = tabulate_return_cdf(walk, grid, cfg_.calibration.excursions, cfg_.calibration.horizon,
                                             cfg_.seed, opts);
  const double alpha = calibrate_alpha(f.mean(), rt.h);

  Calibration cal;
  cal.constants = make_constants(walk.total_rate(), walk.second_moment(), gamma.value, gamma.error, rt.h,
                                 rt.h_raw_se, alpha, f);
  cal.g2 = rt.g2;
  cal.h_raw = rt.h_raw;

  std::string text = "# config_hash=" + hash_ + "\n";
  text += cal.constants.to_text();
  text += "h_raw = " + format_double(rt.h_raw) + "\n";
  text += "tail_constant_theory = " + format_double(rt.tail_constant_theory) + "\n";
  record("calibrate", "constants", "-constants.txt", text);

  Metadata meta = base_meta();
  meta.emplace_back("spec_hash", sha256_hex(cfg_.walk.dump()));
  meta.emplace_back("replicates", std::to_string(rt.replicates));
  meta.emplace_back("horizon", format_double(rt.horizon));
  meta.emplace_back("h", format_double(rt.h));
  meta.emplace_back("h_raw", format_double(rt.h_raw));
  record("calibrate", "g2", "-g2.csv", distribution_to_csv(rt.g2, meta).render());
  return cal;
}

Calibration Pipeline::load_calibration() const {
  const auto kv = parse_key_values(load_artifact("calibrate", "constants"));
  auto get = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw IntegrityError(std::string("constants artifact lacks ") + k);
    return it->second;
  };
  Calibration cal;
  const OffspringLaw f = cfg_.make_offspring();
  cal.constants = make_constants(get("a"), get("b2"), get("gamma"), get("gamma_error"), get("h"), get("h_se"),
                                 get("alpha"), f);
  cal.h_raw = get("h_raw");
  cal.g2 = distribution_from_csv(CsvTable::parse(load_artifact("calibrate", "g2")));
  return cal;
}

namespace {

KernelSet kernels_for(const ExperimentConfig& cfg, const Calibration& cal) {
  KernelOptions ko;
  ko.step = cfg.solver.step;
  ko.t_max = cfg.solver.t_max;
  ko.total_rate = cal.constants.a;
  ko.gamma = cal.constants.gamma;
  ko.dimension = cfg.make_walk().dimension();
  return build_kernel_set(cal.constants.alpha, cfg.make_offspring(), cal.constants.h, cal.g2, ko);
}

}  // namespace

std::string Pipeline::render_solution(const Calibration& cal) const {
  const KernelSet ks = kernels_for(cfg_, cal);
  const SolutionTable q = solve_q(ks, cfg_.make_offspring(), 0.0);
  CsvTable t;
  t.meta = base_meta();
  t.meta.emplace_back("s", "0");
  t.meta.emplace_back("step", format_double(ks.step));
  t.meta.emplace_back("scheme_order", "2");
  t.columns = {"t", "q"};
  for (std::size_t i = 0; i < q.size(); ++i) t.rows.push_back({q.grid[i], q.values[i]});
  return t.render();
}

std::string Pipeline::render_moments(const Calibration& cal) const {
  const KernelSet ks = kernels_for(cfg_, cal);
  const OffspringLaw f = cfg_.make_offspring();
  const auto P = compute_moments(ks, f, cfg_.max_moment);
  CsvTable t;
  t.meta = base_meta();
  t.columns = {"t"};
  for (int n = 1; n <= cfg_.max_moment; ++n) {
    t.columns.push_back("P" + std::to_string(n));
    t.columns.push_back("P" + std::to_string(n) + "_asymptotic");
  }
  const auto& c = cal.constants;
  for (std::size_t i = 0; i < P[0].size(); ++i) {
    const double tt = P[0].grid[i];
    std::vector<double> row{tt};
    for (int n = 1; n <= cfg_.max_moment; ++n) {
      row.push_back(P[static_cast<std::size_t>(n - 1)].values[i]);
      row.push_back(tt > 1.0 ? asymptotic_Pn(n, tt, c.c4, c.alpha, c.f2) : std::nan(""));
    }
    t.rows.push_back(std::move(row));
  }
  return t.render();
}

void Pipeline::solve() { record("solve", "q", ".csv", render_solution(load_calibration())); }

void Pipeline::moments() { record("moments", "moments", ".csv", render_moments(load_calibration())); }

void Pipeline::simulate() {
  const Calibration cal = load_calibration();
  SimConfig sc;
  sc.window = cfg_.mc.window;
  sc.replicates = cfg_.mc.replicates;
  sc.seed = cfg_.seed;
  sc.probes = cfg_.mc.probes;
  sc.mode = cfg_.mc.mode;
  sc.alpha = cal.constants.alpha;
  sc.offspring = cfg_.make_offspring();
  sc.h = cal.constants.h;
  sc.g2 = cal.g2;
  if (sc.mode == ExcursionMode::Spatial) sc.walk = cfg_.make_walk();
  sc.explosion_cap = cfg_.mc.explosion_cap;
  sc.threads = threads_;
  const SimulationResult res = run_simulation(sc);

  CsvTable t;
  t.meta = base_meta();
  t.meta.emplace_back("replicates", std::to_string(res.replicates));
  t.meta.emplace_back("exploded", std::to_string(res.exploded));
  t.meta.emplace_back("mode", mode_name(sc.mode));
  t.columns = {"t", "q_hat", "se", "n_survivors", "mean", "mean_se", "fact2", "fact2_se"};
  for (std::size_t i = 0; i < res.probes.size(); ++i) {
    const auto q = res.survival(i);
    const auto m = res.mean(i);
    const auto f2 = res.factorial2(i);
    t.rows.push_back({res.probes[i], q.value, q.std_error, static_cast<double>(res.tallies[i].survivors), m.value,
                      m.std_error, f2.value, f2.std_error});
  }
  record("simulate", "estimates", ".csv", t.render());

  CsvTable hist;
  hist.meta = base_meta();
  hist.columns = {"t", "value", "count"};
  for (std::size_t i = 0; i < res.probes.size(); ++i)
    for (const auto& [v, n] : res.tallies[i].histogram)
      hist.rows.push_back({res.probes[i], static_cast<double>(v), static_cast<double>(n)});
  record("simulate", "histogram", "-hist.csv", hist.render());
}

McSummary Pipeline::load_simulation() const {
  const CsvTable est = CsvTable::parse(load_artifact("simulate", "estimates"));
  const CsvTable hist = CsvTable::parse(load_artifact("simulate", "histogram"));
  McSummary s;
  const auto n = std::stoll(est.meta_value("replicates"));
  s.exploded = std::stoll(est.meta_value("exploded"));
  for (const auto& r : est.rows) {
    s.probes.push_back(r[0]);
    s.survival.push_back({r[1], r[2], n, cfg_.seed});
    s.survivors.push_back(static_cast<std::int64_t>(r[3]));
    s.mean.push_back({r[4], r[5], n, cfg_.seed});
    s.factorial2.push_back({r[6], r[7], n, cfg_.seed});
  }
  s.histograms.resize(s.probes.size());
  for (const auto& r : hist.rows)
    for (std::size_t i = 0; i < s.probes.size(); ++i)
      if (s.probes[i] == r[0])
        s.histograms[i].emplace_back(static_cast<std::int64_t>(r[1]), static_cast<std::int64_t>(r[2]));
  return s;
}

std::string Pipeline::report() {
  const Calibration cal = load_calibration();
  const McSummary mc = load_simulation();
  const std::string cached_q = load_artifact("solve", "q");
  const std::string cached_m = load_artifact("moments", "moments");
  const CsvTable qt = CsvTable::parse(cached_q);
  const CsvTable mt = CsvTable::parse(cached_m);

  const ModelBundle b = build_bundle(cfg_, cal);
  const auto& c = cal.constants;

  auto interp = [](const CsvTable& t, std::size_t col, double x) {
    SolutionTable s;
    s.label = t.columns[col];
    for (const auto& r : t.rows) {
      s.grid.push_back(r[0]);
      s.values.push_back(r[col]);
    }
    return s.at(x);
  };

  CsvTable cmp;
  cmp.meta = base_meta();
  cmp.columns = {"t",      "q_solver", "q_mc",         "q_mc_se",       "q_z",          "P1",       "mean_mc",
                 "mean_se", "P2",      "fact2_mc",     "fact2_se",      "q_asymptotic", "P1_asymptotic",
                 "cond_mean_mc", "cond_mean_asymptotic"};
  const std::size_t qcol = qt.column("q");
  const std::size_t p1col = mt.column("P1");
  const bool have_p2 = cfg_.max_moment >= 2;
  for (std::size_t i = 0; i < mc.probes.size(); ++i) {
    const double t = mc.probes[i];
    const double qs = interp(qt, qcol, t);
    const double z = mc.survival[i].std_error > 0 ? (mc.survival[i].value - qs) / mc.survival[i].std_error : 0.0;
    const double nan = std::nan("");
    const double cond = mc.survivors[i] > 0 ? mc.mean[i].value * static_cast<double>(mc.survival[i].replicates) /
                                                  static_cast<double>(mc.survivors[i])
                                            : nan;
    cmp.rows.push_back({t, qs, mc.survival[i].value, mc.survival[i].std_error, z, interp(mt, p1col, t),
                        mc.mean[i].value, mc.mean[i].std_error, have_p2 ? interp(mt, mt.column("P2"), t) : nan,
                        mc.factorial2[i].value, mc.factorial2[i].std_error, t > 1 ? survival_asymptote(t, c) : nan,
                        t > 1 ? first_moment_asymptote(t, c) : nan, cond,
                        t > 1 ? conditional_mean_asymptote(t, c) : nan});
  }

  std::vector<CriterionResult> results = evaluate_model_criteria(b, mc);
  const bool same = render_solution(cal) == cached_q && render_moments(cal) == cached_m;
  results.push_back(check_determinism(same, same ? "solver and moment tables regenerate byte-identically"
                                                 : "regenerated tables differ from cached artifacts"));

  std::string text = "catbrw report\nconfig_hash = " + hash_ + "\n\n[constants]\n" + c.to_text();
  text += "h_raw = " + format_double(cal.h_raw) + "\n";
  text += "exploded_replicates = " + std::to_string(mc.exploded) + "\n\n[acceptance]\n";
  int passed = 0;
  for (const auto& r : results) {
    text += format_result(r) + "\n";
    passed += r.pass;
  }
  text += "\n" + std::to_string(passed) + "/" + std::to_string(results.size()) + " criteria passed\n";
  record("report", "comparison", "-comparison.csv", cmp.render());
  record("report", "report", ".txt", text);
  return text;
}

}  // namespace catbrw
