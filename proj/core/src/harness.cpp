#include "latgrow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "latgrow/egs.hpp"
#include "latgrow/interactions.hpp"

namespace latgrow {

namespace {

const char* kCsvSchema = "# latgrow-csv v1";
const char* kJsonlSchema = "latgrow-jsonl v1";

long get_long(const nlohmann::json& j, const char* key, long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + ": expected integer");
  return j[key].get<long>();
}

double get_double(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + ": expected number");
  return j[key].get<double>();
}

std::string get_string(const nlohmann::json& j, const char* key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(std::string(key) + ": expected string");
  return j[key].get<std::string>();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  c.model = get_string(j, "model", "");
  static const char* known[] = {"plain",       "obt",        "pobt",
                                "fobt",        "robt",       "extended-drift",
                                "fobt-biased", "egs",        "layered",
                                "psrw-guided", "psrw-line",  "psrw-coupon"};
  bool ok = false;
  for (const char* k : known) ok = ok || c.model == k;
  if (!ok) throw ConfigError("model: unknown model '" + c.model + "'");
  c.d = static_cast<int>(get_long(j, "d", 2));
  if (c.d < 1 || c.d > kMaxDim) throw ConfigError("d: must be in [1,4]");
  c.horizon = get_long(j, "horizon", 0);
  if (c.horizon < 1) throw ConfigError("horizon: must be >= 1");
  c.replicas = get_long(j, "replicas", 1);
  if (c.replicas < 1) throw ConfigError("replicas: must be >= 1");
  c.master_seed = static_cast<uint64_t>(get_long(j, "master_seed", 0));
  c.r_max = get_long(j, "r_max", 1'000'000);
  c.dist_cap = get_long(j, "dist_cap", 4096);
  c.track_stopping_log = j.value("track_stopping_log", false);
  c.truncation_threshold = get_double(j, "truncation_threshold", 1.0);
  if (j.contains("checkpoints")) {
    if (!j["checkpoints"].is_array()) throw ConfigError("checkpoints: expected array");
    for (const auto& v : j["checkpoints"]) c.checkpoints.push_back(v.get<long>());
  }
  c.params = j.value("params", nlohmann::json::object());
  if (j.contains("output")) {
    const auto& o = j["output"];
    c.csv_path = get_string(o, "csv", "");
    c.jsonl_path = get_string(o, "jsonl", "");
    c.growth_log_path = get_string(o, "growth_log", "");
  }
  // Surface model/parameter mismatches at load time, not mid-run.
  make_model(c, 0);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

Schedule parse_schedule(const nlohmann::json& j) {
  Schedule s;
  if (j.contains("table")) {
    for (const auto& v : j["table"]) s.table.push_back(v.get<long>());
    if (s.table.empty()) throw ConfigError("schedule.table: empty");
    for (long n : s.table)
      if (n < 1) throw ConfigError("schedule.table: entries must be >= 1");
  } else {
    s.a = get_double(j, "a", 1.0);
    s.alpha = get_double(j, "alpha", 0.0);
    if (s.a <= 0.0) throw ConfigError("schedule.a: must be > 0");
  }
  return s;
}

namespace {

GrowingDomain parse_domain(const nlohmann::json& p, int d) {
  if (!p.contains("domain")) return ball(Site(), 1.0, Metric::Graph, d);
  const auto& jd = p["domain"];
  std::string type = get_string(jd, "type", "ball");
  if (type == "ball") {
    double r = get_double(jd, "r", 1.0);
    if (r < 1.0) throw ConfigError("domain.r: must be >= 1");
    std::string m = get_string(jd, "metric", "graph");
    Metric metric = m == "euclid" ? Metric::EuclideanProjected : Metric::Graph;
    return ball(Site(), r, metric, d);
  }
  if (type == "bernoulli") {
    double prob = get_double(jd, "p", 0.0);
    long box = get_long(jd, "box", 10);
    auto seed = static_cast<uint64_t>(get_long(jd, "seed", 0));
    return bernoulli_domain(prob, static_cast<int>(box), seed, d);
  }
  throw ConfigError("domain.type: unknown type '" + type + "'");
}

}  // namespace

std::unique_ptr<WalkModel> make_model(const ExperimentConfig& cfg,
                                      uint64_t replica) {
  const nlohmann::json& p = cfg.params;
  const std::string& m = cfg.model;

  if (m == "plain") return std::make_unique<PlainSrwModel>(cfg.d);

  if (m == "obt" || m == "pobt" || m == "fobt" || m == "robt" ||
      m == "extended-drift") {
    ObtParams op;
    BoundaryPolicy policy;
    if (m == "obt" || m == "extended-drift") op.kind = ObtKind::Obt;
    if (m == "pobt") {
      op.kind = ObtKind::Pobt;
      op.epsilon = get_double(p, "epsilon", 1.0);
      if (op.epsilon <= 0.0) throw ConfigError("epsilon: must be > 0");
      std::string rule = get_string(p, "rule", "all");
      if (rule == "one-uniform") op.rule = PobtRule::OneUniform;
      else if (rule != "all") throw ConfigError("rule: unknown POBT rule");
    }
    if (m == "fobt") op.kind = ObtKind::Fobt;
    if (m == "robt") {
      op.kind = ObtKind::Robt;
      op.robt_bound = static_cast<int>(get_long(p, "bound", 1));
      op.robt_radius = get_long(p, "radius", 1);
      if (op.robt_bound < 1 || op.robt_radius < 1)
        throw ConfigError("robt: bound and radius must be >= 1");
    }
    if (m == "extended-drift") {
      policy.kind = BoundaryPolicyKind::DriftToOrigin;
      policy.delta = get_double(p, "delta", 0.0);
      if (policy.delta <= 0.0 || policy.delta >= 1.0 / cfg.d)
        throw ConfigError("delta: must be in (0, 1/d)");
    }
    return std::make_unique<ObtModel>(parse_domain(p, cfg.d), op, cfg.d, Site(),
                                      policy);
  }

  if (m == "fobt-biased") {
    if (cfg.d != 2) throw ConfigError("fobt-biased: requires d = 2");
    double prob = get_double(p, "p", 0.0);
    if (prob < 0.0 || prob >= 1.0) throw ConfigError("p: must be in [0,1)");
    uint64_t key = RngStream::derive(cfg.master_seed, replica, "d0").key();
    return std::make_unique<FobtBiasedModel>(bernoulli_field(prob, key));
  }

  if (m == "egs") {
    double c = get_double(p, "c", 1.0);
    std::string met = get_string(p, "metric", "euclid");
    Metric metric = met == "graph" ? Metric::Graph : Metric::EuclideanProjected;
    long k0 = get_long(p, "k0", 1);
    Schedule sched = parse_schedule(p.value("schedule", nlohmann::json::object()));
    try {
      return std::make_unique<EgsModel>(cfg.d, c, sched, metric, k0);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("egs: ") + e.what());
    }
  }

  if (m == "layered") {
    double pu = get_double(p, "p_up", 0.5);
    double q = get_double(p, "q", 0.0);
    if (pu <= 0.0 || pu >= 1.0) throw ConfigError("p_up: must be in (0,1)");
    if (q < 0.0 || q > 1.0) throw ConfigError("q: must be in [0,1]");
    Schedule sched = parse_schedule(p.value("schedule", nlohmann::json::object()));
    RngStream budget = RngStream::derive(cfg.master_seed, replica, "budget");
    long f0 = get_long(p, "frontier0", 1);
    return std::make_unique<LayeredChainModel>(
        [pu](long) { return pu; }, [q](long) { return q; }, sched, budget, f0);
  }

  if (m == "psrw-guided") {
    long L = get_long(p, "L", 2);
    if (L < 2) throw ConfigError("L: must be >= 2");
    std::string v = get_string(p, "variant", "full");
    GuidedVariant variant =
        v == "biased" ? GuidedVariant::BiasedD2 : GuidedVariant::FullD3;
    if (variant == GuidedVariant::BiasedD2 && cfg.d != 2)
      throw ConfigError("psrw-guided: biased variant requires d = 2");
    if (cfg.d < 2) throw ConfigError("psrw-guided: requires d >= 2");
    return std::make_unique<GuidedPsrwModel>(cfg.d, static_cast<int>(L), variant);
  }

  if (m == "psrw-line") {
    long M = get_long(p, "M", 1);
    if (M < 1) throw ConfigError("M: must be >= 1");
    return std::make_unique<LinePsrwModel>(cfg.d, M);
  }

  if (m == "psrw-coupon") {
    if (cfg.d < 2) throw ConfigError("psrw-coupon: requires d >= 2");
    long cap = get_long(p, "probe_cap", 1'000'000);
    return std::make_unique<CouponPsrwModel>(cfg.d, cap);
  }

  throw ConfigError("model: unknown model '" + m + "'");
}

namespace {

std::optional<BudgetReport> extract_budget(const WalkModel& model,
                                           const std::vector<long>& cps) {
  const ProbeBudget* b = nullptr;
  if (auto* g = dynamic_cast<const GuidedPsrwModel*>(&model)) b = &g->budget();
  else if (auto* l = dynamic_cast<const LinePsrwModel*>(&model)) b = &l->budget();
  else if (auto* c = dynamic_cast<const CouponPsrwModel*>(&model)) b = &c->budget();
  if (!b) return std::nullopt;
  return budget_report(*b, cps);
}

int worker_count(long replicas) {
  if (const char* env = std::getenv("LATGROW_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return static_cast<int>(std::min<long>(n, replicas));
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<long>(hw ? hw : 1, replicas));
}

}  // namespace

std::vector<ReplicaResult> run_experiment(const ExperimentConfig& cfg) {
  std::vector<ReplicaResult> results(static_cast<size_t>(cfg.replicas));
  std::vector<long> cps =
      cfg.checkpoints.empty() ? dyadic_checkpoints(cfg.horizon) : cfg.checkpoints;

  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto work = [&] {
    for (;;) {
      long r = next.fetch_add(1);
      if (r >= cfg.replicas) return;
      try {
        auto t0 = std::chrono::steady_clock::now();
        RngBundle rng = RngBundle::derive(cfg.master_seed, static_cast<uint64_t>(r));
        auto model = make_model(cfg, static_cast<uint64_t>(r));
        RunOptions opts;
        opts.horizon = cfg.horizon;
        opts.r_max = cfg.r_max;
        opts.dist_cap = cfg.dist_cap;
        opts.track_stopping_log = cfg.track_stopping_log;
        opts.checkpoints = cps;
        ReplicaResult& out = results[static_cast<size_t>(r)];
        out.replica = r;
        out.run = run(*model, opts, rng);
        out.budget = extract_budget(*model, cps);
        if (!cfg.growth_log_path.empty()) {
          if (auto* obt = dynamic_cast<const ObtModel*>(model.get())) {
            std::string path = cfg.growth_log_path;
            if (cfg.replicas > 1) path += ".r" + std::to_string(r);
            std::ofstream os(path);
            obt->domain().write_growth_log(os);
          }
        }
        out.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int workers = worker_count(cfg.replicas);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  if (!cfg.csv_path.empty()) write_checkpoints_csv(cfg.csv_path, results);
  if (!cfg.jsonl_path.empty()) write_replicas_jsonl(cfg.jsonl_path, results);
  return results;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double least_squares_slope(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2)
    throw std::invalid_argument("least_squares_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : xy) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(xy.size());
  double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("least_squares_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

Summary summarize(const std::vector<ReplicaResult>& results) {
  if (results.empty()) throw std::invalid_argument("summarize: empty results");
  Summary s;
  size_t rows = results[0].run.checkpoints.size();
  for (const auto& r : results) rows = std::min(rows, r.run.checkpoints.size());
  for (size_t i = 0; i < rows; ++i) {
    std::vector<double> n0s, dists;
    for (const auto& r : results) {
      n0s.push_back(static_cast<double>(r.run.checkpoints[i].n0));
      if (r.run.checkpoints[i].dist >= 0)
        dists.push_back(static_cast<double>(r.run.checkpoints[i].dist));
    }
    s.ts.push_back(results[0].run.checkpoints[i].t);
    s.median_n0.push_back(median(n0s));
    s.median_dist.push_back(dists.empty() ? -1.0 : median(dists));
  }
  for (const auto& r : results)
    if (r.run.truncated) ++s.truncated;
  std::vector<std::pair<double, double>> xy;
  for (size_t i = 0; i < s.ts.size(); ++i)
    if (s.ts[i] >= 1 && s.median_n0[i] >= 1.0)
      xy.emplace_back(std::log(static_cast<double>(s.ts[i])),
                      std::log(s.median_n0[i]));
  if (xy.size() >= 2) s.n0_slope = least_squares_slope(xy);
  return s;
}

double truncation_rate(const std::vector<ReplicaResult>& results) {
  if (results.empty()) return 0.0;
  long n = 0;
  for (const auto& r : results)
    if (r.run.truncated) ++n;
  return static_cast<double>(n) / static_cast<double>(results.size());
}

std::vector<SweepRow> sweep(const nlohmann::json& base_config,
                            const nlohmann::json& grid) {
  if (!grid.is_object() || grid.empty())
    throw ConfigError("sweep: grid must be a non-empty object");
  std::vector<std::string> keys;
  std::vector<std::vector<nlohmann::json>> values;
  for (const auto& [k, v] : grid.items()) {
    if (!v.is_array() || v.empty())
      throw ConfigError("sweep: grid entry '" + k + "' must be a non-empty array");
    keys.push_back(k);
    values.emplace_back(v.begin(), v.end());
  }

  std::vector<SweepRow> rows;
  std::vector<size_t> idx(keys.size(), 0);
  for (;;) {
    nlohmann::json cfg_json = base_config;
    SweepRow row;
    for (size_t i = 0; i < keys.size(); ++i) {
      std::string ptr = "/" + keys[i];
      for (auto& ch : ptr)
        if (ch == '.') ch = '/';
      cfg_json[nlohmann::json::json_pointer(ptr)] = values[i][idx[i]];
      row.cell[keys[i]] = values[i][idx[i]];
    }
    ExperimentConfig cfg = ExperimentConfig::from_json(cfg_json);
    std::vector<ReplicaResult> results = run_experiment(cfg);
    std::vector<double> n0s, lasts, mbars;
    for (const auto& r : results) {
      n0s.push_back(static_cast<double>(r.run.n0_final));
      lasts.push_back(static_cast<double>(r.run.last_return));
      if (r.budget) mbars.push_back(r.budget->trailing_mbar);
      if (r.run.truncated) ++row.truncated;
    }
    row.median_n0 = median(n0s);
    row.median_last_return = median(lasts);
    if (!mbars.empty()) row.median_trailing_mbar = median(mbars);
    rows.push_back(std::move(row));

    size_t k = 0;
    while (k < keys.size() && ++idx[k] == values[k].size()) {
      idx[k] = 0;
      ++k;
    }
    if (k == keys.size()) break;
  }
  return rows;
}

void write_checkpoints_csv(const std::string& path,
                           const std::vector<ReplicaResult>& results) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << kCsvSchema << "\n";
  os << "replica,t,n0,last_return,dist,domain_sites,domain_edges\n";
  for (const auto& r : results)
    for (const auto& row : r.run.checkpoints)
      os << r.replica << ',' << row.t << ',' << row.n0 << ',' << row.last_return
         << ',' << row.dist << ',' << row.sites << ',' << row.edges << "\n";
}

void write_replicas_jsonl(const std::string& path,
                          const std::vector<ReplicaResult>& results) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& r : results) {
    nlohmann::json j;
    j["schema"] = kJsonlSchema;
    j["replica"] = r.replica;
    j["n0"] = r.run.n0_final;
    j["last_return"] = r.run.last_return;
    j["steps"] = r.run.steps_done;
    j["truncated"] = r.run.truncated;
    if (r.budget) j["trailing_mbar"] = r.budget->trailing_mbar;
    os << j.dump() << "\n";
  }
}

void write_summary_csv(const std::string& path, const Summary& summary) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << kCsvSchema << "\n";
  os << "t,median_n0,median_dist\n";
  for (size_t i = 0; i < summary.ts.size(); ++i)
    os << summary.ts[i] << ',' << fmt_double(summary.median_n0[i]) << ','
       << fmt_double(summary.median_dist[i]) << "\n";
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << kCsvSchema << "\n";
  os << "cell,median_n0,median_last_return,median_trailing_mbar,truncated\n";
  for (const auto& row : rows) {
    nlohmann::json cell(row.cell);
    os << '"' << cell.dump() << '"' << ',' << fmt_double(row.median_n0) << ','
       << fmt_double(row.median_last_return) << ','
       << fmt_double(row.median_trailing_mbar) << ',' << row.truncated << "\n";
  }
}

std::vector<std::pair<long, CheckpointRow>> read_checkpoints_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::pair<long, CheckpointRow>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("replica,", 0) == 0) continue;
    std::istringstream ss(line);
    std::string field;
    long vals[7];
    for (int i = 0; i < 7; ++i) {
      if (!std::getline(ss, field, ',')) throw std::runtime_error("bad CSV row: " + line);
      vals[i] = std::stol(field);
    }
    CheckpointRow row;
    row.t = vals[1];
    row.n0 = vals[2];
    row.last_return = vals[3];
    row.dist = vals[4];
    row.sites = vals[5];
    row.edges = vals[6];
    out.emplace_back(vals[0], row);
  }
  return out;
}

}  // namespace latgrow
