// latgrow CLI: simulate / sweep / criterion / dirichlet.
// Exit codes: 0 ok, 2 config error, 3 truncation beyond threshold.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "latgrow/criterion.hpp"
#include "latgrow/harness.hpp"
#include "latgrow/potential.hpp"

namespace {

using namespace latgrow;

constexpr int kExitConfig = 2;
constexpr int kExitTruncation = 3;

std::map<std::string, std::string> parse_kv(const std::string& s) {
  std::map<std::string, std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--params: expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

Site parse_site(const std::string& s, int d) {
  Site z;
  std::istringstream ss(s);
  std::string coord;
  int i = 0;
  while (std::getline(ss, coord, ',')) {
    if (i >= d) throw ConfigError("site '" + s + "': too many coordinates");
    z[i++] = std::stoi(coord);
  }
  if (i != d) throw ConfigError("site '" + s + "': expected " + std::to_string(d) +
                                " coordinates");
  return z;
}

std::vector<Site> parse_site_list(const std::string& s, int d) {
  std::vector<Site> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(parse_site(item, d));
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& summary_path) {
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  std::vector<ReplicaResult> results = run_experiment(cfg);
  Summary summary = summarize(results);
  if (!summary_path.empty()) write_summary_csv(summary_path, summary);

  std::printf("model=%s d=%d horizon=%ld replicas=%ld\n", cfg.model.c_str(),
              cfg.d, cfg.horizon, cfg.replicas);
  std::vector<double> n0s;
  for (const auto& r : results) n0s.push_back(static_cast<double>(r.run.n0_final));
  std::printf("median_n0=%.17g n0_slope=%.6f truncated=%ld/%ld\n", median(n0s),
              summary.n0_slope, summary.truncated, cfg.replicas);
  if (truncation_rate(results) > cfg.truncation_threshold) {
    std::fprintf(stderr, "truncation rate %.3f exceeds threshold %.3f\n",
                 truncation_rate(results), cfg.truncation_threshold);
    return kExitTruncation;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_path) {
  std::ifstream cin_(config_path), gin(grid_path);
  if (!cin_) throw ConfigError("cannot open config file: " + config_path);
  if (!gin) throw ConfigError("cannot open grid file: " + grid_path);
  nlohmann::json base, grid;
  try {
    cin_ >> base;
    gin >> grid;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  std::vector<SweepRow> rows = sweep(base, grid);
  if (!out_path.empty()) write_sweep_csv(out_path, rows);
  for (const auto& row : rows) {
    nlohmann::json cell(row.cell);
    std::printf("%s median_n0=%.17g median_last_return=%.17g", cell.dump().c_str(),
                row.median_n0, row.median_last_return);
    if (row.median_trailing_mbar >= 0.0)
      std::printf(" trailing_mbar=%.6f", row.median_trailing_mbar);
    std::printf(" truncated=%ld\n", row.truncated);
  }
  return 0;
}

int cmd_criterion(const std::string& family, const std::string& params_str) {
  auto kv = parse_kv(params_str);
  auto get = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stod(it->second);
  };
  int d = static_cast<int>(get("d", 3));
  long k_max = static_cast<long>(get("k_max", 1000));
  Schedule sched;
  sched.a = get("a", 1.0);
  sched.alpha = get("alpha", 0.0);

  CriterionReport rep;
  try {
    if (family == "egs") rep = egs_criterion(sched, d, k_max);
    else if (family == "obt-box") rep = obt_box_criterion(sched, d, k_max);
    else throw ConfigError("--family: expected egs or obt-box");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  std::printf("# latgrow-csv v1\nk,term,partial_sum\n");
  double prev = 0.0;
  for (size_t i = 0; i < rep.partial_sums.size(); ++i) {
    std::printf("%zu,%.17g,%.17g\n", i + 1, rep.partial_sums[i] - prev,
                rep.partial_sums[i]);
    prev = rep.partial_sums[i];
  }
  std::printf("# verdict: %s\n", to_string(rep.verdict));
  return 0;
}

int cmd_dirichlet(int d, const std::string& domain_path, const std::string& target,
                  const std::string& killing, const std::string& start) {
  std::ifstream in(domain_path);
  if (!in) throw ConfigError("cannot open domain file: " + domain_path);
  nlohmann::json jd;
  try {
    in >> jd;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("domain parse error: ") + e.what());
  }

  GrowingDomain dom(d);
  std::string type = jd.value("type", "ball");
  if (type == "ball") {
    double r = jd.value("r", 1.0);
    std::string m = jd.value("metric", "graph");
    dom = ball(Site(), r, m == "euclid" ? Metric::EuclideanProjected : Metric::Graph, d);
  } else if (type == "sites") {
    // Explicit site list; all induced edges open.
    std::vector<Site> sites;
    for (const auto& arr : jd.at("sites")) {
      Site z;
      int i = 0;
      for (const auto& c : arr) z[i++] = c.get<int32_t>();
      sites.push_back(z);
    }
    std::vector<Edge> edges;
    std::unordered_set<Site, SiteHash> set(sites.begin(), sites.end());
    for (const Site& z : sites) {
      dom.add_site(z);
      for (int axis = 0; axis < d; ++axis) {
        Edge e(z, axis);
        if (set.count(e.hi())) edges.push_back(e);
      }
    }
    dom.add_edges(edges, 0);
  } else {
    throw ConfigError("domain type: expected ball or sites");
  }

  DirichletProblem p;
  p.domain = &dom;
  p.target = parse_site_list(target, d);
  if (killing.empty()) {
    p.killing.assign(dom.boundary().begin(), dom.boundary().end());
    std::sort(p.killing.begin(), p.killing.end());
  } else {
    p.killing = parse_site_list(killing, d);
  }
  p.start = parse_site(start, d);
  if (p.target.empty()) throw ConfigError("--target: at least one site required");

  DirichletField field = solve_hit_probability(p);
  std::printf("h(%s) = %.15f\n", p.start.to_string(d).c_str(), field.at(p.start));
  std::printf("residual_inf = %.3e\n", field.residual_inf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks on growing lattice domains"};
  app.require_subcommand(1);

  std::string config_path, grid_path, summary_path, out_path;
  std::string family, params_str;
  std::string domain_path, target, killing, start;
  int dim = 2;

  auto* sim = app.add_subcommand("simulate", "Run a configured experiment");
  sim->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sim->add_option("--summary", summary_path, "Write summary CSV here");

  auto* sw = app.add_subcommand("sweep", "Grid sweep over config parameters");
  sw->add_option("--config", config_path, "Base config (JSON)")->required();
  sw->add_option("--grid", grid_path, "Grid file (JSON object of lists)")->required();
  sw->add_option("--out", out_path, "Write sweep CSV here");

  auto* cr = app.add_subcommand("criterion", "Evaluate a criterion series");
  cr->add_option("--family", family, "egs | obt-box")->required();
  cr->add_option("--params", params_str, "key=value,... (d,a,alpha,k_max)");

  auto* di = app.add_subcommand("dirichlet", "Solve a hitting probability");
  di->add_option("--dim", dim, "Dimension")->required();
  di->add_option("--domain", domain_path, "Domain spec file (JSON)")->required();
  di->add_option("--target", target, "Target sites 'x,y;x,y'")->required();
  di->add_option("--killing", killing, "Killing sites (default: domain boundary)");
  di->add_option("--start", start, "Start site 'x,y'")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, summary_path);
    if (sw->parsed()) return cmd_sweep(config_path, grid_path, out_path);
    if (cr->parsed()) return cmd_criterion(family, params_str);
    if (di->parsed()) return cmd_dirichlet(dim, domain_path, target, killing, start);
  } catch (const latgrow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
