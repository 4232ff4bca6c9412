// dsdr: simulate data, fit central subspaces, run benchmark grids, compare bases.
//
// Exit codes: 0 ok, 2 invalid input/config, 3 numeric failure. Errors are
// reported on stderr as one JSON object per line.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsdr/csv_io.hpp"
#include "dsdr/error.hpp"
#include "dsdr/experiment.hpp"
#include "dsdr/metrics.hpp"
#include "dsdr/models.hpp"

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kNumeric = 3;

// thrown for malformed bench configs; maps to exit code 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void report_error(const std::string& command, const std::string& kind, const std::string& msg) {
  json err = {{"command", command}, {"error", kind}, {"message", msg}};
  std::cerr << err.dump() << '\n';
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

dsdr::ExperimentConfig parse_experiment(const json& j) {
  if (!j.is_object()) throw ConfigError("each experiment must be a JSON object");
  reject_unknown(j,
                 {"model", "engine", "variant", "R", "d", "k", "B", "lambda_rule", "lambda",
                  "bandwidth_rule", "init_batch", "replicates", "seed", "compute_dcor"},
                 "experiment");
  if (!j.contains("model") || !j.at("model").is_object()) {
    throw ConfigError("experiment needs a 'model' object");
  }
  const json& m = j.at("model");
  reject_unknown(m, {"model_id", "n", "p", "noise_sd"}, "model");

  dsdr::ExperimentConfig c;
  c.model.model_id = dsdr::parse_model(get_or<std::string>(m, "model_id", "I"));
  c.model.n = get_or<long>(m, "n", 1000);
  c.model.p = get_or<long>(m, "p", 10);
  c.model.noise_sd = get_or<double>(m, "noise_sd", 0.5);

  c.fit.engine = dsdr::parse_engine(get_or<std::string>(j, "engine", "full"));
  c.fit.variant = dsdr::parse_variant(get_or<std::string>(j, "variant", "psvm"));
  c.fit.R = get_or<int>(j, "R", 5);
  c.fit.d = get_or<int>(j, "d", 2);
  c.fit.k = get_or<int>(j, "k", 1);
  c.fit.B = get_or<int>(j, "B", 3);
  c.fit.init_batch = get_or<int>(j, "init_batch", 1);
  c.fit.bandwidth_rule = dsdr::parse_bandwidth_rule(get_or<std::string>(j, "bandwidth_rule", "sec6"));
  const auto rule = get_or<std::string>(j, "lambda_rule", "default");
  if (rule == "fixed") {
    if (!j.contains("lambda")) throw ConfigError("lambda_rule 'fixed' needs a 'lambda' value");
    c.fit.lambda = get_or<double>(j, "lambda", 0.0);
    if (!(c.fit.lambda > 0)) throw ConfigError("lambda must be positive");
  } else if (rule != "default") {
    throw ConfigError("lambda_rule must be 'default' or 'fixed'");
  }
  c.replicates = get_or<int>(j, "replicates", 1);
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  c.compute_dcor = get_or<bool>(j, "compute_dcor", false);

  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.model.n < 1 || c.model.p < 2) throw ConfigError("model needs n >= 1 and p >= 2");
  if (c.fit.R < 2 || c.fit.d < 1 || c.fit.d > c.model.p) throw ConfigError("need R >= 2 and 1 <= d <= p");
  if (c.fit.k < 1 || c.fit.k > c.model.n) throw ConfigError("need 1 <= k <= n");
  if (c.fit.B < 1) throw ConfigError("B must be >= 1");
  return c;
}

json echo(const dsdr::ExperimentConfig& c) {
  json j = {
      {"model",
       {{"model_id", dsdr::to_string(c.model.model_id)},
        {"n", c.model.n},
        {"p", c.model.p},
        {"noise_sd", c.model.noise_sd}}},
      {"engine", dsdr::to_string(c.fit.engine)},
      {"variant", dsdr::to_string(c.fit.variant)},
      {"R", c.fit.R},
      {"d", c.fit.d},
      {"k", c.fit.k},
      {"B", c.fit.B},
      {"lambda_rule", c.fit.lambda > 0 ? "fixed" : "default"},
      {"bandwidth_rule", dsdr::to_string(c.fit.bandwidth_rule)},
      {"init_batch", c.fit.init_batch},
      {"replicates", c.replicates},
      {"seed", c.seed},
      {"compute_dcor", c.compute_dcor},
  };
  if (c.fit.lambda > 0) j["lambda"] = c.fit.lambda;
  return j;
}

int cmd_simulate(const std::string& model, long n, long p, double noise, std::uint64_t seed,
                 const std::string& out) {
  dsdr::ModelSpec spec;
  spec.model_id = dsdr::parse_model(model);
  spec.n = n;
  spec.p = p;
  spec.noise_sd = noise;
  spec.seed = seed;
  dsdr::write_dataset(out, dsdr::generate_model(spec).data);
  return kOk;
}

struct FitArgs {
  std::string data, engine = "full", variant = "psvm", rule = "sec6";
  std::string out_basis, out_eigs, out_json;
  int R = 5, d = 2, k = 1, B = 3, init_batch = 1;
  double lambda = 0.0;
  std::uint64_t seed = 1;
};

int cmd_fit(const FitArgs& a) {
  const dsdr::Dataset data = dsdr::read_dataset(a.data);
  dsdr::EngineOptions o;
  o.engine = dsdr::parse_engine(a.engine);
  o.variant = dsdr::parse_variant(a.variant);
  o.bandwidth_rule = dsdr::parse_bandwidth_rule(a.rule);
  o.R = a.R;
  o.d = a.d;
  o.k = a.k;
  o.B = a.B;
  o.lambda = a.lambda;
  o.init_batch = a.init_batch;
  const dsdr::SdrFit fit = dsdr::fit_engine(data, o, a.seed);
  for (const auto& w : fit.warnings) {
    std::cerr << json{{"warning", w}}.dump() << '\n';
  }
  dsdr::write_matrix(a.out_basis, fit.V);
  dsdr::write_vector(a.out_eigs, fit.eigenvalues);
  if (!a.out_json.empty()) {
    json j = {{"engine", a.engine},
              {"variant", a.variant},
              {"n", data.n()},
              {"p", data.p()},
              {"R", a.R},
              {"d", a.d},
              {"k", o.engine == dsdr::Engine::Full ? 1 : a.k},
              {"seed", a.seed},
              {"wall_clock_seconds", fit.timing_seconds},
              {"critical_path_seconds", fit.critical_path_seconds},
              {"skipped_batches", fit.skipped_batches},
              {"warnings", fit.warnings}};
    dsdr::write_text(a.out_json, j.dump(2) + "\n");
  }
  return kOk;
}

int cmd_bench(const std::string& config_path, const std::string& out, const std::string& sidecar,
              bool timing) {
  std::ifstream in(config_path);
  if (!in) throw dsdr::Error(dsdr::ErrorKind::Io, "cannot open '" + config_path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<dsdr::ExperimentConfig> configs;
  if (root.is_array()) {
    for (const auto& j : root) configs.push_back(parse_experiment(j));
  } else if (root.is_object() && root.contains("experiments")) {
    reject_unknown(root, {"experiments"}, "config");
    for (const auto& j : root.at("experiments")) configs.push_back(parse_experiment(j));
  } else {
    configs.push_back(parse_experiment(root));
  }
  if (configs.empty()) throw ConfigError("config lists no experiments");

  std::vector<dsdr::ReportRow> rows;
  json side = json::array();
  for (const auto& c : configs) {
    const dsdr::ExperimentResult res = dsdr::run_experiment(c);
    rows.push_back(res.row);
    json distances = json::array();
    for (const auto& r : res.replicates) distances.push_back(r.distance);
    json entry = {{"config", echo(c)},
                  {"mean_distance", res.row.mean_distance},
                  {"sd_distance", res.row.sd_distance},
                  {"mean_wall_clock_seconds", res.row.mean_runtime_seconds},
                  {"mean_critical_path_seconds", res.row.mean_critical_path_seconds},
                  {"replicate_distances", distances}};
    if (res.row.mean_dcor) {
      entry["mean_dcor"] = *res.row.mean_dcor;
      entry["dcor_definition"] = "V-statistic (biased) sample distance correlation";
    }
    side.push_back(entry);
  }
  dsdr::write_text(out, dsdr::format_report(rows, timing));
  if (!sidecar.empty()) dsdr::write_text(sidecar, json{{"experiments", side}}.dump(2) + "\n");
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const double dist = dsdr::projection_distance(dsdr::read_matrix(a), dsdr::read_matrix(b));
  std::printf("%.17g\n", dist);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sufficient dimension reduction with principal (weighted) SVMs"};
  app.require_subcommand(1);

  std::string model = "I", sim_out;
  long sim_n = 1000, sim_p = 10;
  double noise = 0.5;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "Write a synthetic dataset as CSV");
  sim->add_option("--model", model, "Model I, II, III or IV")->check(CLI::IsMember({"I", "II", "III", "IV"}));
  sim->add_option("--n", sim_n, "Observations")->check(CLI::PositiveNumber);
  sim->add_option("--p", sim_p, "Predictors (>= 2)")->check(CLI::Range(2L, 1000000L));
  sim->add_option("--noise-sd", noise, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--out", sim_out, "Output CSV")->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Estimate a central subspace basis");
  fit->add_option("--data", fa.data, "Dataset CSV (y,x1..xp)")->required();
  fit->add_option("--engine", fa.engine)->check(CLI::IsMember({"full", "naive", "refined"}));
  fit->add_option("--variant", fa.variant)->check(CLI::IsMember({"psvm", "wpsvm"}));
  fit->add_option("--slices", fa.R, "Slices (psvm) or weights (wpsvm)")->check(CLI::Range(2, 1000));
  fit->add_option("--dim", fa.d, "Structural dimension")->check(CLI::PositiveNumber);
  fit->add_option("--k", fa.k, "Batches for distributed engines")->check(CLI::PositiveNumber);
  fit->add_option("--iters", fa.B, "Refinement rounds")->check(CLI::PositiveNumber);
  fit->add_option("--bandwidth-rule", fa.rule)->check(CLI::IsMember({"sec6", "assumption7"}));
  fit->add_option("--lambda", fa.lambda, "Cost (default: 2 n^{2/3} full, 2 m^{2/3} distributed)")
      ->check(CLI::PositiveNumber);
  fit->add_option("--init-batch", fa.init_batch, "Batch supplying the refined initializer")
      ->check(CLI::PositiveNumber);
  fit->add_option("--seed", fa.seed, "Partition seed");
  fit->add_option("--out-basis", fa.out_basis, "Basis CSV (p x d)")->required();
  fit->add_option("--out-eigs", fa.out_eigs, "Eigenvalues, one per line")->required();
  fit->add_option("--out-json", fa.out_json, "Optional run metadata (timings, warnings)");

  std::string bench_config, bench_out, bench_sidecar;
  bool bench_timing = false;
  auto* bench = app.add_subcommand("bench", "Monte-Carlo experiments from a JSON config");
  bench->add_option("--config", bench_config, "JSON config")->required();
  bench->add_option("--out", bench_out, "Report CSV")->required();
  bench->add_option("--sidecar", bench_sidecar, "JSON sidecar with config echo and timings");
  bench->add_flag("--timing", bench_timing, "Write wall-clock runtimes into the CSV (not reproducible)");

  std::string basis_a, basis_b;
  auto* compare = app.add_subcommand("compare", "Projection distance between two bases");
  compare->add_option("--basis-a", basis_a)->required();
  compare->add_option("--basis-b", basis_b)->required();

  std::string command = "dsdr";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(command, "InvalidArgument", e.what());
    return kInvalid;
  }

  try {
    if (*sim) {
      command = "simulate";
      return cmd_simulate(model, sim_n, sim_p, noise, sim_seed, sim_out);
    }
    if (*fit) {
      command = "fit";
      return cmd_fit(fa);
    }
    if (*bench) {
      command = "bench";
      return cmd_bench(bench_config, bench_out, bench_sidecar, bench_timing);
    }
    command = "compare";
    return cmd_compare(basis_a, basis_b);
  } catch (const dsdr::Error& e) {
    report_error(command, std::string(dsdr::to_string(e.kind())), e.what());
    return dsdr::is_numeric_failure(e.kind()) ? kNumeric : kInvalid;
  } catch (const ConfigError& e) {
    report_error(command, "InvalidConfig", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    report_error(command, "Internal", e.what());
    return kInvalid;
  }
}
