// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: tabulates the closed forms, runs replicate
// batches with estimator columns, tracks limit-transform convergence, and
// drives the verification suite.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "stablebranch/analytic.hpp"
#include "stablebranch/simulator.hpp"
#include "stablebranch/verify.hpp"

namespace sb = stablebranch;

namespace {

constexpr const char* kSeedEnvVar = "STABLEBRANCH_SEED";

struct CommonOpts {
  double k_rate = 1.0;
  double beta = 0.5;
  double gamma = 0.5;
  double theta = 1.0;
  std::uint64_t seed = 42;
  bool seed_from_flag = false;
  std::int64_t replicates = 20'000;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  double horizon = 1.0;
  std::vector<double> t_grid;
  std::vector<double> s_grid;
  std::vector<double> lambda_grid;
  std::int64_t population_cap = 10'000'000;
  std::int64_t batch_cap = sb::kDefaultBatchCap;
  std::string out;
  std::string format = "csv";

  sb::ModelParams params() const {
    sb::ModelParams p;
    p.lifetime_rate = k_rate;
    p.beta = beta;
    p.gamma = gamma;
    p.theta = theta;
    p.validate();
    return p;
  }

  sb::SimConfig sim_config() const {
    sb::SimConfig config;
    config.params = params();
    config.horizon = horizon;
    config.batch_cap = batch_cap;
    config.population_cap = population_cap;
    config.seed = seed;
    return config;
  }

  std::vector<double> times() const {
    return t_grid.empty() ? std::vector<double>{horizon} : t_grid;
  }
};

void add_common_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--K", opts.k_rate, "Particle lifetime rate K > 0")->capture_default_str();
  cmd->add_option("--beta", opts.beta, "Reproduction tail exponent in (0, 1]")
      ->capture_default_str();
  cmd->add_option("--gamma", opts.gamma, "Immigration batch tail exponent in (0, 1]")
      ->capture_default_str();
  cmd->add_option("--theta", opts.theta, "Immigration intensity theta > 0")
      ->capture_default_str();
  cmd->add_option("--seed", opts.seed, "Base RNG seed (env " + std::string(kSeedEnvVar) +
                                           " supplies the default)")
      ->capture_default_str();
  cmd->add_option("--replicates", opts.replicates, "Monte Carlo replicates per grid point")
      ->capture_default_str();
  cmd->add_option("--workers", opts.workers, "Worker threads for replicate batches")
      ->capture_default_str();
  cmd->add_option("--horizon", opts.horizon, "Simulation horizon when no t grid applies")
      ->capture_default_str();
  cmd->add_option("--t-grid", opts.t_grid, "Time grid (comma separated)")->delimiter(',');
  cmd->add_option("--s-grid", opts.s_grid, "pgf argument grid (comma separated)")
      ->delimiter(',');
  cmd->add_option("--lambda-grid", opts.lambda_grid, "Laplace argument grid (comma separated)")
      ->delimiter(',');
  cmd->add_option("--population-cap", opts.population_cap, "Abort above this population")
      ->capture_default_str();
  cmd->add_option("--batch-cap", opts.batch_cap, "Truncate heavy-tailed draws at this value")
      ->capture_default_str();
  cmd->add_option("--out", opts.out, "Output path (verify: path prefix); default stdout");
  cmd->add_option("--format", opts.format, "Table format")
      ->check(CLI::IsMember({"csv", "records"}))
      ->capture_default_str();
}

void apply_seed_env(CommonOpts& opts, const CLI::App* cmd) {
  if (cmd->count("--seed") > 0) return;  // flag or config file wins
  if (const char* env = std::getenv(kSeedEnvVar)) {
    opts.seed = std::strtoull(env, nullptr, 10);
    std::cerr << "seed: " << opts.seed << " (from " << kSeedEnvVar << ")\n";
  }
}

using Row = std::vector<std::pair<std::string, std::string>>;

class TableWriter {
 public:
  TableWriter(std::ostream& out, bool records) : out_(out), records_(records) {}

  void write(const Row& row) {
    if (records_) {
      nlohmann::json object;
      for (const auto& [key, value] : row) object[key] = value;
      out_ << object.dump() << '\n';
      return;
    }
    if (!header_written_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        out_ << (i ? "," : "") << row[i].first;
      }
      out_ << '\n';
      header_written_ = true;
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      out_ << (i ? "," : "") << row[i].second;
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  bool records_;
  bool header_written_ = false;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

std::string fmt(double v) { return sb::format_double(v); }

int cmd_pgf(const CommonOpts& opts) {
  const sb::ModelParams params = opts.params();
  std::ofstream file;
  if (!opts.out.empty()) file = open_output(opts.out);
  TableWriter table(opts.out.empty() ? std::cout : file, opts.format == "records");
  const auto& ts = opts.t_grid;
  const auto& ss = opts.s_grid;
  for (double t : ts) {
    for (double s : ss) {
      table.write({{"t", fmt(t)},
                   {"s", fmt(s)},
                   {"F", fmt(sb::pgf_single_ancestor(t, s, params))},
                   {"Phi", fmt(sb::pgf_immigration(t, s, params))},
                   {"regime", sb::to_string(params.regime())}});
    }
  }
  return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& process_name,
                 const std::string& trajectory_path) {
  const sb::Process process =
      process_name == "branching" ? sb::Process::branching : sb::Process::immigration;
  sb::SimConfig config = opts.sim_config();

  if (!trajectory_path.empty()) {
    sb::Trajectory trajectory;
    sb::RngStream rng(config.seed, 0);
    const sb::LawSet laws(config.params, config.batch_cap);
    config.horizon = opts.times().front();
    if (process == sb::Process::branching) {
      sb::simulate_branching(config, laws, rng, &trajectory);
    } else {
      sb::simulate_immigration(config, laws, rng, &trajectory);
    }
    auto file = open_output(trajectory_path);
    sb::write_trajectory_csv(file, trajectory);
  }

  std::ofstream file;
  if (!opts.out.empty()) file = open_output(opts.out);
  TableWriter table(opts.out.empty() ? std::cout : file, opts.format == "records");
  const sb::EstimatorOptions est_options{opts.workers, true};
  for (double t : opts.times()) {
    const auto reports = sb::estimate_pgf_multi(process, t, opts.s_grid, opts.replicates,
                                                config, est_options);
    for (const auto& r : reports) {
      table.write({{"process", process_name},
                   {"t", fmt(r.t)},
                   {"s", fmt(r.arg)},
                   {"n", std::to_string(r.n_replicates)},
                   {"mc_estimate", fmt(r.mc_estimate)},
                   {"std_error", fmt(r.std_error)},
                   {"analytic", fmt(r.analytic_value)},
                   {"z_score", fmt(r.z_score)},
                   {"abort_fraction", fmt(r.abort_fraction)},
                   {"truncation_bias_bound", fmt(r.truncation_bias_bound)},
                   {"flagged", r.flagged ? "1" : "0"}});
    }
  }
  return 0;
}

int cmd_limit(const CommonOpts& opts, int case_id) {
  const sb::ModelParams params = opts.params();
  const sb::RegimeLimit limit = sb::make_regime_limit(case_id, params);
  std::ofstream file;
  if (!opts.out.empty()) file = open_output(opts.out);
  TableWriter table(opts.out.empty() ? std::cout : file, opts.format == "records");
  for (double t : opts.t_grid) {
    for (double lambda : opts.lambda_grid) {
      const double finite = sb::finite_laplace(t, lambda, limit, params);
      const bool limit_defined = !(case_id == 3 && lambda == 0.0);
      const double limit_value =
          limit_defined ? sb::limit_laplace(lambda, limit, params)
                        : std::numeric_limits<double>::quiet_NaN();
      table.write({{"case", std::to_string(case_id)},
                   {"t", fmt(t)},
                   {"lambda", fmt(lambda)},
                   {"finite", fmt(finite)},
                   {"limit", fmt(limit_value)},
                   {"gap", fmt(limit_defined ? std::fabs(finite - limit_value)
                                             : std::numeric_limits<double>::quiet_NaN())}});
    }
  }
  return 0;
}

int cmd_verify(const CommonOpts& opts, bool skip_monte_carlo) {
  sb::SuiteConfig config;
  config.seed = opts.seed;
  config.workers = opts.workers;
  config.replicates = opts.replicates;
  config.include_monte_carlo = !skip_monte_carlo;
  const sb::SuiteResult result = sb::run_verification_suite(config);

  const std::string prefix = opts.out.empty() ? "verify_report" : opts.out;
  {
    auto file = open_output(prefix + "_oracles.csv");
    sb::write_oracles_csv(file, result.oracles);
  }
  {
    auto file = open_output(prefix + "_estimates.csv");
    sb::write_estimates_csv(file, result.estimates);
  }
  {
    auto file = open_output(prefix + ".records");
    sb::write_records(file, result);
  }

  std::cout << "oracle checks: " << result.oracles.size() - result.oracle_failures << "/"
            << result.oracles.size() << " pass\n"
            << "estimates: " << result.estimates.size() << " cells, "
            << result.estimate_exceedances << " with |z| > 4 (fraction "
            << sb::format_double(result.exceedance_fraction) << ", budget 0.02)\n"
            << "suite: " << (result.pass ? "PASS" : "FAIL") << '\n';
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical branching with discrete-stable immigration: closed forms, exact "
               "event-driven simulation, and verification"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Config file (INI, one section per subcommand)");

  CommonOpts pgf_opts;
  pgf_opts.t_grid = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
  pgf_opts.s_grid = {0.0, 0.25, 0.5, 0.75, 0.95, 1.0};
  CLI::App* pgf = app.add_subcommand("pgf", "Tabulate the closed-form generating functions");
  add_common_options(pgf, pgf_opts);

  CommonOpts sim_opts;
  sim_opts.s_grid = {0.0, 0.3, 0.6};
  std::string process_name = "immigration";
  std::string trajectory_path;
  CLI::App* simulate = app.add_subcommand("simulate", "Run replicates with estimator columns");
  add_common_options(simulate, sim_opts);
  simulate->add_option("--process", process_name, "Which process to simulate")
      ->check(CLI::IsMember({"immigration", "branching"}))
      ->capture_default_str();
  simulate->add_option("--dump-trajectory", trajectory_path,
                       "Write one replicate's event path (clock,alive,event_type) to this file");

  CommonOpts limit_opts;
  limit_opts.t_grid = {30.0, 300.0, 3000.0, 30000.0};
  limit_opts.lambda_grid = {0.5, 1.0, 2.0};
  int case_id = 1;
  CLI::App* limit = app.add_subcommand("limit", "Finite-time vs limit Laplace transforms");
  add_common_options(limit, limit_opts);
  limit->add_option("--case", case_id, "Limit case 1..5")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();

  CommonOpts verify_opts;
  bool skip_monte_carlo = false;
  CLI::App* verify = app.add_subcommand("verify", "Run the verification suite, write reports");
  add_common_options(verify, verify_opts);
  verify->add_flag("--skip-mc", skip_monte_carlo, "Oracle checks only, no Monte Carlo");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pgf->parsed()) {
      apply_seed_env(pgf_opts, pgf);
      return cmd_pgf(pgf_opts);
    }
    if (simulate->parsed()) {
      apply_seed_env(sim_opts, simulate);
      return cmd_simulate(sim_opts, process_name, trajectory_path);
    }
    if (limit->parsed()) {
      apply_seed_env(limit_opts, limit);
      return cmd_limit(limit_opts, case_id);
    }
    if (verify->parsed()) {
      apply_seed_env(verify_opts, verify);
      return cmd_verify(verify_opts, skip_monte_carlo);
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  }
  return 0;
}
