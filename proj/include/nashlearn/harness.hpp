#pragma once

// Experiment orchestration: configuration files, seed ensembles, ground-truth
// solves, and emission of trajectories and quantile summaries as CSV/JSON.

#include "nashlearn/games.hpp"
#include "nashlearn/json_io.hpp"
#include "nashlearn/learner.hpp"
#include "nashlearn/schedule.hpp"
#include "nashlearn/vi.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace nashlearn {

/// Generator settings for seeded case-study instances (identity value and
/// price matrices, uniform price offsets and budgets).
struct GeneratorSpec {
  std::uint64_t game_seed = 1;
  int num_players = 10;
  int dim = 4;
  double upper = 6.0;
  double c_min = 0.0;
  double c_max = 5.0;
  double budget_min = 0.5;
  double budget_max = 10.0;
};

struct ExperimentConfig {
  std::optional<std::string> game_file;  // takes precedence over the generator
  GeneratorSpec generator;
  ScheduleSpec schedule{1.0, 0.51, 0.1, 0.2};
  long iterations = 100;
  int n_seeds = 20;
  std::uint64_t base_seed = 1;
  std::string out_dir;  // empty = no files written
  bool record_states = false;
  bool record_mu = false;
  bool override_schedule_check = false;
  std::optional<Eigen::VectorXd> mu0;  // fixed initial mean; default is a uniform draw per seed
};

namespace harness_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for key '" + key + "': " + v);
}

inline Eigen::VectorXd parse_vector(const std::string& v) {
  std::vector<double> vals;
  std::stringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(trim(tok)));
  Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = vals[k];
  return out;
}

inline void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& val) {
  if (key == "game_file") cfg.game_file = val;
  else if (key == "game_seed") cfg.generator.game_seed = std::stoull(val);
  else if (key == "num_players") cfg.generator.num_players = std::stoi(val);
  else if (key == "dim") cfg.generator.dim = std::stoi(val);
  else if (key == "upper") cfg.generator.upper = std::stod(val);
  else if (key == "c_min") cfg.generator.c_min = std::stod(val);
  else if (key == "c_max") cfg.generator.c_max = std::stod(val);
  else if (key == "budget_min") cfg.generator.budget_min = std::stod(val);
  else if (key == "budget_max") cfg.generator.budget_max = std::stod(val);
  else if (key == "gamma_c") cfg.schedule.gamma_c = std::stod(val);
  else if (key == "gamma_a") cfg.schedule.gamma_a = std::stod(val);
  else if (key == "sigma_c") cfg.schedule.sigma_c = std::stod(val);
  else if (key == "sigma_a") cfg.schedule.sigma_a = std::stod(val);
  else if (key == "iterations") cfg.iterations = std::stol(val);
  else if (key == "n_seeds") cfg.n_seeds = std::stoi(val);
  else if (key == "base_seed") cfg.base_seed = std::stoull(val);
  else if (key == "out_dir") cfg.out_dir = val;
  else if (key == "record_states") cfg.record_states = parse_bool(val, key);
  else if (key == "record_mu") cfg.record_mu = parse_bool(val, key);
  else if (key == "override_schedule_check") cfg.override_schedule_check = parse_bool(val, key);
  else if (key == "mu0") cfg.mu0 = parse_vector(val);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace harness_detail

/// Parses an experiment configuration: either a flat key=value document
/// ('#' comments allowed) or a JSON object with the same keys.
inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::string val;
      if (it.value().is_string()) val = it.value().get<std::string>();
      else val = it.value().dump();
      harness_detail::apply_key(cfg, it.key(), val);
    }
    return cfg;
  }
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const std::string stripped = harness_detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected 'key = value', got: " + stripped);
    }
    harness_detail::apply_key(cfg, harness_detail::trim(stripped.substr(0, eq)),
                              harness_detail::trim(stripped.substr(eq + 1)));
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Nearest-rank order statistic: the ceil(q*n)-th smallest value. Exact and
/// platform-stable, no interpolation.
inline double quantile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile_nearest_rank: empty sample");
  if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("quantile_nearest_rank: q in (0,1]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::max<long>(1, static_cast<long>(std::ceil(q * static_cast<double>(values.size())))));
  return values[rank - 1];
}

inline GameVariant load_game(const ExperimentConfig& cfg) {
  if (cfg.game_file) return read_instance(*cfg.game_file).game;
  const auto& g = cfg.generator;
  return random_instance(g.game_seed, g.num_players, g.dim, g.upper, {g.c_min, g.c_max},
                         {g.budget_min, g.budget_max});
}

inline int game_num_players(const GameVariant& g) {
  return std::visit([](const auto& game) { return game.num_players(); }, g);
}

inline ProductSet game_product_set(const GameVariant& g) {
  return std::visit([](const auto& game) { return game.product_set(); }, g);
}

inline JointVector game_mapping_at(const GameVariant& g, const JointVector& a) {
  return std::visit([&](const auto& game) { return game.mapping(a); }, g);
}

/// Lipschitz bound of the game mapping used to pick the extragradient step.
inline double game_lipschitz_bound(const GameVariant& g) {
  if (const auto* q = std::get_if<QuadraticAggregativeGame>(&g)) {
    return check_assumptions(*q).lipschitz_estimate;
  }
  const auto& s = std::get<SmoothTestGame>(g);
  double corner = 0.0;
  for (const auto& set : s.quadratic_part().action_sets()) corner = std::max(corner, set.upper());
  return check_assumptions(s.quadratic_part()).lipschitz_estimate +
         12.0 * s.epsilon() * corner * corner;
}

/// Solves the instance's ground truth once: multi-start extragradient,
/// clustered representatives of every equilibrium found.
inline std::vector<Eigen::VectorXd> solve_ground_truth(const GameVariant& g, double tol = 1e-10,
                                                       long max_iter = 200000,
                                                       int n_starts = 8,
                                                       std::uint64_t start_seed = 7) {
  const ProductSet sets = game_product_set(g);
  const double step = 0.9 / std::max(game_lipschitz_bound(g), 1e-12);
  auto mapping = [&](const JointVector& a) { return game_mapping_at(g, a); };
  std::vector<JointVector> eqs =
      find_equilibria(mapping, sets, step, tol, max_iter, n_starts, start_seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(eqs.size());
  for (auto& e : eqs) out.push_back(e.vec());
  return out;
}

/// Relative error against the nearest cached equilibrium.
inline double relative_error(const JointVector& mu, const std::vector<Eigen::VectorXd>& eqs) {
  if (eqs.empty()) throw std::invalid_argument("relative_error: no equilibria");
  double best = HUGE_VAL;
  for (const auto& a_star : eqs) {
    best = std::min(best, (mu.vec() - a_star).norm() / a_star.norm());
  }
  return best;
}

struct RunSummary {
  std::uint64_t seed = 0;
  double final_error = 0.0;
  double wall_ms = 0.0;
};

struct EnsembleResult {
  InstanceDocument instance;          // game plus the equilibria used for the metric
  std::vector<std::vector<double>> errors;  // [run][t], t = number of updates applied
  std::vector<Trajectory> trajectories;     // kept when record_mu/record_states is set
  std::vector<RunSummary> runs;
  ScheduleSpec schedule;
  long iterations = 0;
};

/// Runs an n_seeds ensemble against one instance. The ground truth is solved
/// once (or taken from the instance file's cache); per-run seeds derive from
/// base_seed, so the ensemble is deterministic regardless of the number of
/// worker threads. Writes per-run CSVs, the instance (with cached
/// equilibria), and an ensemble summary when out_dir is set.
inline EnsembleResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_seeds < 1) throw std::invalid_argument("run_experiment: n_seeds must be >= 1");
  if (!cfg.override_schedule_check && !validate_schedule(cfg.schedule).valid) {
    throw std::invalid_argument(
        "run_experiment: schedule fails validation (set override_schedule_check to force)");
  }

  EnsembleResult res{InstanceDocument{load_game(cfg), {}}, {}, {}, {}, cfg.schedule,
                     cfg.iterations};
  if (cfg.game_file) {
    res.instance.equilibria = read_instance(*cfg.game_file).equilibria;
  }
  if (res.instance.equilibria.empty()) {
    res.instance.equilibria = solve_ground_truth(res.instance.game);
  }

  const ProductSet sets = game_product_set(res.instance.game);
  const bool keep_traj = cfg.record_mu || cfg.record_states;
  res.errors.resize(cfg.n_seeds);
  res.trajectories.resize(keep_traj ? cfg.n_seeds : 0);
  res.runs.resize(cfg.n_seeds);

  auto run_one = [&](int idx) {
    const std::uint64_t run_seed = split_seed(cfg.base_seed, static_cast<std::uint64_t>(idx));
    const auto t0 = std::chrono::steady_clock::now();

    JointVector mu0(sets.num_factors(), sets.factor_dim(0));
    if (cfg.mu0) {
      mu0 = JointVector(sets.num_factors(), sets.factor_dim(0), *cfg.mu0);
    } else {
      Rng init_rng(split_seed(run_seed, 0));
      mu0 = uniform_feasible_point(sets, init_rng);
    }

    RunOptions opts;
    opts.record_states = cfg.record_states;
    opts.allow_invalid_schedule = cfg.override_schedule_check;
    const auto oracle_for = [&](const auto& game) {
      return run(make_payoff_oracle(game), sets, cfg.schedule, mu0, cfg.iterations,
                 split_seed(run_seed, 1), opts);
    };
    Trajectory traj = std::visit(oracle_for, res.instance.game);

    std::vector<double>& err = res.errors[idx];
    err.reserve(traj.mu.size());
    for (const auto& mu : traj.mu) err.push_back(relative_error(mu, res.instance.equilibria));

    const auto t1 = std::chrono::steady_clock::now();
    res.runs[idx] = RunSummary{run_seed, err.back(),
                               std::chrono::duration<double, std::milli>(t1 - t0).count()};
    if (keep_traj) res.trajectories[idx] = std::move(traj);
  };

  const int workers = static_cast<int>(
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(cfg.n_seeds)));
  if (workers <= 1) {
    for (int i = 0; i < cfg.n_seeds; ++i) run_one(i);
  } else {
    std::vector<std::future<void>> tasks;
    for (int w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w]() {
        for (int i = w; i < cfg.n_seeds; i += workers) run_one(i);
      }));
    }
    for (auto& t : tasks) t.get();
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    write_instance(cfg.out_dir + "/instance.json", res.instance);

    for (int i = 0; i < cfg.n_seeds; ++i) {
      char name[40];
      std::snprintf(name, sizeof(name), "run_%04d.csv", i);
      std::ofstream out(cfg.out_dir + "/" + name);
      if (!out) throw std::runtime_error("run_experiment: cannot write " + cfg.out_dir);
      out << "# columns: t,relative_error,beta";
      if (cfg.record_mu) {
        const int nd = res.trajectories[i].mu.front().total_dim();
        for (int k = 0; k < nd; ++k) out << ",mu_" << k;
      }
      out << "\n# seed: " << res.runs[i].seed << '\n';
      for (std::size_t t = 0; t < res.errors[i].size(); ++t) {
        out << t << ',' << harness_detail::fmt_double(res.errors[i][t]) << ','
            << harness_detail::fmt_double(cfg.schedule.beta(static_cast<long>(t) + 1));
        if (cfg.record_mu) {
          const auto& mu = res.trajectories[i].mu[t].vec();
          for (Eigen::Index k = 0; k < mu.size(); ++k) {
            out << ',' << harness_detail::fmt_double(mu[k]);
          }
        }
        out << '\n';
      }
      if (cfg.record_states) {
        std::snprintf(name, sizeof(name), "run_%04d_states.csv", i);
        std::ofstream sout(cfg.out_dir + "/" + name);
        sout << "# columns: t,x_0..x_{N*d-1}\n";
        for (std::size_t t = 0; t < res.trajectories[i].states.size(); ++t) {
          sout << (t + 1);
          const auto& x = res.trajectories[i].states[t].vec();
          for (Eigen::Index k = 0; k < x.size(); ++k) {
            sout << ',' << harness_detail::fmt_double(x[k]);
          }
          sout << '\n';
        }
      }
    }

    nlohmann::json summary;
    summary["n_seeds"] = cfg.n_seeds;
    summary["iterations"] = cfg.iterations;
    summary["base_seed"] = cfg.base_seed;
    summary["schedule"] = {{"gamma_c", cfg.schedule.gamma_c},
                           {"gamma_a", cfg.schedule.gamma_a},
                           {"sigma_c", cfg.schedule.sigma_c},
                           {"sigma_a", cfg.schedule.sigma_a}};
    for (const auto& r : res.runs) {
      summary["runs"].push_back(
          {{"seed", r.seed}, {"final_error", r.final_error}, {"wall_ms", r.wall_ms}});
    }
    std::ofstream s(cfg.out_dir + "/summary.json");
    s << summary.dump(2) << '\n';
  }
  return res;
}

/// Writes error_median.csv: per iteration the nearest-rank median and
/// quartiles of the ensemble's relative error.
inline void emit_plotdata(const EnsembleResult& res, const std::string& dir) {
  if (res.errors.empty()) throw std::invalid_argument("emit_plotdata: empty ensemble");
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(dir + "/error_median.csv");
  if (!out) throw std::runtime_error("emit_plotdata: cannot write " + dir);
  out << "# columns: t,median,q25,q75\n";
  const std::size_t rows = res.errors.front().size();
  std::vector<double> column(res.errors.size());
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t r = 0; r < res.errors.size(); ++r) column[r] = res.errors[r][t];
    out << t << ',' << harness_detail::fmt_double(quantile_nearest_rank(column, 0.5)) << ','
        << harness_detail::fmt_double(quantile_nearest_rank(column, 0.25)) << ','
        << harness_detail::fmt_double(quantile_nearest_rank(column, 0.75)) << '\n';
  }
}

/// Median relative error of an ensemble at a given update count.
inline double ensemble_median_error(const EnsembleResult& res, long t) {
  std::vector<double> column;
  column.reserve(res.errors.size());
  for (const auto& run : res.errors) column.push_back(run.at(static_cast<std::size_t>(t)));
  return quantile_nearest_rank(column, 0.5);
}

}  // namespace nashlearn
