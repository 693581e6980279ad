// Experiment CLI: ensemble runs of the payoff-based learner, ground-truth
// equilibrium solves, Monte Carlo estimator diagnostics, and schedule checks.

#include "nashlearn/diagnostics.hpp"
#include "nashlearn/harness.hpp"
#include "nashlearn/json_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace nashlearn;

int cmd_run(const std::string& config_path, int seeds_override, const std::string& out_override,
            bool override_schedule) {
  ExperimentConfig cfg = parse_config(config_path);
  if (seeds_override > 0) cfg.n_seeds = seeds_override;
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (override_schedule) cfg.override_schedule_check = true;
  if (cfg.out_dir.empty()) cfg.out_dir = "out";

  const EnsembleResult res = run_experiment(cfg);
  emit_plotdata(res, cfg.out_dir);

  std::cout << "instance: " << cfg.out_dir << "/instance.json ("
            << res.instance.equilibria.size() << " equilibrium cluster(s))\n";
  std::cout << "runs: " << res.runs.size() << " x " << res.iterations << " iterations -> "
            << cfg.out_dir << "/run_*.csv\n";
  std::cout << "median error: t=0 " << ensemble_median_error(res, 0) << ", t=" << res.iterations
            << " " << ensemble_median_error(res, res.iterations) << "\n";
  return 0;
}

int cmd_solve_ne(const std::string& config_path, const std::string& out_path) {
  const ExperimentConfig cfg = parse_config(config_path);
  InstanceDocument doc{load_game(cfg), {}};
  doc.equilibria = solve_ground_truth(doc.game);

  const ProductSet sets = game_product_set(doc.game);
  auto mapping = [&](const JointVector& a) { return game_mapping_at(doc.game, a); };

  nlohmann::json out;
  for (const auto& eq : doc.equilibria) {
    JointVector a(sets.num_factors(), sets.factor_dim(0), eq);
    nlohmann::json entry;
    entry["a_star"] = std::vector<double>(eq.data(), eq.data() + eq.size());
    entry["vi_residual"] = vi_residual(a, mapping, sets);
    if (const auto* q = std::get_if<QuadraticAggregativeGame>(&doc.game)) {
      entry["best_response_gap"] = best_response_gap(*q, a, 1e-8);
    } else {
      entry["best_response_gap"] =
          best_response_gap(std::get<SmoothTestGame>(doc.game), a, 1e-8);
    }
    out["equilibria"].push_back(std::move(entry));
  }
  if (!out_path.empty()) {
    write_instance(out_path, doc);
    out["instance_file"] = out_path;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_diagnose(const std::string& game_path, const std::string& check,
                 std::vector<double> sigmas, long samples, std::uint64_t seed,
                 const std::string& mu_csv) {
  const InstanceDocument doc = read_instance(game_path);
  const ProductSet sets = game_product_set(doc.game);

  JointVector mu = box_center_start(sets);
  if (!mu_csv.empty()) {
    mu = JointVector(sets.num_factors(), sets.factor_dim(0),
                     harness_detail::parse_vector(mu_csv));
    mu = sets.project(mu);
  }

  if (sigmas.empty()) sigmas = {0.4, 0.2, 0.1};
  nlohmann::json out;
  auto dispatch = [&](const auto& game) {
    if (check == "score") {
      out = to_json(score_estimator_check(game, mu, sigmas.front(), samples, seed));
    } else if (check == "mixed") {
      out = to_json(mixed_mapping_mc(game, mu, sigmas.front(), samples, seed));
    } else {
      if (sigmas.size() == 1) sigmas = {sigmas[0], sigmas[0] / 2.0, sigmas[0] / 4.0};
      out = to_json(bias_scaling_check(game, mu, sigmas, samples, seed));
    }
  };
  std::visit(dispatch, doc.game);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_validate_schedule(const ScheduleSpec& spec) {
  const ScheduleValidation v = validate_schedule(spec);
  std::cout << to_json(v).dump(2) << '\n';
  return v.valid ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Payoff-based Nash equilibrium learning experiments"};
  app.require_subcommand(1);

  // run
  std::string run_config, run_out;
  int run_seeds = 0;
  bool run_override = false;
  auto* run_cmd = app.add_subcommand("run", "Run a seed ensemble of the learner");
  run_cmd->add_option("--config", run_config, "Experiment config (key=value or JSON)")
      ->required();
  run_cmd->add_option("--seeds", run_seeds, "Override the ensemble size");
  run_cmd->add_option("--out", run_out, "Override the output directory");
  run_cmd->add_flag("--override-schedule-check", run_override,
                    "Run even if the schedule fails validation");

  // solve-ne
  std::string ne_config, ne_out;
  auto* ne_cmd = app.add_subcommand("solve-ne", "Solve the instance's Nash equilibria only");
  ne_cmd->add_option("--config", ne_config, "Experiment config naming the instance")->required();
  ne_cmd->add_option("--out", ne_out, "Write the instance with cached equilibria here");

  // diagnose
  std::string diag_game, diag_check, diag_mu;
  std::vector<double> diag_sigmas;
  long diag_samples = 1000000;
  std::uint64_t diag_seed = 1;
  auto* diag_cmd = app.add_subcommand("diagnose", "Monte Carlo estimator diagnostics");
  diag_cmd->add_option("--game", diag_game, "Instance JSON file")->required();
  diag_cmd->add_option("--check", diag_check, "score | bias | mixed")
      ->required()
      ->check(CLI::IsMember({"score", "bias", "mixed"}));
  diag_cmd->add_option("--sigma", diag_sigmas, "Exploration sigma(s); bias takes a ladder");
  diag_cmd->add_option("--samples", diag_samples, "Monte Carlo sample count");
  diag_cmd->add_option("--seed", diag_seed, "Base seed");
  diag_cmd->add_option("--mu", diag_mu, "Comma-separated mean vector (default: box centers)");

  // validate-schedule
  ScheduleSpec sched;
  auto* val_cmd = app.add_subcommand("validate-schedule", "Check step/variance schedules");
  val_cmd->add_option("--gamma-a", sched.gamma_a, "Step-size exponent")->required();
  val_cmd->add_option("--sigma-a", sched.sigma_a, "Variance exponent")->required();
  val_cmd->add_option("--gamma-c", sched.gamma_c, "Step-size coefficient");
  val_cmd->add_option("--sigma-c", sched.sigma_c, "Variance coefficient");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_config, run_seeds, run_out, run_override);
    if (ne_cmd->parsed()) return cmd_solve_ne(ne_config, ne_out);
    if (diag_cmd->parsed()) {
      return cmd_diagnose(diag_game, diag_check, diag_sigmas, diag_samples, diag_seed, diag_mu);
    }
    if (val_cmd->parsed()) return cmd_validate_schedule(sched);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
