// Acceptance suite: every criterion runs at its stated tolerance and prints
// one pass/fail line. Exit status is the number of failed criteria.

#include "nashlearn/diagnostics.hpp"
#include "nashlearn/games.hpp"
#include "nashlearn/harness.hpp"
#include "nashlearn/learner.hpp"
#include "nashlearn/schedule.hpp"
#include "nashlearn/sets.hpp"
#include "nashlearn/vi.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace nl = nashlearn;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Projection oracle equivalence. 1e4 random points over d in {2,4,8} with
//    random feasible sets: brute-force agreement 1e-8, idempotence 1e-12,
//    non-expansiveness exactly (1e-12 slack). Runtime < 10 s.
Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  nl::Rng rng(101);
  double max_dev = 0.0, max_idem = 0.0, max_expand = 0.0;
  const int dims[3] = {2, 4, 8};
  for (int rep = 0; rep < 10000; ++rep) {
    const int d = dims[rep % 3];
    const double upper = rng.uniform(0.5, 8.0);
    const double budget = rng.uniform(0.0, d * upper);
    const nl::BoxBudgetSet set(d, upper, budget);
    Eigen::VectorXd p(d), q(d);
    for (int k = 0; k < d; ++k) {
      p[k] = rng.uniform(-5.0, 15.0);
      q[k] = rng.uniform(-5.0, 15.0);
    }
    const Eigen::VectorXd got = set.project(p);
    const Eigen::VectorXd want = nl::testing::brute_force_project_box_budget(p, upper, budget);
    max_dev = std::max(max_dev, (got - want).norm());
    max_idem = std::max(max_idem, (set.project(got) - got).norm());
    const double expand = (got - set.project(q)).norm() - (p - q).norm();
    max_expand = std::max(max_expand, expand);
  }
  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = max_dev < 1e-8 && max_idem < 1e-12 && max_expand <= 1e-12 && secs < 10.0;
  out.detail = "max oracle dev " + fmt(max_dev) + ", idem " + fmt(max_idem) + ", expansion " +
               fmt(max_expand) + ", " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Gradient consistency: mapping vs central finite differences of the cost
//    at 100 random points (rel. 1e-6) and the assembled affine form vs the
//    mapping (1e-10). Runtime < 5 s.
Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto game = nl::random_instance(21, 6, 4, 6.0, {0.0, 5.0}, {0.5, 10.0});
  const auto aff = nl::assemble_hat_M(game);
  nl::Rng rng(22);
  double max_fd_rel = 0.0, max_aff = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    nl::JointVector a(6, 4);
    for (int k = 0; k < 24; ++k) a.vec()[k] = rng.uniform(-3.0, 9.0);
    const nl::JointVector analytic = game.mapping(a);
    const nl::JointVector fd = nl::testing::fd_mapping(game, a);
    for (int k = 0; k < 24; ++k) {
      max_fd_rel = std::max(max_fd_rel, std::abs(analytic[k] - fd[k]) /
                                            std::max(1.0, std::abs(analytic[k])));
    }
    const Eigen::VectorXd affine = aff.matm * a.vec() + aff.mvec;
    max_aff = std::max(max_aff, (analytic.vec() - affine).cwiseAbs().maxCoeff());
  }
  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = max_fd_rel <= 1e-6 && max_aff <= 1e-10 && secs < 5.0;
  out.detail = "max FD rel dev " + fmt(max_fd_rel) + ", affine dev " + fmt(max_aff) + ", " +
               fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Schedule gate: the case-study schedule validates; the two perturbed
//    schedules are rejected with the correct named condition.
Outcome criterion3() {
  const auto ok = nl::validate_schedule({1.0, 0.51, 0.1, 0.2});
  const auto slow_gamma = nl::validate_schedule({1.0, 0.4, 0.1, 0.2});
  const auto slow_sigma = nl::validate_schedule({1.0, 0.51, 0.1, 0.1});
  auto has = [](const nl::ScheduleValidation& v, const char* name) {
    return std::find(v.violated.begin(), v.violated.end(), name) != v.violated.end();
  };
  Outcome out;
  out.pass = ok.valid && !slow_gamma.valid && has(slow_gamma, nl::kCondGammaSqConverges) &&
             !slow_sigma.valid && has(slow_sigma, nl::kCondGammaSigma3Converges) &&
             !has(slow_sigma, nl::kCondGammaSqConverges);
  out.detail = std::string("0.51/0.2 valid; 0.4/0.2 -> ") +
               (slow_gamma.violated.empty() ? "?" : slow_gamma.violated.back()) +
               "; 0.51/0.1 -> " +
               (slow_sigma.violated.empty() ? "?" : slow_sigma.violated.front());
  return out;
}

// ---------------------------------------------------------------------------
// 4. Estimator identity: quadratic N=4, d=2, sigma=0.5, 1e6 samples. Score
//    estimator matches M(mu) with max z <= 4 and agrees with the pathwise
//    estimator within combined 4-std-err bands. Runtime < 60 s.
Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto game = nl::random_instance(41, 4, 2, 6.0, {0.0, 5.0}, {0.5, 10.0});
  const nl::ProductSet sets = game.product_set();
  nl::Rng mu_rng(42);
  const nl::JointVector mu = nl::uniform_feasible_point(sets, mu_rng);

  const long n = 1000000;
  const auto score = nl::score_estimator_check(game, mu, 0.5, n, 43);
  const auto mixed = nl::mixed_mapping_mc(game, mu, 0.5, n, 44);

  double max_pair_z = 0.0;
  for (int k = 0; k < mu.total_dim(); ++k) {
    const double se = std::sqrt(std::pow(score.std_err[k], 2) + std::pow(mixed.std_err[k], 2));
    if (se > 0.0) {
      max_pair_z = std::max(max_pair_z, std::abs(score.mc_mean[k] - mixed.mc_mean[k]) / se);
    }
  }
  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = score.max_z_score <= 4.0 && max_pair_z <= 4.0 && secs < 60.0;
  out.detail = "score max z " + fmt(score.max_z_score) + ", dual-estimator max z " +
               fmt(max_pair_z) + ", " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Bias bound: smooth test game, sigma ladder {0.4, 0.2, 0.1}, 1e6 samples.
//    Measured bias matches the closed-form quartic Gaussian-moment value
//    within 4 std-errs at each sigma, and halving sigma never more than
//    doubles ||Q|| + 4 std-err. Runtime < 120 s.
Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  const nl::SmoothTestGame game(nl::random_instance(51, 2, 2, 6.0, {0.0, 5.0}, {0.5, 10.0}),
                                0.05);
  const nl::ProductSet sets = game.product_set();
  nl::JointVector mu(2, 2);
  for (int i = 0; i < 2; ++i) {
    mu.set_player(i, sets.project_factor(i, 0.5 * (sets.factor_lo(i) + sets.factor_hi(i))));
  }

  const auto rep = nl::bias_scaling_check(game, mu, {0.4, 0.2, 0.1}, 1000000, 52);
  bool match = true, envelope = true;
  double worst_z = 0.0;
  for (std::size_t j = 0; j < rep.sigmas.size(); ++j) {
    worst_z = std::max(worst_z, rep.max_z_scores[j]);
    if (rep.max_z_scores[j] > 4.0) match = false;
    if (j > 0) {
      const double prev = rep.q_norms[j - 1] + 4.0 * rep.std_err_norms[j - 1];
      const double curr = rep.q_norms[j] + 4.0 * rep.std_err_norms[j];
      if (curr > 2.0 * prev) envelope = false;
    }
  }
  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = match && envelope && secs < 120.0;
  out.detail = "worst rung z " + fmt(worst_z) + ", q-norms {" + fmt(rep.q_norms[0]) + ", " +
               fmt(rep.q_norms[1]) + ", " + fmt(rep.q_norms[2]) + "}, " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 6. Oracle equilibrium: 10 seeded case-study instances (N=10, d=4):
//    extragradient residual <= 1e-10, best-response gap <= 1e-6, two-start
//    agreement <= 1e-8. Runtime < 30 s.
Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_resid = 0.0, worst_gap = 0.0, worst_agree = 0.0;
  bool all_converged = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto game = nl::random_instance(seed, 10, 4, 6.0, {0.0, 5.0}, {0.5, 10.0});
    const double lip = nl::check_assumptions(game).lipschitz_estimate;
    const nl::ProductSet sets = game.product_set();
    const auto mapping = [&](const nl::JointVector& a) { return game.mapping(a); };

    const auto sol1 = nl::solve_vi_extragradient(mapping, sets, 0.9 / lip, 1e-10, 200000);
    nl::JointVector other(10, 4);
    other.vec().setConstant(6.0);
    const auto sol2 = nl::solve_vi_extragradient(mapping, sets, 0.9 / lip, 1e-10, 200000,
                                                 sets.project(other));
    all_converged = all_converged && sol1.converged && sol2.converged;
    worst_resid = std::max(worst_resid, nl::vi_residual(sol1.a_star, mapping, sets));
    worst_gap = std::max(worst_gap, nl::best_response_gap(game, sol1.a_star, 1e-8));
    worst_agree = std::max(worst_agree, (sol1.a_star.vec() - sol2.a_star.vec()).norm());
  }
  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = all_converged && worst_resid <= 1e-10 && worst_gap <= 1e-6 &&
             worst_agree <= 1e-8 && secs < 30.0;
  out.detail = "worst residual " + fmt(worst_resid) + ", gap " + fmt(worst_gap) +
               ", two-start dev " + fmt(worst_agree) + ", " + fmt(secs) + " s";
  return out;
}

// Shared state between the convergence criteria and the feasibility audit.
double g_max_feasibility_violation = 0.0;

nl::EnsembleResult run_ensemble(std::uint64_t game_seed, int n_players, long iterations,
                                int n_seeds, std::uint64_t base_seed) {
  nl::ExperimentConfig cfg;
  cfg.generator.game_seed = game_seed;
  cfg.generator.num_players = n_players;
  cfg.generator.dim = 4;
  cfg.iterations = iterations;
  cfg.n_seeds = n_seeds;
  cfg.base_seed = base_seed;
  cfg.record_mu = true;  // keep trajectories for the feasibility audit
  nl::EnsembleResult res = nl::run_experiment(cfg);

  const nl::ProductSet sets = nl::game_product_set(res.instance.game);
  for (const auto& traj : res.trajectories) {
    for (const auto& mu : traj.mu) {
      g_max_feasibility_violation = std::max(g_max_feasibility_violation, sets.distance(mu));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// 7. Convergence reproduction at desk scale. N=10: median error at t=100
//    strictly below the median at t=1 and below 0.40. N=100: median at t=10
//    below the median at t=1. 20 seeds each, T=100. Runtime < 5 min total.
Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res10 = run_ensemble(/*game_seed=*/1, /*n_players=*/10, /*iterations=*/100,
                                  /*n_seeds=*/20, /*base_seed=*/71);
  const double n10_t1 = nl::ensemble_median_error(res10, 1);
  const double n10_t100 = nl::ensemble_median_error(res10, 100);

  const auto res100 = run_ensemble(/*game_seed=*/2, /*n_players=*/100, /*iterations=*/100,
                                   /*n_seeds=*/20, /*base_seed=*/72);
  const double n100_t1 = nl::ensemble_median_error(res100, 1);
  const double n100_t10 = nl::ensemble_median_error(res100, 10);

  const double secs = elapsed_s(t0);
  Outcome out;
  const bool n10_decreases = n10_t100 < n10_t1;
  const bool n10_band = n10_t100 < 0.40;
  const bool n100_decreases = n100_t10 < n100_t1;
  out.pass = n10_decreases && n10_band && n100_decreases && secs < 300.0;
  out.detail = "N=10 med err t1 " + fmt(n10_t1) + " -> t100 " + fmt(n10_t100) +
               (n10_decreases ? " [decrease ok]" : " [decrease FAIL]") +
               (n10_band ? " [band<0.40 ok]" : " [band<0.40 FAIL]") + "; N=100 med err t1 " +
               fmt(n100_t1) + " -> t10 " + fmt(n100_t10) +
               (n100_decreases ? " [decrease ok]" : " [decrease FAIL]") + ", " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Long-horizon trend: N=10 instance, T=1e4, 8 seeds; the median error at
//    t=1e4 is at most half the median at t=1e2. Runtime < 10 min.
Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_ensemble(/*game_seed=*/1, /*n_players=*/10, /*iterations=*/10000,
                                /*n_seeds=*/8, /*base_seed=*/81);
  const double at_1e2 = nl::ensemble_median_error(res, 100);
  const double at_1e4 = nl::ensemble_median_error(res, 10000);
  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = at_1e4 <= 0.5 * at_1e2 && secs < 600.0;
  out.detail = "med err t=1e2 " + fmt(at_1e2) + " -> t=1e4 " + fmt(at_1e4) + " (ratio " +
               fmt(at_1e4 / at_1e2) + "), " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 9. Feasibility invariant: across all recorded means in criteria 7-8, the
//    projection distance stays within 1e-10.
Outcome criterion9() {
  Outcome out;
  out.pass = g_max_feasibility_violation <= 1e-10;
  out.detail = "max projection distance " + fmt(g_max_feasibility_violation);
  return out;
}

// ---------------------------------------------------------------------------
// 10. Pseudo-monotonicity sampler: zero violations over 1e4 pairs on each of
//     the 10 case-study instances; positive violations on the anti-monotone
//     counterexample. Runtime < 10 s.
Outcome criterion10() {
  const auto t0 = std::chrono::steady_clock::now();
  long worst = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto game = nl::random_instance(seed, 10, 4, 6.0, {0.0, 5.0}, {0.5, 10.0});
    const auto mapping = [&](const nl::JointVector& a) { return game.mapping(a); };
    worst = std::max(worst,
                     nl::count_pseudo_monotone_violations(mapping, game.product_set(), 10000,
                                                          1000 + seed));
  }
  const auto anti = [](const nl::JointVector& a) {
    nl::JointVector out = a;
    out.vec() *= -1.0;
    return out;
  };
  nl::ProductSet box;
  box.add(nl::BoxSet(3, 0.0, 6.0));
  box.add(nl::BoxSet(3, 0.0, 6.0));
  const long anti_violations = nl::count_pseudo_monotone_violations(anti, box, 10000, 99);

  const double secs = elapsed_s(t0);
  Outcome out;
  out.pass = worst == 0 && anti_violations > 0 && secs < 10.0;
  out.detail = "violations on instances " + std::to_string(worst) + ", on counterexample " +
               std::to_string(anti_violations) + ", " + fmt(secs) + " s";
  return out;
}

}  // namespace

int main() {
  const struct {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  } criteria[] = {
      {1, "projection oracle equivalence", criterion1},
      {2, "gradient consistency", criterion2},
      {3, "schedule gate", criterion3},
      {4, "estimator identity", criterion4},
      {5, "bias bound", criterion5},
      {6, "oracle equilibrium", criterion6},
      {7, "convergence reproduction", criterion7},
      {8, "long-horizon trend", criterion8},
      {9, "feasibility invariant", criterion9},
      {10, "pseudo-monotonicity sampler", criterion10},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.pass) ++failures;
    std::printf("[%s] criterion %d: %s (%s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
