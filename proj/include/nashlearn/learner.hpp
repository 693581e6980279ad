#pragma once

// Payoff-based Nash equilibrium learner. This header deliberately depends
// only on the projection sets, the schedule, and the payoff-query interface:
// the learner never sees cost gradients, game matrices, or other players'
// data (tests assert this include firewall).

#include "nashlearn/joint_vector.hpp"
#include "nashlearn/payoff_oracle.hpp"
#include "nashlearn/rng.hpp"
#include "nashlearn/schedule.hpp"
#include "nashlearn/sets.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nashlearn {

/// All players' mean vectors plus the 1-based iteration counter and the RNG
/// that drives the state draws. Every per-player slice of mu is feasible
/// (means are projected on every update).
struct LearnerState {
  JointVector mu;
  long t = 1;
  Rng rng;

  LearnerState(JointVector mu0, std::uint64_t seed) : mu(std::move(mu0)), rng(seed) {}
  LearnerState(JointVector mu0, long time, Rng generator)
      : mu(std::move(mu0)), t(time), rng(generator) {}
};

/// One round of sampled states: x^i ~ N(mu^i, sigma^2 I) per player, the
/// payoffs observed at the joint state, and the sigma the draw used.
struct SampleRecord {
  JointVector x;
  std::vector<double> payoffs;
  double sigma_used = 0.0;
};

/// Draws every player's state from its Gaussian mixed strategy. sigma_t = 0
/// is the degenerate diagnostic case x = mu exactly.
inline SampleRecord sample_states(LearnerState& state, double sigma_t) {
  require_finite(sigma_t, "sample_states sigma");
  if (sigma_t < 0.0) throw std::invalid_argument("sample_states: sigma must be >= 0");

  SampleRecord rec;
  rec.sigma_used = sigma_t;
  rec.x = state.mu;
  if (sigma_t > 0.0) {
    for (Eigen::Index k = 0; k < rec.x.vec().size(); ++k) {
      rec.x.vec()[k] += sigma_t * state.rng.normal();
    }
  }
  return rec;
}

inline void fill_payoffs(SampleRecord& rec, const PayoffOracle& oracle) {
  const int n = oracle.num_players();
  rec.payoffs.resize(n);
  for (int i = 0; i < n; ++i) rec.payoffs[i] = oracle.payoff(i, rec.x);
}

/// The projected mean update, per player:
///   mu^i <- Proj_{A_i}[ mu^i - gamma(t+1) sigma^2(t+1) * J_i * (x^i - mu^i) / sigma_used^2 ].
/// Advances the iteration counter. Refuses invalid schedules unless
/// explicitly overridden; aborts on non-finite payoffs.
inline LearnerState update_means(const LearnerState& state, const SampleRecord& rec,
                                 const ScheduleSpec& sched, const ProductSet& sets,
                                 bool allow_invalid_schedule = false) {
  if (!allow_invalid_schedule && !validate_schedule(sched).valid) {
    throw std::invalid_argument(
        "update_means: schedule violates the step/variance conditions "
        "(pass allow_invalid_schedule to override)");
  }
  if (static_cast<int>(rec.payoffs.size()) != state.mu.num_players()) {
    throw std::invalid_argument("update_means: payoffs missing or wrong count");
  }
  for (double p : rec.payoffs) {
    if (!std::isfinite(p)) {
      throw std::runtime_error("update_means: non-finite payoff at t=" + std::to_string(state.t));
    }
  }
  require_finite(rec.x, "update_means sampled state");
  if (!(rec.sigma_used > 0.0)) {
    throw std::invalid_argument("update_means: record was drawn with sigma = 0");
  }

  const double step = sched.gamma(state.t + 1) * std::pow(sched.sigma(state.t + 1), 2);
  const double inv_var = 1.0 / (rec.sigma_used * rec.sigma_used);

  JointVector next = state.mu;
  for (int i = 0; i < state.mu.num_players(); ++i) {
    const Eigen::VectorXd raw =
        state.mu.player(i) -
        step * rec.payoffs[i] * inv_var * (rec.x.player(i) - state.mu.player(i));
    next.set_player(i, sets.project_factor(i, raw));
  }
  return LearnerState(std::move(next), state.t + 1, state.rng);
}

struct RunOptions {
  bool record_states = false;
  bool record_payoffs = false;
  bool allow_invalid_schedule = false;
};

/// Trajectory of a single run: mu[k] is the mean vector after k updates
/// (mu[0] is the initial mean, already projected). States and payoffs are
/// recorded per update when requested.
struct Trajectory {
  std::vector<JointVector> mu;
  std::vector<JointVector> states;
  std::vector<std::vector<double>> payoffs;
};

/// T iterations of sample -> observe payoffs -> projected mean update.
/// Deterministic given the seed. mu0 is projected on entry if infeasible.
inline Trajectory run(const PayoffOracle& oracle, const ProductSet& sets,
                      const ScheduleSpec& sched, const JointVector& mu0, long iterations,
                      std::uint64_t seed, const RunOptions& opts = {}) {
  if (iterations < 0) throw std::invalid_argument("run: iterations must be >= 0");
  if (!opts.allow_invalid_schedule && !validate_schedule(sched).valid) {
    throw std::invalid_argument("run: schedule violates the step/variance conditions");
  }
  require_finite(mu0, "run initial mean");

  Trajectory traj;
  traj.mu.reserve(static_cast<std::size_t>(iterations) + 1);

  LearnerState state(sets.project(mu0), seed);
  traj.mu.push_back(state.mu);
  for (long k = 0; k < iterations; ++k) {
    SampleRecord rec = sample_states(state, sched.sigma(state.t));
    fill_payoffs(rec, oracle);
    state = update_means(state, rec, sched, sets, opts.allow_invalid_schedule);
    traj.mu.push_back(state.mu);
    if (opts.record_states) traj.states.push_back(rec.x);
    if (opts.record_payoffs) traj.payoffs.push_back(rec.payoffs);
  }
  return traj;
}

/// Initialization draw: uniform in each factor's bounding box, then projected
/// onto the factor. Not exactly uniform on a budget slice (the projection
/// skews mass toward its boundary), which is acceptable: convergence holds
/// from any initial mean.
inline JointVector uniform_feasible_point(const ProductSet& sets, Rng& rng) {
  if (sets.num_factors() < 1) throw std::invalid_argument("uniform_feasible_point: empty set");
  const int d = sets.factor_dim(0);
  JointVector out(sets.num_factors(), d);
  for (int i = 0; i < sets.num_factors(); ++i) {
    const Eigen::VectorXd& lo = sets.factor_lo(i);
    const Eigen::VectorXd& hi = sets.factor_hi(i);
    Eigen::VectorXd p(sets.factor_dim(i));
    for (int k = 0; k < p.size(); ++k) p[k] = rng.uniform(lo[k], hi[k]);
    out.set_player(i, sets.project_factor(i, p));
  }
  return out;
}

}  // namespace nashlearn
