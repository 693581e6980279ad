#pragma once

// Monte Carlo verification of the estimator identities behind the learner:
// the score-function estimator is an unbiased gradient of the smoothed cost,
// the smoothed mapping is the Gaussian average of the raw mapping, and the
// smoothing bias vanishes at rate O(sigma) for Lipschitz mappings.

#include "nashlearn/joint_vector.hpp"
#include "nashlearn/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>
#include <vector>

namespace nashlearn {

/// Per-coordinate Monte Carlo mean and standard error.
struct McMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_err;
  long n_samples = 0;
};

namespace detail {

constexpr long kMcChunk = 1 << 16;

/// Chunked accumulation: chunk c draws from its own generator seeded by
/// split_seed(seed, c) and partial sums are merged in chunk order, so the
/// result is bit-identical for any worker count.
template <typename SampleFn>
McMoments mc_moments(long n_samples, int dim, std::uint64_t seed, const SampleFn& fill_sample,
                     int workers = 0) {
  if (n_samples < 1) throw std::invalid_argument("mc_moments: need at least one sample");
  const long n_chunks = (n_samples + kMcChunk - 1) / kMcChunk;
  if (workers <= 0) {
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  workers = static_cast<int>(std::min<long>(workers, n_chunks));

  std::vector<Eigen::VectorXd> sums(n_chunks), sqsums(n_chunks);
  auto run_chunk = [&](long c) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(c)));
    const long lo = c * kMcChunk;
    const long hi = std::min(n_samples, lo + kMcChunk);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd s2 = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd v(dim);
    for (long k = lo; k < hi; ++k) {
      fill_sample(rng, v);
      s += v;
      s2 += v.cwiseProduct(v);
    }
    sums[c] = std::move(s);
    sqsums[c] = std::move(s2);
  };

  if (workers == 1) {
    for (long c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::future<void>> tasks;
    tasks.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&, w]() {
        for (long c = w; c < n_chunks; c += workers) run_chunk(c);
      }));
    }
    for (auto& t : tasks) t.get();
  }

  Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd total_sq = Eigen::VectorXd::Zero(dim);
  for (long c = 0; c < n_chunks; ++c) {
    total += sums[c];
    total_sq += sqsums[c];
  }

  McMoments out;
  out.n_samples = n_samples;
  out.mean = total / static_cast<double>(n_samples);
  if (n_samples > 1) {
    const Eigen::VectorXd var =
        (total_sq / static_cast<double>(n_samples) - out.mean.cwiseProduct(out.mean)) *
        (static_cast<double>(n_samples) / static_cast<double>(n_samples - 1));
    out.std_err = (var.cwiseMax(0.0) / static_cast<double>(n_samples)).cwiseSqrt();
  } else {
    out.std_err = Eigen::VectorXd::Zero(dim);
  }
  return out;
}

inline void draw_joint_gaussian(Rng& rng, const Eigen::VectorXd& mu, double sigma,
                                Eigen::VectorXd& out) {
  for (Eigen::Index k = 0; k < mu.size(); ++k) out[k] = mu[k] + sigma * rng.normal();
}

inline void check_mc_args(double sigma, long n_samples) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("diagnostics: sigma must be positive");
  }
  if (n_samples < 100) {
    throw std::invalid_argument("diagnostics: fewer than 100 samples gives a meaningless std-err");
  }
}

}  // namespace detail

/// Monte Carlo estimate of the score-function step direction against the
/// analytic gradient of the smoothed cost.
struct EstimatorReport {
  JointVector mc_mean;
  JointVector analytic;
  JointVector std_err;
  long n_samples = 0;
  double max_z_score = 0.0;
};

/// Averages F_{i,k}(x) = J_i(x) (x^i_k - mu^i_k) / sigma^2 over joint
/// Gaussian draws and compares with the game's analytic smoothed mapping.
/// The max z-score is the largest per-coordinate |mc - analytic| / std_err.
template <typename Game>
EstimatorReport score_estimator_check(const Game& game, const JointVector& mu, double sigma,
                                      long n_samples, std::uint64_t seed, int workers = 0) {
  detail::check_mc_args(sigma, n_samples);
  require_finite(mu, "score_estimator_check mu");

  const int dim = mu.total_dim();
  const double inv_var = 1.0 / (sigma * sigma);
  const McMoments mm = detail::mc_moments(
      n_samples, dim, seed,
      [&](Rng& rng, Eigen::VectorXd& v) {
        Eigen::VectorXd x(dim);
        detail::draw_joint_gaussian(rng, mu.vec(), sigma, x);
        const JointVector xs(mu.num_players(), mu.dim(), std::move(x));
        for (int i = 0; i < mu.num_players(); ++i) {
          const double ji = game.cost(i, xs);
          v.segment(i * mu.dim(), mu.dim()) =
              ji * inv_var * (xs.player(i) - mu.player(i));
        }
      },
      workers);

  EstimatorReport rep{JointVector(mu.num_players(), mu.dim(), mm.mean),
                      game.smoothed_mapping(mu, sigma),
                      JointVector(mu.num_players(), mu.dim(), mm.std_err), mm.n_samples, 0.0};
  for (int k = 0; k < dim; ++k) {
    const double diff = std::abs(rep.mc_mean[k] - rep.analytic[k]);
    const double se = rep.std_err[k];
    const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : HUGE_VAL);
    rep.max_z_score = std::max(rep.max_z_score, z);
  }
  return rep;
}

/// Monte Carlo average of the raw game mapping at Gaussian draws: the
/// pathwise estimate of the smoothed mapping (the integration-by-parts
/// counterpart of the score estimator).
struct MixedMappingEstimate {
  JointVector mc_mean;
  JointVector std_err;
  long n_samples = 0;
};

template <typename Game>
MixedMappingEstimate mixed_mapping_mc(const Game& game, const JointVector& mu, double sigma,
                                      long n_samples, std::uint64_t seed, int workers = 0) {
  detail::check_mc_args(sigma, n_samples);
  require_finite(mu, "mixed_mapping_mc mu");

  const int dim = mu.total_dim();
  const McMoments mm = detail::mc_moments(
      n_samples, dim, seed,
      [&](Rng& rng, Eigen::VectorXd& v) {
        Eigen::VectorXd x(dim);
        detail::draw_joint_gaussian(rng, mu.vec(), sigma, x);
        v = game.mapping(JointVector(mu.num_players(), mu.dim(), std::move(x))).vec();
      },
      workers);

  return MixedMappingEstimate{JointVector(mu.num_players(), mu.dim(), mm.mean),
                              JointVector(mu.num_players(), mu.dim(), mm.std_err), mm.n_samples};
}

/// Measured smoothing bias ||E[M(x)] - M(mu)|| across a ladder of decreasing
/// sigmas, with the closed-form bias and Monte Carlo error bars recorded for
/// each rung.
struct BiasReport {
  std::vector<double> sigmas;
  std::vector<double> q_norms;          // measured ||Q(mu, sigma)||
  std::vector<double> ratios;           // q_norms[j] / sigmas[j]
  std::vector<double> analytic_norms;   // closed-form ||Q|| from Gaussian moments
  std::vector<double> std_err_norms;    // ||per-coordinate std errs||
  std::vector<double> max_z_scores;     // per-rung max |measured - analytic| / std_err
  long n_samples = 0;
};

template <typename Game>
BiasReport bias_scaling_check(const Game& game, const JointVector& mu,
                              const std::vector<double>& sigmas, long n_samples,
                              std::uint64_t seed, int workers = 0) {
  if (sigmas.empty()) throw std::invalid_argument("bias_scaling_check: empty sigma ladder");
  for (std::size_t j = 0; j < sigmas.size(); ++j) {
    if (!(sigmas[j] > 0.0)) throw std::invalid_argument("bias_scaling_check: sigmas must be > 0");
    if (j > 0 && !(sigmas[j] < sigmas[j - 1])) {
      throw std::invalid_argument("bias_scaling_check: sigmas must be strictly decreasing");
    }
  }

  const Eigen::VectorXd base = game.mapping(mu).vec();
  BiasReport rep;
  rep.sigmas = sigmas;
  rep.n_samples = n_samples;
  for (std::size_t j = 0; j < sigmas.size(); ++j) {
    const double sigma = sigmas[j];
    const MixedMappingEstimate est =
        mixed_mapping_mc(game, mu, sigma, n_samples, split_seed(seed, j), workers);
    const Eigen::VectorXd bias = est.mc_mean.vec() - base;
    const Eigen::VectorXd analytic = game.smoothed_mapping(mu, sigma).vec() - base;

    double max_z = 0.0;
    for (Eigen::Index k = 0; k < bias.size(); ++k) {
      const double diff = std::abs(bias[k] - analytic[k]);
      const double se = est.std_err[k];
      max_z = std::max(max_z, se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : HUGE_VAL));
    }

    rep.q_norms.push_back(bias.norm());
    rep.ratios.push_back(bias.norm() / sigma);
    rep.analytic_norms.push_back(analytic.norm());
    rep.std_err_norms.push_back(est.std_err.vec().norm());
    rep.max_z_scores.push_back(max_z);
  }
  return rep;
}

}  // namespace nashlearn
