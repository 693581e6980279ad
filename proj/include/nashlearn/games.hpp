#pragma once

#include "nashlearn/joint_vector.hpp"
#include "nashlearn/payoff_oracle.hpp"
#include "nashlearn/rng.hpp"
#include "nashlearn/sets.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nashlearn {

/// Affine representation M(a) = matm * a + mvec of a game mapping.
struct GameMappingAffine {
  Eigen::MatrixXd matm;
  Eigen::VectorXd mvec;

  JointVector apply(const JointVector& a) const {
    if (a.total_dim() != matm.cols()) {
      throw std::invalid_argument("GameMappingAffine::apply: dimension mismatch");
    }
    return JointVector(a.num_players(), a.dim(), matm * a.vec() + mvec);
  }
};

/// Aggregative game with quadratic costs
///   J_i(a) = a_i' Q_i a_i + 2 (C_i * avg(a) + c_i)' a_i,   avg(a) = (1/N) sum_j a_j,
/// over per-player box-budget action sets. The game mapping (stacked gradients
/// of each cost in its own action) is affine.
class QuadraticAggregativeGame {
 public:
  QuadraticAggregativeGame(std::vector<Eigen::MatrixXd> value_mats,
                           std::vector<Eigen::MatrixXd> price_mats,
                           std::vector<Eigen::VectorXd> price_offsets,
                           std::vector<BoxBudgetSet> action_sets)
      : Qm_(std::move(value_mats)),
        Cm_(std::move(price_mats)),
        cv_(std::move(price_offsets)),
        sets_(std::move(action_sets)) {
    n_ = static_cast<int>(Qm_.size());
    if (n_ < 1) throw std::invalid_argument("QuadraticAggregativeGame: need at least one player");
    if (Cm_.size() != Qm_.size() || cv_.size() != Qm_.size() || sets_.size() != Qm_.size()) {
      throw std::invalid_argument("QuadraticAggregativeGame: per-player data sizes disagree");
    }
    d_ = static_cast<int>(Qm_[0].rows());
    for (int i = 0; i < n_; ++i) {
      if (Qm_[i].rows() != d_ || Qm_[i].cols() != d_ || Cm_[i].rows() != d_ ||
          Cm_[i].cols() != d_ || cv_[i].size() != d_ || sets_[i].dimension() != d_) {
        throw std::invalid_argument("QuadraticAggregativeGame: inconsistent dimensions");
      }
      if (!Qm_[i].allFinite() || !Cm_[i].allFinite() || !cv_[i].allFinite()) {
        throw std::invalid_argument("QuadraticAggregativeGame: non-finite coefficient");
      }
    }
  }

  int num_players() const { return n_; }
  int dim() const { return d_; }
  int total_dim() const { return n_ * d_; }

  const Eigen::MatrixXd& value_mat(int i) const { return Qm_.at(i); }
  const Eigen::MatrixXd& price_mat(int i) const { return Cm_.at(i); }
  const Eigen::VectorXd& price_offset(int i) const { return cv_.at(i); }
  const std::vector<BoxBudgetSet>& action_sets() const { return sets_; }

  ProductSet product_set() const { return ProductSet::from_boxes(sets_); }

  /// Polynomial degree of the costs (Assumption-3 style growth is read off
  /// the degree, not sampled).
  int cost_degree() const { return 2; }

  double cost(int i, const JointVector& x) const {
    check_point(i, x);
    const Eigen::VectorXd xi = x.player(i);
    const Eigen::VectorXd avg = average_action(x);
    return xi.dot(Qm_[i] * xi) + 2.0 * (Cm_[i] * avg + cv_[i]).dot(xi);
  }

  /// Game mapping: stacked gradients d J_i / d a_i. Each block is
  ///   (Q_i + Q_i') a_i + 2 C_i avg(a) + (2/N) C_i' a_i + 2 c_i,
  /// the (2/N) C_i' a_i term coming from player i's own share of the average.
  JointVector mapping(const JointVector& a) const {
    check_point(0, a);
    const Eigen::VectorXd avg = average_action(a);
    JointVector out(n_, d_);
    const double w = 2.0 / n_;
    for (int i = 0; i < n_; ++i) {
      const Eigen::VectorXd ai = a.player(i);
      out.set_player(i, (Qm_[i] + Qm_[i].transpose()) * ai + 2.0 * (Cm_[i] * avg + cv_[i]) +
                            w * (Cm_[i].transpose() * ai));
    }
    return out;
  }

  /// Expectation of the mapping under independent N(mu, sigma^2 I) draws.
  /// Affine mapping, so the smoothed mapping is the mapping at the mean and
  /// the smoothing bias is identically zero.
  JointVector smoothed_mapping(const JointVector& mu, double /*sigma*/) const {
    return mapping(mu);
  }

 private:
  void check_point(int i, const JointVector& x) const {
    if (i < 0 || i >= n_) throw std::out_of_range("QuadraticAggregativeGame: player index");
    if (x.num_players() != n_ || x.dim() != d_) {
      throw std::invalid_argument("QuadraticAggregativeGame: joint vector shape mismatch");
    }
    require_finite(x, "QuadraticAggregativeGame point");
  }

  Eigen::VectorXd average_action(const JointVector& x) const {
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(d_);
    for (int j = 0; j < n_; ++j) avg += x.player(j);
    return avg / static_cast<double>(n_);
  }

  std::vector<Eigen::MatrixXd> Qm_, Cm_;
  std::vector<Eigen::VectorXd> cv_;
  std::vector<BoxBudgetSet> sets_;
  int n_ = 0, d_ = 0;
};

/// Assembles the affine form M(a) = matm * a + mvec of the quadratic game's
/// mapping. Block (i,i) = Q_i + Q_i' + (2/N)(C_i + C_i'), block (i,j) for
/// j != i is (2/N) C_i, and mvec stacks 2 c_i.
inline GameMappingAffine assemble_hat_M(const QuadraticAggregativeGame& game) {
  const int n = game.num_players();
  const int d = game.dim();
  const double w = 2.0 / n;
  GameMappingAffine aff;
  aff.matm = Eigen::MatrixXd::Zero(n * d, n * d);
  aff.mvec = Eigen::VectorXd::Zero(n * d);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd& Qi = game.value_mat(i);
    const Eigen::MatrixXd& Ci = game.price_mat(i);
    for (int j = 0; j < n; ++j) {
      aff.matm.block(i * d, j * d, d, d) = w * Ci;
    }
    aff.matm.block(i * d, i * d, d, d) += Qi + Qi.transpose() + w * Ci.transpose();
    aff.mvec.segment(i * d, d) = 2.0 * game.price_offset(i);
  }
  return aff;
}

inline JointVector game_mapping(const QuadraticAggregativeGame& game, const JointVector& a) {
  return game.mapping(a);
}

struct AssumptionReport {
  bool per_player_convex = false;  // own-action Hessian of every cost is PSD
  bool psd_hat_M = false;          // symmetric part of hat-M is PSD
  double lipschitz_estimate = 0.0; // spectral norm of hat-M
};

/// Eigenvalue checks of the convexity and monotonicity conditions, plus the
/// Lipschitz constant of the affine mapping. PSD is tested on symmetric parts
/// with threshold -1e-10 (the quadratic-form meaning of the condition).
inline AssumptionReport check_assumptions(const QuadraticAggregativeGame& game) {
  constexpr double kPsdTol = -1e-10;
  const int n = game.num_players();
  AssumptionReport rep;

  rep.per_player_convex = true;
  for (int i = 0; i < n; ++i) {
    // Own-action Hessian of J_i: Q_i + Q_i' + (2/N)(C_i + C_i'), symmetric.
    Eigen::MatrixXd hess = game.value_mat(i) + game.value_mat(i).transpose() +
                           (2.0 / n) * (game.price_mat(i) + game.price_mat(i).transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    if (es.eigenvalues().minCoeff() < kPsdTol) rep.per_player_convex = false;
  }

  const GameMappingAffine aff = assemble_hat_M(game);
  Eigen::MatrixXd sym = 0.5 * (aff.matm + aff.matm.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  rep.psd_hat_M = es.eigenvalues().minCoeff() >= kPsdTol;

  rep.lipschitz_estimate = aff.matm.jacobiSvd().singularValues()[0];
  return rep;
}

/// Seeded instance of the case-study class: Q_i = C_i = I, price offsets
/// uniform per coordinate in c_range, budgets uniform per player in
/// budget_range, common box bound `upper`.
inline QuadraticAggregativeGame random_instance(std::uint64_t seed, int N, int d, double upper,
                                                std::pair<double, double> c_range,
                                                std::pair<double, double> budget_range) {
  if (N < 1 || d < 1) throw std::invalid_argument("random_instance: need N >= 1 and d >= 1");
  if (!(upper > 0.0)) throw std::invalid_argument("random_instance: upper bound must be positive");
  if (!(c_range.second > c_range.first) || !(budget_range.second > budget_range.first)) {
    throw std::invalid_argument("random_instance: ranges must be non-degenerate");
  }
  if (budget_range.first < 0.0 || budget_range.second > d * upper) {
    throw std::invalid_argument("random_instance: budget range outside [0, d*upper]");
  }

  Rng rng(seed);
  std::vector<Eigen::MatrixXd> Qm(N, Eigen::MatrixXd::Identity(d, d));
  std::vector<Eigen::MatrixXd> Cm(N, Eigen::MatrixXd::Identity(d, d));
  std::vector<Eigen::VectorXd> cv;
  std::vector<BoxBudgetSet> sets;
  cv.reserve(N);
  sets.reserve(N);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd ci(d);
    for (int k = 0; k < d; ++k) ci[k] = rng.uniform(c_range.first, c_range.second);
    cv.push_back(std::move(ci));
    sets.emplace_back(d, upper, rng.uniform(budget_range.first, budget_range.second));
  }
  return QuadraticAggregativeGame(std::move(Qm), std::move(Cm), std::move(cv), std::move(sets));
}

/// Smooth non-quadratic test game: the quadratic cost plus a small quartic
/// term eps * sum_k (a^i_k)^4 in each player's own coordinates. The mapping
/// is no longer affine, so Gaussian smoothing has a measurable bias; the
/// quartic's Gaussian moments are closed-form, which gives an exact value to
/// test the bias against.
class SmoothTestGame {
 public:
  SmoothTestGame(QuadraticAggregativeGame base, double epsilon = 0.05)
      : base_(std::move(base)), eps_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw std::invalid_argument("SmoothTestGame: epsilon must be positive");
    }
  }

  int num_players() const { return base_.num_players(); }
  int dim() const { return base_.dim(); }
  int total_dim() const { return base_.total_dim(); }
  double epsilon() const { return eps_; }
  const QuadraticAggregativeGame& quadratic_part() const { return base_; }
  ProductSet product_set() const { return base_.product_set(); }
  int cost_degree() const { return 4; }

  double cost(int i, const JointVector& x) const {
    double quartic = 0.0;
    const auto xi = x.player(i);
    for (int k = 0; k < dim(); ++k) quartic += std::pow(xi[k], 4);
    return base_.cost(i, x) + eps_ * quartic;
  }

  JointVector mapping(const JointVector& a) const {
    JointVector out = base_.mapping(a);
    for (int i = 0; i < num_players(); ++i) {
      const auto ai = a.player(i);
      for (int k = 0; k < dim(); ++k) {
        out.player(i)[k] += 4.0 * eps_ * std::pow(ai[k], 3);
      }
    }
    return out;
  }

  /// Exact Gaussian-smoothed mapping. For x ~ N(mu, sigma^2),
  /// E[x^3] = mu^3 + 3 mu sigma^2, so each own-coordinate quartic gradient
  /// smooths to 4 eps (mu^3 + 3 mu sigma^2); the affine part is unbiased.
  JointVector smoothed_mapping(const JointVector& mu, double sigma) const {
    JointVector out = base_.mapping(mu);
    const double s2 = sigma * sigma;
    for (int i = 0; i < num_players(); ++i) {
      const auto mi = mu.player(i);
      for (int k = 0; k < dim(); ++k) {
        out.player(i)[k] += 4.0 * eps_ * (std::pow(mi[k], 3) + 3.0 * mi[k] * s2);
      }
    }
    return out;
  }

 private:
  QuadraticAggregativeGame base_;
  double eps_;
};

/// Adapts any game with cost(i, x) to the payoff-only interface handed to the
/// learner.
template <typename Game>
class GamePayoffOracle final : public PayoffOracle {
 public:
  explicit GamePayoffOracle(const Game& game) : game_(&game) {}

  int num_players() const override { return game_->num_players(); }

  double payoff(int player, const JointVector& x) const override {
    return game_->cost(player, x);
  }

 private:
  const Game* game_;
};

template <typename Game>
GamePayoffOracle<Game> make_payoff_oracle(const Game& game) {
  return GamePayoffOracle<Game>(game);
}

}  // namespace nashlearn
