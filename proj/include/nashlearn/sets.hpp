#pragma once

#include "nashlearn/joint_vector.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nashlearn {

/// Anything that can project a point of fixed dimension onto itself and name a
/// bounding box (used for uniform initialization draws).
template <typename S>
concept ProjectableSet = requires(const S& s, const Eigen::VectorXd& p) {
  { s.dimension() } -> std::convertible_to<int>;
  { s.project(p) } -> std::convertible_to<Eigen::VectorXd>;
  { s.box_lo() } -> std::convertible_to<Eigen::VectorXd>;
  { s.box_hi() } -> std::convertible_to<Eigen::VectorXd>;
};

/// The consumption-profile action set: a box [0, upper]^d intersected with an
/// equality budget sum_k p_k = budget. Feasible iff 0 <= budget <= d*upper.
class BoxBudgetSet {
 public:
  BoxBudgetSet(int dim, double upper, double budget)
      : dim_(dim), upper_(upper), budget_(budget) {
    require_finite(upper, "BoxBudgetSet upper");
    require_finite(budget, "BoxBudgetSet budget");
    if (dim < 1) throw std::invalid_argument("BoxBudgetSet: dim must be >= 1");
    if (upper <= 0.0) throw std::invalid_argument("BoxBudgetSet: upper bound must be positive");
    if (budget < 0.0 || budget > dim * upper) {
      throw std::invalid_argument("BoxBudgetSet: infeasible budget (must lie in [0, dim*upper])");
    }
  }

  int dimension() const { return dim_; }
  double upper() const { return upper_; }
  double budget() const { return budget_; }

  Eigen::VectorXd box_lo() const { return Eigen::VectorXd::Zero(dim_); }
  Eigen::VectorXd box_hi() const { return Eigen::VectorXd::Constant(dim_, upper_); }

  /// Euclidean projection: the continuous-knapsack form clamp(p - lambda, 0, upper)
  /// with lambda found by monotone bisection on the budget residual, then
  /// solved exactly on the identified face so that feasible points are fixed
  /// points and the budget holds to roundoff. The projection is unique even
  /// when lambda is not (flat segments); any lambda in the optimal interval
  /// yields the same clamped point.
  Eigen::VectorXd project(const Eigen::VectorXd& p) const {
    if (p.size() != dim_) throw std::invalid_argument("BoxBudgetSet::project: dimension mismatch");
    require_finite(p, "BoxBudgetSet::project input");

    const double tol = 1e-12 * std::max(1.0, budget_);
    auto residual = [&](double lambda) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += std::clamp(p[k] - lambda, 0.0, upper_);
      return s - budget_;
    };

    // residual is non-increasing in lambda; bracket a sign change.
    double lo = p.minCoeff() - upper_;  // all coordinates at upper: residual >= 0
    double hi = p.maxCoeff();           // all coordinates at zero:  residual <= 0
    double lambda = 0.0;
    if (residual(lo) <= tol) {
      lambda = lo;
    } else if (residual(hi) >= -tol) {
      lambda = hi;
    } else {
      for (int it = 0; it < 200; ++it) {
        lambda = 0.5 * (lo + hi);
        const double r = residual(lambda);
        if (std::abs(r) <= tol) break;
        if (r > 0.0) {
          lo = lambda;
        } else {
          hi = lambda;
        }
      }
    }

    // Exact solve on the face the bisection identified: with the clamped
    // coordinates fixed, lambda distributes the remaining budget over the
    // free coordinates.
    double free_sum = 0.0;
    int n_free = 0, n_upper = 0;
    for (int k = 0; k < dim_; ++k) {
      const double v = p[k] - lambda;
      if (v >= upper_) {
        ++n_upper;
      } else if (v > 0.0) {
        free_sum += p[k];
        ++n_free;
      }
    }
    if (n_free > 0) {
      lambda = (free_sum + upper_ * n_upper - budget_) / n_free;
    }

    Eigen::VectorXd out(dim_);
    for (int k = 0; k < dim_; ++k) out[k] = std::clamp(p[k] - lambda, 0.0, upper_);
    return out;
  }

 private:
  int dim_;
  double upper_;
  double budget_;
};

/// Plain axis-aligned box [lo, hi]^d (no budget). Generic per-factor plumbing
/// for degenerate cases and counterexamples.
class BoxSet {
 public:
  BoxSet(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || lo_.size() < 1) {
      throw std::invalid_argument("BoxSet: bounds must have equal positive length");
    }
    require_finite(lo_, "BoxSet lo");
    require_finite(hi_, "BoxSet hi");
    if ((lo_.array() > hi_.array()).any()) throw std::invalid_argument("BoxSet: lo > hi");
  }

  BoxSet(int dim, double lo, double hi)
      : BoxSet(Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)) {}

  int dimension() const { return static_cast<int>(lo_.size()); }
  Eigen::VectorXd box_lo() const { return lo_; }
  Eigen::VectorXd box_hi() const { return hi_; }

  Eigen::VectorXd project(const Eigen::VectorXd& p) const {
    if (p.size() != lo_.size()) throw std::invalid_argument("BoxSet::project: dimension mismatch");
    require_finite(p, "BoxSet::project input");
    return p.cwiseMax(lo_).cwiseMin(hi_);
  }

 private:
  Eigen::VectorXd lo_, hi_;
};

/// Free-function form of the box-budget projection.
inline Eigen::VectorXd project_box_budget(const Eigen::VectorXd& p, const BoxBudgetSet& set) {
  return set.project(p);
}

/// Cartesian product A = A_1 x ... x A_N of per-player sets. Factors are held
/// type-erased behind {dimension, project, box hints}; the joint projection is
/// factor-wise.
class ProductSet {
 public:
  ProductSet() = default;

  template <ProjectableSet S>
  void add(const S& set) {
    Factor f;
    f.dim = set.dimension();
    f.lo = set.box_lo();
    f.hi = set.box_hi();
    f.project = [set](const Eigen::VectorXd& p) { return set.project(p); };
    factors_.push_back(std::move(f));
  }

  static ProductSet from_boxes(const std::vector<BoxBudgetSet>& boxes) {
    ProductSet sets;
    for (const auto& b : boxes) sets.add(b);
    return sets;
  }

  int num_factors() const { return static_cast<int>(factors_.size()); }
  int factor_dim(int i) const { return at(i).dim; }

  const Eigen::VectorXd& factor_lo(int i) const { return at(i).lo; }
  const Eigen::VectorXd& factor_hi(int i) const { return at(i).hi; }

  Eigen::VectorXd project_factor(int i, const Eigen::VectorXd& p) const {
    return at(i).project(p);
  }

  /// Factor-wise projection of a joint vector; requires one factor per player
  /// with matching dimensions. Idempotent.
  JointVector project(const JointVector& p) const {
    if (p.num_players() != num_factors()) {
      throw std::invalid_argument("ProductSet::project: factor count != num_players");
    }
    JointVector out = p;
    for (int i = 0; i < num_factors(); ++i) {
      if (factors_[i].dim != p.dim()) {
        throw std::invalid_argument("ProductSet::project: factor dimension mismatch");
      }
      out.set_player(i, factors_[i].project(p.player(i)));
    }
    return out;
  }

  /// Euclidean distance from p to its projection (feasibility measure).
  double distance(const JointVector& p) const {
    return (project(p).vec() - p.vec()).norm();
  }

 private:
  struct Factor {
    int dim = 0;
    Eigen::VectorXd lo, hi;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> project;
  };

  const Factor& at(int i) const {
    if (i < 0 || i >= num_factors()) throw std::out_of_range("ProductSet: factor index");
    return factors_[i];
  }

  std::vector<Factor> factors_;
};

inline JointVector project_joint(const JointVector& p, const ProductSet& sets) {
  return sets.project(p);
}

}  // namespace nashlearn
