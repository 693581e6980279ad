#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace nashlearn {

/// Stacked joint vector over N players of common per-player dimension d,
/// laid out player-major: player i occupies entries [i*d, (i+1)*d).
/// Used for joint actions a, joint states x and the stacked means mu.
class JointVector {
 public:
  JointVector() = default;

  JointVector(int num_players, int dim)
      : n_(num_players), d_(dim), v_(Eigen::VectorXd::Zero(check_shape(num_players, dim))) {}

  JointVector(int num_players, int dim, Eigen::VectorXd entries)
      : n_(num_players), d_(dim), v_(std::move(entries)) {
    if (v_.size() != check_shape(num_players, dim)) {
      throw std::invalid_argument("JointVector: entries length " + std::to_string(v_.size()) +
                                  " != num_players*dim = " + std::to_string(n_ * d_));
    }
  }

  int num_players() const { return n_; }
  int dim() const { return d_; }
  int total_dim() const { return n_ * d_; }

  Eigen::VectorXd& vec() { return v_; }
  const Eigen::VectorXd& vec() const { return v_; }

  /// Per-player slice (view). Reassembling all slices recovers the vector.
  Eigen::VectorBlock<Eigen::VectorXd> player(int i) {
    check_player(i);
    return v_.segment(i * d_, d_);
  }
  Eigen::VectorBlock<const Eigen::VectorXd> player(int i) const {
    check_player(i);
    return v_.segment(i * d_, d_);
  }

  void set_player(int i, const Eigen::VectorXd& x) {
    check_player(i);
    if (x.size() != d_) throw std::invalid_argument("JointVector: player slice dimension mismatch");
    v_.segment(i * d_, d_) = x;
  }

  bool all_finite() const { return v_.allFinite(); }

  double operator[](Eigen::Index k) const { return v_[k]; }
  double& operator[](Eigen::Index k) { return v_[k]; }

 private:
  static int check_shape(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("JointVector: need num_players >= 1 and dim >= 1");
    return n * d;
  }
  void check_player(int i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("JointVector: player index " + std::to_string(i));
  }

  int n_ = 0;
  int d_ = 0;
  Eigen::VectorXd v_;
};

/// Rejects NaN/Inf anywhere in numeric input. Stochastic loops poisoned by a
/// silent NaN are much harder to debug than an early throw.
inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

inline void require_finite(const JointVector& v, const char* what) {
  require_finite(v.vec(), what);
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

}  // namespace nashlearn
