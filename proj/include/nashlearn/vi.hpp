#pragma once

// Ground-truth equilibria via the variational-inequality formulation:
// a* solves VI(A, M) iff a* = Proj_A(a* - M(a*)), and for convex games the
// VI solutions are exactly the Nash equilibria. The solver is Korpelevich's
// extragradient method, convergent for monotone Lipschitz mappings.

#include "nashlearn/games.hpp"
#include "nashlearn/joint_vector.hpp"
#include "nashlearn/rng.hpp"
#include "nashlearn/sets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nashlearn {

template <typename M>
concept GameMap = requires(const M& m, const JointVector& a) {
  { m(a) } -> std::convertible_to<JointVector>;
};

struct VISolution {
  JointVector a_star;
  double residual = 0.0;
  long iterations = 0;
  bool converged = false;
};

/// Natural residual ||a - Proj_A(a - M(a))||; zero exactly at VI solutions.
template <GameMap Map>
double vi_residual(const JointVector& a, const Map& mapping, const ProductSet& sets) {
  JointVector shifted = a;
  shifted.vec() -= mapping(a).vec();
  return (a.vec() - sets.project(shifted).vec()).norm();
}

/// Midpoint of the factor bounding boxes projected onto the set; a cheap
/// deterministic start.
inline JointVector box_center_start(const ProductSet& sets) {
  if (sets.num_factors() < 1) throw std::invalid_argument("box_center_start: empty set");
  JointVector p(sets.num_factors(), sets.factor_dim(0));
  for (int i = 0; i < sets.num_factors(); ++i) {
    p.set_player(i, 0.5 * (sets.factor_lo(i) + sets.factor_hi(i)));
  }
  return sets.project(p);
}

/// Extragradient iterations
///   y_k = Proj_A(a_k - step * M(a_k)),  a_{k+1} = Proj_A(a_k - step * M(y_k))
/// until the natural residual falls below tol. step must be below 1/L for the
/// mapping's Lipschitz constant L.
template <GameMap Map>
VISolution solve_vi_extragradient(const Map& mapping, const ProductSet& sets, double step,
                                  double tol, long max_iter, const JointVector& start) {
  if (!(step > 0.0)) throw std::invalid_argument("solve_vi_extragradient: step must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_vi_extragradient: tol must be positive");

  VISolution sol;
  sol.a_star = sets.project(start);
  for (sol.iterations = 0; sol.iterations < max_iter; ++sol.iterations) {
    sol.residual = vi_residual(sol.a_star, mapping, sets);
    if (sol.residual <= tol) {
      sol.converged = true;
      return sol;
    }
    JointVector half = sol.a_star;
    half.vec() -= step * mapping(sol.a_star).vec();
    half = sets.project(half);

    JointVector next = sol.a_star;
    next.vec() -= step * mapping(half).vec();
    sol.a_star = sets.project(next);
  }
  sol.residual = vi_residual(sol.a_star, mapping, sets);
  sol.converged = sol.residual <= tol;
  return sol;
}

template <GameMap Map>
VISolution solve_vi_extragradient(const Map& mapping, const ProductSet& sets, double step,
                                  double tol, long max_iter) {
  return solve_vi_extragradient(mapping, sets, step, tol, max_iter, box_center_start(sets));
}

/// Upper bound on ||d^2 J_i / d(a^i)^2|| over the action box, used as the
/// projected-gradient step denominator in the best-response solves.
inline double own_block_curvature_bound(const QuadraticAggregativeGame& game, int i) {
  const Eigen::MatrixXd hess = game.value_mat(i) + game.value_mat(i).transpose() +
                               (2.0 / game.num_players()) *
                                   (game.price_mat(i) + game.price_mat(i).transpose());
  return hess.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm bounds the spectral norm
}

inline double own_block_curvature_bound(const SmoothTestGame& game, int i) {
  const auto& set = game.quadratic_part().action_sets().at(i);
  const double corner = std::abs(set.upper());
  return own_block_curvature_bound(game.quadratic_part(), i) +
         12.0 * game.epsilon() * corner * corner;
}

/// Largest unilateral improvement any player could gain:
///   max_i [ J_i(a) - min_{b in A_i} J_i(b, a_{-i}) ].
/// Each inner convex problem is solved by projected gradient with a fixed
/// 1/L_i step, run to stagnation (the subproblems are tiny). Nonnegative up
/// to tol; <= tol exactly at Nash equilibria.
template <typename Game>
double best_response_gap(const Game& game, const JointVector& a, double tol) {
  const ProductSet sets = game.product_set();
  if (sets.distance(a) > std::max(1e-8, tol)) {
    throw std::invalid_argument("best_response_gap: point is not feasible");
  }
  require_finite(a, "best_response_gap point");

  double gap = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    // Gradient of J_i in player i's own block, others held at a.
    JointVector probe = a;
    auto grad_i = [&](const Eigen::VectorXd& b) {
      probe.set_player(i, b);
      return Eigen::VectorXd(game.mapping(probe).player(i));
    };

    // Fixed step from a per-player curvature bound estimated at box corners.
    double lip = own_block_curvature_bound(game, i);
    const double step = 1.0 / std::max(lip, 1e-8);

    Eigen::VectorXd b = a.player(i);
    const long max_inner = 200000;
    for (long k = 0; k < max_inner; ++k) {
      Eigen::VectorXd next = sets.project_factor(i, b - step * grad_i(b));
      const double move = (next - b).norm();
      b = next;
      if (move <= 1e-14 * std::max(1.0, b.norm())) break;
    }

    probe.set_player(i, b);
    const double best = game.cost(i, probe);
    gap = std::max(gap, game.cost(i, a) - best);
  }
  return gap;
}

/// Samples feasible pairs and counts violations of pseudo-monotonicity:
/// (M(y), x - y) >= 0 but (M(x), x - y) < -1e-9. Zero violations is
/// necessary for pseudo-monotonicity on the set, not sufficient.
template <GameMap Map>
long count_pseudo_monotone_violations(const Map& mapping, const ProductSet& sets, long n_pairs,
                                      std::uint64_t seed) {
  if (n_pairs < 0) throw std::invalid_argument("count_pseudo_monotone_violations: n_pairs < 0");
  Rng rng(seed);
  const int n = sets.num_factors();
  const int d = n > 0 ? sets.factor_dim(0) : 0;

  auto feasible_draw = [&]() {
    JointVector p(n, d);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd& lo = sets.factor_lo(i);
      const Eigen::VectorXd& hi = sets.factor_hi(i);
      Eigen::VectorXd q(sets.factor_dim(i));
      for (int k = 0; k < q.size(); ++k) q[k] = rng.uniform(lo[k], hi[k]);
      p.set_player(i, sets.project_factor(i, q));
    }
    return p;
  };

  long violations = 0;
  for (long s = 0; s < n_pairs; ++s) {
    const JointVector x = feasible_draw();
    const JointVector y = feasible_draw();
    const Eigen::VectorXd diff = x.vec() - y.vec();
    if (mapping(y).vec().dot(diff) >= 0.0 && mapping(x).vec().dot(diff) < -1e-9) {
      ++violations;
    }
  }
  return violations;
}

/// Multi-start equilibrium search for instances where uniqueness is not
/// guaranteed: k seeded starts, results clustered by radius; one
/// representative per cluster. Throws if no start converges.
template <GameMap Map>
std::vector<JointVector> find_equilibria(const Map& mapping, const ProductSet& sets, double step,
                                         double tol, long max_iter, int n_starts,
                                         std::uint64_t seed, double cluster_radius = 1e-6) {
  if (n_starts < 1) throw std::invalid_argument("find_equilibria: need at least one start");
  Rng rng(seed);
  std::vector<JointVector> found;
  bool any = false;
  for (int s = 0; s < n_starts; ++s) {
    JointVector start(sets.num_factors(), sets.factor_dim(0));
    for (int i = 0; i < sets.num_factors(); ++i) {
      const Eigen::VectorXd& lo = sets.factor_lo(i);
      const Eigen::VectorXd& hi = sets.factor_hi(i);
      Eigen::VectorXd q(sets.factor_dim(i));
      for (int k = 0; k < q.size(); ++k) q[k] = rng.uniform(lo[k], hi[k]);
      start.set_player(i, sets.project_factor(i, q));
    }
    const VISolution sol = solve_vi_extragradient(mapping, sets, step, tol, max_iter, start);
    if (!sol.converged) continue;
    any = true;
    bool fresh = true;
    for (const auto& rep : found) {
      if ((rep.vec() - sol.a_star.vec()).norm() <= cluster_radius) {
        fresh = false;
        break;
      }
    }
    if (fresh) found.push_back(sol.a_star);
  }
  if (!any) {
    throw std::runtime_error("find_equilibria: no start converged within max_iter");
  }
  return found;
}

}  // namespace nashlearn
