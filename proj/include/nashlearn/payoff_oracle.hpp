#pragma once

#include "nashlearn/joint_vector.hpp"

namespace nashlearn {

/// The only channel between a game and the learner: agent i may query the
/// scalar value of its own cost at the realized joint state, nothing else.
/// No gradients, no matrices, no other players' data cross this interface.
class PayoffOracle {
 public:
  virtual ~PayoffOracle() = default;

  virtual int num_players() const = 0;

  /// Cost value J_i at the joint state x (x need not be feasible; costs are
  /// defined on the whole space).
  virtual double payoff(int player, const JointVector& x) const = 0;
};

}  // namespace nashlearn
