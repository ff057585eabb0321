#pragma once

#include <array>

#include "tsynth/ops.hpp"

namespace tsynth {

// Additive cost model. Every cost is a positive multiple of 4: base values
// and literals weigh 4, ops carry their table weight, and a call costs
// op + sum(tensor args) + 4 per literal int (a shape tuple weighs 4 per entry).
struct CostTable {
  std::array<int, kNumCoreOps> op_cost{};
  int base_value_cost = 4;
  int literal_cost = 4;

  static CostTable preset();

  int cost_of(OpCode op) const {
    return op_cost[static_cast<size_t>(op)];
  }
  int cost_of_literal(const Literal& lit) const {
    return literal_cost * static_cast<int>(lit.ints.size());
  }
};

inline constexpr int kCostStep = 4;

}  // namespace tsynth
