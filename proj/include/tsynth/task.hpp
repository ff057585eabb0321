#pragma once

#include <vector>

#include "tsynth/tensor.hpp"

namespace tsynth {

// A synthesis task: named positional inputs in1..in3 and the target output.
struct TaskSpec {
  std::vector<Tensor> inputs;
  Tensor output;

  void validate() const;  // throws InvalidTensor unless 1..3 inputs
};

}  // namespace tsynth
