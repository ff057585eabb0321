#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "tsynth/task.hpp"
#include "tsynth/tensor.hpp"

namespace tsynth {

// Fixed-width numeric encoding of a task specification, the model's only view
// of tensors. Four segments (three input slots, then the output), each laid
// out as value block + size block + type block with a separator after each.
inline constexpr std::size_t kValueSlots = 150;
inline constexpr std::size_t kSizeSlots = 5;
inline constexpr std::size_t kTypeSlots = 3;
inline constexpr std::size_t kSegmentLen = kValueSlots + 1 + kSizeSlots + 1 + kTypeSlots + 1;
inline constexpr std::size_t kSpecLen = 4 * kSegmentLen;

// Sentinels sit outside the image of the value map ([-1, 5]) so the network
// can tell padding from data.
inline constexpr float kPad = -9.99f;
inline constexpr float kSep = -9.98f;
inline constexpr float kMask = -9.97f;

using EncodedSpec = std::vector<float>;

// Placeholder for an input slot whose tensor is deliberately hidden (the
// carried intermediate during stepwise prediction).
struct MaskedSlot {};

using SpecInput = std::variant<Tensor, MaskedSlot>;

// Value block: row-major data mapped by x -> clamp(x, -100, 500) / 100,
// PAD-filled past numel. Size block: [rank, d1, d2, d3, numel] with absent
// dims as PAD. Type block: one-hot over {Int, Bool, Dummy}.
// Throws TooLargeToEncode when numel > 150.
void encode_tensor_segment(const Tensor& t, EncodedSpec& out);

// Segment order: given inputs, then dummy segments up to three, then the
// output. A MaskedSlot encodes as a dummy segment carrying MASK in its first
// value slot. Result length is always kSpecLen.
EncodedSpec encode_spec(const std::vector<SpecInput>& inputs, const Tensor& output);

inline EncodedSpec encode_task(const TaskSpec& spec) {
  std::vector<SpecInput> ins(spec.inputs.begin(), spec.inputs.end());
  return encode_spec(ins, spec.output);
}

}  // namespace tsynth
