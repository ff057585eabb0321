#include "tsynth/encode.hpp"

#include <algorithm>

#include "tsynth/error.hpp"

namespace tsynth {

namespace {

void append_dummy_segment(EncodedSpec& out, bool masked) {
  std::size_t start = out.size();
  out.insert(out.end(), kValueSlots, kPad);
  if (masked) out[start] = kMask;
  out.push_back(kSep);
  out.insert(out.end(), kSizeSlots, kPad);
  out.push_back(kSep);
  out.push_back(0.0f);
  out.push_back(0.0f);
  out.push_back(1.0f);
  out.push_back(kSep);
}

}  // namespace

void encode_tensor_segment(const Tensor& t, EncodedSpec& out) {
  if (t.numel() > static_cast<std::int64_t>(kValueSlots)) {
    fail(ErrKind::TooLargeToEncode,
         "tensor with " + std::to_string(t.numel()) + " elements exceeds the " +
             std::to_string(kValueSlots) + "-slot value block");
  }
  for (std::int64_t v : t.data()) {
    out.push_back(static_cast<float>(std::clamp<std::int64_t>(v, -100, 500)) / 100.0f);
  }
  out.insert(out.end(), kValueSlots - static_cast<std::size_t>(t.numel()), kPad);
  out.push_back(kSep);

  out.push_back(static_cast<float>(t.rank()));
  for (int d = 0; d < 3; ++d) {
    out.push_back(d < t.rank() ? static_cast<float>(t.dim(d)) : kPad);
  }
  out.push_back(static_cast<float>(t.numel()));
  out.push_back(kSep);

  out.push_back(t.dtype() == DType::Int ? 1.0f : 0.0f);
  out.push_back(t.dtype() == DType::Bool ? 1.0f : 0.0f);
  out.push_back(0.0f);
  out.push_back(kSep);
}

EncodedSpec encode_spec(const std::vector<SpecInput>& inputs, const Tensor& output) {
  if (inputs.size() > 3) {
    fail(ErrKind::ValueError, "at most 3 input slots, got " + std::to_string(inputs.size()));
  }
  EncodedSpec out;
  out.reserve(kSpecLen);
  for (const SpecInput& in : inputs) {
    if (std::holds_alternative<MaskedSlot>(in)) {
      append_dummy_segment(out, true);
    } else {
      encode_tensor_segment(std::get<Tensor>(in), out);
    }
  }
  for (std::size_t i = inputs.size(); i < 3; ++i) append_dummy_segment(out, false);
  encode_tensor_segment(output, out);
  return out;
}

}  // namespace tsynth
