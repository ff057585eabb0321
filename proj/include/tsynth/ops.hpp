#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsynth/tensor.hpp"

namespace tsynth {

// The registered operations, in registry order.
enum class OpCode {
  Add,
  Any,
  Bincount,
  Eq,
  Expand,
  Gt,
  Lt,
  MaskedSelect,
  Matmul,
  Mul,
  Ne,
  Stack,
  Tensordot,
  Transpose,
  Unsqueeze,
  Where,
};

inline constexpr int kNumCoreOps = 16;

// Non-tensor argument kinds an op can require, in schema order.
enum class ParamKind { Axis, AxisPair, ScalarInt, ShapeTuple };

// A concrete non-tensor argument. Axis and ScalarInt carry one int,
// AxisPair two, ShapeTuple one to three.
struct Literal {
  ParamKind kind;
  std::vector<std::int64_t> ints;

  bool operator==(const Literal& o) const {
    return kind == o.kind && ints == o.ints;
  }
};

struct OpInfo {
  OpCode code;
  std::string name;
  int arity;  // tensor slots
  std::vector<ParamKind> params;
  int preset_cost;
};

// Ordered op table. core16() is the full built-in registry; subset() narrows
// it (model label spaces train against subsets). Ops are addressed by dense
// ids local to a registry; OpCode stays global.
class OpRegistry {
 public:
  static const OpRegistry& core16();
  OpRegistry subset(std::span<const std::string> names) const;

  int size() const { return static_cast<int>(ops_.size()); }
  const OpInfo& op(int id) const { return ops_[static_cast<size_t>(id)]; }
  const OpInfo& info(OpCode code) const;
  int id_of(std::string_view name) const;  // -1 when absent
  std::vector<std::string> names() const;

  // FNV-1a over the ordered op names; pins a trained model to its label space.
  std::uint64_t fingerprint() const;

 private:
  OpRegistry() = default;
  explicit OpRegistry(std::vector<OpInfo> ops) : ops_(std::move(ops)) {}

  std::vector<OpInfo> ops_;
};

const OpInfo& op_info(OpCode code);
OpCode op_code_of(std::string_view name);  // throws ParseError when unknown

// Evaluation guards. max_extent 0 means uncapped; max_numel always applies.
// Arithmetic refuses operands above kMaxArithValue so products and inner
// sums stay inside int64.
struct ApplyLimits {
  std::int64_t max_extent = 0;
  std::int64_t max_numel = 1'000'000;
};

inline constexpr std::int64_t kMaxArithValue = 10'000'000;

// Executes one op. Pure; throws Error on any invalid combination.
Tensor apply(OpCode op, std::span<const Tensor> args,
             std::span<const Literal> params, const ApplyLimits& lim = {});

// Non-throwing variant for candidate-heavy paths. Returns nullopt and fills
// *why (when given) instead of throwing.
std::optional<Tensor> try_apply(OpCode op, std::span<const Tensor> args,
                                std::span<const Literal> params,
                                const ApplyLimits& lim = {},
                                std::string* why = nullptr);

// Broadcast shape of two operands under trailing alignment, or throw.
std::vector<std::int64_t> broadcast_shape(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b);

}  // namespace tsynth
