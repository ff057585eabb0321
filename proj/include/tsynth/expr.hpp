#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsynth/costs.hpp"
#include "tsynth/ops.hpp"
#include "tsynth/tensor.hpp"

namespace tsynth {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression tree. Leaves reference a task input (in1..in3) or an
// integer constant that evaluates to a rank-0 Int tensor. Calls hold their
// tensor arguments plus literal parameters. Cost is fixed at build time from
// the table in effect, so shared subtrees keep a consistent price.
class Expr {
 public:
  enum class Kind { Input, IntLit, Call };

  static ExprPtr input(int index);
  static ExprPtr int_lit(std::int64_t v);
  static ExprPtr call(OpCode op, std::vector<ExprPtr> args,
                      std::vector<Literal> params,
                      const CostTable& costs = CostTable::preset());

  Kind kind() const { return kind_; }
  int cost() const { return cost_; }

  int input_index() const { return input_index_; }    // Kind::Input
  std::int64_t lit_value() const { return lit_value_; }  // Kind::IntLit
  OpCode op() const { return op_; }                   // Kind::Call
  const std::vector<ExprPtr>& args() const { return args_; }
  const std::vector<Literal>& params() const { return params_; }

  bool equals(const Expr& o) const;

 private:
  Expr() = default;

  Kind kind_ = Kind::IntLit;
  int cost_ = 0;
  int input_index_ = -1;
  std::int64_t lit_value_ = 0;
  OpCode op_ = OpCode::Add;
  std::vector<ExprPtr> args_;
  std::vector<Literal> params_;
};

// Evaluates against positional inputs. Pure; op failures are rethrown with
// the failing subexpression appended to the message.
Tensor evaluate(const Expr& e, std::span<const Tensor> inputs,
                const ApplyLimits& lim = {});

// Surface syntax, e.g. "eq(in1, unsqueeze(in1, 1))". stack prints its pair
// of tensor args as an inner tuple: "stack((in1, in1), 2)"; expand prints
// its target shape the same way: "expand(in1, (2, 3, 2))".
std::string render(const Expr& e);

// Inverse of render. Costs attach from the preset table.
ExprPtr parse_expr(std::string_view text);

// Ops used anywhere in the tree, in first-use order.
std::vector<OpCode> ops_used(const Expr& e);

// Recomputes the additive cost bottom-up; test oracle for cost bookkeeping.
int recompute_cost(const Expr& e, const CostTable& costs);

}  // namespace tsynth
