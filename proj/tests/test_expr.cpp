#include <doctest.h>

#include <vector>

#include "tsynth/error.hpp"
#include "tsynth/expr.hpp"

using namespace tsynth;

namespace {

Tensor ints(std::vector<std::int64_t> shape, std::vector<std::int64_t> data) {
  return Tensor(DType::Int, std::move(shape), std::move(data));
}

}  // namespace

TEST_CASE("leaf costs") {
  CHECK(Expr::input(0)->cost() == 4);
  CHECK(Expr::int_lit(-1)->cost() == 4);
}

TEST_CASE("call cost adds op, args, and literals") {
  // stack((in1, in1), 2): 4 + 4 + 36 + one axis literal = 48.
  ExprPtr e = Expr::call(OpCode::Stack, {Expr::input(0), Expr::input(0)},
                         {{ParamKind::Axis, {2}}});
  CHECK(e->cost() == 48);

  ExprPtr sq = Expr::call(OpCode::Unsqueeze, {Expr::input(1)}, {{ParamKind::Axis, {1}}});
  CHECK(sq->cost() == 4 + 20 + 4);
  ExprPtr m = Expr::call(OpCode::Mul, {Expr::input(0), sq}, {});
  CHECK(m->cost() == 4 + 28 + 20);

  // A shape tuple weighs 4 per entry.
  ExprPtr ex = Expr::call(OpCode::Expand, {Expr::input(0)},
                          {{ParamKind::ShapeTuple, {2, 3, 2}}});
  CHECK(ex->cost() == 4 + 28 + 12);
}

TEST_CASE("recompute_cost agrees with the stored cost") {
  CostTable t = CostTable::preset();
  ExprPtr e = parse_expr("add(in3, matmul(in1, in2))");
  CHECK(recompute_cost(*e, t) == e->cost());
  ExprPtr f = parse_expr("where(lt(in1, 1), in1, 1)");
  CHECK(recompute_cost(*f, t) == f->cost());
  CHECK(f->cost() == 28 + (20 + 4 + 4) + 4 + 4);
}

TEST_CASE("render prints the surface syntax") {
  CHECK(render(*Expr::call(OpCode::Stack, {Expr::input(0), Expr::input(0)},
                           {{ParamKind::Axis, {2}}})) == "stack((in1, in1), 2)");
  CHECK(render(*Expr::call(OpCode::Expand, {Expr::input(0)},
                           {{ParamKind::ShapeTuple, {2, 3, 2}}})) == "expand(in1, (2, 3, 2))");
  CHECK(render(*Expr::call(OpCode::Transpose, {Expr::input(2)},
                           {{ParamKind::AxisPair, {0, 2}}})) == "transpose(in3, 0, 2)");
  CHECK(render(*Expr::int_lit(-1)) == "-1");
}

TEST_CASE("parse inverts render on the benchmark programs") {
  const char* programs[] = {
      "transpose(expand(in1, (2, 3, 2)), 0, 2)",
      "where(lt(in1, 1), in1, 1)",
      "tensordot(in1, in2)",
      "eq(in1, unsqueeze(in1, 1))",
      "transpose(in1, 0, 1)",
      "masked_select(in2, gt(in1, 1))",
      "bincount(in1)",
      "transpose(matmul(in1, in2), 0, 1)",
      "any(in1, -1)",
      "mul(in1, ne(in1, 1))",
      "mul(in1, unsqueeze(in2, 1))",
      "stack((in1, in1), 1)",
      "add(in3, matmul(in1, in2))",
      "mul(in1, in1)",
      "eq(in1, in2)",
  };
  for (const char* p : programs) {
    ExprPtr e = parse_expr(p);
    CHECK(render(*e) == p);
    ExprPtr again = parse_expr(render(*e));
    CHECK(again->equals(*e));
    CHECK(again->cost() == e->cost());
  }
}

TEST_CASE("parse rejects malformed programs") {
  CHECK_THROWS_AS(parse_expr("frobnicate(in1)"), Error);
  CHECK_THROWS_AS(parse_expr("add(in1"), Error);
  CHECK_THROWS_AS(parse_expr("add(in1, in2) trailing"), Error);
  CHECK_THROWS_AS(parse_expr("in4"), Error);
  CHECK_THROWS_AS(parse_expr("unsqueeze(in1)"), Error);
  CHECK_THROWS_AS(parse_expr("stack(in1, in1, 2)"), Error);
}

TEST_CASE("evaluate threads inputs positionally") {
  ExprPtr e = parse_expr("mul(in1, unsqueeze(in2, 1))");
  std::vector<Tensor> inputs = {ints({3, 2}, {2, 5, 3, 0, 8, 7}), ints({3}, {4, 10, 6})};
  CHECK(evaluate(*e, inputs) == ints({3, 2}, {8, 20, 30, 0, 48, 42}));

  ExprPtr lit = parse_expr("add(in1, 10)");
  CHECK(evaluate(*lit, std::vector<Tensor>{Tensor::scalar(1)}) == Tensor::scalar(11));
}

TEST_CASE("evaluate names the failing subexpression") {
  ExprPtr e = parse_expr("add(in1, bincount(in2))");
  std::vector<Tensor> inputs = {Tensor::scalar(1), ints({2}, {1, -3})};
  try {
    evaluate(*e, inputs);
    FAIL("expected a throw");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrKind::ValueError);
    CHECK(std::string(err.what()).find("bincount(in2)") != std::string::npos);
  }
}

TEST_CASE("evaluate rejects out-of-range input references") {
  ExprPtr e = parse_expr("add(in1, in2)");
  CHECK_THROWS_AS(evaluate(*e, std::vector<Tensor>{Tensor::scalar(1)}), Error);
}

TEST_CASE("ops_used walks in first-use order") {
  ExprPtr e = parse_expr("add(in3, matmul(in1, in2))");
  std::vector<OpCode> used = ops_used(*e);
  REQUIRE(used.size() == 2);
  CHECK(used[0] == OpCode::Matmul);
  CHECK(used[1] == OpCode::Add);

  ExprPtr f = parse_expr("mul(in1, ne(in1, 1))");
  used = ops_used(*f);
  REQUIRE(used.size() == 2);
  CHECK(used[0] == OpCode::Ne);
  CHECK(used[1] == OpCode::Mul);

  CHECK(ops_used(*Expr::input(0)).empty());
}

TEST_CASE("equals compares structurally") {
  ExprPtr a = parse_expr("eq(in1, unsqueeze(in1, 1))");
  ExprPtr b = parse_expr("eq(in1, unsqueeze(in1, 1))");
  ExprPtr c = parse_expr("eq(in1, unsqueeze(in1, 0))");
  ExprPtr d = parse_expr("eq(in2, unsqueeze(in1, 1))");
  CHECK(a->equals(*b));
  CHECK(!a->equals(*c));
  CHECK(!a->equals(*d));
}
