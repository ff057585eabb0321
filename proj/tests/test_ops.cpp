#include <doctest.h>

#include <vector>

#include "tsynth/error.hpp"
#include "tsynth/ops.hpp"
#include "tsynth/rng.hpp"

using namespace tsynth;

namespace {

Tensor ints(std::vector<std::int64_t> shape, std::vector<std::int64_t> data) {
  return Tensor(DType::Int, std::move(shape), std::move(data));
}

Tensor bools(std::vector<std::int64_t> shape, std::vector<std::int64_t> data) {
  return Tensor(DType::Bool, std::move(shape), std::move(data));
}

Tensor run(OpCode op, std::vector<Tensor> args, std::vector<Literal> params = {}) {
  return apply(op, args, params);
}

Literal axis(std::int64_t d) { return {ParamKind::Axis, {d}}; }
Literal axes(std::int64_t d0, std::int64_t d1) { return {ParamKind::AxisPair, {d0, d1}}; }
Literal shape_of(std::vector<std::int64_t> dims) { return {ParamKind::ShapeTuple, std::move(dims)}; }

ErrKind kind_of(OpCode op, std::vector<Tensor> args, std::vector<Literal> params = {}) {
  try {
    apply(op, args, params);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a throw");
  return ErrKind::ValueError;
}

}  // namespace

TEST_CASE("registry holds the 16 core ops in name order") {
  const OpRegistry& reg = OpRegistry::core16();
  REQUIRE(reg.size() == kNumCoreOps);
  std::vector<std::string> names = reg.names();
  for (size_t i = 1; i < names.size(); ++i) CHECK(names[i - 1] < names[i]);
  CHECK(reg.id_of("add") == 0);
  CHECK(reg.id_of("where") == 15);
  CHECK(reg.id_of("softmax") == -1);
  CHECK(op_code_of("tensordot") == OpCode::Tensordot);
  CHECK_THROWS_AS(op_code_of("bogus"), Error);
}

TEST_CASE("registry subset keeps order and changes the fingerprint") {
  const OpRegistry& reg = OpRegistry::core16();
  std::vector<std::string> keep = {"add", "eq", "lt", "mul", "ne", "unsqueeze", "where", "matmul"};
  OpRegistry sub = reg.subset(keep);
  REQUIRE(sub.size() == 8);
  std::vector<std::string> names = sub.names();
  for (size_t i = 1; i < names.size(); ++i) CHECK(names[i - 1] < names[i]);
  CHECK(sub.id_of("mul") >= 0);
  CHECK(sub.id_of("stack") == -1);
  CHECK(sub.fingerprint() != reg.fingerprint());
}

TEST_CASE("preset costs match the table") {
  CHECK(op_info(OpCode::Add).preset_cost == 20);
  CHECK(op_info(OpCode::Transpose).preset_cost == 20);
  CHECK(op_info(OpCode::Bincount).preset_cost == 28);
  CHECK(op_info(OpCode::Where).preset_cost == 28);
  CHECK(op_info(OpCode::Stack).preset_cost == 36);
  CHECK(op_info(OpCode::Tensordot).preset_cost == 36);
}

TEST_CASE("add broadcasts and keeps int dtype") {
  CHECK(run(OpCode::Add, {ints({2}, {1, 2}), Tensor::scalar(10)}) == ints({2}, {11, 12}));
  CHECK(run(OpCode::Add, {ints({2, 1}, {1, 2}), ints({3}, {10, 20, 30})}) ==
        ints({2, 3}, {11, 21, 31, 12, 22, 32}));
  CHECK(run(OpCode::Add, {ints({2}, {1, 2}), bools({2}, {0, 1})}) == ints({2}, {1, 3}));
  CHECK(kind_of(OpCode::Add, {bools({1}, {1}), bools({1}, {1})}) == ErrKind::DtypeMismatch);
  CHECK(kind_of(OpCode::Add, {ints({2}, {1, 2}), ints({3}, {1, 2, 3})}) == ErrKind::ShapeMismatch);
}

TEST_CASE("mul squares a matrix elementwise") {
  Tensor in1 = ints({3, 4}, {15, 10, 9, 20, 11, 0, 1, 9, 10, 1, 11, 25});
  CHECK(run(OpCode::Mul, {in1, in1}) ==
        ints({3, 4}, {225, 100, 81, 400, 121, 0, 1, 81, 100, 1, 121, 625}));
}

TEST_CASE("mul by a bool mask zeroes entries and stays int") {
  Tensor v = ints({9}, {3, 1, 2, 0, 1, 0, 10, 1, 0});
  Tensor keep = run(OpCode::Ne, {v, Tensor::scalar(1)});
  CHECK(keep == bools({9}, {1, 0, 1, 1, 0, 1, 1, 0, 1}));
  CHECK(run(OpCode::Mul, {v, keep}) == ints({9}, {3, 0, 2, 0, 0, 0, 10, 0, 0}));
  CHECK(run(OpCode::Mul, {bools({2}, {1, 0}), bools({2}, {1, 1})}) == bools({2}, {1, 0}));
}

TEST_CASE("comparisons give bool under broadcasting") {
  Tensor in1 = ints({7}, {4, 6, 2, 6, 7, 3, 3});
  CHECK(run(OpCode::Eq, {in1, Tensor::scalar(7)}) == bools({7}, {0, 0, 0, 0, 1, 0, 0}));
  CHECK(run(OpCode::Lt, {ints({3}, {5, 1, 0}), Tensor::scalar(1)}) == bools({3}, {0, 0, 1}));
  CHECK(run(OpCode::Gt, {ints({4}, {1, 0, 2, 5}), Tensor::scalar(1)}) == bools({4}, {0, 0, 1, 1}));
  CHECK(run(OpCode::Eq, {bools({2}, {1, 0}), ints({2}, {1, 1})}) == bools({2}, {1, 0}));
}

TEST_CASE("eq against an unsqueezed copy yields the pairwise-equality matrix") {
  Tensor in1 = ints({7}, {3, 5, 0, 2, 3, 3, 0});
  Tensor col = run(OpCode::Unsqueeze, {in1}, {axis(1)});
  CHECK(col == ints({7, 1}, {3, 5, 0, 2, 3, 3, 0}));
  Tensor m = run(OpCode::Eq, {in1, col});
  CHECK(m == bools({7, 7}, {1, 0, 0, 0, 1, 1, 0,
                            0, 1, 0, 0, 0, 0, 0,
                            0, 0, 1, 0, 0, 0, 1,
                            0, 0, 0, 1, 0, 0, 0,
                            1, 0, 0, 0, 1, 1, 0,
                            1, 0, 0, 0, 1, 1, 0,
                            0, 0, 1, 0, 0, 0, 1}));
}

TEST_CASE("any reduces one axis to bool") {
  Tensor in1 = ints({7, 3}, {0, 0, 1, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0});
  CHECK(run(OpCode::Any, {in1}, {axis(-1)}) == bools({7}, {1, 0, 1, 1, 0, 1, 1}));
  CHECK(run(OpCode::Any, {Tensor::scalar(5)}, {axis(0)}) == Tensor::scalar(1, DType::Bool));
  CHECK(run(OpCode::Any, {Tensor::scalar(0)}, {axis(-1)}) == Tensor::scalar(0, DType::Bool));
  CHECK(kind_of(OpCode::Any, {in1}, {axis(2)}) == ErrKind::AxisOutOfRange);
}

TEST_CASE("bincount counts values up to the max") {
  CHECK(run(OpCode::Bincount, {ints({11}, {4, 0, 1, 1, 0, 4, 0, 0, 3, 4, 1})}) ==
        ints({5}, {4, 3, 0, 1, 3}));
  CHECK(run(OpCode::Bincount, {ints({1}, {0})}) == ints({1}, {1}));
  CHECK(kind_of(OpCode::Bincount, {ints({2, 2}, {1, 1, 1, 1})}) == ErrKind::ShapeMismatch);
  CHECK(kind_of(OpCode::Bincount, {ints({2}, {1, -1})}) == ErrKind::ValueError);
  CHECK(kind_of(OpCode::Bincount, {bools({2}, {1, 0})}) == ErrKind::DtypeMismatch);
}

TEST_CASE("expand replicates leading and 1-extent dims") {
  Tensor in1 = ints({3, 2}, {5, 2, 1, 3, 0, -1});
  CHECK(run(OpCode::Expand, {in1}, {shape_of({2, 3, 2})}) ==
        ints({2, 3, 2}, {5, 2, 1, 3, 0, -1, 5, 2, 1, 3, 0, -1}));
  CHECK(run(OpCode::Expand, {ints({1, 2}, {4, 7})}, {shape_of({3, 2})}) ==
        ints({3, 2}, {4, 7, 4, 7, 4, 7}));
  CHECK(kind_of(OpCode::Expand, {in1}, {shape_of({2})}) == ErrKind::ShapeMismatch);
  CHECK(kind_of(OpCode::Expand, {in1}, {shape_of({3, 4})}) == ErrKind::ShapeMismatch);
}

TEST_CASE("masked_select flattens the broadcast survivors in row-major order") {
  Tensor flags = ints({11}, {1, 0, 0, 2, 1, 3, 5, 0, 1, 2, 10});
  Tensor vals = ints({11}, {12, 3, 45, 6, 7, 8, 9, 87, 65, 4, 32});
  Tensor mask = run(OpCode::Gt, {flags, Tensor::scalar(1)});
  CHECK(run(OpCode::MaskedSelect, {vals, mask}) == ints({5}, {6, 8, 9, 4, 32}));
  CHECK(run(OpCode::MaskedSelect, {ints({2, 2}, {1, 2, 3, 4}), bools({2}, {0, 1})}) ==
        ints({2}, {2, 4}));
  CHECK(kind_of(OpCode::MaskedSelect, {vals, flags}) == ErrKind::DtypeMismatch);
  CHECK(kind_of(OpCode::MaskedSelect, {vals, bools({11}, std::vector<std::int64_t>(11, 0))}) ==
        ErrKind::ValueError);
}

TEST_CASE("matmul covers vector, matrix, and batch forms") {
  CHECK(run(OpCode::Matmul, {ints({3}, {1, 2, 3}), ints({3}, {4, 5, 6})}) == Tensor::scalar(32));
  CHECK(run(OpCode::Matmul, {ints({2, 2}, {1, 2, 3, 4}), ints({2}, {5, 6})}) ==
        ints({2}, {17, 39}));
  CHECK(run(OpCode::Matmul, {ints({2}, {5, 6}), ints({2, 2}, {1, 2, 3, 4})}) ==
        ints({2}, {23, 34}));
  Tensor a = ints({2, 2}, {3, 5, 10, 2});
  Tensor b = ints({2, 2, 2}, {1, 0, 5, 4, 3, 10, 2, 0});
  CHECK(run(OpCode::Matmul, {a, b}) == ints({2, 2, 2}, {28, 20, 20, 8, 19, 30, 34, 100}));
  CHECK(kind_of(OpCode::Matmul, {ints({3}, {1, 2, 3}), ints({2}, {1, 2})}) ==
        ErrKind::ShapeMismatch);
  CHECK(kind_of(OpCode::Matmul, {bools({2}, {1, 0}), ints({2}, {1, 2})}) ==
        ErrKind::DtypeMismatch);
  CHECK(kind_of(OpCode::Matmul, {Tensor::scalar(2), ints({2}, {1, 2})}) == ErrKind::ShapeMismatch);
}

TEST_CASE("tensordot contracts last axis against first") {
  CHECK(run(OpCode::Tensordot, {ints({3}, {3, 1, 10}), ints({3, 2}, {6, 4, 5, 1, 3, 4})}) ==
        ints({2}, {53, 53}));
  CHECK(run(OpCode::Tensordot,
            {ints({2, 3}, {4, 3, 1, 6, 5, 2}),
             ints({3, 1, 2}, {5, 5, 1, 5, 6, 0})}) == ints({2, 1, 2}, {29, 35, 47, 55}));
  Tensor in1 = ints({2, 2, 3}, {10, 20, 30, 40, 50, 60, 12, 34, 56, 78, 98, 76});
  CHECK(run(OpCode::Tensordot, {in1, ints({3}, {5, 10, 20})}) ==
        ints({2, 2}, {850, 1900, 1520, 2890}));
  Tensor in2 = ints({3, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8, 10, 20, 30, 40});
  CHECK(run(OpCode::Tensordot, {ints({3}, {3, 5, 10}), in2}) ==
        ints({2, 2}, {128, 236, 344, 452}));
  CHECK(kind_of(OpCode::Tensordot, {ints({2, 2}, {1, 1, 1, 1}), ints({3}, {1, 2, 3})}) ==
        ErrKind::ShapeMismatch);
  CHECK(kind_of(OpCode::Tensordot,
                {ints({2, 2, 2}, {1, 1, 1, 1, 1, 1, 1, 1}),
                 ints({2, 2, 2}, {1, 1, 1, 1, 1, 1, 1, 1})}) == ErrKind::RankOverflow);
  CHECK(kind_of(OpCode::Tensordot, {Tensor::scalar(1), ints({2}, {1, 2})}) ==
        ErrKind::ShapeMismatch);
}

TEST_CASE("stack interleaves two equal tensors along a new axis") {
  Tensor v = ints({3}, {17, 32, 99});
  CHECK(run(OpCode::Stack, {v, v}, {axis(1)}) == ints({3, 2}, {17, 17, 32, 32, 99, 99}));
  CHECK(run(OpCode::Stack, {v, ints({3}, {1, 2, 3})}, {axis(0)}) ==
        ints({2, 3}, {17, 32, 99, 1, 2, 3}));
  CHECK(run(OpCode::Stack, {Tensor::scalar(4), Tensor::scalar(9)}, {axis(0)}) ==
        ints({2}, {4, 9}));
  CHECK(kind_of(OpCode::Stack, {v, ints({2}, {1, 2})}, {axis(0)}) == ErrKind::ShapeMismatch);
  CHECK(kind_of(OpCode::Stack, {v, bools({3}, {1, 0, 1})}, {axis(0)}) == ErrKind::DtypeMismatch);
  Tensor cube = ints({1, 1, 1}, {5});
  CHECK(kind_of(OpCode::Stack, {cube, cube}, {axis(0)}) == ErrKind::RankOverflow);
  CHECK(kind_of(OpCode::Stack, {v, v}, {axis(2)}) == ErrKind::AxisOutOfRange);
}

TEST_CASE("transpose swaps two axes") {
  Tensor in1 = ints({4, 2, 3}, {8, 4, 6, 2, 12, 3, 11, 12, 5, 9, 12, 12,
                                9, 2, 13, 7, 0, 7, 2, 10, 5, 7, 1, 2});
  CHECK(run(OpCode::Transpose, {in1}, {axes(0, 1)}) ==
        ints({2, 4, 3}, {8, 4, 6, 11, 12, 5, 9, 2, 13, 2, 10, 5,
                         2, 12, 3, 9, 12, 12, 7, 0, 7, 7, 1, 2}));
  CHECK(run(OpCode::Transpose, {ints({2, 3}, {1, 2, 3, 4, 5, 6})}, {axes(1, 0)}) ==
        ints({3, 2}, {1, 4, 2, 5, 3, 6}));
  CHECK(run(OpCode::Transpose, {Tensor::scalar(3)}, {axes(0, -1)}) == Tensor::scalar(3));
  CHECK(run(OpCode::Transpose, {in1}, {axes(2, 2)}) == in1);
  CHECK(kind_of(OpCode::Transpose, {in1}, {axes(0, 3)}) == ErrKind::AxisOutOfRange);
}

TEST_CASE("unsqueeze inserts a 1-extent axis") {
  Tensor v = ints({3}, {4, 10, 6});
  CHECK(run(OpCode::Unsqueeze, {v}, {axis(0)}) == ints({1, 3}, {4, 10, 6}));
  CHECK(run(OpCode::Unsqueeze, {v}, {axis(1)}) == ints({3, 1}, {4, 10, 6}));
  CHECK(run(OpCode::Unsqueeze, {v}, {axis(-1)}) == ints({3, 1}, {4, 10, 6}));
  CHECK(run(OpCode::Unsqueeze, {Tensor::scalar(2)}, {axis(0)}) == ints({1}, {2}));
  Tensor cube = ints({1, 1, 1}, {5});
  CHECK(kind_of(OpCode::Unsqueeze, {cube}, {axis(0)}) == ErrKind::RankOverflow);
  CHECK(kind_of(OpCode::Unsqueeze, {v}, {axis(2)}) == ErrKind::AxisOutOfRange);
}

TEST_CASE("where selects by a bool condition") {
  Tensor in1 = ints({9}, {5, 1, 0, 3, 0, 0, 2, 0, 2});
  Tensor cond = run(OpCode::Lt, {in1, Tensor::scalar(1)});
  CHECK(run(OpCode::Where, {cond, in1, Tensor::scalar(1)}) ==
        ints({9}, {1, 1, 0, 1, 0, 0, 1, 0, 1}));
  CHECK(run(OpCode::Where, {bools({2}, {1, 0}), bools({2}, {1, 1}), bools({2}, {0, 0})}) ==
        bools({2}, {1, 0}));
  CHECK(run(OpCode::Where, {bools({2}, {1, 0}), bools({2}, {1, 1}), Tensor::scalar(5)}) ==
        ints({2}, {1, 5}));
  CHECK(kind_of(OpCode::Where, {in1, in1, in1}) == ErrKind::DtypeMismatch);
}

TEST_CASE("call shape validation rejects wrong arity and literals") {
  Tensor v = ints({2}, {1, 2});
  CHECK(kind_of(OpCode::Add, {v}) == ErrKind::ValueError);
  CHECK(kind_of(OpCode::Unsqueeze, {v}) == ErrKind::ValueError);
  CHECK(kind_of(OpCode::Unsqueeze, {v}, {axes(0, 1)}) == ErrKind::ValueError);
  CHECK(kind_of(OpCode::Expand, {v}, {{ParamKind::ShapeTuple, {}}}) == ErrKind::ValueError);
  CHECK(kind_of(OpCode::Expand, {v}, {{ParamKind::ShapeTuple, {1, 2, 3, 4}}}) ==
        ErrKind::ValueError);
}

TEST_CASE("apply limits cap result size and arithmetic magnitude") {
  ApplyLimits tight;
  tight.max_numel = 10;
  Tensor big = ints({4}, {1, 2, 3, 4});
  Tensor col = ints({4, 1}, {1, 2, 3, 4});
  CHECK_NOTHROW(apply(OpCode::Add, std::vector<Tensor>{big, big}, {}, tight));
  try {
    apply(OpCode::Add, std::vector<Tensor>{col, big}, {}, tight);
    FAIL("expected SizeLimit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::SizeLimit);
  }

  ApplyLimits ext;
  ext.max_extent = 3;
  try {
    apply(OpCode::Expand, std::vector<Tensor>{ints({1}, {7})},
          std::vector<Literal>{shape_of({4})}, ext);
    FAIL("expected SizeLimit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::SizeLimit);
  }

  Tensor huge = Tensor::scalar(kMaxArithValue + 1);
  CHECK(kind_of(OpCode::Mul, {huge, huge}) == ErrKind::ValueError);
  CHECK(kind_of(OpCode::Matmul, {ints({1}, {kMaxArithValue + 1}), ints({1}, {2})}) ==
        ErrKind::ValueError);
}

TEST_CASE("try_apply reports the failure reason without throwing") {
  std::string why;
  CHECK(!try_apply(OpCode::Add, std::vector<Tensor>{bools({1}, {1}), bools({1}, {1})}, {}, {},
                   &why));
  CHECK(why.find("bool") != std::string::npos);
  auto ok = try_apply(OpCode::Add, std::vector<Tensor>{Tensor::scalar(1), Tensor::scalar(2)}, {});
  REQUIRE(ok.has_value());
  CHECK(*ok == Tensor::scalar(3));
}

TEST_CASE("broadcast_shape follows trailing alignment") {
  using V = std::vector<std::int64_t>;
  CHECK(broadcast_shape(V{2, 3}, V{3}) == V{2, 3});
  CHECK(broadcast_shape(V{}, V{4}) == V{4});
  CHECK(broadcast_shape(V{2, 1, 3}, V{5, 3}) == V{2, 5, 3});
  CHECK_THROWS_AS(broadcast_shape(V{2}, V{3}), Error);
}

// Oracle: materialize both operands to the full broadcast shape by explicit
// index arithmetic, then combine elementwise.
TEST_CASE("broadcast binary ops agree with materialized operands") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto sample_shape = [&](int rank) {
      std::vector<std::int64_t> s;
      for (int i = 0; i < rank; ++i) s.push_back(rng.uniform(1, 4));
      return s;
    };
    int rank_a = static_cast<int>(rng.uniform(0, 3));
    std::vector<std::int64_t> sa = sample_shape(rank_a);
    // Derive b's shape from a's so most pairs broadcast; degrade some dims to 1.
    int rank_b = static_cast<int>(rng.uniform(0, 3));
    std::vector<std::int64_t> sb = sample_shape(rank_b);
    for (size_t i = 0; i < sb.size() && i < sa.size(); ++i) {
      size_t ia = sa.size() - 1 - i;
      size_t ib = sb.size() - 1 - i;
      sb[ib] = rng.chance(0.3) ? 1 : sa[ia];
    }
    auto fill = [&](const std::vector<std::int64_t>& s) {
      std::int64_t n = 1;
      for (auto d : s) n *= d;
      std::vector<std::int64_t> data;
      for (std::int64_t i = 0; i < n; ++i) data.push_back(rng.uniform(-5, 20));
      return Tensor(DType::Int, s, data);
    };
    Tensor a = fill(sa);
    Tensor b = fill(sb);

    std::vector<std::int64_t> out_shape;
    try {
      out_shape = broadcast_shape(a.shape(), b.shape());
    } catch (const Error&) {
      continue;
    }
    std::int64_t out_n = 1;
    for (auto d : out_shape) out_n *= d;

    auto at = [&](const Tensor& t, std::int64_t flat) {
      std::vector<std::int64_t> idx(out_shape.size());
      for (size_t i = out_shape.size(); i-- > 0;) {
        idx[i] = flat % out_shape[i];
        flat /= out_shape[i];
      }
      std::int64_t off = 0, stride = 1;
      for (size_t i = t.shape().size(); i-- > 0;) {
        std::int64_t d = t.shape()[i];
        std::int64_t pos = idx[i + out_shape.size() - t.shape().size()];
        off += (d == 1 ? 0 : pos) * stride;
        stride *= d;
      }
      return t.data()[static_cast<size_t>(off)];
    };

    Tensor got = run(OpCode::Add, {a, b});
    REQUIRE(got.shape() == out_shape);
    for (std::int64_t i = 0; i < out_n; ++i) {
      REQUIRE(got.data()[static_cast<size_t>(i)] == at(a, i) + at(b, i));
    }
  }
}

TEST_CASE("apply is pure") {
  Tensor a = ints({2, 2}, {1, 2, 3, 4});
  Tensor b = ints({2}, {5, 6});
  Tensor first = run(OpCode::Add, {a, b});
  Tensor second = run(OpCode::Add, {a, b});
  CHECK(first == second);
  CHECK(a == ints({2, 2}, {1, 2, 3, 4}));
  CHECK(b == ints({2}, {5, 6}));
}
