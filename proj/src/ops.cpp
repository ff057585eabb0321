#include "tsynth/ops.hpp"

#include <algorithm>

#include "tsynth/error.hpp"

namespace tsynth {

const OpRegistry& OpRegistry::core16() {
  struct Row {
    OpCode code;
    const char* name;
    int arity;
    std::vector<ParamKind> params;
    int cost;
  };
  static const Row rows[] = {
      {OpCode::Add, "add", 2, {}, 20},
      {OpCode::Any, "any", 1, {ParamKind::Axis}, 20},
      {OpCode::Bincount, "bincount", 1, {}, 28},
      {OpCode::Eq, "eq", 2, {}, 20},
      {OpCode::Expand, "expand", 1, {ParamKind::ShapeTuple}, 28},
      {OpCode::Gt, "gt", 2, {}, 20},
      {OpCode::Lt, "lt", 2, {}, 20},
      {OpCode::MaskedSelect, "masked_select", 2, {}, 28},
      {OpCode::Matmul, "matmul", 2, {}, 28},
      {OpCode::Mul, "mul", 2, {}, 20},
      {OpCode::Ne, "ne", 2, {}, 20},
      {OpCode::Stack, "stack", 2, {ParamKind::Axis}, 36},
      {OpCode::Tensordot, "tensordot", 2, {}, 36},
      {OpCode::Transpose, "transpose", 1, {ParamKind::AxisPair}, 20},
      {OpCode::Unsqueeze, "unsqueeze", 1, {ParamKind::Axis}, 20},
      {OpCode::Where, "where", 3, {}, 28},
  };
  static const OpRegistry reg = [] {
    std::vector<OpInfo> ops;
    for (const Row& r : rows) {
      ops.push_back({r.code, r.name, r.arity, r.params, r.cost});
    }
    return OpRegistry(std::move(ops));
  }();
  return reg;
}

OpRegistry OpRegistry::subset(std::span<const std::string> names) const {
  for (const std::string& n : names) {
    if (id_of(n) < 0) fail(ErrKind::ParseError, "unknown op '" + n + "'");
  }
  // Keep registry order regardless of request order so a subset's dense ids
  // (a model's label space) never depend on caller bookkeeping.
  std::vector<OpInfo> picked;
  for (const OpInfo& o : ops_) {
    for (const std::string& n : names) {
      if (o.name == n) {
        picked.push_back(o);
        break;
      }
    }
  }
  OpRegistry out;
  out.ops_ = std::move(picked);
  return out;
}

const OpInfo& OpRegistry::info(OpCode code) const {
  for (const OpInfo& o : ops_) {
    if (o.code == code) return o;
  }
  fail(ErrKind::ParseError, "op not in registry");
}

int OpRegistry::id_of(std::string_view name) const {
  for (size_t i = 0; i < ops_.size(); ++i) {
    if (ops_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> OpRegistry::names() const {
  std::vector<std::string> out;
  for (const OpInfo& o : ops_) out.push_back(o.name);
  return out;
}

std::uint64_t OpRegistry::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const OpInfo& o : ops_) {
    for (char c : o.name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    h ^= 0x7c;
    h *= 1099511628211ull;
  }
  return h;
}

const OpInfo& op_info(OpCode code) { return OpRegistry::core16().info(code); }

OpCode op_code_of(std::string_view name) {
  int id = OpRegistry::core16().id_of(name);
  if (id < 0) fail(ErrKind::ParseError, "unknown op '" + std::string(name) + "'");
  return OpRegistry::core16().op(id).code;
}

// ---------------------------------------------------------------------------
// Interpreter

namespace {

using Shape = std::vector<std::int64_t>;

std::int64_t product(std::span<const std::int64_t> dims) {
  std::int64_t n = 1;
  for (std::int64_t d : dims) n *= d;
  return n;
}

// Element strides of a tensor viewed at `shape` under trailing alignment.
// Broadcast axes get stride 0.
std::vector<std::int64_t> view_strides(const Tensor& t, const Shape& shape) {
  std::vector<std::int64_t> own(static_cast<size_t>(t.rank()));
  std::int64_t s = 1;
  for (int a = t.rank() - 1; a >= 0; --a) {
    own[static_cast<size_t>(a)] = s;
    s *= t.dim(a);
  }
  std::vector<std::int64_t> out(shape.size(), 0);
  int off = static_cast<int>(shape.size()) - t.rank();
  for (int a = 0; a < t.rank(); ++a) {
    if (t.dim(a) != 1) out[static_cast<size_t>(a + off)] = own[static_cast<size_t>(a)];
  }
  return out;
}

// Odometer walk over `shape`, handing each callback the operands' flat offsets.
template <typename Fn>
void for_each_bc(const Shape& shape,
                 std::span<const std::vector<std::int64_t>> strides, Fn&& fn) {
  size_t r = shape.size();
  std::vector<std::int64_t> idx(r, 0);
  std::vector<std::int64_t> off(strides.size(), 0);
  std::int64_t n = product(shape);
  for (std::int64_t flat = 0;; ++flat) {
    fn(flat, std::span<const std::int64_t>(off));
    if (flat + 1 == n) break;
    for (size_t a = r; a-- > 0;) {
      ++idx[a];
      for (size_t t = 0; t < strides.size(); ++t) off[t] += strides[t][a];
      if (idx[a] < shape[a]) break;
      for (size_t t = 0; t < strides.size(); ++t) off[t] -= idx[a] * strides[t][a];
      idx[a] = 0;
    }
  }
}

void check_result_dims(const Shape& shape, const ApplyLimits& lim) {
  if (static_cast<int>(shape.size()) > Tensor::kMaxRank) {
    fail(ErrKind::RankOverflow, "result rank exceeds 3");
  }
  for (std::int64_t d : shape) {
    if (lim.max_extent > 0 && d > lim.max_extent) {
      fail(ErrKind::SizeLimit, "result extent exceeds cap");
    }
  }
  if (product(shape) > lim.max_numel) {
    fail(ErrKind::SizeLimit, "result size exceeds cap");
  }
}

void check_arith_range(const Tensor& t) {
  if (t.max_abs() > kMaxArithValue) {
    fail(ErrKind::ValueError, "operand magnitude too large for arithmetic");
  }
}

int wrap_axis(std::int64_t d, int rank, int extra = 0) {
  // Valid range is [-(rank+extra), rank+extra-1]; rank 0 admits {-1, 0}.
  int hi = rank + extra;
  int lo = -hi;
  if (hi == 0) { hi = 1; lo = -1; }
  if (d < lo || d >= hi) fail(ErrKind::AxisOutOfRange, "dim " + std::to_string(d));
  return d < 0 ? static_cast<int>(d) + hi : static_cast<int>(d);
}

Tensor elementwise2(const Tensor& a, const Tensor& b, DType out_dtype,
                    const ApplyLimits& lim, std::int64_t (*fn)(std::int64_t, std::int64_t)) {
  Shape shape = broadcast_shape(a.shape(), b.shape());
  check_result_dims(shape, lim);
  std::vector<std::int64_t> out(static_cast<size_t>(product(shape)));
  const std::vector<std::int64_t> strides[2] = {view_strides(a, shape),
                                                view_strides(b, shape)};
  for_each_bc(shape, strides, [&](std::int64_t flat, std::span<const std::int64_t> off) {
    out[static_cast<size_t>(flat)] =
        fn(a.data()[static_cast<size_t>(off[0])], b.data()[static_cast<size_t>(off[1])]);
  });
  return Tensor(out_dtype, std::move(shape), std::move(out));
}

Tensor op_add(const Tensor& a, const Tensor& b, const ApplyLimits& lim) {
  if (a.dtype() == DType::Bool && b.dtype() == DType::Bool) {
    fail(ErrKind::DtypeMismatch, "add of two bool tensors");
  }
  check_arith_range(a);
  check_arith_range(b);
  return elementwise2(a, b, DType::Int, lim,
                      [](std::int64_t x, std::int64_t y) { return x + y; });
}

Tensor op_mul(const Tensor& a, const Tensor& b, const ApplyLimits& lim) {
  check_arith_range(a);
  check_arith_range(b);
  DType out = (a.dtype() == DType::Bool && b.dtype() == DType::Bool)
                  ? DType::Bool
                  : DType::Int;
  return elementwise2(a, b, out, lim,
                      [](std::int64_t x, std::int64_t y) { return x * y; });
}

Tensor op_compare(OpCode op, const Tensor& a, const Tensor& b, const ApplyLimits& lim) {
  switch (op) {
    case OpCode::Eq:
      return elementwise2(a, b, DType::Bool, lim,
                          [](std::int64_t x, std::int64_t y) { return static_cast<std::int64_t>(x == y); });
    case OpCode::Ne:
      return elementwise2(a, b, DType::Bool, lim,
                          [](std::int64_t x, std::int64_t y) { return static_cast<std::int64_t>(x != y); });
    case OpCode::Gt:
      return elementwise2(a, b, DType::Bool, lim,
                          [](std::int64_t x, std::int64_t y) { return static_cast<std::int64_t>(x > y); });
    default:
      return elementwise2(a, b, DType::Bool, lim,
                          [](std::int64_t x, std::int64_t y) { return static_cast<std::int64_t>(x < y); });
  }
}

Tensor op_any(const Tensor& a, std::int64_t dim, const ApplyLimits& lim) {
  if (a.rank() == 0) {
    wrap_axis(dim, 0);
    return Tensor::scalar(a.data()[0] != 0 ? 1 : 0, DType::Bool);
  }
  int d = wrap_axis(dim, a.rank());
  Shape shape;
  for (int i = 0; i < a.rank(); ++i) {
    if (i != d) shape.push_back(a.dim(i));
  }
  check_result_dims(shape, lim);
  std::int64_t outer = 1, inner = 1;
  for (int i = 0; i < d; ++i) outer *= a.dim(i);
  for (int i = d + 1; i < a.rank(); ++i) inner *= a.dim(i);
  std::int64_t k = a.dim(d);
  std::vector<std::int64_t> out(static_cast<size_t>(outer * inner), 0);
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t j = 0; j < k; ++j) {
      const std::int64_t* src = a.data().data() + (o * k + j) * inner;
      std::int64_t* dst = out.data() + o * inner;
      for (std::int64_t i = 0; i < inner; ++i) {
        if (src[i] != 0) dst[i] = 1;
      }
    }
  }
  return Tensor(DType::Bool, std::move(shape), std::move(out));
}

Tensor op_bincount(const Tensor& a, const ApplyLimits& lim) {
  if (a.dtype() != DType::Int) fail(ErrKind::DtypeMismatch, "bincount needs int input");
  if (a.rank() != 1) fail(ErrKind::ShapeMismatch, "bincount needs a 1-D input");
  std::int64_t mx = 0;
  for (std::int64_t v : a.data()) {
    if (v < 0) fail(ErrKind::ValueError, "bincount needs non-negative values");
    mx = std::max(mx, v);
  }
  Shape shape{mx + 1};
  check_result_dims(shape, lim);
  std::vector<std::int64_t> out(static_cast<size_t>(mx + 1), 0);
  for (std::int64_t v : a.data()) ++out[static_cast<size_t>(v)];
  return Tensor(DType::Int, std::move(shape), std::move(out));
}

Tensor op_expand(const Tensor& a, const Literal& target, const ApplyLimits& lim) {
  Shape shape(target.ints.begin(), target.ints.end());
  if (static_cast<int>(shape.size()) > Tensor::kMaxRank) {
    fail(ErrKind::RankOverflow, "expand target rank exceeds 3");
  }
  for (std::int64_t d : shape) {
    if (d < 1) fail(ErrKind::ValueError, "expand target extent must be >= 1");
  }
  if (static_cast<int>(shape.size()) < a.rank()) {
    fail(ErrKind::ShapeMismatch, "expand cannot drop dims");
  }
  int off = static_cast<int>(shape.size()) - a.rank();
  for (int i = 0; i < a.rank(); ++i) {
    std::int64_t want = shape[static_cast<size_t>(i + off)];
    if (a.dim(i) != want && a.dim(i) != 1) {
      fail(ErrKind::ShapeMismatch, "expand target incompatible with source dim");
    }
  }
  check_result_dims(shape, lim);
  std::vector<std::int64_t> out(static_cast<size_t>(product(shape)));
  const std::vector<std::int64_t> strides[1] = {view_strides(a, shape)};
  for_each_bc(shape, strides, [&](std::int64_t flat, std::span<const std::int64_t> o) {
    out[static_cast<size_t>(flat)] = a.data()[static_cast<size_t>(o[0])];
  });
  return Tensor(a.dtype(), std::move(shape), std::move(out));
}

Tensor op_masked_select(const Tensor& a, const Tensor& mask, const ApplyLimits& lim) {
  if (mask.dtype() != DType::Bool) fail(ErrKind::DtypeMismatch, "mask must be bool");
  Shape shape = broadcast_shape(a.shape(), mask.shape());
  if (product(shape) > lim.max_numel) fail(ErrKind::SizeLimit, "broadcast too large");
  std::vector<std::int64_t> out;
  const std::vector<std::int64_t> strides[2] = {view_strides(a, shape),
                                                view_strides(mask, shape)};
  for_each_bc(shape, strides, [&](std::int64_t, std::span<const std::int64_t> off) {
    if (mask.data()[static_cast<size_t>(off[1])] != 0) {
      out.push_back(a.data()[static_cast<size_t>(off[0])]);
    }
  });
  if (out.empty()) fail(ErrKind::ValueError, "masked_select selected nothing");
  Shape rshape{static_cast<std::int64_t>(out.size())};
  check_result_dims(rshape, lim);
  return Tensor(a.dtype(), std::move(rshape), std::move(out));
}

// One (n,m)x(m,p) product into out, all operands dense row-major.
void mm_block(const std::int64_t* a, const std::int64_t* b, std::int64_t* out,
              std::int64_t n, std::int64_t m, std::int64_t p) {
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < p; ++j) {
      std::int64_t acc = 0;
      for (std::int64_t k = 0; k < m; ++k) acc += a[i * m + k] * b[k * p + j];
      out[i * p + j] = acc;
    }
  }
}

Tensor op_matmul(const Tensor& a, const Tensor& b, const ApplyLimits& lim) {
  if (a.dtype() == DType::Bool || b.dtype() == DType::Bool) {
    fail(ErrKind::DtypeMismatch, "matmul needs int operands");
  }
  if (a.rank() == 0 || b.rank() == 0) {
    fail(ErrKind::ShapeMismatch, "matmul needs rank >= 1 operands");
  }
  check_arith_range(a);
  check_arith_range(b);
  int ra = a.rank(), rb = b.rank();
  auto inner_mismatch = [] { fail(ErrKind::ShapeMismatch, "matmul inner dims disagree"); };

  if (ra <= 2 && rb <= 2) {
    std::int64_t n = ra == 2 ? a.dim(0) : 1;
    std::int64_t m = ra == 2 ? a.dim(1) : a.dim(0);
    std::int64_t m2 = rb == 2 ? b.dim(0) : b.dim(0);
    std::int64_t p = rb == 2 ? b.dim(1) : 1;
    if (m != m2) inner_mismatch();
    Shape shape;
    if (ra == 2) shape.push_back(n);
    if (rb == 2) shape.push_back(p);
    check_result_dims(shape, lim);
    std::vector<std::int64_t> out(static_cast<size_t>(n * p));
    mm_block(a.data().data(), b.data().data(), out.data(), n, m, p);
    return Tensor(DType::Int, std::move(shape), std::move(out));
  }

  // At least one operand is batched. Map both to (batch, n, m) / (batch, m, p)
  // with batch broadcast between the two 3-D forms.
  std::int64_t ba = ra == 3 ? a.dim(0) : 1;
  std::int64_t bb = rb == 3 ? b.dim(0) : 1;
  if (ba != bb && ba != 1 && bb != 1) {
    fail(ErrKind::ShapeMismatch, "matmul batch dims disagree");
  }
  std::int64_t batch = std::max(ba, bb);
  std::int64_t n = 1, m = 0, p = 1;
  Shape shape{batch};
  if (ra == 3) {
    n = a.dim(1);
    m = a.dim(2);
  } else if (ra == 2) {
    n = a.dim(0);
    m = a.dim(1);
  } else {
    m = a.dim(0);
  }
  if (ra >= 2) shape.push_back(n);
  std::int64_t m2, pdim;
  if (rb == 3) {
    m2 = b.dim(1);
    pdim = b.dim(2);
  } else if (rb == 2) {
    m2 = b.dim(0);
    pdim = b.dim(1);
  } else {
    m2 = b.dim(0);
    pdim = 1;
  }
  if (m != m2) inner_mismatch();
  if (rb >= 2) {
    p = pdim;
    shape.push_back(p);
  }
  check_result_dims(shape, lim);
  std::vector<std::int64_t> out(static_cast<size_t>(batch * n * p));
  for (std::int64_t i = 0; i < batch; ++i) {
    const std::int64_t* pa =
        a.data().data() + (ra == 3 ? (ba == 1 ? 0 : i) * n * m : 0);
    const std::int64_t* pb =
        b.data().data() + (rb == 3 ? (bb == 1 ? 0 : i) * m * p : 0);
    mm_block(pa, pb, out.data() + i * n * p, n, m, p);
  }
  return Tensor(DType::Int, std::move(shape), std::move(out));
}

// Contraction of a's last axis with b's first axis.
Tensor op_tensordot(const Tensor& a, const Tensor& b, const ApplyLimits& lim) {
  if (a.dtype() == DType::Bool || b.dtype() == DType::Bool) {
    fail(ErrKind::DtypeMismatch, "tensordot needs int operands");
  }
  if (a.rank() == 0 || b.rank() == 0) {
    fail(ErrKind::ShapeMismatch, "tensordot needs rank >= 1 operands");
  }
  check_arith_range(a);
  check_arith_range(b);
  std::int64_t k = a.dim(a.rank() - 1);
  if (k != b.dim(0)) fail(ErrKind::ShapeMismatch, "tensordot contraction dims disagree");
  Shape shape;
  for (int i = 0; i + 1 < a.rank(); ++i) shape.push_back(a.dim(i));
  for (int i = 1; i < b.rank(); ++i) shape.push_back(b.dim(i));
  check_result_dims(shape, lim);
  std::int64_t n = a.numel() / k;
  std::int64_t p = b.numel() / k;
  std::vector<std::int64_t> out(static_cast<size_t>(n * p));
  mm_block(a.data().data(), b.data().data(), out.data(), n, k, p);
  return Tensor(DType::Int, std::move(shape), std::move(out));
}

Tensor op_stack(const Tensor& a, const Tensor& b, std::int64_t dim,
                const ApplyLimits& lim) {
  if (a.dtype() != b.dtype()) fail(ErrKind::DtypeMismatch, "stack needs equal dtypes");
  if (a.shape() != b.shape()) fail(ErrKind::ShapeMismatch, "stack needs equal shapes");
  if (a.rank() + 1 > Tensor::kMaxRank) fail(ErrKind::RankOverflow, "stack result rank exceeds 3");
  int d = wrap_axis(dim, a.rank(), /*extra=*/1);
  Shape shape = a.shape();
  shape.insert(shape.begin() + d, 2);
  check_result_dims(shape, lim);
  std::int64_t outer = 1;
  for (int i = 0; i < d; ++i) outer *= a.dim(i);
  std::int64_t inner = a.numel() / outer;
  std::vector<std::int64_t> out(static_cast<size_t>(a.numel() * 2));
  for (std::int64_t o = 0; o < outer; ++o) {
    std::copy_n(a.data().data() + o * inner, inner, out.data() + o * 2 * inner);
    std::copy_n(b.data().data() + o * inner, inner, out.data() + (o * 2 + 1) * inner);
  }
  return Tensor(a.dtype(), std::move(shape), std::move(out));
}

Tensor op_transpose(const Tensor& a, std::int64_t d0, std::int64_t d1,
                    const ApplyLimits& lim) {
  if (a.rank() == 0) {
    wrap_axis(d0, 0);
    wrap_axis(d1, 0);
    return a;
  }
  int x = wrap_axis(d0, a.rank());
  int y = wrap_axis(d1, a.rank());
  if (x == y) return a;
  Shape shape = a.shape();
  std::swap(shape[static_cast<size_t>(x)], shape[static_cast<size_t>(y)]);
  check_result_dims(shape, lim);
  std::vector<std::int64_t> perm(static_cast<size_t>(a.rank()));
  for (int i = 0; i < a.rank(); ++i) perm[static_cast<size_t>(i)] = i;
  std::swap(perm[static_cast<size_t>(x)], perm[static_cast<size_t>(y)]);
  std::vector<std::int64_t> src_strides(static_cast<size_t>(a.rank()));
  std::int64_t s = 1;
  for (int i = a.rank() - 1; i >= 0; --i) {
    src_strides[static_cast<size_t>(i)] = s;
    s *= a.dim(i);
  }
  std::vector<std::int64_t> walk(shape.size());
  for (size_t i = 0; i < shape.size(); ++i) {
    walk[i] = src_strides[static_cast<size_t>(perm[i])];
  }
  std::vector<std::int64_t> out(static_cast<size_t>(a.numel()));
  const std::vector<std::int64_t> strides[1] = {walk};
  for_each_bc(shape, strides, [&](std::int64_t flat, std::span<const std::int64_t> off) {
    out[static_cast<size_t>(flat)] = a.data()[static_cast<size_t>(off[0])];
  });
  return Tensor(a.dtype(), std::move(shape), std::move(out));
}

Tensor op_unsqueeze(const Tensor& a, std::int64_t dim, const ApplyLimits& lim) {
  if (a.rank() + 1 > Tensor::kMaxRank) fail(ErrKind::RankOverflow, "unsqueeze result rank exceeds 3");
  int d = wrap_axis(dim, a.rank(), /*extra=*/1);
  Shape shape = a.shape();
  shape.insert(shape.begin() + d, 1);
  check_result_dims(shape, lim);
  return Tensor(a.dtype(), std::move(shape), a.data());
}

Tensor op_where(const Tensor& c, const Tensor& x, const Tensor& y,
                const ApplyLimits& lim) {
  if (c.dtype() != DType::Bool) fail(ErrKind::DtypeMismatch, "where condition must be bool");
  Shape shape = broadcast_shape(c.shape(), x.shape());
  shape = broadcast_shape(shape, y.shape());
  check_result_dims(shape, lim);
  DType out_dtype = (x.dtype() == DType::Bool && y.dtype() == DType::Bool)
                        ? DType::Bool
                        : DType::Int;
  std::vector<std::int64_t> out(static_cast<size_t>(product(shape)));
  const std::vector<std::int64_t> strides[3] = {
      view_strides(c, shape), view_strides(x, shape), view_strides(y, shape)};
  for_each_bc(shape, strides, [&](std::int64_t flat, std::span<const std::int64_t> off) {
    out[static_cast<size_t>(flat)] =
        c.data()[static_cast<size_t>(off[0])] != 0
            ? x.data()[static_cast<size_t>(off[1])]
            : y.data()[static_cast<size_t>(off[2])];
  });
  return Tensor(out_dtype, std::move(shape), std::move(out));
}

void check_call_shape(OpCode op, std::span<const Tensor> args,
                      std::span<const Literal> params) {
  const OpInfo& info = op_info(op);
  if (static_cast<int>(args.size()) != info.arity) {
    fail(ErrKind::ValueError, info.name + " takes " + std::to_string(info.arity) + " tensor args");
  }
  if (params.size() != info.params.size()) {
    fail(ErrKind::ValueError, info.name + " literal count mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const Literal& lit = params[i];
    if (lit.kind != info.params[i]) fail(ErrKind::ValueError, "literal kind mismatch");
    switch (lit.kind) {
      case ParamKind::Axis:
      case ParamKind::ScalarInt:
        if (lit.ints.size() != 1) fail(ErrKind::ValueError, "literal arity mismatch");
        break;
      case ParamKind::AxisPair:
        if (lit.ints.size() != 2) fail(ErrKind::ValueError, "literal arity mismatch");
        break;
      case ParamKind::ShapeTuple:
        if (lit.ints.empty() || lit.ints.size() > 3) {
          fail(ErrKind::ValueError, "shape tuple must have 1..3 entries");
        }
        break;
    }
  }
}

}  // namespace

std::vector<std::int64_t> broadcast_shape(std::span<const std::int64_t> a,
                                          std::span<const std::int64_t> b) {
  size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (size_t i = 0; i < r; ++i) {
    std::int64_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    std::int64_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1) {
      fail(ErrKind::ShapeMismatch, "shapes do not broadcast");
    }
    out[i] = std::max(da, db);
  }
  return out;
}

Tensor apply(OpCode op, std::span<const Tensor> args,
             std::span<const Literal> params, const ApplyLimits& lim) {
  check_call_shape(op, args, params);
  switch (op) {
    case OpCode::Add: return op_add(args[0], args[1], lim);
    case OpCode::Any: return op_any(args[0], params[0].ints[0], lim);
    case OpCode::Bincount: return op_bincount(args[0], lim);
    case OpCode::Eq:
    case OpCode::Gt:
    case OpCode::Lt:
    case OpCode::Ne: return op_compare(op, args[0], args[1], lim);
    case OpCode::Expand: return op_expand(args[0], params[0], lim);
    case OpCode::MaskedSelect: return op_masked_select(args[0], args[1], lim);
    case OpCode::Matmul: return op_matmul(args[0], args[1], lim);
    case OpCode::Mul: return op_mul(args[0], args[1], lim);
    case OpCode::Stack: return op_stack(args[0], args[1], params[0].ints[0], lim);
    case OpCode::Tensordot: return op_tensordot(args[0], args[1], lim);
    case OpCode::Transpose:
      return op_transpose(args[0], params[0].ints[0], params[0].ints[1], lim);
    case OpCode::Unsqueeze: return op_unsqueeze(args[0], params[0].ints[0], lim);
    case OpCode::Where: return op_where(args[0], args[1], args[2], lim);
  }
  fail(ErrKind::ValueError, "unhandled op");
}

std::optional<Tensor> try_apply(OpCode op, std::span<const Tensor> args,
                                std::span<const Literal> params,
                                const ApplyLimits& lim, std::string* why) {
  try {
    return apply(op, args, params, lim);
  } catch (const Error& e) {
    if (why) *why = e.what();
    return std::nullopt;
  }
}

}  // namespace tsynth
