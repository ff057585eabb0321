#include "tsynth/tensor.hpp"

#include <cstdlib>

#include "tsynth/error.hpp"

namespace tsynth {

const char* err_kind_name(ErrKind k) {
  switch (k) {
    case ErrKind::ShapeMismatch: return "shape mismatch";
    case ErrKind::AxisOutOfRange: return "axis out of range";
    case ErrKind::RankOverflow: return "rank overflow";
    case ErrKind::DtypeMismatch: return "dtype mismatch";
    case ErrKind::ValueError: return "value error";
    case ErrKind::SizeLimit: return "size limit";
    case ErrKind::TooLargeToEncode: return "too large to encode";
    case ErrKind::InvalidTensor: return "invalid tensor";
    case ErrKind::ParseError: return "parse error";
    case ErrKind::IoError: return "io error";
    case ErrKind::CorruptBenchmark: return "corrupt benchmark";
    case ErrKind::DivergenceDetected: return "divergence detected";
  }
  return "unknown error";
}

const char* dtype_name(DType d) {
  return d == DType::Int ? "int" : "bool";
}

Tensor::Tensor() : dtype_(DType::Int), shape_{}, data_{0} {}

Tensor::Tensor(DType dtype, std::vector<std::int64_t> shape,
               std::vector<std::int64_t> data)
    : dtype_(dtype), shape_(std::move(shape)), data_(std::move(data)) {
  if (rank() > kMaxRank) fail(ErrKind::RankOverflow, "rank exceeds 3");
  std::int64_t n = 1;
  for (std::int64_t d : shape_) {
    if (d < 1) fail(ErrKind::InvalidTensor, "extent must be >= 1");
    n *= d;
  }
  if (n != numel()) fail(ErrKind::InvalidTensor, "shape does not match payload size");
  if (dtype_ == DType::Bool) {
    for (std::int64_t v : data_) {
      if (v != 0 && v != 1) fail(ErrKind::InvalidTensor, "bool payload must be 0/1");
    }
  }
}

Tensor Tensor::scalar(std::int64_t v, DType dtype) {
  return Tensor(dtype, {}, {v});
}

std::int64_t Tensor::max_abs() const {
  std::int64_t m = 0;
  for (std::int64_t v : data_) {
    std::int64_t a = v < 0 ? -v : v;
    if (a > m) m = a;
  }
  return m;
}

bool Tensor::operator==(const Tensor& o) const {
  return dtype_ == o.dtype_ && shape_ == o.shape_ && data_ == o.data_;
}

std::uint64_t Tensor::hash() const {
  // FNV-1a over a canonical byte walk: dtype tag, rank, extents, payload.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(dtype_ == DType::Int ? 1 : 2);
  mix(static_cast<std::uint64_t>(rank()));
  for (std::int64_t d : shape_) mix(static_cast<std::uint64_t>(d));
  for (std::int64_t v : data_) mix(static_cast<std::uint64_t>(v));
  return h;
}

namespace {

void render_level(const Tensor& t, int level, std::int64_t offset,
                  std::string& out) {
  if (level == t.rank()) {
    out += std::to_string(t.data()[static_cast<size_t>(offset)]);
    return;
  }
  std::int64_t stride = 1;
  for (int a = level + 1; a < t.rank(); ++a) stride *= t.dim(a);
  out += '[';
  for (std::int64_t i = 0; i < t.dim(level); ++i) {
    if (i > 0) out += ", ";
    render_level(t, level + 1, offset + i * stride, out);
  }
  out += ']';
}

}  // namespace

std::string Tensor::to_string() const {
  std::string out;
  render_level(*this, 0, 0, out);
  return out;
}

}  // namespace tsynth
