#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tsynth {

enum class DType { Int, Bool };

const char* dtype_name(DType d);

// Dense row-major tensor of rank 0..3. Rank 0 is a scalar holding exactly
// one element. Bool payloads store 0/1 in the same int64 buffer.
// Shape extents are always >= 1; numel == product of extents.
class Tensor {
 public:
  static constexpr int kMaxRank = 3;

  Tensor();  // rank-0 Int scalar 0
  Tensor(DType dtype, std::vector<std::int64_t> shape,
         std::vector<std::int64_t> data);

  static Tensor scalar(std::int64_t v, DType dtype = DType::Int);

  DType dtype() const { return dtype_; }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  const std::vector<std::int64_t>& data() const { return data_; }
  std::vector<std::int64_t>& mutable_data() { return data_; }

  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  std::int64_t dim(int axis) const { return shape_[static_cast<size_t>(axis)]; }
  std::int64_t max_abs() const;

  bool operator==(const Tensor& o) const;
  bool operator!=(const Tensor& o) const { return !(*this == o); }

  // Content hash over dtype, shape and data. Equal tensors hash equal.
  std::uint64_t hash() const;

  // Nested-bracket rendering, e.g. "[[1, 2], [3, 4]]"; scalars print bare.
  std::string to_string() const;

 private:
  DType dtype_;
  std::vector<std::int64_t> shape_;
  std::vector<std::int64_t> data_;
};

struct TensorHash {
  size_t operator()(const Tensor& t) const {
    return static_cast<size_t>(t.hash());
  }
};

}  // namespace tsynth
