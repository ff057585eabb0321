#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tsynth/json_io.hpp"
#include "tsynth/ops.hpp"
#include "tsynth/rng.hpp"
#include "tsynth/tensor.hpp"

namespace tsynth {

struct GenConfig {
  std::int64_t value_lo = 0;
  std::int64_t value_hi = 20;
  int max_rank = 3;
  std::int64_t max_dim = 5;
  int samples_per_seq = 1000;
  std::uint64_t seed = 0;
  int retry_budget = 50;
  int probe_trials = 200;
  // Encoder bounds: outputs beyond these cannot serve as training targets.
  // Intermediates are held to the numel bound only, so every step frame of a
  // record stays encodable.
  std::int64_t max_out_numel = 150;
  std::int64_t max_out_value = 500;
  double reuse_prob = 0.25;
};

// One step of a straight-line program. args maps the op's tensor slots to
// task-input indices; -1 marks the slot fed by the previous step's result
// (always slot 0 in generated data; readers must not assume that).
struct StepCall {
  OpCode op;
  std::vector<int> args;
  std::vector<Literal> params;

  bool operator==(const StepCall& o) const {
    return op == o.op && args == o.args && params == o.params;
  }
};

// A supervised sample: distinct task inputs (at most 3, first-use order),
// the final output, and the step calls that connect them.
struct DatasetRecord {
  std::vector<Tensor> inputs;
  Tensor output;
  std::vector<StepCall> steps;

  std::vector<std::string> sequence() const;
  // Content hash over (inputs, output); identical task values collide by
  // design so deduping and split assignment see them as one.
  std::uint64_t io_hash() const;

  bool operator==(const DatasetRecord& o) const {
    return inputs == o.inputs && output == o.output && steps == o.steps;
  }
};

// Executes the steps, threading each result into the next step's -1 slot.
// Throws on any op failure; does not compare against record.output.
Tensor replay(const DatasetRecord& r, const ApplyLimits& lim = {});

// Per-step results of the same walk (final entry equals replay's result).
std::vector<Tensor> replay_steps(const DatasetRecord& r, const ApplyLimits& lim = {});

struct CallSample {
  std::vector<Tensor> slots;
  std::vector<Literal> params;
};

// Draws tensor arguments and literals for one op so that apply succeeds with
// high probability. A present carried value occupies slot 0. pool offers the
// task inputs drawn so far for reuse; pool_only forbids fresh draws (the
// record already holds 3 distinct inputs). Returns nullopt on a dead end.
std::optional<CallSample> sample_valid_call(OpCode op, const std::optional<Tensor>& carried,
                                            std::span<const Tensor> pool, bool pool_only,
                                            const GenConfig& cfg, Rng& rng);

// One full record attempt for a sequence; nullopt when any step dead-ends or
// a bounds guard rejects the result.
std::optional<DatasetRecord> try_generate_record(std::span<const OpCode> seq,
                                                 const GenConfig& cfg, Rng& rng);

// All length-1..max_len op tuples, minus those the probe never instantiates:
// a sequence is kept iff at least one of probe_trials one-shot generation
// attempts succeeds.
std::vector<std::vector<OpCode>> enumerate_sequences(const OpRegistry& reg, int max_len,
                                                     const GenConfig& cfg);

inline constexpr int kSplitTrain = 0;
inline constexpr int kSplitValid = 1;
inline constexpr int kSplitTest = 2;

struct SeqStats {
  std::array<int, 3> emitted{};
  int skipped = 0;
  std::int64_t attempts = 0;
};

// Emits samples_per_seq deduplicated records per sequence through `emit`.
// Sequence i draws from its own stream seeded by mix_seed(cfg.seed, i), so
// output is independent of inter-sequence scheduling. The split is assigned
// from io_hash, which pins equal task values to equal splits globally.
void generate_dataset(std::span<const std::vector<OpCode>> seqs, const GenConfig& cfg,
                      const std::function<void(size_t, const DatasetRecord&, int)>& emit,
                      std::vector<SeqStats>* stats_out = nullptr);

Json record_to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const Json& j);

struct DatasetPaths {
  std::string train;
  std::string valid;
  std::string test;
  std::string manifest;

  static DatasetPaths in_dir(const std::string& dir);
};

// Runs generate_dataset over gz line files plus a manifest carrying the
// config, registry fingerprint, and per-sequence census.
void write_dataset(const std::string& dir, const OpRegistry& reg,
                   std::span<const std::vector<OpCode>> seqs, const GenConfig& cfg);

std::vector<DatasetRecord> read_dataset_file(const std::string& path);

}  // namespace tsynth
