#include "tsynth/datagen.hpp"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <unordered_set>

#include "tsynth/error.hpp"

namespace tsynth {

namespace {

using Shape = std::vector<std::int64_t>;

std::int64_t product(const Shape& s) {
  std::int64_t n = 1;
  for (std::int64_t d : s) n *= d;
  return n;
}

// Fresh tensors favor rank 1..3 over scalars.
int draw_rank(Rng& rng, int max_rank) {
  static const int weights[4] = {1, 3, 3, 3};
  std::span<const int> w(weights, static_cast<size_t>(max_rank) + 1);
  return static_cast<int>(rng.weighted(w));
}

Shape draw_shape(Rng& rng, const GenConfig& cfg, int rank) {
  Shape s;
  for (int i = 0; i < rank; ++i) s.push_back(rng.uniform(1, cfg.max_dim));
  return s;
}

Tensor draw_int(Rng& rng, const GenConfig& cfg, const Shape& shape) {
  std::vector<std::int64_t> data;
  data.resize(static_cast<size_t>(product(shape)));
  for (auto& v : data) v = rng.uniform(cfg.value_lo, cfg.value_hi);
  return Tensor(DType::Int, shape, std::move(data));
}

Tensor draw_bool(Rng& rng, const Shape& shape) {
  std::vector<std::int64_t> data;
  data.resize(static_cast<size_t>(product(shape)));
  for (auto& v : data) v = rng.uniform(0, 1);
  return Tensor(DType::Bool, shape, std::move(data));
}

Tensor draw_fresh_int(Rng& rng, const GenConfig& cfg) {
  return draw_int(rng, cfg, draw_shape(rng, cfg, draw_rank(rng, cfg.max_rank)));
}

// A shape that broadcasts against `s` without growing it: a trailing slice
// of s with some dims degraded to 1. Biased toward the full shape.
Shape draw_partner_shape(Rng& rng, const Shape& s) {
  size_t r = rng.chance(0.5) ? s.size()
                             : static_cast<size_t>(rng.uniform(0, static_cast<std::int64_t>(s.size())));
  Shape out(s.end() - static_cast<std::ptrdiff_t>(r), s.end());
  for (auto& d : out) {
    if (rng.chance(0.25)) d = 1;
  }
  return out;
}

// Hands out tensors for non-carried slots: reuses a compatible task input
// with probability reuse_prob, always when fresh draws are forbidden.
struct SlotSource {
  std::span<const Tensor> pool;
  bool pool_only;
  const GenConfig& cfg;
  Rng& rng;

  std::optional<Tensor> get(const std::function<bool(const Tensor&)>& ok,
                            const std::function<Tensor()>& draw) {
    if (pool_only || rng.chance(cfg.reuse_prob)) {
      std::vector<size_t> order(pool.size());
      std::iota(order.begin(), order.end(), size_t{0});
      for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
      }
      for (size_t i : order) {
        if (ok(pool[i])) return pool[i];
      }
      if (pool_only) return std::nullopt;
    }
    Tensor t = draw();
    if (!ok(t)) return std::nullopt;
    return t;
  }
};

bool is_int(const Tensor& t) { return t.dtype() == DType::Int; }

// Sampler rules per op. The interpreter is the final authority (every sample
// is validated through try_apply); these rules only shape the distribution
// and make dead sequences die quickly. Carried-value admission is stricter
// than the interpreter: arithmetic, comparison, and structural ops reject a
// bool carried value, where demands one, and matmul wants rank >= 2, so
// sequences like [eq, add] or [bincount, matmul] never instantiate.
std::optional<CallSample> sample_impl(OpCode op, const std::optional<Tensor>& carried,
                                      SlotSource& src, const GenConfig& cfg, Rng& rng) {
  CallSample out;
  auto first_slot = [&](const std::function<bool(const Tensor&)>& ok,
                        const std::function<Tensor()>& draw) -> std::optional<Tensor> {
    if (carried) {
      if (!ok(*carried)) return std::nullopt;
      return *carried;
    }
    return src.get(ok, draw);
  };
  auto any_tensor = [](const Tensor&) { return true; };

  switch (op) {
    case OpCode::Add:
    case OpCode::Eq:
    case OpCode::Ne:
    case OpCode::Gt:
    case OpCode::Lt:
    case OpCode::Mul: {
      bool accept_bool = op == OpCode::Mul;
      auto a = first_slot([&](const Tensor& t) { return accept_bool || is_int(t); },
                          [&] { return draw_fresh_int(rng, cfg); });
      if (!a) return std::nullopt;
      auto b = src.get(any_tensor,
                       [&] { return draw_int(rng, cfg, draw_partner_shape(rng, a->shape())); });
      if (!b) return std::nullopt;
      out.slots = {*a, *b};
      return out;
    }
    case OpCode::Any: {
      auto a = first_slot(any_tensor, [&] { return draw_fresh_int(rng, cfg); });
      if (!a) return std::nullopt;
      std::int64_t d = rng.uniform(-1, std::max(a->rank() - 1, 0));
      out.slots = {*a};
      out.params = {{ParamKind::Axis, {d}}};
      return out;
    }
    case OpCode::Bincount: {
      auto ok = [&](const Tensor& t) {
        if (!is_int(t) || t.rank() != 1) return false;
        for (std::int64_t v : t.data()) {
          if (v < 0 || v + 1 > cfg.max_out_numel) return false;
        }
        return true;
      };
      auto a = first_slot(ok, [&] { return draw_int(rng, cfg, draw_shape(rng, cfg, 1)); });
      if (!a) return std::nullopt;
      out.slots = {*a};
      return out;
    }
    case OpCode::Expand: {
      auto a = first_slot(is_int, [&] { return draw_fresh_int(rng, cfg); });
      if (!a) return std::nullopt;
      int tr = static_cast<int>(rng.uniform(a->rank(), Tensor::kMaxRank));
      Shape target;
      for (int i = 0; i < tr - a->rank(); ++i) target.push_back(rng.uniform(1, cfg.max_dim));
      for (int i = 0; i < a->rank(); ++i) {
        std::int64_t d = a->dim(i);
        target.push_back(d == 1 ? rng.uniform(1, cfg.max_dim) : d);
      }
      out.slots = {*a};
      out.params = {{ParamKind::ShapeTuple, target}};
      return out;
    }
    case OpCode::MaskedSelect: {
      auto a = first_slot(any_tensor, [&] { return draw_fresh_int(rng, cfg); });
      if (!a) return std::nullopt;
      auto mask = src.get([](const Tensor& t) { return t.dtype() == DType::Bool; },
                          [&] { return draw_bool(rng, draw_partner_shape(rng, a->shape())); });
      if (!mask) return std::nullopt;
      out.slots = {*a, *mask};
      return out;
    }
    case OpCode::Matmul: {
      auto a = first_slot([](const Tensor& t) { return is_int(t) && t.rank() >= 2; },
                          [&] {
                            int r = static_cast<int>(rng.uniform(1, Tensor::kMaxRank));
                            return draw_int(rng, cfg, draw_shape(rng, cfg, r));
                          });
      if (!a) return std::nullopt;
      std::int64_t k = a->dim(a->rank() - 1);
      int rb = static_cast<int>(rng.uniform(1, Tensor::kMaxRank));
      Shape bs;
      if (rb == 1) {
        bs = {k};
      } else if (rb == 2) {
        bs = {k, rng.uniform(1, cfg.max_dim)};
      } else {
        std::int64_t batch = (a->rank() == 3 && rng.chance(0.7)) ? a->dim(0)
                                                                 : rng.uniform(1, cfg.max_dim);
        bs = {batch, k, rng.uniform(1, cfg.max_dim)};
      }
      auto b = src.get(is_int, [&] { return draw_int(rng, cfg, bs); });
      if (!b) return std::nullopt;
      out.slots = {*a, *b};
      return out;
    }
    case OpCode::Stack: {
      auto a = first_slot([](const Tensor& t) { return is_int(t) && t.rank() <= 2; },
                          [&] {
                            int r = draw_rank(rng, 2);
                            return draw_int(rng, cfg, draw_shape(rng, cfg, r));
                          });
      if (!a) return std::nullopt;
      std::optional<Tensor> b;
      if (rng.chance(0.3)) {
        b = *a;
      } else {
        b = src.get([&](const Tensor& t) { return t.dtype() == a->dtype() && t.shape() == a->shape(); },
                    [&] { return draw_int(rng, cfg, a->shape()); });
      }
      if (!b) return std::nullopt;
      out.slots = {*a, *b};
      out.params = {{ParamKind::Axis, {rng.uniform(0, a->rank())}}};
      return out;
    }
    case OpCode::Tensordot: {
      auto a = first_slot([](const Tensor& t) { return is_int(t) && t.rank() >= 1; },
                          [&] {
                            int r = static_cast<int>(rng.uniform(1, Tensor::kMaxRank));
                            return draw_int(rng, cfg, draw_shape(rng, cfg, r));
                          });
      if (!a) return std::nullopt;
      int rb_max = std::min(Tensor::kMaxRank, Tensor::kMaxRank + 2 - a->rank());
      int rb = static_cast<int>(rng.uniform(1, rb_max));
      Shape bs = {a->dim(a->rank() - 1)};
      for (int i = 1; i < rb; ++i) bs.push_back(rng.uniform(1, cfg.max_dim));
      auto b = src.get(is_int, [&] { return draw_int(rng, cfg, bs); });
      if (!b) return std::nullopt;
      out.slots = {*a, *b};
      return out;
    }
    case OpCode::Transpose: {
      auto a = first_slot([](const Tensor& t) { return is_int(t) && t.rank() >= 1; },
                          [&] {
                            static const int weights[3] = {1, 5, 4};
                            int r = 1 + static_cast<int>(rng.weighted(weights));
                            return draw_int(rng, cfg, draw_shape(rng, cfg, r));
                          });
      if (!a) return std::nullopt;
      std::int64_t d0 = 0, d1 = 0;
      if (a->rank() >= 2) {
        d0 = rng.uniform(0, a->rank() - 1);
        d1 = rng.uniform(0, a->rank() - 2);
        if (d1 >= d0) ++d1;
      }
      out.slots = {*a};
      out.params = {{ParamKind::AxisPair, {d0, d1}}};
      return out;
    }
    case OpCode::Unsqueeze: {
      auto a = first_slot([](const Tensor& t) { return is_int(t) && t.rank() <= 2; },
                          [&] {
                            int r = draw_rank(rng, 2);
                            return draw_int(rng, cfg, draw_shape(rng, cfg, r));
                          });
      if (!a) return std::nullopt;
      out.slots = {*a};
      out.params = {{ParamKind::Axis, {rng.uniform(0, a->rank())}}};
      return out;
    }
    case OpCode::Where: {
      auto cond = first_slot([](const Tensor& t) { return t.dtype() == DType::Bool; },
                             [&] {
                               int r = draw_rank(rng, cfg.max_rank);
                               return draw_bool(rng, draw_shape(rng, cfg, r));
                             });
      if (!cond) return std::nullopt;
      auto a = src.get(any_tensor,
                       [&] { return draw_int(rng, cfg, draw_partner_shape(rng, cond->shape())); });
      if (!a) return std::nullopt;
      auto b = src.get(any_tensor,
                       [&] { return draw_int(rng, cfg, draw_partner_shape(rng, cond->shape())); });
      if (!b) return std::nullopt;
      out.slots = {*cond, *a, *b};
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> DatasetRecord::sequence() const {
  std::vector<std::string> out;
  for (const StepCall& s : steps) out.push_back(op_info(s.op).name);
  return out;
}

std::uint64_t DatasetRecord::io_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const Tensor& t : inputs) mix(t.hash());
  mix(0x10u);
  mix(output.hash());
  return h;
}

Tensor replay(const DatasetRecord& r, const ApplyLimits& lim) {
  std::vector<Tensor> outs = replay_steps(r, lim);
  return outs.back();
}

std::vector<Tensor> replay_steps(const DatasetRecord& r, const ApplyLimits& lim) {
  if (r.steps.empty()) fail(ErrKind::ValueError, "record has no steps");
  std::vector<Tensor> outs;
  for (size_t i = 0; i < r.steps.size(); ++i) {
    const StepCall& step = r.steps[i];
    std::vector<Tensor> args;
    for (int a : step.args) {
      if (a == -1) {
        if (outs.empty()) fail(ErrKind::ValueError, "first step cannot take a carried value");
        args.push_back(outs.back());
      } else if (a < 0 || static_cast<size_t>(a) >= r.inputs.size()) {
        fail(ErrKind::ValueError, "step arg index out of range");
      } else {
        args.push_back(r.inputs[static_cast<size_t>(a)]);
      }
    }
    outs.push_back(apply(step.op, args, step.params, lim));
  }
  return outs;
}

std::optional<CallSample> sample_valid_call(OpCode op, const std::optional<Tensor>& carried,
                                            std::span<const Tensor> pool, bool pool_only,
                                            const GenConfig& cfg, Rng& rng) {
  SlotSource src{pool, pool_only, cfg, rng};
  auto cs = sample_impl(op, carried, src, cfg, rng);
  if (!cs) return std::nullopt;
  if (!try_apply(op, cs->slots, cs->params)) return std::nullopt;
  return cs;
}

std::optional<DatasetRecord> try_generate_record(std::span<const OpCode> seq,
                                                 const GenConfig& cfg, Rng& rng) {
  DatasetRecord rec;
  std::optional<Tensor> carried;
  for (size_t si = 0; si < seq.size(); ++si) {
    bool pool_only = rec.inputs.size() >= 3;
    auto cs = sample_valid_call(seq[si], carried, rec.inputs, pool_only, cfg, rng);
    if (!cs) return std::nullopt;
    auto result = try_apply(seq[si], cs->slots, cs->params);
    if (!result) return std::nullopt;

    StepCall call{seq[si], {}, cs->params};
    for (size_t i = 0; i < cs->slots.size(); ++i) {
      if (carried && i == 0) {
        call.args.push_back(-1);
        continue;
      }
      const Tensor& t = cs->slots[i];
      int idx = -1;
      for (size_t j = 0; j < rec.inputs.size(); ++j) {
        if (rec.inputs[j] == t) {
          idx = static_cast<int>(j);
          break;
        }
      }
      if (idx < 0) {
        if (rec.inputs.size() >= 3) return std::nullopt;
        rec.inputs.push_back(t);
        idx = static_cast<int>(rec.inputs.size()) - 1;
      }
      call.args.push_back(idx);
    }
    rec.steps.push_back(std::move(call));

    if (result->numel() > cfg.max_out_numel) return std::nullopt;
    carried = std::move(*result);
  }
  if (carried->max_abs() > cfg.max_out_value) return std::nullopt;
  rec.output = std::move(*carried);
  if (replay(rec) != rec.output) return std::nullopt;
  return rec;
}

std::vector<std::vector<OpCode>> enumerate_sequences(const OpRegistry& reg, int max_len,
                                                     const GenConfig& cfg) {
  std::vector<std::vector<OpCode>> candidates;
  std::vector<std::vector<OpCode>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<OpCode>> next;
    for (const auto& head : frontier) {
      for (int i = 0; i < reg.size(); ++i) {
        std::vector<OpCode> seq = head;
        seq.push_back(reg.op(i).code);
        candidates.push_back(seq);
        next.push_back(std::move(seq));
      }
    }
    frontier = std::move(next);
  }

  std::vector<std::vector<OpCode>> feasible;
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    Rng rng(mix_seed(cfg.seed ^ 0x9e0bef1u, ci));
    for (int t = 0; t < cfg.probe_trials; ++t) {
      if (try_generate_record(candidates[ci], cfg, rng)) {
        feasible.push_back(candidates[ci]);
        break;
      }
    }
  }
  return feasible;
}

void generate_dataset(std::span<const std::vector<OpCode>> seqs, const GenConfig& cfg,
                      const std::function<void(size_t, const DatasetRecord&, int)>& emit,
                      std::vector<SeqStats>* stats_out) {
  std::vector<SeqStats> stats(seqs.size());
  for (size_t si = 0; si < seqs.size(); ++si) {
    Rng rng(mix_seed(cfg.seed, si));
    std::unordered_set<std::uint64_t> seen;
    for (int k = 0; k < cfg.samples_per_seq; ++k) {
      bool emitted = false;
      for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
        ++stats[si].attempts;
        auto rec = try_generate_record(seqs[si], cfg, rng);
        if (!rec) continue;
        std::uint64_t h = rec->io_hash();
        if (!seen.insert(h).second) continue;
        std::uint64_t bucket = mix_seed(h, 0x5b17u) % 100;
        int split = bucket < 98 ? kSplitTrain : (bucket == 98 ? kSplitValid : kSplitTest);
        ++stats[si].emitted[static_cast<size_t>(split)];
        emit(si, *rec, split);
        emitted = true;
        break;
      }
      if (!emitted) ++stats[si].skipped;
    }
  }
  if (stats_out) *stats_out = std::move(stats);
}

namespace {

const char* literal_kind_name(ParamKind k) {
  switch (k) {
    case ParamKind::Axis: return "axis";
    case ParamKind::AxisPair: return "axes";
    case ParamKind::ScalarInt: return "int";
    case ParamKind::ShapeTuple: return "shape";
  }
  return "?";
}

ParamKind literal_kind_of(const std::string& name) {
  if (name == "axis") return ParamKind::Axis;
  if (name == "axes") return ParamKind::AxisPair;
  if (name == "int") return ParamKind::ScalarInt;
  if (name == "shape") return ParamKind::ShapeTuple;
  fail(ErrKind::ParseError, "unknown literal kind '" + name + "'");
}

}  // namespace

Json record_to_json(const DatasetRecord& r) {
  Json j;
  Json ins = Json::array();
  for (const Tensor& t : r.inputs) ins.push_back(tensor_to_json(t));
  j["inputs"] = std::move(ins);
  j["output"] = tensor_to_json(r.output);
  j["sequence"] = r.sequence();
  Json steps = Json::array();
  for (const StepCall& s : r.steps) {
    Json js;
    js["op"] = op_info(s.op).name;
    js["args"] = s.args;
    Json params = Json::array();
    for (const Literal& lit : s.params) {
      Json jl;
      jl["kind"] = literal_kind_name(lit.kind);
      jl["ints"] = lit.ints;
      params.push_back(std::move(jl));
    }
    js["params"] = std::move(params);
    steps.push_back(std::move(js));
  }
  j["steps"] = std::move(steps);
  return j;
}

DatasetRecord record_from_json(const Json& j) {
  DatasetRecord r;
  for (const Json& t : j.at("inputs")) r.inputs.push_back(tensor_from_json(t));
  r.output = tensor_from_json(j.at("output"));
  for (const Json& js : j.at("steps")) {
    StepCall s;
    s.op = op_code_of(js.at("op").get<std::string>());
    s.args = js.at("args").get<std::vector<int>>();
    for (const Json& jl : js.at("params")) {
      Literal lit;
      lit.kind = literal_kind_of(jl.at("kind").get<std::string>());
      lit.ints = jl.at("ints").get<std::vector<std::int64_t>>();
      s.params.push_back(std::move(lit));
    }
    r.steps.push_back(std::move(s));
  }
  if (j.contains("sequence") && j.at("sequence").get<std::vector<std::string>>() != r.sequence()) {
    fail(ErrKind::ParseError, "record sequence label disagrees with its steps");
  }
  return r;
}

DatasetPaths DatasetPaths::in_dir(const std::string& dir) {
  DatasetPaths p;
  p.train = dir + "/train.jsonl.gz";
  p.valid = dir + "/valid.jsonl.gz";
  p.test = dir + "/test.jsonl.gz";
  p.manifest = dir + "/manifest.json";
  return p;
}

void write_dataset(const std::string& dir, const OpRegistry& reg,
                   std::span<const std::vector<OpCode>> seqs, const GenConfig& cfg) {
  std::filesystem::create_directories(dir);
  DatasetPaths paths = DatasetPaths::in_dir(dir);
  GzLineWriter train(paths.train), valid(paths.valid), test(paths.test);
  GzLineWriter* sinks[3] = {&train, &valid, &test};

  std::vector<SeqStats> stats;
  generate_dataset(seqs, cfg,
                   [&](size_t, const DatasetRecord& rec, int split) {
                     sinks[static_cast<size_t>(split)]->write_line(record_to_json(rec).dump());
                   },
                   &stats);
  train.close();
  valid.close();
  test.close();

  Json manifest;
  manifest["config"]["value_lo"] = cfg.value_lo;
  manifest["config"]["value_hi"] = cfg.value_hi;
  manifest["config"]["max_rank"] = cfg.max_rank;
  manifest["config"]["max_dim"] = cfg.max_dim;
  manifest["config"]["samples_per_seq"] = cfg.samples_per_seq;
  manifest["config"]["seed"] = cfg.seed;
  manifest["config"]["retry_budget"] = cfg.retry_budget;
  manifest["config"]["max_out_numel"] = cfg.max_out_numel;
  manifest["config"]["max_out_value"] = cfg.max_out_value;
  manifest["registry"] = reg.names();
  manifest["registry_fingerprint"] = reg.fingerprint();
  Json rows = Json::array();
  std::array<std::int64_t, 3> totals{};
  std::int64_t total_skipped = 0;
  for (size_t si = 0; si < seqs.size(); ++si) {
    Json row;
    std::vector<std::string> names;
    for (OpCode op : seqs[si]) names.push_back(op_info(op).name);
    row["sequence"] = names;
    row["train"] = stats[si].emitted[0];
    row["valid"] = stats[si].emitted[1];
    row["test"] = stats[si].emitted[2];
    row["skipped"] = stats[si].skipped;
    row["attempts"] = stats[si].attempts;
    for (int s = 0; s < 3; ++s) totals[static_cast<size_t>(s)] += stats[si].emitted[static_cast<size_t>(s)];
    total_skipped += stats[si].skipped;
    rows.push_back(std::move(row));
  }
  manifest["sequences"] = std::move(rows);
  manifest["totals"]["train"] = totals[0];
  manifest["totals"]["valid"] = totals[1];
  manifest["totals"]["test"] = totals[2];
  manifest["totals"]["skipped"] = total_skipped;
  write_text_file(paths.manifest, manifest.dump(2) + "\n");
}

std::vector<DatasetRecord> read_dataset_file(const std::string& path) {
  std::vector<DatasetRecord> out;
  GzLineReader reader(path);
  while (auto line = reader.next_line()) {
    if (line->empty()) continue;
    try {
      out.push_back(record_from_json(Json::parse(*line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrKind::ParseError, "bad dataset line: " + std::string(e.what()));
    }
  }
  return out;
}

}  // namespace tsynth
