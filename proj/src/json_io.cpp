#include "tsynth/json_io.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "tsynth/error.hpp"

namespace tsynth {

void TaskSpec::validate() const {
  if (inputs.empty() || inputs.size() > 3) {
    fail(ErrKind::InvalidTensor, "task needs 1..3 inputs");
  }
}

Json tensor_to_json(const Tensor& t) {
  Json j;
  j["dtype"] = dtype_name(t.dtype());
  j["shape"] = t.shape();
  j["data"] = t.data();
  return j;
}

Tensor tensor_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dtype") || !j.contains("shape") || !j.contains("data")) {
    fail(ErrKind::ParseError, "tensor object needs dtype/shape/data");
  }
  std::string d = j.at("dtype").get<std::string>();
  DType dtype;
  if (d == "int") {
    dtype = DType::Int;
  } else if (d == "bool") {
    dtype = DType::Bool;
  } else {
    fail(ErrKind::ParseError, "unknown dtype '" + d + "'");
  }
  return Tensor(dtype, j.at("shape").get<std::vector<std::int64_t>>(),
                j.at("data").get<std::vector<std::int64_t>>());
}

Json spec_to_json(const TaskSpec& spec) {
  Json j;
  Json ins = Json::array();
  for (const Tensor& t : spec.inputs) ins.push_back(tensor_to_json(t));
  j["inputs"] = std::move(ins);
  j["output"] = tensor_to_json(spec.output);
  return j;
}

TaskSpec spec_from_json(const Json& j) {
  TaskSpec spec;
  const Json& ins = j.at("inputs");
  if (ins.is_array()) {
    for (const Json& t : ins) spec.inputs.push_back(tensor_from_json(t));
  } else if (ins.is_object()) {
    for (int i = 1; i <= 3; ++i) {
      std::string key = "in" + std::to_string(i);
      if (ins.contains(key)) spec.inputs.push_back(tensor_from_json(ins.at(key)));
    }
  } else {
    fail(ErrKind::ParseError, "inputs must be an array or in1..in3 object");
  }
  spec.output = tensor_from_json(j.at("output"));
  spec.validate();
  return spec;
}

TaskSpec load_spec_file(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrKind::ParseError, std::string("bad spec file: ") + e.what());
  }
  return spec_from_json(j);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrKind::IoError, "cannot write " + path);
  out << content;
  if (!out) fail(ErrKind::IoError, "short write to " + path);
}

struct GzLineWriter::Impl {
  gzFile f = nullptr;
  std::string path;
};

GzLineWriter::GzLineWriter(const std::string& path) : impl_(new Impl) {
  impl_->path = path;
  impl_->f = gzopen(path.c_str(), "wb");
  if (!impl_->f) fail(ErrKind::IoError, "cannot open " + path);
}

GzLineWriter::~GzLineWriter() {
  if (impl_->f) gzclose(impl_->f);
}

void GzLineWriter::write_line(const std::string& line) {
  if (!impl_->f) fail(ErrKind::IoError, "writer closed");
  if (gzwrite(impl_->f, line.data(), static_cast<unsigned>(line.size())) !=
          static_cast<int>(line.size()) ||
      gzwrite(impl_->f, "\n", 1) != 1) {
    fail(ErrKind::IoError, "short write to " + impl_->path);
  }
}

void GzLineWriter::close() {
  if (impl_->f) {
    if (gzclose(impl_->f) != Z_OK) fail(ErrKind::IoError, "close failed for " + impl_->path);
    impl_->f = nullptr;
  }
}

struct GzLineReader::Impl {
  gzFile f = nullptr;
  std::string buf;
  bool eof = false;
};

GzLineReader::GzLineReader(const std::string& path) : impl_(new Impl) {
  impl_->f = gzopen(path.c_str(), "rb");
  if (!impl_->f) fail(ErrKind::IoError, "cannot open " + path);
}

GzLineReader::~GzLineReader() {
  if (impl_->f) gzclose(impl_->f);
}

std::optional<std::string> GzLineReader::next_line() {
  if (impl_->eof && impl_->buf.empty()) return std::nullopt;
  char chunk[1 << 14];
  for (;;) {
    size_t nl = impl_->buf.find('\n');
    if (nl != std::string::npos) {
      std::string line = impl_->buf.substr(0, nl);
      impl_->buf.erase(0, nl + 1);
      return line;
    }
    if (impl_->eof) {
      if (impl_->buf.empty()) return std::nullopt;
      std::string line = std::move(impl_->buf);
      impl_->buf.clear();
      return line;
    }
    int n = gzread(impl_->f, chunk, sizeof(chunk));
    if (n < 0) fail(ErrKind::IoError, "gzread failed");
    if (n == 0) {
      impl_->eof = true;
    } else {
      impl_->buf.append(chunk, static_cast<size_t>(n));
    }
  }
}

}  // namespace tsynth
