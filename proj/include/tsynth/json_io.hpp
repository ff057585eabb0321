#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "tsynth/task.hpp"
#include "tsynth/tensor.hpp"

namespace tsynth {

// Insertion-ordered JSON keeps every serialized artifact stable for
// byte-level reproducibility checks.
using Json = nlohmann::ordered_json;

// {"dtype": "int"|"bool", "shape": [..], "data": [..]} with flat row-major
// data; bool payloads serialize as 0/1.
Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);

// {"inputs": [tensor..], "output": tensor}; an object with keys in1..in3 is
// accepted for inputs as well.
Json spec_to_json(const TaskSpec& spec);
TaskSpec spec_from_json(const Json& j);
TaskSpec load_spec_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Line-oriented gzip streams. Writing always compresses; reading transparently
// accepts plain text too. zlib's default gzip header carries a zero mtime, so
// identical content produces identical files.
class GzLineWriter {
 public:
  explicit GzLineWriter(const std::string& path);
  ~GzLineWriter();
  GzLineWriter(const GzLineWriter&) = delete;
  GzLineWriter& operator=(const GzLineWriter&) = delete;

  void write_line(const std::string& line);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class GzLineReader {
 public:
  explicit GzLineReader(const std::string& path);
  ~GzLineReader();
  GzLineReader(const GzLineReader&) = delete;
  GzLineReader& operator=(const GzLineReader&) = delete;

  std::optional<std::string> next_line();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tsynth
