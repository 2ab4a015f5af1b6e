#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace efx {

// Ordered log of algorithm steps, serialized as JSON lines: one header line
// followed by one line per record. Used for inspection and deterministic
// replay.
struct Trace {
  nlohmann::ordered_json header;
  std::vector<nlohmann::ordered_json> records;

  void add(nlohmann::ordered_json record) { records.push_back(std::move(record)); }
  bool empty() const { return header.is_null() && records.empty(); }

  void save_jsonl(const std::string& path) const;
  static Trace load_jsonl(const std::string& path);
};

}  // namespace efx
