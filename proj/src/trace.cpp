#include "efx/trace.hpp"

#include <fstream>

#include "efx/errors.hpp"

namespace efx {

void Trace::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write trace file: " + path);
  if (!header.is_null()) out << header.dump() << "\n";
  for (const auto& r : records) out << r.dump() << "\n";
}

Trace Trace::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open trace file: " + path);
  Trace t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw input_error("bad JSON line in " + path + ": " + e.what());
    }
    if (first) {
      t.header = std::move(j);
      first = false;
    } else {
      t.records.push_back(std::move(j));
    }
  }
  return t;
}

}  // namespace efx
