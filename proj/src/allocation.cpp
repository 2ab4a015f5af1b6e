#include "efx/allocation.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "efx/errors.hpp"

namespace efx {

Allocation Allocation::all_pooled(const Instance& inst) {
  Allocation x;
  x.bundles.assign(inst.n(), {});
  for (int g = 0; g < inst.m(); ++g) x.pool.insert(g);
  return x;
}

bool Allocation::is_partition(const Instance& inst) const {
  if (static_cast<int>(bundles.size()) != inst.n()) return false;
  std::vector<int> seen(inst.m(), 0);
  auto mark = [&](int g) {
    if (g < 0 || g >= inst.m()) return false;
    return ++seen[g] == 1;
  };
  for (const auto& b : bundles)
    for (int g : b)
      if (!mark(g)) return false;
  for (int g : pool)
    if (!mark(g)) return false;
  for (int g = 0; g < inst.m(); ++g)
    if (seen[g] != 1) return false;
  return true;
}

int Allocation::size() const {
  size_t s = 0;
  for (const auto& b : bundles) s = std::max(s, b.size());
  return static_cast<int>(s);
}

nlohmann::ordered_json Allocation::to_json() const {
  nlohmann::ordered_json j;
  j["bundles"] = nlohmann::ordered_json::array();
  for (const auto& b : bundles)
    j["bundles"].push_back(std::vector<int>(b.begin(), b.end()));
  j["pool"] = std::vector<int>(pool.begin(), pool.end());
  return j;
}

Allocation Allocation::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("bundles") || !j.contains("pool"))
    throw input_error("allocation JSON needs fields \"bundles\" and \"pool\"");
  Allocation x;
  for (const auto& jb : j.at("bundles")) {
    GoodSet b;
    for (const auto& g : jb) b.insert(g.get<int>());
    x.bundles.push_back(std::move(b));
  }
  for (const auto& g : j.at("pool")) x.pool.insert(g.get<int>());
  return x;
}

Allocation Allocation::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open allocation file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("bad JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

void Allocation::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write allocation file: " + path);
  out << to_json().dump(2) << "\n";
}

void assert_partition(const Instance& inst, const Allocation& x,
                      const char* where) {
  if (!x.is_partition(inst))
    throw diagnostic_error(std::string("partition invariant violated after ") +
                           where);
}

}  // namespace efx
