#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "efx/instance.hpp"

namespace efx {

// Per-agent bundles plus the pool of unallocated goods. Bundles are pairwise
// disjoint and disjoint from the pool; together they cover [m]. (The one
// sanctioned exception is the transient state inside path_resolution, whose
// caller restores the partition.)
struct Allocation {
  std::vector<GoodSet> bundles;
  GoodSet pool;

  static Allocation all_pooled(const Instance& inst);

  bool is_partition(const Instance& inst) const;
  // Max bundle cardinality.
  int size() const;
  bool complete() const { return pool.empty(); }

  nlohmann::ordered_json to_json() const;
  static Allocation from_json(const nlohmann::json& j);
  static Allocation load(const std::string& path);
  void save(const std::string& path) const;

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.bundles == b.bundles && a.pool == b.pool;
  }
};

// Global assertion hook: every operation in every module leaves a valid
// partition behind. Throws diagnostic_error otherwise.
void assert_partition(const Instance& inst, const Allocation& x,
                      const char* where);

}  // namespace efx
