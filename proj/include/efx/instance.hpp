#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "efx/rational.hpp"
#include "efx/value.hpp"

namespace efx {

using GoodSet = std::set<int>;

// A fair-division instance with k agent types. All agents of a type share one
// additive valuation over the m goods. Agents are addressed by a flat index
// that orders them by (type, position within group).
class Instance {
 public:
  Instance() = default;
  Instance(std::vector<std::vector<Rational>> type_values,
           std::vector<int> group_sizes);

  int k() const { return static_cast<int>(type_values_.size()); }
  int m() const { return m_; }
  int n() const { return n_; }

  const std::vector<int>& group_sizes() const { return group_sizes_; }
  const std::vector<std::vector<Rational>>& type_values() const {
    return type_values_;
  }

  int type_of(int agent) const;
  // Flat index of the group's first agent (the leading slot under the
  // ordering invariant).
  int group_first(int t) const { return group_start_[t]; }
  int group_size(int t) const { return group_sizes_[t]; }
  // (type, 0-based position within group)
  std::pair<int, int> agent_coords(int agent) const;
  std::string agent_label(int agent) const;  // "t:j", 1-based j

  const Rational& base_value(int t, int g) const { return type_values_[t][g]; }
  Value good_value(int t, int g) const;
  Value bundle_value(int t, const GoodSet& goods) const;
  Value agent_bundle_value(int agent, const GoodSet& goods) const;

  nlohmann::ordered_json to_json() const;
  static Instance from_json(const nlohmann::json& j);
  static Instance load(const std::string& path);
  void save(const std::string& path) const;

 private:
  void rebuild_index();

  std::vector<std::vector<Rational>> type_values_;  // k x m
  std::vector<int> group_sizes_;                    // k
  std::vector<int> group_start_;                    // k, flat index of first agent
  std::vector<int> agent_type_;                     // n
  int m_ = 0;
  int n_ = 0;
};

// Uniform integer values in [0, max_value], deterministic in seed.
Instance gen_random_instance(int k, const std::vector<int>& sizes, int m,
                             long max_value, unsigned long long seed);

}  // namespace efx
