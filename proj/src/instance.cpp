#include "efx/instance.hpp"

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "efx/errors.hpp"

namespace efx {

namespace {

nlohmann::ordered_json rational_to_json(const Rational& r) {
  if (denominator(r) == 1) {
    const BigInt& num = numerator(r);
    if (num >= std::numeric_limits<long long>::min() &&
        num <= std::numeric_limits<long long>::max()) {
      return static_cast<long long>(num);
    }
  }
  return rational_to_string(r);
}

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(BigInt(j.get<long long>()));
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw input_error("expected integer or \"p/q\" string for a rational");
}

}  // namespace

Instance::Instance(std::vector<std::vector<Rational>> type_values,
                   std::vector<int> group_sizes)
    : type_values_(std::move(type_values)), group_sizes_(std::move(group_sizes)) {
  rebuild_index();
}

void Instance::rebuild_index() {
  if (type_values_.empty()) throw input_error("instance needs at least one type");
  if (type_values_.size() != group_sizes_.size())
    throw input_error("type count does not match group size list");
  m_ = static_cast<int>(type_values_[0].size());
  if (m_ < 1) throw input_error("instance needs at least one good");
  for (const auto& row : type_values_) {
    if (static_cast<int>(row.size()) != m_)
      throw input_error("all type value vectors must have length m");
    for (const auto& v : row)
      if (v < 0) throw input_error("good values must be non-negative");
  }
  group_start_.clear();
  agent_type_.clear();
  n_ = 0;
  for (int t = 0; t < k(); ++t) {
    if (group_sizes_[t] < 1) throw input_error("every group needs >= 1 agent");
    group_start_.push_back(n_);
    for (int j = 0; j < group_sizes_[t]; ++j) agent_type_.push_back(t);
    n_ += group_sizes_[t];
  }
}

int Instance::type_of(int agent) const {
  if (agent < 0 || agent >= n_) throw input_error("agent index out of range");
  return agent_type_[agent];
}

std::pair<int, int> Instance::agent_coords(int agent) const {
  int t = type_of(agent);
  return {t, agent - group_start_[t]};
}

std::string Instance::agent_label(int agent) const {
  auto [t, j] = agent_coords(agent);
  return std::to_string(t + 1) + ":" + std::to_string(j + 1);
}

Value Instance::good_value(int t, int g) const {
  if (t < 0 || t >= k()) throw input_error("type index out of range");
  if (g < 0 || g >= m_) throw input_error("good index out of range");
  return Value(type_values_[t][g], Rational(pow2(g)));
}

Value Instance::bundle_value(int t, const GoodSet& goods) const {
  Value total = zero_value();
  for (int g : goods) total += good_value(t, g);
  return total;
}

Value Instance::agent_bundle_value(int agent, const GoodSet& goods) const {
  return bundle_value(type_of(agent), goods);
}

nlohmann::ordered_json Instance::to_json() const {
  nlohmann::ordered_json j;
  j["m"] = m_;
  j["types"] = nlohmann::ordered_json::array();
  for (int t = 0; t < k(); ++t) {
    nlohmann::ordered_json jt;
    jt["count"] = group_sizes_[t];
    auto vals = nlohmann::ordered_json::array();
    for (const auto& v : type_values_[t]) vals.push_back(rational_to_json(v));
    jt["values"] = std::move(vals);
    j["types"].push_back(std::move(jt));
  }
  return j;
}

Instance Instance::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("types"))
    throw input_error("instance JSON needs fields \"m\" and \"types\"");
  int m = j.at("m").get<int>();
  std::vector<std::vector<Rational>> values;
  std::vector<int> sizes;
  for (const auto& jt : j.at("types")) {
    sizes.push_back(jt.at("count").get<int>());
    std::vector<Rational> row;
    for (const auto& jv : jt.at("values")) row.push_back(rational_from_json(jv));
    if (static_cast<int>(row.size()) != m)
      throw input_error("type value vector length does not match m");
    values.push_back(std::move(row));
  }
  return Instance(std::move(values), std::move(sizes));
}

Instance Instance::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open instance file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("bad JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

void Instance::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write instance file: " + path);
  out << to_json().dump(2) << "\n";
}

Instance gen_random_instance(int k, const std::vector<int>& sizes, int m,
                             long max_value, unsigned long long seed) {
  if (k != static_cast<int>(sizes.size()))
    throw input_error("group size list length must equal the type count");
  if (m < 1) throw input_error("need at least one good");
  if (max_value < 0) throw input_error("max value must be non-negative");
  std::mt19937_64 rng(seed);
  // Explicit modulo mapping rather than uniform_int_distribution: the output
  // must be identical across standard library implementations.
  std::vector<std::vector<Rational>> values(k, std::vector<Rational>(m));
  for (int t = 0; t < k; ++t)
    for (int g = 0; g < m; ++g)
      values[t][g] = Rational(
          BigInt(rng() % static_cast<unsigned long long>(max_value + 1)));
  return Instance(std::move(values), sizes);
}

}  // namespace efx
