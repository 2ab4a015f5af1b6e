#include "efx/core.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "efx/errors.hpp"

namespace efx {

namespace {

nlohmann::ordered_json value_to_json(const Value& v) {
  nlohmann::ordered_json j;
  j["base"] = rational_to_string(v.base);
  j["tag"] = rational_to_string(v.tag);
  return j;
}

}  // namespace

nlohmann::ordered_json EfxCertificate::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["alpha"] = rational_to_string(alpha);
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations) {
    nlohmann::ordered_json jv;
    jv["envier"] = v.envier;
    jv["envied"] = v.envied;
    jv["removed_good"] = v.removed_good;
    jv["own"] = value_to_json(v.own);
    jv["scaled_other"] = value_to_json(v.scaled_other);
    j["violations"].push_back(std::move(jv));
  }
  return j;
}

nlohmann::ordered_json CharityCertificate::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass;
  if (heavy_epsilon)
    j["heavy_epsilon"] = rational_to_string(*heavy_epsilon);
  else
    j["heavy_epsilon"] = nullptr;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations) {
    nlohmann::ordered_json jv;
    jv["agent"] = v.agent;
    jv["own"] = value_to_json(v.own);
    jv["pool_threshold"] = value_to_json(v.pool_threshold);
    j["violations"].push_back(std::move(jv));
  }
  return j;
}

Value value_of(const Instance& inst, int type, const GoodSet& goods) {
  return inst.bundle_value(type, goods);
}

bool is_alpha_efx_toward(const Instance& inst, int a, int b,
                         const Allocation& x, const Rational& alpha) {
  if (a == b) throw contract_error("is_alpha_efx_toward needs a != b");
  const GoodSet& xb = x.bundles[b];
  if (xb.size() <= 1) return true;  // removal empties the bundle
  int t = inst.type_of(a);
  Value own = inst.bundle_value(t, x.bundles[a]);
  Value other = inst.bundle_value(t, xb);
  Value least = inst.good_value(t, *xb.begin());
  for (int g : xb) {
    Value vg = inst.good_value(t, g);
    if (vg < least) least = vg;
  }
  return own >= alpha * (other - least);
}

EfxCertificate check_alpha_efx(const Instance& inst, const Allocation& x,
                               const Rational& alpha) {
  EfxCertificate cert;
  cert.alpha = alpha;
  for (int a = 0; a < inst.n(); ++a) {
    int t = inst.type_of(a);
    Value own = inst.bundle_value(t, x.bundles[a]);
    for (int b = 0; b < inst.n(); ++b) {
      if (a == b) continue;
      const GoodSet& xb = x.bundles[b];
      if (xb.size() <= 1) continue;
      Value other = inst.bundle_value(t, xb);
      for (int h : xb) {
        Value scaled = alpha * (other - inst.good_value(t, h));
        if (own < scaled) {
          cert.pass = false;
          cert.violations.push_back({a, b, h, own, scaled});
        }
      }
    }
  }
  return cert;
}

CharityCertificate check_charity(const Instance& inst, const Allocation& x,
                                 const Rational& alpha,
                                 const std::optional<Rational>& heavy_epsilon) {
  (void)alpha;  // recorded by callers; the pool check does not scale by it
  CharityCertificate cert;
  cert.heavy_epsilon = heavy_epsilon;
  Rational factor =
      heavy_epsilon ? Rational(1) - *heavy_epsilon : Rational(1);
  for (int a = 0; a < inst.n(); ++a) {
    int t = inst.type_of(a);
    Value own = inst.bundle_value(t, x.bundles[a]);
    Value threshold = factor * inst.bundle_value(t, x.pool);
    if (own < threshold) {
      cert.pass = false;
      cert.violations.push_back({a, own, threshold});
    }
  }
  return cert;
}

bool is_critical(const Instance& inst, int a, int g, const Allocation& x,
                 const Rational& beta) {
  if (!x.pool.count(g)) throw input_error("is_critical: good is not pooled");
  int t = inst.type_of(a);
  return inst.good_value(t, g) > beta * inst.bundle_value(t, x.bundles[a]);
}

std::map<int, std::vector<int>> critical_goods(const Instance& inst,
                                               const Allocation& x,
                                               const Rational& beta) {
  std::map<int, std::vector<int>> result;
  for (int g : x.pool) {
    std::vector<int> claimants;
    for (int a = 0; a < inst.n(); ++a)
      if (is_critical(inst, a, g, x, beta)) claimants.push_back(a);
    if (!claimants.empty()) result[g] = std::move(claimants);
  }
  return result;
}

Allocation enforce_ordering_invariant(const Instance& inst, Allocation x) {
  for (int t = 0; t < inst.k(); ++t) {
    int first = inst.group_first(t);
    int count = inst.group_size(t);
    std::vector<std::pair<Value, GoodSet>> items;
    items.reserve(count);
    for (int j = 0; j < count; ++j) {
      GoodSet b = std::move(x.bundles[first + j]);
      items.emplace_back(inst.bundle_value(t, b), std::move(b));
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (int j = 0; j < count; ++j) x.bundles[first + j] = std::move(items[j].second);
  }
  return x;
}

bool ordering_invariant_holds(const Instance& inst, const Allocation& x) {
  for (int t = 0; t < inst.k(); ++t) {
    int first = inst.group_first(t);
    for (int j = 0; j + 1 < inst.group_size(t); ++j) {
      Value lo = inst.bundle_value(t, x.bundles[first + j]);
      Value hi = inst.bundle_value(t, x.bundles[first + j + 1]);
      if (hi < lo) return false;
    }
  }
  return true;
}

std::vector<int> leading_agents(const Instance& inst, const Allocation& x) {
  if (!ordering_invariant_holds(inst, x))
    throw contract_error("leading_agents: ordering invariant violated");
  std::vector<int> result;
  result.reserve(inst.k());
  for (int t = 0; t < inst.k(); ++t) result.push_back(inst.group_first(t));
  return result;
}

Instance explicit_perturbation(const Instance& inst, const Rational& epsilon) {
  if (epsilon <= 0) throw input_error("perturbation epsilon must be positive");
  std::vector<std::vector<Rational>> values = inst.type_values();
  for (auto& row : values)
    for (int g = 0; g < inst.m(); ++g) row[g] += epsilon * Rational(pow2(g));
  return Instance(std::move(values), inst.group_sizes());
}

}  // namespace efx
