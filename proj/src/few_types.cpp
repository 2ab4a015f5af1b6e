#include "efx/few_types.hpp"

#include <algorithm>

#include "efx/errors.hpp"
#include "efx/ppa.hpp"
#include "efx/resolution.hpp"

namespace efx {

namespace {

const Rational kHalf(1, 2);
const Rational kTwoThirds(2, 3);

// Least valuable good of a set under one type's valuation (tags break ties).
int argmin_good(const Instance& inst, int type, const GoodSet& goods) {
  int best = *goods.begin();
  Value best_v = inst.good_value(type, best);
  for (int g : goods) {
    Value v = inst.good_value(type, g);
    if (v < best_v) {
      best_v = v;
      best = g;
    }
  }
  return best;
}

bool efx_toward_bundle(const Instance& inst, int agent, const GoodSet& own,
                       const GoodSet& target, const Rational& alpha) {
  if (target.size() <= 1) return true;
  int t = inst.type_of(agent);
  Value mine = inst.bundle_value(t, own);
  Value full = inst.bundle_value(t, target);
  Value least = inst.good_value(t, argmin_good(inst, t, target));
  return mine >= alpha * (full - least);
}

}  // namespace

const char* critical_case_name(CriticalCase c) {
  switch (c) {
    case CriticalCase::NoCriticals: return "no_criticals";
    case CriticalCase::TwoCritTwoSources: return "two_criticals_two_sources";
    case CriticalCase::AtMostTwoCritOneSource:
      return "at_most_two_criticals_one_source";
    case CriticalCase::ThreeCritSingletonD:
      return "three_criticals_singleton_group";
    case CriticalCase::ThreeCritBigDKeepAll:
      return "three_criticals_keep_all_at_source";
    case CriticalCase::ThreeCritBigDSplit:
      return "three_criticals_split_to_groupmate";
  }
  return "?";
}

Allocation allocate_criticals(const Instance& inst, const Allocation& x,
                              const std::set<int>& criticals,
                              const EnvyGraph& ge, CriticalCase* fired_case,
                              Trace* trace) {
  auto record_case = [&](CriticalCase c) {
    if (fired_case) *fired_case = c;
    if (trace) {
      nlohmann::ordered_json rec;
      rec["step"] = "allocate_criticals";
      rec["case"] = critical_case_name(c);
      rec["criticals"] = std::vector<int>(criticals.begin(), criticals.end());
      trace->add(std::move(rec));
    }
  };

  if (criticals.empty()) {
    record_case(CriticalCase::NoCriticals);
    return x;
  }
  if (criticals.size() > 3)
    throw contract_error("allocate_criticals: more than three critical goods");
  for (int g : criticals)
    if (!x.pool.count(g))
      throw contract_error("allocate_criticals: critical good not pooled");

  std::vector<int> srcs = sources(ge);
  if (srcs.empty())
    throw contract_error("allocate_criticals: graph has no source");
  // A source never has a critical good (it would violate the loop's exit
  // properties), and sources hold two goods.
  for (int s : srcs) {
    int t = inst.type_of(s);
    Value own = inst.bundle_value(t, x.bundles[s]);
    for (int g : criticals)
      if (inst.good_value(t, g) > kHalf * own)
        throw contract_error("allocate_criticals: source " + std::to_string(s) +
                             " claims critical good " + std::to_string(g));
  }

  Allocation y = x;
  std::vector<int> crit(criticals.begin(), criticals.end());

  if (crit.size() == 2 && srcs.size() >= 2) {
    y.bundles[srcs[0]].insert(crit[0]);
    y.bundles[srcs[1]].insert(crit[1]);
    y.pool.erase(crit[0]);
    y.pool.erase(crit[1]);
    record_case(CriticalCase::TwoCritTwoSources);
  } else if (crit.size() <= 2) {
    int d1 = srcs[0];
    for (int g : crit) {
      y.bundles[d1].insert(g);
      y.pool.erase(g);
    }
    record_case(CriticalCase::AtMostTwoCritOneSource);
  } else {
    // Three critical goods: they sit in the three groups other than the
    // source's, and the source is unique.
    if (srcs.size() != 1)
      throw contract_error(
          "allocate_criticals: three criticals with several sources");
    int d1 = srcs[0];
    int dt = inst.type_of(d1);
    if (d1 != inst.group_first(dt))
      throw contract_error("allocate_criticals: source is not a leading agent");
    if (inst.group_size(dt) == 1) {
      for (int g : crit) {
        y.bundles[d1].insert(g);
        y.pool.erase(g);
      }
      record_case(CriticalCase::ThreeCritSingletonD);
    } else {
      int d2 = d1 + 1;
      GoodSet combined = x.bundles[d1];
      for (int g : crit) combined.insert(g);
      if (efx_toward_bundle(inst, d2, x.bundles[d2], combined, kTwoThirds)) {
        for (int g : crit) {
          y.bundles[d1].insert(g);
          y.pool.erase(g);
        }
        record_case(CriticalCase::ThreeCritBigDKeepAll);
      } else {
        int h = argmin_good(inst, dt, criticals);
        y.bundles[d2].insert(h);
        y.pool.erase(h);
        for (int g : crit)
          if (g != h) {
            y.bundles[d1].insert(g);
            y.pool.erase(g);
          }
        record_case(CriticalCase::ThreeCritBigDSplit);
      }
    }
  }

  y = enforce_ordering_invariant(inst, std::move(y));
  assert_partition(inst, y, "allocate_criticals");
  if (!check_alpha_efx(inst, y, kTwoThirds).pass)
    throw diagnostic_error("allocate_criticals: output failed the 2/3-EFX check");
  // All remaining pool goods must now be non-critical for everyone, which is
  // what the completion step requires.
  for (int a = 0; a < inst.n(); ++a)
    for (int g : y.pool)
      if (is_critical(inst, a, g, y, kHalf))
        throw diagnostic_error(
            "allocate_criticals: pool good " + std::to_string(g) +
            " is still critical for agent " + std::to_string(a));
  return y;
}

FewTypesResult few_types_allocate(const Instance& inst, Trace* trace) {
  if (inst.k() > 4)
    throw input_error(
        "few_types_allocate handles at most four agent types; use the charity "
        "solver for more");
  if (trace) {
    trace->header = {{"algo", "fewtypes"},
                     {"k", inst.k()},
                     {"n", inst.n()},
                     {"m", inst.m()}};
  }

  FewTypesResult result;
  Allocation x = run_ppa_types(inst, seed_allocation(inst), trace);

  if (!x.complete()) {
    auto claim_map = critical_goods(inst, x, kHalf);
    std::set<int> criticals;
    for (const auto& [g, agents] : claim_map) criticals.insert(g);
    EnvyGraph ge = build_envy_graph(inst, x, GraphKind::Enhanced);
    x = allocate_criticals(inst, x, criticals, ge, &result.fired_case, trace);
    x = ece_completion(inst, x, kTwoThirds, trace);
  }

  if (!x.complete())
    throw diagnostic_error("few_types_allocate: output is not complete");
  result.certificate = check_alpha_efx(inst, x, kTwoThirds);
  result.allocation = std::move(x);
  return result;
}

}  // namespace efx
