#include "efx/ppa.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "efx/errors.hpp"
#include "efx/resolution.hpp"

namespace efx {

namespace {

constexpr long kStepBudget = 1'000'000;
const Rational kHalf(1, 2);
const Rational kTwoThirds(2, 3);
const Rational kThreeHalves(3, 2);

int argmax_good(const Instance& inst, int type, const GoodSet& goods) {
  int best = *goods.begin();
  Value best_v = inst.good_value(type, best);
  for (int g : goods) {
    Value v = inst.good_value(type, g);
    if (v > best_v) {
      best_v = v;
      best = g;
    }
  }
  return best;
}

}  // namespace

const char* step_name(StepId id) {
  switch (id) {
    case StepId::S1: return "S1";
    case StepId::S2: return "S2";
    case StepId::S3: return "S3";
    case StepId::S4: return "S4";
    case StepId::S5: return "S5";
    case StepId::S6: return "S6";
    case StepId::S7: return "S7";
    case StepId::S8: return "S8";
    case StepId::S9: return "S9";
    case StepId::S9_1: return "S9_1";
    case StepId::S9_2_gate: return "S9_2";
    case StepId::S9_3: return "S9_3";
    case StepId::S9_4: return "S9_4";
  }
  return "?";
}

Configuration configuration_of(const Instance& inst, const Allocation& x) {
  Allocation sorted = enforce_ordering_invariant(inst, x);
  Configuration c;
  c.reserve(sorted.bundles.size());
  for (const auto& b : sorted.bundles) c.emplace_back(b.begin(), b.end());
  return c;
}

std::string configuration_hash(const Configuration& c) {
  // FNV-1a over the flattened bundle lists.
  unsigned long long h = 1469598103934665603ull;
  auto mix = [&](unsigned long long v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const auto& b : c) {
    mix(0xfffffffffffffffeull);
    for (int g : b) mix(static_cast<unsigned long long>(g) + 1);
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", h);
  return buf;
}

Allocation seed_allocation(const Instance& inst) {
  Allocation x = Allocation::all_pooled(inst);
  for (int a = 0; a < inst.n() && !x.pool.empty(); ++a) {
    int g = argmax_good(inst, inst.type_of(a), x.pool);
    x.bundles[a] = GoodSet{g};
    x.pool.erase(g);
  }
  x = enforce_ordering_invariant(inst, std::move(x));
  assert_partition(inst, x, "seed_allocation");
  if (find_cycle(build_envy_graph(inst, x, GraphKind::Plain)))
    throw diagnostic_error("seed_allocation: envy graph has a cycle");
  return x;
}

PropertyReport check_ppa_properties(const Instance& inst, const Allocation& x) {
  PropertyReport rep;
  for (int a = 0; a < inst.n() && rep.p1; ++a) {
    if (x.bundles[a].size() != 1) continue;
    for (int b = 0; b < inst.n(); ++b) {
      if (a == b) continue;
      if (!is_alpha_efx_toward(inst, a, b, x, Rational(1))) {
        rep.p1 = false;
        rep.detail = "P1: agent " + std::to_string(a) + " not EFX towards " +
                     std::to_string(b);
        break;
      }
    }
  }
  if (!check_alpha_efx(inst, x, kTwoThirds).pass) {
    rep.p2 = false;
    if (rep.detail.empty()) rep.detail = "P2: 2/3-EFX check failed";
  }
  for (int a = 0; a < inst.n(); ++a) {
    int t = inst.type_of(a);
    Value own = inst.bundle_value(t, x.bundles[a]);
    if (x.bundles[a].size() > 1) {
      for (int g : x.pool)
        if (inst.good_value(t, g) > kHalf * own) {
          rep.p3 = false;
          if (rep.detail.empty())
            rep.detail = "P3: agent " + std::to_string(a) +
                         " has critical good " + std::to_string(g);
        }
    } else if (x.bundles[a].size() == 1) {
      int criticals = 0;
      for (int g : x.pool) {
        Value vg = inst.good_value(t, g);
        if (vg > kHalf * own) {
          ++criticals;
          if (vg > kTwoThirds * own) {
            rep.p4 = false;
            if (rep.detail.empty())
              rep.detail = "P4: agent " + std::to_string(a) + " values good " +
                           std::to_string(g) + " above 2/3";
          }
        }
      }
      if (criticals > 1) {
        rep.p4 = false;
        if (rep.detail.empty())
          rep.detail = "P4: agent " + std::to_string(a) + " has " +
                       std::to_string(criticals) + " critical goods";
      }
    }
  }
  return rep;
}

Allocation pseudo_cycle_resolution(const Instance& inst, const Allocation& x,
                                   const std::vector<int>& pi, int z_star,
                                   const GoodSet& s) {
  if (pi.size() < 2)
    throw contract_error("pseudo_cycle_resolution: path needs >= 2 agents");
  if (s.size() > 2)
    throw contract_error("pseudo_cycle_resolution: |S| must be <= 2");
  EnvyGraph ge = build_envy_graph(inst, x, GraphKind::Enhanced);
  for (size_t i = 0; i + 1 < pi.size(); ++i)
    if (!ge.has_edge(pi[i], pi[i + 1]))
      throw contract_error("pseudo_cycle_resolution: not a path in the graph");
  if (inst.type_of(z_star) != inst.type_of(pi.front()))
    throw contract_error(
        "pseudo_cycle_resolution: z_star outside the source group");
  if (std::find(pi.begin(), pi.end(), z_star) != pi.end())
    throw contract_error("pseudo_cycle_resolution: z_star lies on the path");

  Allocation y = x;
  for (size_t j = 1; j + 1 < pi.size(); ++j)
    y.bundles[pi[j]] = x.bundles[pi[j + 1]];
  y.bundles[z_star] = x.bundles[pi[1]];
  y.bundles[pi.back()] = s;
  // The caller restores the pool when S pulled goods out of it (S9_4).
  return enforce_ordering_invariant(inst, std::move(y));
}

namespace {

std::optional<PpaStepResult> try_swap_steps(const Instance& inst,
                                            const Allocation& x) {
  // Step 1: a singleton holder prefers one pool good.
  for (int a = 0; a < inst.n(); ++a) {
    if (x.bundles[a].size() != 1) continue;
    int t = inst.type_of(a);
    Value own = inst.bundle_value(t, x.bundles[a]);
    for (int g : x.pool)
      if (inst.good_value(t, g) > own) {
        Allocation y = x;
        y.pool.erase(g);
        for (int h : x.bundles[a]) y.pool.insert(h);
        y.bundles[a] = GoodSet{g};
        return PpaStepResult{StepId::S1, std::move(y), {a}};
      }
  }
  // Step 2: a two-good holder prefers one pool good by more than 3/2.
  for (int a = 0; a < inst.n(); ++a) {
    if (x.bundles[a].size() != 2) continue;
    int t = inst.type_of(a);
    Value threshold = kThreeHalves * inst.bundle_value(t, x.bundles[a]);
    for (int g : x.pool)
      if (inst.good_value(t, g) > threshold) {
        Allocation y = x;
        y.pool.erase(g);
        for (int h : x.bundles[a]) y.pool.insert(h);
        y.bundles[a] = GoodSet{g};
        return PpaStepResult{StepId::S2, std::move(y), {a}};
      }
  }
  // Step 3: a singleton holder prefers two pool goods by more than 2/3.
  for (int a = 0; a < inst.n(); ++a) {
    if (x.bundles[a].size() != 1) continue;
    int t = inst.type_of(a);
    Value threshold = kTwoThirds * inst.bundle_value(t, x.bundles[a]);
    for (auto it1 = x.pool.begin(); it1 != x.pool.end(); ++it1)
      for (auto it2 = std::next(it1); it2 != x.pool.end(); ++it2)
        if (inst.good_value(t, *it1) + inst.good_value(t, *it2) > threshold) {
          Allocation y = x;
          y.pool.erase(*it1);
          y.pool.erase(*it2);
          for (int h : x.bundles[a]) y.pool.insert(h);
          y.bundles[a] = GoodSet{*it1, *it2};
          return PpaStepResult{StepId::S3, std::move(y), {a}};
        }
  }
  // Step 4: a two-good holder trades one of her goods for a better pool good.
  for (int a = 0; a < inst.n(); ++a) {
    if (x.bundles[a].size() != 2) continue;
    int t = inst.type_of(a);
    for (int g : x.pool)
      for (int own_good : x.bundles[a])
        if (inst.good_value(t, g) > inst.good_value(t, own_good)) {
          Allocation y = x;
          y.pool.erase(g);
          y.pool.insert(own_good);
          y.bundles[a].erase(own_good);
          y.bundles[a].insert(g);
          return PpaStepResult{StepId::S4, std::move(y), {a}};
        }
  }
  return std::nullopt;
}

std::optional<PpaStepResult> try_types_steps(const Instance& inst,
                                             const Allocation& x,
                                             const EnvyGraph& ge) {
  // Gate 9.1: a unique source whose group has a second agent. In this state
  // the source is necessarily the leading agent of its group.
  std::vector<int> srcs = sources(ge);
  if (srcs.size() != 1) return std::nullopt;
  int d1 = srcs[0];
  int dt = inst.type_of(d1);
  if (d1 != inst.group_first(dt))
    throw diagnostic_error("types step: unique source is not a leading agent");
  if (inst.group_size(dt) < 2) return std::nullopt;
  int d2 = d1 + 1;

  // Gate 9.2: the other three leading agents hold singletons, and either d2
  // holds two goods or (d1, d2) is not an edge of the enhanced graph.
  std::vector<int> other_leaders;
  for (int t = 0; t < inst.k(); ++t)
    if (t != dt) other_leaders.push_back(inst.group_first(t));
  for (int u : other_leaders)
    if (x.bundles[u].size() != 1) return std::nullopt;
  if (!(x.bundles[d2].size() == 2 || !ge.has_edge(d1, d2)))
    return std::nullopt;

  // Step 9.3: some other leading agent envies d2's bundle; shuffle bundles
  // along a leading path and hand X_{d2} to her.
  for (int u : other_leaders) {
    int t = inst.type_of(u);
    if (inst.bundle_value(t, x.bundles[u]) <
        inst.bundle_value(t, x.bundles[d2])) {
      std::vector<int> pi = leading_path(inst, x, ge, d1, u);
      Allocation y = pseudo_cycle_resolution(inst, x, pi, d2, x.bundles[d2]);
      assert_partition(inst, y, "step S9_3");
      std::vector<int> actors = pi;
      actors.push_back(d2);
      return PpaStepResult{StepId::S9_3, std::move(y), std::move(actors)};
    }
  }
  // Step 9.4: some other leading agent prefers one good of X_{d2} plus one
  // pool good; she receives those two, the rest of X_{d2} returns to the pool.
  for (int u : other_leaders) {
    int t = inst.type_of(u);
    int g = argmax_good(inst, t, x.bundles[d2]);
    int g_prime = argmax_good(inst, t, x.pool);
    if (inst.bundle_value(t, x.bundles[u]) <
        inst.good_value(t, g) + inst.good_value(t, g_prime)) {
      std::vector<int> pi = leading_path(inst, x, ge, d1, u);
      Allocation y =
          pseudo_cycle_resolution(inst, x, pi, d2, GoodSet{g, g_prime});
      y.pool.erase(g_prime);
      for (int h : x.bundles[d2])
        if (h != g) y.pool.insert(h);
      assert_partition(inst, y, "step S9_4");
      std::vector<int> actors = pi;
      actors.push_back(d2);
      return PpaStepResult{StepId::S9_4, std::move(y), std::move(actors)};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<PpaStepResult> ppa_step(const Instance& inst, const Allocation& x,
                                      bool types_mode, Trace* trace) {
  if (x.pool.empty()) throw contract_error("ppa_step: empty pool");

  if (auto r = try_swap_steps(inst, x)) {
    r->after = enforce_ordering_invariant(inst, std::move(r->after));
    assert_partition(inst, r->after, step_name(r->id));
    return r;
  }

  // Step 5: resolve reduced-graph cycles.
  {
    EnvyGraph gr = build_envy_graph(inst, x, GraphKind::Reduced);
    if (find_cycle(gr))
      return PpaStepResult{
          StepId::S5, all_cycles_resolution(inst, x, GraphKind::Reduced, trace),
          {}};
    // Step 6: a reduced-graph source with a single good absorbs her most
    // valuable pool good.
    for (int s : sources(gr)) {
      if (x.bundles[s].size() != 1) continue;
      int g = argmax_good(inst, inst.type_of(s), x.pool);
      Allocation y = x;
      y.pool.erase(g);
      y.bundles[s].insert(g);
      y = enforce_ordering_invariant(inst, std::move(y));
      assert_partition(inst, y, "step S6");
      return PpaStepResult{StepId::S6, std::move(y), {s}};
    }
  }

  // Step 7: a single pooled good that some singleton holder values above 2/3
  // of her bundle.
  if (x.pool.size() == 1) {
    int g = *x.pool.begin();
    bool wanted = false;
    for (int a = 0; a < inst.n() && !wanted; ++a)
      if (x.bundles[a].size() == 1 &&
          inst.agent_bundle_value(a, GoodSet{g}) >
              kTwoThirds * inst.agent_bundle_value(a, x.bundles[a]))
        wanted = true;
    if (wanted)
      return PpaStepResult{StepId::S7, singleton_pool(inst, x, trace), {}};
  }

  // Step 8: resolve enhanced-graph cycles.
  EnvyGraph ge = build_envy_graph(inst, x, GraphKind::Enhanced);
  if (find_cycle(ge))
    return PpaStepResult{
        StepId::S8, all_cycles_resolution(inst, x, GraphKind::Enhanced, trace),
        {}};

  // Step 9: a path in the enhanced graph from a two-good source to an agent
  // preferring a pool good plus a good of the source's bundle.
  for (int s : sources(ge)) {
    if (x.bundles[s].size() != 2) continue;
    for (int a = 0; a < inst.n(); ++a) {
      int t = inst.type_of(a);
      Value best_pair = inst.good_value(t, argmax_good(inst, t, x.pool)) +
                        inst.good_value(t, argmax_good(inst, t, x.bundles[s]));
      if (!(inst.bundle_value(t, x.bundles[a]) < best_pair)) continue;
      auto pi = find_path(ge, s, a);
      if (!pi) continue;
      return PpaStepResult{
          StepId::S9, path_resolution_star(inst, x, ge, *pi, trace), *pi};
    }
  }

  if (types_mode && inst.k() == 4)
    if (auto r = try_types_steps(inst, x, ge)) return r;

  return std::nullopt;
}

Allocation run_ppa_types(const Instance& inst, const Allocation& x0,
                         Trace* trace) {
  if (x0.size() > 1)
    throw contract_error("run_ppa_types: seed must have size <= 1");
  if (!x0.is_partition(inst))
    throw contract_error("run_ppa_types: seed is not a partition");
  if (find_cycle(build_envy_graph(inst, x0, GraphKind::Plain)))
    throw contract_error("run_ppa_types: seed envy graph has a cycle");

  Allocation x = enforce_ordering_invariant(inst, x0);
  bool types_mode = inst.k() == 4;

  // Running maximum of each group's minimum bundle value; the minimum may
  // dip, but never below 2/3 of any earlier minimum.
  std::vector<Value> watermark(inst.k());
  auto group_min = [&](int t) {
    return inst.bundle_value(t, x.bundles[inst.group_first(t)]);
  };
  for (int t = 0; t < inst.k(); ++t) watermark[t] = group_min(t);

  std::set<Configuration> fired_configs;
  long iter = 0;
  while (!x.pool.empty()) {
    if (++iter > kStepBudget)
      throw diagnostic_error("run_ppa_types: step budget exceeded");
    auto step = ppa_step(inst, x, types_mode, trace);
    if (!step) break;

    std::string config_hash_str;
    if (step->id == StepId::S9_3 || step->id == StepId::S9_4) {
      Configuration config = configuration_of(inst, x);
      config_hash_str = configuration_hash(config);
      if (!fired_configs.insert(std::move(config)).second)
        throw diagnostic_error(
            "run_ppa_types: configuration repeated before " +
            std::string(step_name(step->id)));
    }

    x = std::move(step->after);
    assert_partition(inst, x, step_name(step->id));
    if (x.size() > 2)
      throw diagnostic_error("run_ppa_types: allocation size exceeded 2 after " +
                             std::string(step_name(step->id)));
    PropertyReport rep = check_ppa_properties(inst, x);
    if (!rep.p12())
      throw diagnostic_error("run_ppa_types: " + rep.detail + " after " +
                             std::string(step_name(step->id)));

    nlohmann::ordered_json minima = nlohmann::ordered_json::array();
    for (int t = 0; t < inst.k(); ++t) {
      Value cur = group_min(t);
      if (cur < kTwoThirds * watermark[t])
        throw diagnostic_error(
            "run_ppa_types: group minimum fell below 2/3 of an earlier value");
      if (watermark[t] < cur) watermark[t] = cur;
      minima.push_back(rational_to_string(cur.base));
    }

    if (trace) {
      nlohmann::ordered_json rec;
      rec["iter"] = iter;
      rec["step"] = step_name(step->id);
      rec["actors"] = step->actors;
      rec["pool_size"] = x.pool.size();
      if (!config_hash_str.empty()) rec["config_hash"] = config_hash_str;
      rec["group_minima"] = std::move(minima);
      trace->add(std::move(rec));
    }
  }

  PropertyReport rep = check_ppa_properties(inst, x);
  if (!rep.all())
    throw diagnostic_error("run_ppa_types: exit state violates properties: " +
                           rep.detail);
  if (!x.pool.empty()) {
    EnvyGraph ge = build_envy_graph(inst, x, GraphKind::Enhanced);
    std::vector<int> srcs = sources(ge);
    if (srcs.empty())
      throw diagnostic_error("run_ppa_types: incomplete output without sources");
    for (int s : srcs)
      if (x.bundles[s].size() != 2)
        throw diagnostic_error(
            "run_ppa_types: an enhanced-graph source does not hold 2 goods");
  }
  return x;
}

}  // namespace efx
