#include "efx/resolution.hpp"

#include <algorithm>

#include "efx/errors.hpp"

namespace efx {

namespace {

constexpr long kResolutionBudget = 1'000'000;

Rational weight(size_t bundle_size) {
  return bundle_size >= 2 ? Rational(3, 2) : Rational(1);
}

// w(|X_a|) * v_a(X_a) as a tagged Value; zero_value for empty bundles (those
// are excluded from phi, resolution ops never run pre-seed).
Value factor_of(const Instance& inst, const Allocation& x, int agent) {
  if (x.bundles[agent].empty()) return zero_value();
  return weight(x.bundles[agent].size()) *
         inst.agent_bundle_value(agent, x.bundles[agent]);
}

// Group-wise sorted utility vectors; dominance of these is the right Pareto
// statement once the ordering invariant may permute agents within groups.
std::vector<Value> sorted_group_values(const Instance& inst,
                                       const Allocation& x) {
  std::vector<Value> result;
  result.reserve(inst.n());
  for (int t = 0; t < inst.k(); ++t) {
    std::vector<Value> group;
    for (int j = 0; j < inst.group_size(t); ++j)
      group.push_back(
          inst.bundle_value(t, x.bundles[inst.group_first(t) + j]));
    std::sort(group.begin(), group.end());
    result.insert(result.end(), group.begin(), group.end());
  }
  return result;
}

void assert_group_sorted_dominance(const Instance& inst, const Allocation& before,
                                   const Allocation& after, const char* where) {
  auto vb = sorted_group_values(inst, before);
  auto va = sorted_group_values(inst, after);
  for (size_t i = 0; i < vb.size(); ++i)
    if (va[i] < vb[i])
      throw diagnostic_error(std::string(where) +
                             ": an agent's utility decreased");
}

}  // namespace

Potential potential_phi(const Instance& inst, const Allocation& x) {
  Potential phi;
  phi.product = Rational(1);
  for (int a = 0; a < inst.n(); ++a) {
    if (x.bundles[a].empty()) continue;
    Value f = factor_of(inst, x, a);
    phi.product *= f.base;
    phi.factors.push_back(std::move(f));
  }
  std::sort(phi.factors.begin(), phi.factors.end());
  return phi;
}

int potential_compare(const Potential& a, const Potential& b) {
  if (a.product != b.product) return a.product < b.product ? -1 : 1;
  if (a.factors.size() != b.factors.size())
    return a.factors.size() < b.factors.size() ? -1 : 1;
  for (size_t i = 0; i < a.factors.size(); ++i)
    if (a.factors[i] != b.factors[i])
      return a.factors[i] < b.factors[i] ? -1 : 1;
  return 0;
}

Allocation cycle_resolution(const Instance& inst, const Allocation& x,
                            const EnvyGraph& g, const std::vector<int>& cycle,
                            Trace* trace) {
  const size_t len = cycle.size();
  if (len < 2) throw contract_error("cycle_resolution: cycle too short");
  std::vector<EdgeLabel> labels(len);
  for (size_t i = 0; i < len; ++i) {
    auto label = g.edge_label(cycle[i], cycle[(i + 1) % len]);
    if (!label) throw contract_error("cycle_resolution: not a cycle of the graph");
    labels[i] = *label;
  }

  Potential phi_before = potential_phi(inst, x);
  Allocation y = x;
  for (size_t i = 0; i < len; ++i)
    y.bundles[cycle[i]] = x.bundles[cycle[(i + 1) % len]];
  assert_partition(inst, y, "cycle_resolution");

  // Envy-edge recipients strictly gain. On reduced/enhanced graphs the
  // per-agent potential factors are additionally non-decreasing (red-edge
  // recipients trade utility for bundle weight), and a cycle always has a
  // non-red edge, so phi strictly increases. On plain graphs phi may drop;
  // there the strict utility gain of every cycle agent is the measure.
  bool some_strict = false;
  for (size_t i = 0; i < len; ++i) {
    int a = cycle[i];
    if (g.kind != GraphKind::Plain) {
      Value before = factor_of(inst, x, a);
      Value after = factor_of(inst, y, a);
      if (after < before)
        throw diagnostic_error("cycle_resolution: potential factor of agent " +
                               std::to_string(a) + " decreased");
    }
    if (labels[i] != EdgeLabel::Red) {
      if (!(inst.agent_bundle_value(a, y.bundles[a]) >
            inst.agent_bundle_value(a, x.bundles[a])))
        throw diagnostic_error("cycle_resolution: envy-edge recipient " +
                               std::to_string(a) + " did not improve");
      some_strict = true;
    }
  }
  if (!some_strict)
    throw diagnostic_error("cycle_resolution: cycle of red edges only");

  Potential phi_after = potential_phi(inst, y);
  if (g.kind != GraphKind::Plain &&
      potential_compare(phi_after, phi_before) <= 0)
    throw diagnostic_error("cycle_resolution: potential did not increase");

  if (trace) {
    nlohmann::ordered_json rec;
    rec["step"] = "cycle_resolution";
    rec["kind"] = graph_kind_name(g.kind);
    rec["cycle"] = cycle;
    rec["phi_before"] = rational_to_string(phi_before.product);
    rec["phi_after"] = rational_to_string(phi_after.product);
    rec["phi_base_equal"] = phi_before.product == phi_after.product;
    rec["pool_delta"] = 0;
    trace->add(std::move(rec));
  }
  return enforce_ordering_invariant(inst, std::move(y));
}

Allocation all_cycles_resolution(const Instance& inst, const Allocation& x,
                                 GraphKind kind, Trace* trace) {
  Allocation cur = x;
  bool resolved_any = false;
  for (long iter = 0; iter < kResolutionBudget; ++iter) {
    EnvyGraph g = build_envy_graph(inst, cur, kind);
    auto cycle = find_cycle(g);
    if (!cycle) {
      // Red-edge recipients of enhanced cycles may end up with worse
      // bundles; only envy-only kinds are Pareto improvements.
      if (resolved_any && kind != GraphKind::Enhanced)
        assert_group_sorted_dominance(inst, x, cur, "all_cycles_resolution");
      return cur;
    }
    Potential before = potential_phi(inst, cur);
    std::vector<Value> sums_before = sorted_group_values(inst, cur);
    cur = cycle_resolution(inst, cur, g, *cycle, trace);
    resolved_any = true;
    if (kind != GraphKind::Plain) {
      Potential after = potential_phi(inst, cur);
      if (potential_compare(after, before) <= 0)
        throw diagnostic_error("all_cycles_resolution: potential stalled");
    } else {
      Value total_before = zero_value(), total_after = zero_value();
      std::vector<Value> sums_after = sorted_group_values(inst, cur);
      for (const auto& v : sums_before) total_before += v;
      for (const auto& v : sums_after) total_after += v;
      if (!(total_after > total_before))
        throw diagnostic_error("all_cycles_resolution: utility sum stalled");
    }
  }
  throw diagnostic_error("all_cycles_resolution: iteration budget exceeded");
}

Allocation path_resolution(const Allocation& x, const EnvyGraph& g,
                           const std::vector<int>& pi) {
  if (pi.empty()) throw contract_error("path_resolution: empty path");
  for (size_t i = 0; i + 1 < pi.size(); ++i)
    if (!g.has_edge(pi[i], pi[i + 1]))
      throw contract_error("path_resolution: not a path of the graph");
  Allocation y = x;
  for (size_t i = 0; i + 1 < pi.size(); ++i)
    y.bundles[pi[i]] = x.bundles[pi[i + 1]];
  // The last agent's bundle is now held twice and the first agent's old
  // bundle by nobody; callers restore the partition.
  return y;
}

Allocation path_resolution_star(const Instance& inst, const Allocation& x,
                                const EnvyGraph& g, const std::vector<int>& pi,
                                Trace* trace) {
  if (pi.empty()) throw contract_error("path_resolution_star: empty path");
  int s = pi.front();
  int i = pi.back();
  if (x.bundles[s].size() != 2)
    throw contract_error("path_resolution_star: source must hold 2 goods");
  if (g.indegree[s] != 0)
    throw contract_error("path_resolution_star: path must start at a source");
  if (x.pool.empty())
    throw contract_error("path_resolution_star: empty pool");

  GoodSet xs = x.bundles[s];
  int ti = inst.type_of(i);
  auto argmax = [&](const GoodSet& goods) {
    int best = *goods.begin();
    Value best_v = inst.good_value(ti, best);
    for (int g2 : goods) {
      Value v = inst.good_value(ti, g2);
      if (v > best_v) {
        best_v = v;
        best = g2;
      }
    }
    return best;
  };
  int g_s = argmax(xs);
  int g_star = argmax(x.pool);

  Allocation y = path_resolution(x, g, pi);
  y.bundles[i] = GoodSet{g_star, g_s};
  y.pool.erase(g_star);
  for (int g2 : xs)
    if (g2 != g_s) y.pool.insert(g2);
  assert_partition(inst, y, "path_resolution_star");

  if (trace) {
    nlohmann::ordered_json rec;
    rec["step"] = "path_resolution_star";
    rec["kind"] = graph_kind_name(g.kind);
    rec["path"] = pi;
    rec["goods"] = std::vector<int>{g_star, g_s};
    rec["pool_delta"] =
        static_cast<int>(y.pool.size()) - static_cast<int>(x.pool.size());
    trace->add(std::move(rec));
  }
  return enforce_ordering_invariant(inst, std::move(y));
}

Allocation singleton_pool(const Instance& inst, const Allocation& x,
                          Trace* trace) {
  if (x.pool.size() != 1)
    throw contract_error("singleton_pool: pool must hold exactly one good");
  int g = *x.pool.begin();
  const Rational two_thirds(2, 3);
  EnvyGraph gr = build_envy_graph(inst, x, GraphKind::Reduced);
  for (int s : sources(gr))
    if (x.bundles[s].size() == 1)
      throw contract_error("singleton_pool: a reduced-graph source holds one good");

  int claimant = -1;
  for (int a = 0; a < inst.n() && claimant < 0; ++a) {
    if (x.bundles[a].size() != 1) continue;
    if (inst.agent_bundle_value(a, GoodSet{g}) >
        two_thirds * inst.agent_bundle_value(a, x.bundles[a]))
      claimant = a;
  }
  if (claimant < 0)
    throw contract_error("singleton_pool: nobody prefers the pooled good");
  if (gr.indegree[claimant] == 0)
    throw contract_error("singleton_pool: claimant is a reduced-graph source");

  for (int s : sources(gr)) {
    auto pi = find_path(gr, s, claimant);
    if (pi) return path_resolution_star(inst, x, gr, *pi, trace);
  }
  throw contract_error("singleton_pool: claimant unreachable from any source");
}

Allocation ece_completion(const Instance& inst, const Allocation& x,
                          const Rational& alpha, Trace* trace) {
  if (x.pool.empty()) return x;
  const Rational beta(1, 2);
  for (int a = 0; a < inst.n(); ++a)
    for (int g : x.pool)
      if (is_critical(inst, a, g, x, beta))
        throw contract_error("ece_completion: good " + std::to_string(g) +
                             " is critical for agent " + std::to_string(a));

  Allocation cur = x;
  while (!cur.pool.empty()) {
    cur = all_cycles_resolution(inst, cur, GraphKind::Plain, trace);
    EnvyGraph g = build_envy_graph(inst, cur, GraphKind::Plain);
    std::vector<int> srcs = sources(g);
    if (srcs.empty())
      throw diagnostic_error("ece_completion: acyclic graph without sources");
    int s = srcs.front();
    int ts = inst.type_of(s);
    int best = *cur.pool.begin();
    Value best_v = inst.good_value(ts, best);
    for (int cand : cur.pool) {
      Value v = inst.good_value(ts, cand);
      if (v > best_v) {
        best_v = v;
        best = cand;
      }
    }
    cur.pool.erase(best);
    cur.bundles[s].insert(best);
    cur = enforce_ordering_invariant(inst, std::move(cur));
    assert_partition(inst, cur, "ece_completion");
    if (trace) {
      nlohmann::ordered_json rec;
      rec["step"] = "ece_give";
      rec["source"] = s;
      rec["good"] = best;
      rec["pool_size"] = cur.pool.size();
      trace->add(std::move(rec));
    }
  }
  cur = all_cycles_resolution(inst, cur, GraphKind::Plain, trace);

  assert_group_sorted_dominance(inst, x, cur, "ece_completion");
  Rational level = std::min(alpha, Rational(2, 3));
  if (!check_alpha_efx(inst, cur, level).pass)
    throw diagnostic_error("ece_completion: output failed the EFX check");
  return cur;
}

}  // namespace efx
