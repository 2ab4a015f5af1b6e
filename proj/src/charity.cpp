#include "efx/charity.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "efx/errors.hpp"
#include "efx/ppa.hpp"
#include "efx/resolution.hpp"

namespace efx {

namespace {

constexpr long kRuleBudget = 100000;
constexpr long kStrictBudget = 10000;

std::vector<Value> sorted_group_values(const Instance& inst,
                                       const Allocation& x) {
  std::vector<Value> result;
  result.reserve(inst.n());
  for (int t = 0; t < inst.k(); ++t) {
    std::vector<Value> group;
    for (int j = 0; j < inst.group_size(t); ++j)
      group.push_back(inst.bundle_value(t, x.bundles[inst.group_first(t) + j]));
    std::sort(group.begin(), group.end());
    result.insert(result.end(), group.begin(), group.end());
  }
  return result;
}

// Every rule application must leave everyone at least as well off and someone
// strictly better; group-sorted vectors absorb the ordering-invariant
// reshuffles.
void assert_strict_pareto(const Instance& inst, const Allocation& before,
                          const Allocation& after, const char* rule) {
  auto vb = sorted_group_values(inst, before);
  auto va = sorted_group_values(inst, after);
  bool strict = false;
  for (size_t i = 0; i < vb.size(); ++i) {
    if (va[i] < vb[i])
      throw diagnostic_error(std::string(rule) + ": an agent lost utility");
    if (vb[i] < va[i]) strict = true;
  }
  if (!strict)
    throw diagnostic_error(std::string(rule) + ": nobody strictly improved");
}

void assert_efx_level(const Instance& inst, const Allocation& x,
                      const Rational& eps, const char* rule) {
  if (!check_alpha_efx(inst, x, Rational(1) - eps).pass)
    throw diagnostic_error(std::string(rule) +
                           ": allocation lost the (1-eps)-EFX level");
}

}  // namespace

bool heavy_envies(const Instance& inst, int a, const Allocation& x,
                  const GoodSet& s, const Rational& eps) {
  int t = inst.type_of(a);
  return inst.bundle_value(t, x.bundles[a]) <
         (Rational(1) - eps) * inst.bundle_value(t, s);
}

bool is_valuable(const Instance& inst, int a, const Allocation& x, int g,
                 const Rational& eps) {
  int t = inst.type_of(a);
  return inst.good_value(t, g) > eps * inst.bundle_value(t, x.bundles[a]);
}

Witness most_envious_witness(const Instance& inst, const Allocation& x,
                             const GoodSet& t, const Rational& eps) {
  Witness w;
  w.origin = t;
  w.subset = t;
  for (int a = 0; a < inst.n(); ++a)
    if (heavy_envies(inst, a, x, t, eps)) {
      w.claimant = a;
      break;
    }
  if (w.claimant < 0)
    throw contract_error("most_envious_witness: nobody heavily envies the set");

  const Rational factor = Rational(1) - eps;
  bool removed = true;
  while (removed) {
    removed = false;
    for (int b = 0; b < inst.n() && !removed; ++b) {
      int tb = inst.type_of(b);
      Value own = inst.bundle_value(tb, x.bundles[b]);
      Value full = inst.bundle_value(tb, w.subset);
      for (int h : w.subset) {
        if (own < factor * (full - inst.good_value(tb, h))) {
          w.subset.erase(h);
          w.claimant = b;
          removed = true;
          break;
        }
      }
    }
  }
  if (!heavy_envies(inst, w.claimant, x, w.subset, eps))
    throw diagnostic_error(
        "most_envious_witness: claimant does not heavily envy the witness");
  return w;
}

std::optional<Allocation> improve_pool_envy(const Instance& inst,
                                            const Allocation& x,
                                            const Rational& eps) {
  bool someone = false;
  for (int a = 0; a < inst.n() && !someone; ++a)
    if (heavy_envies(inst, a, x, x.pool, eps)) someone = true;
  if (!someone) return std::nullopt;

  Witness w = most_envious_witness(inst, x, x.pool, eps);
  Allocation y = x;
  for (int g : w.subset) y.pool.erase(g);
  for (int g : x.bundles[w.claimant]) y.pool.insert(g);
  y.bundles[w.claimant] = w.subset;
  y = enforce_ordering_invariant(inst, std::move(y));
  assert_partition(inst, y, "improve_pool_envy");
  assert_strict_pareto(inst, x, y, "improve_pool_envy");
  assert_efx_level(inst, y, eps, "improve_pool_envy");
  return y;
}

std::optional<Allocation> allocate_nonvaluable(const Instance& inst,
                                               const Allocation& x,
                                               const Rational& eps) {
  EnvyGraph g = build_envy_graph(inst, x, GraphKind::Plain);
  if (find_cycle(g))
    throw contract_error("allocate_nonvaluable: envy graph has cycles");
  for (int good : x.pool) {
    bool valuable = false;
    for (int a = 0; a < inst.n() && !valuable; ++a)
      if (is_valuable(inst, a, x, good, eps)) valuable = true;
    if (valuable) continue;
    std::vector<int> srcs = sources(g);
    Allocation y = x;
    y.pool.erase(good);
    y.bundles[srcs.front()].insert(good);
    y = enforce_ordering_invariant(inst, std::move(y));
    assert_partition(inst, y, "allocate_nonvaluable");
    assert_strict_pareto(inst, x, y, "allocate_nonvaluable");
    assert_efx_level(inst, y, eps, "allocate_nonvaluable");
    return y;
  }
  return std::nullopt;
}

std::optional<Allocation> absorb_unenvied(const Instance& inst,
                                          const Allocation& x,
                                          const Rational& eps) {
  EnvyGraph g = build_envy_graph(inst, x, GraphKind::Plain);
  if (find_cycle(g))
    throw contract_error("absorb_unenvied: envy graph has cycles");
  for (int s : sources(g)) {
    for (int good : x.pool) {
      GoodSet grown = x.bundles[s];
      grown.insert(good);
      bool envied = false;
      for (int a = 0; a < inst.n() && !envied; ++a)
        if (heavy_envies(inst, a, x, grown, eps)) envied = true;
      if (envied) continue;
      Allocation y = x;
      y.pool.erase(good);
      y.bundles[s] = grown;
      y = enforce_ordering_invariant(inst, std::move(y));
      assert_partition(inst, y, "absorb_unenvied");
      assert_strict_pareto(inst, x, y, "absorb_unenvied");
      assert_efx_level(inst, y, eps, "absorb_unenvied");
      return y;
    }
  }
  return std::nullopt;
}

GroupChampionGraph build_group_champion_graph(const Instance& inst,
                                              const Allocation& x,
                                              const Rational& eps, int d) {
  EnvyGraph g = build_envy_graph(inst, x, GraphKind::Plain);
  if (find_cycle(g))
    throw contract_error("build_group_champion_graph: envy graph has cycles");
  for (int a = 0; a < inst.n(); ++a) {
    if (x.bundles[a].empty())
      throw contract_error("build_group_champion_graph: agent without goods");
    if (heavy_envies(inst, a, x, x.pool, eps))
      throw contract_error(
          "build_group_champion_graph: an agent heavily envies the pool");
  }

  GroupChampionGraph gcg;
  gcg.d = d;
  gcg.eps = eps;

  std::vector<int> leaders = leading_agents(inst, x);
  std::vector<int> srcs = sources(g);

  // s(a): first source in flat order from which the leading agent is
  // reachable.
  std::map<int, int> assigned_source;
  for (int a : leaders) {
    for (int s : srcs)
      if (find_path(g, s, a)) {
        assigned_source[a] = s;
        break;
      }
    if (!assigned_source.count(a))
      throw diagnostic_error(
          "build_group_champion_graph: leader unreachable from every source");
  }

  // Parts: low-demand pool goods (valuable to at most d leading agents).
  for (int good : x.pool) {
    std::vector<int> valuers;
    for (int a : leaders)
      if (is_valuable(inst, a, x, good, eps)) valuers.push_back(a);
    if (valuers.empty())
      throw contract_error(
          "build_group_champion_graph: pool good valuable to nobody");
    if (static_cast<int>(valuers.size()) > d) continue;  // high demand
    int part = static_cast<int>(gcg.part_goods.size());
    gcg.part_goods.push_back(good);
    gcg.parts.emplace_back();
    for (int a : valuers) {
      gcg.parts[part].push_back(static_cast<int>(gcg.vertices.size()));
      gcg.vertices.push_back({part, good, a, assigned_source.at(a)});
    }
  }

  // Canonical witness of X_s + good for every (assigned source, part good)
  // pair. A heavy envier must exist once absorb_unenvied is exhausted.
  std::set<int> used_sources;
  for (const auto& [a, s] : assigned_source) used_sources.insert(s);
  for (int s : used_sources)
    for (int good : gcg.part_goods) {
      GoodSet t = x.bundles[s];
      t.insert(good);
      Witness w = most_envious_witness(inst, x, t, eps);
      if (!w.subset.count(good))
        throw diagnostic_error(
            "build_group_champion_graph: witness lost the pool good");
      gcg.witnesses[{s, good}] = std::move(w);
    }

  gcg.out.assign(gcg.vertices.size(), {});
  for (size_t u = 0; u < gcg.vertices.size(); ++u)
    for (size_t v = 0; v < gcg.vertices.size(); ++v) {
      if (u == v || gcg.vertices[u].part == gcg.vertices[v].part) continue;
      const Witness& w =
          gcg.witnesses.at({gcg.vertices[v].source, gcg.vertices[u].good});
      if (heavy_envies(inst, gcg.vertices[u].agent, x, w.subset, eps))
        gcg.out[u].push_back(static_cast<int>(v));
    }

  // Every vertex must receive an edge from every other part.
  for (size_t v = 0; v < gcg.vertices.size(); ++v)
    for (size_t part = 0; part < gcg.parts.size(); ++part) {
      if (static_cast<int>(part) == gcg.vertices[v].part) continue;
      bool covered = false;
      for (int u : gcg.parts[part])
        if (std::binary_search(gcg.out[u].begin(), gcg.out[u].end(),
                               static_cast<int>(v))) {
          covered = true;
          break;
        }
      if (!covered)
        throw diagnostic_error(
            "build_group_champion_graph: vertex without an incoming edge from "
            "part " +
            std::to_string(part));
    }
  return gcg;
}

RainbowSearchResult find_rainbow_cycle(const GroupChampionGraph& g,
                                       long budget) {
  RainbowSearchResult result;
  const int nv = static_cast<int>(g.vertex_count());
  std::vector<char> part_visited(g.part_count(), 0);
  std::vector<int> path;

  // Backtracking over part-simple paths from each start vertex; a cycle is an
  // edge back to the start.
  std::function<bool(int, int)> dfs = [&](int start, int v) -> bool {
    if (++result.expansions > budget) return false;
    for (int w : g.out[v]) {
      if (result.expansions > budget) return false;
      if (w == start && path.size() >= 2) {
        result.cycle = path;
        return true;
      }
      if (part_visited[g.vertices[w].part]) continue;
      part_visited[g.vertices[w].part] = 1;
      path.push_back(w);
      if (dfs(start, w)) return true;
      path.pop_back();
      part_visited[g.vertices[w].part] = 0;
    }
    return false;
  };

  for (int start = 0; start < nv; ++start) {
    std::fill(part_visited.begin(), part_visited.end(), 0);
    part_visited[g.vertices[start].part] = 1;
    path.assign(1, start);
    if (dfs(start, start)) return result;
    if (result.expansions > budget) {
      result.exhausted = false;
      return result;
    }
  }
  return result;
}

namespace {

struct WalkEdge {
  bool champion = false;
  int good = -1;    // champion edges: the tail vertex's part good
  int source = -1;  // champion edges: the head vertex's assigned source
};

}  // namespace

Allocation resolve_rainbow_cycle(const Instance& inst, const Allocation& x,
                                 const std::vector<int>& cycle,
                                 const GroupChampionGraph& g,
                                 const Rational& eps) {
  const size_t t = cycle.size();
  if (t < 2) throw contract_error("resolve_rainbow_cycle: cycle too short");
  EnvyGraph plain = build_envy_graph(inst, x, GraphKind::Plain);

  // Composite walk: envy path source_r -> agent_r, then the champion hop to
  // source_{r+1}.
  std::vector<int> nodes;
  std::vector<WalkEdge> edges;  // edges[i]: nodes[i] -> nodes[(i+1) % len]
  for (size_t r = 0; r < t; ++r) {
    const GcgVertex& u = g.vertices[cycle[r]];
    const GcgVertex& next = g.vertices[cycle[(r + 1) % t]];
    auto path = find_path(plain, u.source, u.agent);
    if (!path)
      throw contract_error("resolve_rainbow_cycle: agent lost its source path");
    for (size_t i = 0; i < path->size(); ++i) {
      nodes.push_back((*path)[i]);
      if (i + 1 < path->size()) edges.push_back(WalkEdge{});
    }
    edges.push_back(WalkEdge{true, u.good, next.source});
  }

  // The walk may revisit agents (shared path vertices, shared sources);
  // splice out the loops until it is simple. Champion edges survive because
  // two occurrences of one agent always bracket at least one splice that
  // keeps the closing arc.
  bool spliced = true;
  while (spliced) {
    spliced = false;
    std::map<int, size_t> seen;
    for (size_t i = 0; i < nodes.size(); ++i) {
      auto it = seen.find(nodes[i]);
      if (it == seen.end()) {
        seen[nodes[i]] = i;
        continue;
      }
      size_t first = it->second;
      nodes.erase(nodes.begin() + first + 1, nodes.begin() + i + 1);
      edges.erase(edges.begin() + first, edges.begin() + i);
      spliced = true;
      break;
    }
  }
  bool any_champion = false;
  for (const auto& e : edges) any_champion |= e.champion;
  if (!any_champion)
    throw diagnostic_error("resolve_rainbow_cycle: walk lost all champion edges");

  Allocation y = x;
  const size_t len = nodes.size();
  for (size_t i = 0; i < len; ++i) {
    int node = nodes[i];
    int succ = nodes[(i + 1) % len];
    const WalkEdge& e = edges[i];
    if (!e.champion) {
      y.bundles[node] = x.bundles[succ];
      continue;
    }
    if (succ != e.source)
      throw diagnostic_error("resolve_rainbow_cycle: champion head mismatch");
    const Witness& w = g.witnesses.at({e.source, e.good});
    y.bundles[node] = w.subset;
    y.pool.erase(e.good);
    GoodSet dissolved = x.bundles[e.source];
    dissolved.insert(e.good);
    for (int h : dissolved)
      if (!w.subset.count(h)) y.pool.insert(h);
  }
  assert_partition(inst, y, "resolve_rainbow_cycle");
  assert_strict_pareto(inst, x, y, "resolve_rainbow_cycle");
  assert_efx_level(inst, y, eps, "resolve_rainbow_cycle");
  return enforce_ordering_invariant(inst, std::move(y));
}

int choose_d(int k, const Rational& eps) {
  if (k < 1) throw input_error("choose_d: need k >= 1");
  BigInt hi = BigInt(k) * rational_ceil(Rational(2) / eps);
  BigInt best_est = -1;
  int best_d = 1;
  for (BigInt d = 1; d <= hi; ++d) {
    unsigned log2d = boost::multiprecision::msb(d);  // floor(log2 d)
    BigInt est =
        d * (log2d + 1) + rational_ceil(Rational(2 * k) / (eps * Rational(d)));
    if (best_est < 0 || est < best_est) {
      best_est = est;
      best_d = d.convert_to<int>();
    }
  }
  return best_d;
}

nlohmann::ordered_json CharityReport::to_json(const Instance& inst,
                                              const Allocation& x) const {
  nlohmann::ordered_json j;
  j["epsilon"] = rational_to_string(epsilon);
  j["d"] = d;
  j["charity_size"] = charity_size;
  j["high_demand"] = high_demand;
  j["low_demand_parts"] = low_demand_parts;
  j["high_demand_bound"] = high_demand_bound;
  j["bound_satisfied"] = bound_satisfied;
  j["rainbow_search_exhausted"] = rainbow_search_exhausted;
  j["rules_fired"] = {{"pool_envy", pool_envy_fired},
                      {"nonvaluable", nonvaluable_fired},
                      {"absorb", absorb_fired},
                      {"rainbow", rainbow_fired}};
  j["strict_peels"] = strict_peels;
  j["certificate"] = check_alpha_efx(inst, x, Rational(1) - epsilon).to_json();
  j["charity"] = check_charity(inst, x, Rational(1) - epsilon, epsilon).to_json();
  return j;
}

CharityResult charity_allocate(const Instance& inst, const Rational& eps,
                               std::optional<int> d_opt, Trace* trace,
                               bool strict_mode) {
  if (eps <= 0 || eps > Rational(1, 2))
    throw input_error("epsilon must lie in (0, 1/2]");
  if (inst.m() < inst.n())
    throw input_error("charity_allocate needs at least as many goods as agents");
  int d = d_opt ? *d_opt : choose_d(inst.k(), eps);
  if (d < 1) throw input_error("d must be >= 1");

  CharityReport report;
  report.epsilon = eps;
  report.d = d;
  report.high_demand_bound =
      rational_ceil(Rational(2 * inst.k()) / (eps * Rational(d)))
          .convert_to<long long>();

  if (trace)
    trace->header = {{"algo", "charity"},
                     {"epsilon", rational_to_string(eps)},
                     {"d", d},
                     {"strict", strict_mode},
                     {"k", inst.k()},
                     {"n", inst.n()},
                     {"m", inst.m()}};

  Allocation x = seed_allocation(inst);
  auto log_rule = [&](const char* rule, const Allocation& next) {
    if (!trace) return;
    nlohmann::ordered_json rec;
    rec["step"] = rule;
    rec["pool_size"] = next.pool.size();
    trace->add(std::move(rec));
  };

  bool search_limited = false;
  for (long iter = 0;; ++iter) {
    if (iter > kRuleBudget)
      throw diagnostic_error("charity_allocate: rule budget exceeded");
    x = all_cycles_resolution(inst, x, GraphKind::Plain, trace);
    if (x.pool.empty()) break;

    if (auto y = improve_pool_envy(inst, x, eps)) {
      ++report.pool_envy_fired;
      log_rule("pool_envy", *y);
      x = std::move(*y);
      continue;
    }
    if (auto y = allocate_nonvaluable(inst, x, eps)) {
      ++report.nonvaluable_fired;
      log_rule("nonvaluable", *y);
      x = std::move(*y);
      continue;
    }
    if (auto y = absorb_unenvied(inst, x, eps)) {
      ++report.absorb_fired;
      log_rule("absorb", *y);
      x = std::move(*y);
      continue;
    }
    GroupChampionGraph gcg = build_group_champion_graph(inst, x, eps, d);
    RainbowSearchResult search = find_rainbow_cycle(gcg);
    if (!search.exhausted) {
      search_limited = true;
      break;
    }
    if (!search.cycle) break;
    Allocation y = resolve_rainbow_cycle(inst, x, *search.cycle, gcg, eps);
    ++report.rainbow_fired;
    log_rule("rainbow", y);
    x = std::move(y);
  }

  if (strict_mode) {
    for (long iter = 0; iter < kStrictBudget; ++iter) {
      x = all_cycles_resolution(inst, x, GraphKind::Plain, trace);
      bool envied = false;
      for (int a = 0; a < inst.n() && !envied; ++a)
        if (heavy_envies(inst, a, x, x.pool, Rational(0))) envied = true;
      if (!envied) break;
      Witness w = most_envious_witness(inst, x, x.pool, Rational(0));
      Allocation y = x;
      for (int g : w.subset) y.pool.erase(g);
      for (int g : x.bundles[w.claimant]) y.pool.insert(g);
      y.bundles[w.claimant] = w.subset;
      y = enforce_ordering_invariant(inst, std::move(y));
      assert_partition(inst, y, "strict_peel");
      ++report.strict_peels;
      log_rule("strict_peel", y);
      x = std::move(y);
    }
  }

  report.rainbow_search_exhausted = !search_limited;
  report.charity_size = static_cast<int>(x.pool.size());
  std::vector<int> leaders = leading_agents(inst, x);
  for (int good : x.pool) {
    int valuers = 0;
    for (int a : leaders)
      if (is_valuable(inst, a, x, good, eps)) ++valuers;
    if (valuers > d)
      ++report.high_demand;
    else
      ++report.low_demand_parts;
  }
  report.certificate_pass = check_alpha_efx(inst, x, Rational(1) - eps).pass;
  report.no_heavy_pool_envy =
      check_charity(inst, x, Rational(1) - eps, eps).pass;
  report.bound_satisfied =
      report.high_demand <= report.high_demand_bound &&
      report.charity_size <=
          report.high_demand_bound + report.low_demand_parts;

  // With nobody heavily envying the pool, no leading agent can find more
  // than 2/eps pool goods valuable.
  if (report.no_heavy_pool_envy) {
    for (int a : leaders) {
      int count = 0;
      for (int good : x.pool)
        if (is_valuable(inst, a, x, good, eps)) ++count;
      if (Rational(count) > Rational(2) / eps)
        throw diagnostic_error(
            "charity_allocate: valuable-good bound violated for a leader");
    }
  }

  return CharityResult{std::move(x), std::move(report)};
}

}  // namespace efx
