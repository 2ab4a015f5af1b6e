#pragma once

#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "efx/allocation.hpp"
#include "efx/core.hpp"
#include "efx/envy_graph.hpp"
#include "efx/trace.hpp"

namespace efx {

// claimant heavily envies subset; nobody (1-eps)-envies subset after removing
// any single good from it.
struct Witness {
  int claimant = -1;
  GoodSet subset;
  GoodSet origin;
};

// v_a(X_a) < (1 - eps) * v_a(S)
bool heavy_envies(const Instance& inst, int a, const Allocation& x,
                  const GoodSet& s, const Rational& eps);

// v_a(g) > eps * v_a(X_a)
bool is_valuable(const Instance& inst, int a, const Allocation& x, int g,
                 const Rational& eps);

// Peels goods off T while any agent (1-eps)-envies the remainder minus a
// good; the last peeler becomes the claimant. Requires a heavy envier of T.
Witness most_envious_witness(const Instance& inst, const Allocation& x,
                             const GoodSet& t, const Rational& eps);

// Pareto rule: an agent heavily envying the pool trades her bundle for a
// witness subset of it.
std::optional<Allocation> improve_pool_envy(const Instance& inst,
                                            const Allocation& x,
                                            const Rational& eps);

// Pareto rule: a pool good valuable to nobody goes to the first source.
std::optional<Allocation> allocate_nonvaluable(const Instance& inst,
                                               const Allocation& x,
                                               const Rational& eps);

// Pareto rule: a pool good nobody would heavily envy on top of a source's
// bundle goes to that source. Keeps the champion structure total for the
// group champion graph.
std::optional<Allocation> absorb_unenvied(const Instance& inst,
                                          const Allocation& x,
                                          const Rational& eps);

struct GcgVertex {
  int part;    // index into part_goods
  int good;    // the part's low-demand good
  int agent;   // leading agent finding the good valuable
  int source;  // source assigned to that agent
};

// t-partite graph over (low-demand good, assigned source) pairs. Edge
// u -> v when u's agent heavily envies the canonical witness of
// X_{v.source} + u.good.
struct GroupChampionGraph {
  int d = 0;
  Rational eps;
  std::vector<int> part_goods;  // ascending
  std::vector<GcgVertex> vertices;
  std::vector<std::vector<int>> parts;  // vertex ids per part
  std::vector<std::vector<int>> out;    // adjacency, ascending
  // Canonical witness of X_source + good, keyed by (source, good).
  std::map<std::pair<int, int>, Witness> witnesses;

  size_t vertex_count() const { return vertices.size(); }
  size_t part_count() const { return part_goods.size(); }
};

GroupChampionGraph build_group_champion_graph(const Instance& inst,
                                              const Allocation& x,
                                              const Rational& eps, int d);

struct RainbowSearchResult {
  std::optional<std::vector<int>> cycle;  // vertex ids
  bool exhausted = true;                  // search completed within budget
  long expansions = 0;
};

// Backtracking DFS over vertices carrying a visited-parts set.
RainbowSearchResult find_rainbow_cycle(const GroupChampionGraph& g,
                                       long budget = 100000);

// Shifts bundles along the composite cycle (envy paths source -> agent plus
// champion hops agent -> next source); champion recipients take witness
// subsets, displaced goods return to the pool.
Allocation resolve_rainbow_cycle(const Instance& inst, const Allocation& x,
                                 const std::vector<int>& cycle,
                                 const GroupChampionGraph& g,
                                 const Rational& eps);

// argmin over d in [1, k*ceil(2/eps)] of d*(floor(log2 d)+1) + ceil(2k/(eps d)).
int choose_d(int k, const Rational& eps);

struct CharityReport {
  Rational epsilon;
  int d = 0;
  int charity_size = 0;
  int high_demand = 0;
  int low_demand_parts = 0;
  long long high_demand_bound = 0;  // ceil(2k / (eps * d))
  bool rainbow_search_exhausted = true;
  bool bound_satisfied = false;
  long pool_envy_fired = 0;
  long nonvaluable_fired = 0;
  long absorb_fired = 0;
  long rainbow_fired = 0;
  long strict_peels = 0;
  bool certificate_pass = false;
  bool no_heavy_pool_envy = false;
  nlohmann::ordered_json to_json(const Instance& inst,
                                 const Allocation& x) const;
};

struct CharityResult {
  Allocation allocation;
  CharityReport report;
};

// (1-eps)-EFX with bounded charity: seed, then apply Pareto-improvement rules
// until none fires. Requires m >= n and eps in (0, 1/2]. strict_mode
// additionally peels plain pool envy (threshold eps = 0) after the main loop.
CharityResult charity_allocate(const Instance& inst, const Rational& eps,
                               std::optional<int> d_opt = std::nullopt,
                               Trace* trace = nullptr, bool strict_mode = false);

}  // namespace efx
