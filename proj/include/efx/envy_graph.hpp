#pragma once

#include <optional>
#include <string>
#include <vector>

#include "efx/allocation.hpp"
#include "efx/core.hpp"

namespace efx {

enum class GraphKind { Plain, Reduced, Enhanced };

enum class EdgeLabel { Envy, Red };

const char* graph_kind_name(GraphKind kind);

// Directed graph over agents. Plain: (a,b) iff a envies b. Reduced: plain
// minus edges (a,b) with |X_a|>1, |X_b|=1, v_a(X_a) >= (2/3) v_a(X_b).
// Enhanced: reduced plus red edges (a,s) with s a source of the reduced
// graph, |X_a|=1, |X_s|>1, v_a(X_s) >= (2/3) v_a(X_a).
struct EnvyGraph {
  GraphKind kind = GraphKind::Plain;
  int n = 0;
  std::vector<std::vector<std::pair<int, EdgeLabel>>> out;  // sorted by target
  std::vector<int> indegree;

  std::optional<EdgeLabel> edge_label(int a, int b) const;
  bool has_edge(int a, int b) const { return edge_label(a, b).has_value(); }
  size_t edge_count() const;
  size_t count_label(EdgeLabel label) const;
};

EnvyGraph build_envy_graph(const Instance& inst, const Allocation& x,
                           GraphKind kind);

// Agents with in-degree 0, ascending.
std::vector<int> sources(const EnvyGraph& g);

// Some directed cycle as an agent sequence (edges c[i] -> c[i+1], wrapping),
// or nothing if acyclic. Ordered DFS makes the choice deterministic.
std::optional<std::vector<int>> find_cycle(const EnvyGraph& g);

// A simple directed path from -> to (BFS, ascending neighbor order), or
// nothing if unreachable. from == to yields the single-node path.
std::optional<std::vector<int>> find_path(const EnvyGraph& g, int from, int to);

// Path from the unique source to a leading agent that visits only leading
// agents. Preconditions mirror the structural lemma it implements: ge acyclic
// with the given unique source, all non-source leading agents hold singleton
// bundles, target leading. Violations throw contract_error.
std::vector<int> leading_path(const Instance& inst, const Allocation& x,
                              const EnvyGraph& ge, int source, int target);

std::string to_dot(const Instance& inst, const EnvyGraph& g);

}  // namespace efx
