#include "efx/envy_graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "efx/errors.hpp"

namespace efx {

const char* graph_kind_name(GraphKind kind) {
  switch (kind) {
    case GraphKind::Plain: return "plain";
    case GraphKind::Reduced: return "reduced";
    case GraphKind::Enhanced: return "enhanced";
  }
  return "?";
}

std::optional<EdgeLabel> EnvyGraph::edge_label(int a, int b) const {
  for (const auto& [to, label] : out[a])
    if (to == b) return label;
  return std::nullopt;
}

size_t EnvyGraph::edge_count() const {
  size_t c = 0;
  for (const auto& adj : out) c += adj.size();
  return c;
}

size_t EnvyGraph::count_label(EdgeLabel label) const {
  size_t c = 0;
  for (const auto& adj : out)
    for (const auto& [to, l] : adj)
      if (l == label) ++c;
  return c;
}

EnvyGraph build_envy_graph(const Instance& inst, const Allocation& x,
                           GraphKind kind) {
  const int n = inst.n();
  const Rational two_thirds(2, 3);
  EnvyGraph g;
  g.kind = kind;
  g.n = n;
  g.out.assign(n, {});
  g.indegree.assign(n, 0);

  std::vector<Value> own(n);
  for (int a = 0; a < n; ++a)
    own[a] = inst.agent_bundle_value(a, x.bundles[a]);

  auto add_edge = [&](int a, int b, EdgeLabel label) {
    g.out[a].emplace_back(b, label);
    ++g.indegree[b];
  };

  for (int a = 0; a < n; ++a) {
    int t = inst.type_of(a);
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      Value other = inst.bundle_value(t, x.bundles[b]);
      if (!(own[a] < other)) continue;  // a envies b
      if (kind != GraphKind::Plain && x.bundles[a].size() > 1 &&
          x.bundles[b].size() == 1 && own[a] >= two_thirds * other)
        continue;  // dropped in the reduced graph
      add_edge(a, b, EdgeLabel::Envy);
    }
  }

  if (kind == GraphKind::Enhanced) {
    // Red edges point at sources of the reduced graph, which at this point is
    // exactly the edge set built above.
    std::vector<int> reduced_indegree = g.indegree;
    for (int s = 0; s < n; ++s) {
      if (reduced_indegree[s] != 0 || x.bundles[s].size() <= 1) continue;
      for (int a = 0; a < n; ++a) {
        if (a == s || x.bundles[a].size() != 1) continue;
        if (g.edge_label(a, s)) continue;  // already an envy edge? impossible
                                           // for true sources, kept as a guard
        Value vs = inst.agent_bundle_value(a, x.bundles[s]);
        if (vs >= two_thirds * own[a]) add_edge(a, s, EdgeLabel::Red);
      }
    }
    for (auto& adj : g.out) std::sort(adj.begin(), adj.end());
  }
  return g;
}

std::vector<int> sources(const EnvyGraph& g) {
  std::vector<int> result;
  for (int a = 0; a < g.n; ++a)
    if (g.indegree[a] == 0) result.push_back(a);
  return result;
}

std::optional<std::vector<int>> find_cycle(const EnvyGraph& g) {
  enum { White, Gray, Black };
  std::vector<int> color(g.n, White);
  std::vector<int> stack;

  // Iterative DFS keeping the gray path on an explicit stack.
  std::vector<std::pair<int, size_t>> frames;
  for (int start = 0; start < g.n; ++start) {
    if (color[start] != White) continue;
    frames.emplace_back(start, 0);
    color[start] = Gray;
    stack.push_back(start);
    while (!frames.empty()) {
      auto& [v, idx] = frames.back();
      if (idx < g.out[v].size()) {
        int to = g.out[v][idx].first;
        ++idx;
        if (color[to] == Gray) {
          auto it = std::find(stack.begin(), stack.end(), to);
          return std::vector<int>(it, stack.end());
        }
        if (color[to] == White) {
          color[to] = Gray;
          stack.push_back(to);
          frames.emplace_back(to, 0);
        }
      } else {
        color[v] = Black;
        stack.pop_back();
        frames.pop_back();
      }
    }
  }
  return std::nullopt;
}

std::optional<std::vector<int>> find_path(const EnvyGraph& g, int from, int to) {
  if (from == to) return std::vector<int>{from};
  std::vector<int> parent(g.n, -1);
  std::deque<int> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (const auto& [next, label] : g.out[v]) {
      (void)label;
      if (parent[next] != -1) continue;
      parent[next] = v;
      if (next == to) {
        std::vector<int> path{to};
        for (int cur = to; cur != from; cur = parent[cur]) path.push_back(parent[cur]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

std::vector<int> leading_path(const Instance& inst, const Allocation& x,
                              const EnvyGraph& ge, int source, int target) {
  if (find_cycle(ge))
    throw contract_error("leading_path: graph has cycles");
  std::vector<int> srcs = sources(ge);
  if (srcs.size() != 1 || srcs[0] != source)
    throw contract_error("leading_path: given source is not the unique source");
  std::vector<int> leaders = leading_agents(inst, x);
  std::vector<bool> is_leader(inst.n(), false);
  for (int a : leaders) is_leader[a] = true;
  if (!is_leader[target]) throw contract_error("leading_path: target not leading");
  for (int a : leaders)
    if (a != source && x.bundles[a].size() != 1)
      throw contract_error("leading_path: non-source leader without singleton");

  // BFS inside the subgraph induced by the leading agents.
  EnvyGraph sub;
  sub.kind = ge.kind;
  sub.n = ge.n;
  sub.out.assign(ge.n, {});
  sub.indegree.assign(ge.n, 0);
  for (int a : leaders)
    for (const auto& [to, label] : ge.out[a])
      if (is_leader[to]) {
        sub.out[a].emplace_back(to, label);
        ++sub.indegree[to];
      }
  auto path = find_path(sub, source, target);
  if (!path)
    throw contract_error("leading_path: target unreachable through leaders");
  return *path;
}

std::string to_dot(const Instance& inst, const EnvyGraph& g) {
  std::ostringstream os;
  os << "digraph " << graph_kind_name(g.kind) << " {\n";
  for (int a = 0; a < g.n; ++a)
    os << "  n" << a << " [label=\"" << inst.agent_label(a) << "\"];\n";
  for (int a = 0; a < g.n; ++a)
    for (const auto& [to, label] : g.out[a])
      os << "  n" << a << " -> n" << to << " [label="
         << (label == EdgeLabel::Red ? "red" : "envy") << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace efx
