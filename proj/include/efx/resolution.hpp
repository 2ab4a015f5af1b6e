#pragma once

#include <optional>
#include <vector>

#include "efx/allocation.hpp"
#include "efx/core.hpp"
#include "efx/envy_graph.hpp"
#include "efx/trace.hpp"

namespace efx {

// phi(X) = product over agents with nonempty bundles of w(|X_a|) * v_a(X_a),
// w(1) = 1 and w(x) = 3/2 for x >= 2. The product is taken over base values;
// the sorted factor multiset (with tags) breaks base-equal comparisons.
struct Potential {
  Rational product;
  std::vector<Value> factors;  // sorted ascending
};

Potential potential_phi(const Instance& inst, const Allocation& x);

// -1, 0, +1: product first, sorted factor vectors on ties.
int potential_compare(const Potential& a, const Potential& b);

// Each agent on the cycle receives its successor's bundle (edges c[i] ->
// c[i+1], wrapping). Ordering invariant re-enforced afterwards.
Allocation cycle_resolution(const Instance& inst, const Allocation& x,
                            const EnvyGraph& g, const std::vector<int>& cycle,
                            Trace* trace = nullptr);

// Resolves until the graph of the given kind is acyclic. phi strictly
// increases per resolution on reduced/enhanced graphs; the total utility
// strictly increases on plain graphs. Both are asserted.
Allocation all_cycles_resolution(const Instance& inst, const Allocation& x,
                                 GraphKind kind, Trace* trace = nullptr);

// Shifts bundles along the path: agents pi[0..l-2] each take their
// successor's bundle. The last agent's bundle is left dangling (held twice);
// the caller must reassign it. Only path_resolution_star and singleton_pool
// call this.
Allocation path_resolution(const Allocation& x, const EnvyGraph& g,
                           const std::vector<int>& pi);

// Path must start at a source s of g with |X_s| = 2. Shifts bundles along pi;
// the final agent i receives her favorite good of X_s plus her favorite pool
// good; the rest of X_s returns to the pool.
Allocation path_resolution_star(const Instance& inst, const Allocation& x,
                                const EnvyGraph& g, const std::vector<int>& pi,
                                Trace* trace = nullptr);

// |P(X)| = 1 with good g, some singleton-holder i has v_i(g) > (2/3)v_i(X_i),
// i is not a source of the reduced graph and no reduced-graph source holds a
// single good. Runs path_resolution_star along a reduced-graph path from a
// source to i; one different good returns to the pool.
Allocation singleton_pool(const Instance& inst, const Allocation& x,
                          Trace* trace = nullptr);

// Completes a critical-free alpha-EFX partial allocation by repeatedly handing
// the first source of the plain envy graph its most valuable pool good and
// resolving cycles. Output passes check_alpha_efx at min(alpha, 2/3).
Allocation ece_completion(const Instance& inst, const Allocation& x,
                          const Rational& alpha, Trace* trace = nullptr);

}  // namespace efx
