#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "efx/allocation.hpp"
#include "efx/core.hpp"
#include "efx/envy_graph.hpp"
#include "efx/trace.hpp"

namespace efx {

// Step ids of the property-preserving allocation loop. Steps are tried
// strictly in this order each iteration; the first whose condition holds
// fires. S9_1 / S9_2 are gates for the four-type extension and never fire on
// their own.
enum class StepId {
  S1, S2, S3, S4, S5, S6, S7, S8, S9,
  S9_1, S9_2_gate, S9_3, S9_4,
};

const char* step_name(StepId id);

// Canonical bundle tuple: per group in fixed group order, the group's bundles
// sorted by value ascending, each bundle as a sorted good list. Two
// allocations with the same per-group bundle multisets compare equal.
using Configuration = std::vector<std::vector<int>>;

Configuration configuration_of(const Instance& inst, const Allocation& x);
std::string configuration_hash(const Configuration& c);

// Serial dictatorship: agents in flat order pick their favorite remaining
// good (everyone gets one when m > n; trailing agents stay empty otherwise).
// The plain envy graph of the result is acyclic.
Allocation seed_allocation(const Instance& inst);

struct PpaStepResult {
  StepId id;
  Allocation after;
  std::vector<int> actors;
};

// One iteration of the loop; nothing fires -> loop exit. types_mode enables
// the S9_x gates (they require exactly four groups).
std::optional<PpaStepResult> ppa_step(const Instance& inst, const Allocation& x,
                                      bool types_mode, Trace* trace = nullptr);

// Shift bundles along a path of leading agents: z_j <- X_{z_{j+1}} for
// j in [2, l-1], z_star <- X_{z_2}, z_l <- S. z_star must be in the same
// group as z_1. Pool fixups (for S9_4) are the caller's job; ordering
// invariant is re-enforced here.
Allocation pseudo_cycle_resolution(const Instance& inst, const Allocation& x,
                                   const std::vector<int>& pi, int z_star,
                                   const GoodSet& s);

struct PropertyReport {
  bool p1 = true;  // singleton holders are EFX towards everyone
  bool p2 = true;  // everyone is 2/3-EFX towards everyone
  bool p3 = true;  // multi-good holders have no critical pool goods
  bool p4 = true;  // singleton holders: at most one critical pool good, <= 2/3
  std::string detail;
  bool p12() const { return p1 && p2; }
  bool all() const { return p1 && p2 && p3 && p4; }
};

PropertyReport check_ppa_properties(const Instance& inst, const Allocation& x);

// Runs the loop to exhaustion. Output has size <= 2 and satisfies all four
// properties; when incomplete, the enhanced graph has >= 1 source and every
// source holds exactly two goods. Asserts the per-step properties, the
// non-repetition of configurations recorded before S9_3/S9_4 firings, and the
// 2/3 lower bound on group minima.
Allocation run_ppa_types(const Instance& inst, const Allocation& x0,
                         Trace* trace = nullptr);

}  // namespace efx
