#pragma once

#include <optional>
#include <set>

#include "efx/allocation.hpp"
#include "efx/core.hpp"
#include "efx/envy_graph.hpp"
#include "efx/trace.hpp"

namespace efx {

enum class CriticalCase {
  NoCriticals,
  TwoCritTwoSources,
  AtMostTwoCritOneSource,
  ThreeCritSingletonD,
  ThreeCritBigDKeepAll,
  ThreeCritBigDSplit,
};

const char* critical_case_name(CriticalCase c);

// Distributes the <= 3 contested critical goods onto enhanced-graph sources
// (or the source's group mate) by case analysis on |C| and the source count.
// The result is 2/3-EFX and weakly improves every agent.
Allocation allocate_criticals(const Instance& inst, const Allocation& x,
                              const std::set<int>& criticals,
                              const EnvyGraph& ge,
                              CriticalCase* fired_case = nullptr,
                              Trace* trace = nullptr);

struct FewTypesResult {
  Allocation allocation;
  EfxCertificate certificate;
  CriticalCase fired_case = CriticalCase::NoCriticals;
};

// End-to-end 2/3-EFX allocation for instances with at most four agent types:
// seed, run the step loop, place critical goods, complete with envy-cycle
// elimination. The certificate embeds the exact checker output.
FewTypesResult few_types_allocate(const Instance& inst, Trace* trace = nullptr);

}  // namespace efx
