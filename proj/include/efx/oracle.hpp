#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "efx/allocation.hpp"
#include "efx/core.hpp"
#include "efx/trace.hpp"

namespace efx {

// Exhaustive search over every assignment of goods to agents (plus the pool
// unless complete_only). Enumeration is a mixed-radix counter over goods, so
// "first found" means the smallest counter index. The EFX predicate here is
// an independent pairwise-removal loop, deliberately not the min-removal
// shortcut the library checker uses.
struct OracleResult {
  std::optional<Allocation> found;
  std::uint64_t first_index = 0;  // counter index of the found assignment
  std::uint64_t examined = 0;     // total assignments enumerated
};

// Serial reference implementation, kept as the ground truth the parallel
// kernel is tested against.
OracleResult brute_force_serial(const Instance& inst, const Rational& alpha,
                                bool complete_only);

// OpenMP kernel: threads scan disjoint index blocks and keep a shared
// best-so-far index; the result is the same smallest index the serial scan
// finds. jobs = 0 uses the OpenMP default thread count.
OracleResult brute_force_parallel(const Instance& inst, const Rational& alpha,
                                  bool complete_only, int jobs = 0);

// Dispatcher: jobs <= 1 runs the serial reference.
OracleResult brute_force_exists_alpha_efx(const Instance& inst,
                                          const Rational& alpha,
                                          bool complete_only, int jobs = 1);

// (n+1)^m, the enumeration space size; input_error beyond the 1e8 guard.
std::uint64_t oracle_space(const Instance& inst, bool complete_only);

// Pairwise-removal re-check of a given allocation, independent of
// check_alpha_efx. Partial allocations additionally need nobody envying the
// pool.
bool oracle_recheck(const Instance& inst, const Allocation& x,
                    const Rational& alpha);

struct TraceVerifyReport {
  bool pass = true;
  int mismatch_index = -1;  // -1: none; records index otherwise
  std::string detail;
};

// Replays the producing algorithm deterministically and compares the fresh
// trace record by record; per-step invariants are re-asserted by the
// algorithms themselves during the replay.
TraceVerifyReport verify_trace(const Trace& trace, const Instance& inst);

}  // namespace efx
