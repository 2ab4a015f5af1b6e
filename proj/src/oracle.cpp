#include "efx/oracle.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <atomic>

#include "efx/charity.hpp"
#include "efx/errors.hpp"
#include "efx/few_types.hpp"

namespace efx {

namespace {

constexpr std::uint64_t kSpaceGuard = 100'000'000ull;

// assignment[g] in [0, radix); value n means "pool" when pooling is allowed.
struct Enumeration {
  int m;
  int n;
  int radix;
  bool complete_only;

  void decode(std::uint64_t index, std::vector<int>& assignment) const {
    for (int g = 0; g < m; ++g) {
      assignment[g] = static_cast<int>(index % radix);
      index /= radix;
    }
  }
};

// Direct double loop over pairs and removals, summed good by good. This is
// the ground-truth predicate; it must not share code with check_alpha_efx.
bool pairwise_efx_ok(const Instance& inst, const std::vector<GoodSet>& bundles,
                     const GoodSet& pool, const Rational& alpha) {
  const int n = inst.n();
  for (int a = 0; a < n; ++a) {
    int t = inst.type_of(a);
    Value own = zero_value();
    for (int g : bundles[a]) own += inst.good_value(t, g);
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      for (int removed : bundles[b]) {
        Value rest = zero_value();
        for (int g : bundles[b])
          if (g != removed) rest += inst.good_value(t, g);
        if (own < alpha * rest) return false;
      }
    }
    if (!pool.empty()) {
      Value pool_v = zero_value();
      for (int g : pool) pool_v += inst.good_value(t, g);
      if (own < pool_v) return false;
    }
  }
  return true;
}

bool candidate_ok(const Instance& inst, const Enumeration& e,
                  const std::vector<int>& assignment, const Rational& alpha,
                  std::vector<GoodSet>& bundles, GoodSet& pool) {
  for (auto& b : bundles) b.clear();
  pool.clear();
  for (int g = 0; g < e.m; ++g) {
    if (assignment[g] == e.n)
      pool.insert(g);
    else
      bundles[assignment[g]].insert(g);
  }
  return pairwise_efx_ok(inst, bundles, pool, alpha);
}

Allocation materialize(const Instance& inst, const Enumeration& e,
                       std::uint64_t index) {
  std::vector<int> assignment(e.m);
  e.decode(index, assignment);
  Allocation x;
  x.bundles.assign(inst.n(), {});
  for (int g = 0; g < e.m; ++g) {
    if (assignment[g] == e.n)
      x.pool.insert(g);
    else
      x.bundles[assignment[g]].insert(g);
  }
  return x;
}

Enumeration make_enumeration(const Instance& inst, bool complete_only) {
  Enumeration e;
  e.m = inst.m();
  e.n = inst.n();
  e.complete_only = complete_only;
  e.radix = complete_only ? inst.n() : inst.n() + 1;
  return e;
}

}  // namespace

std::uint64_t oracle_space(const Instance& inst, bool complete_only) {
  std::uint64_t radix = complete_only ? inst.n() : inst.n() + 1;
  std::uint64_t total = 1;
  for (int g = 0; g < inst.m(); ++g) {
    if (total > kSpaceGuard / radix + 1)
      throw input_error("oracle: search space exceeds the 1e8 guard");
    total *= radix;
  }
  if (total > kSpaceGuard)
    throw input_error("oracle: search space exceeds the 1e8 guard");
  return total;
}

OracleResult brute_force_serial(const Instance& inst, const Rational& alpha,
                                bool complete_only) {
  Enumeration e = make_enumeration(inst, complete_only);
  const std::uint64_t total = oracle_space(inst, complete_only);
  std::vector<int> assignment(e.m);
  std::vector<GoodSet> bundles(inst.n());
  GoodSet pool;

  OracleResult result;
  for (std::uint64_t index = 0; index < total; ++index) {
    ++result.examined;
    e.decode(index, assignment);
    if (candidate_ok(inst, e, assignment, alpha, bundles, pool)) {
      result.found = materialize(inst, e, index);
      result.first_index = index;
      return result;
    }
  }
  return result;
}

OracleResult brute_force_parallel(const Instance& inst, const Rational& alpha,
                                  bool complete_only, int jobs) {
  Enumeration e = make_enumeration(inst, complete_only);
  const std::uint64_t total = oracle_space(inst, complete_only);

#ifdef _OPENMP
  std::atomic<std::uint64_t> best(total);
  std::atomic<std::uint64_t> examined(0);
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (total + kBlock - 1) / kBlock;

  if (jobs > 0) omp_set_num_threads(jobs);
#pragma omp parallel
  {
    std::vector<int> assignment(e.m);
    std::vector<GoodSet> bundles(inst.n());
    GoodSet pool;
    std::uint64_t local_examined = 0;
#pragma omp for schedule(dynamic, 1)
    for (long long blk = 0; blk < static_cast<long long>(blocks); ++blk) {
      std::uint64_t begin = static_cast<std::uint64_t>(blk) * kBlock;
      if (begin >= best.load(std::memory_order_relaxed)) continue;
      std::uint64_t end = std::min(begin + kBlock, total);
      for (std::uint64_t index = begin; index < end; ++index) {
        if (index >= best.load(std::memory_order_relaxed)) break;
        ++local_examined;
        e.decode(index, assignment);
        if (candidate_ok(inst, e, assignment, alpha, bundles, pool)) {
          std::uint64_t cur = best.load(std::memory_order_relaxed);
          while (index < cur &&
                 !best.compare_exchange_weak(cur, index,
                                             std::memory_order_relaxed)) {
          }
          break;
        }
      }
    }
    examined.fetch_add(local_examined, std::memory_order_relaxed);
  }

  OracleResult result;
  result.examined = examined.load();
  if (best.load() < total) {
    result.first_index = best.load();
    result.found = materialize(inst, e, result.first_index);
  }
  return result;
#else
  (void)jobs;
  return brute_force_serial(inst, alpha, complete_only);
#endif
}

OracleResult brute_force_exists_alpha_efx(const Instance& inst,
                                          const Rational& alpha,
                                          bool complete_only, int jobs) {
  if (jobs == 1) return brute_force_serial(inst, alpha, complete_only);
  return brute_force_parallel(inst, alpha, complete_only, jobs);
}

bool oracle_recheck(const Instance& inst, const Allocation& x,
                    const Rational& alpha) {
  return pairwise_efx_ok(inst, x.bundles, x.pool, alpha);
}

TraceVerifyReport verify_trace(const Trace& trace, const Instance& inst) {
  TraceVerifyReport report;
  if (trace.empty()) return report;  // nothing to contradict
  if (!trace.header.is_object() || !trace.header.contains("algo")) {
    report.pass = false;
    report.detail = "trace header lacks an algo field";
    return report;
  }
  std::string algo = trace.header.at("algo").get<std::string>();

  Trace fresh;
  try {
    if (algo == "fewtypes") {
      few_types_allocate(inst, &fresh);
    } else if (algo == "charity") {
      Rational eps =
          parse_rational(trace.header.at("epsilon").get<std::string>());
      int d = trace.header.at("d").get<int>();
      bool strict = trace.header.value("strict", false);
      charity_allocate(inst, eps, d, &fresh, strict);
    } else {
      report.pass = false;
      report.detail = "unknown algo in trace header: " + algo;
      return report;
    }
  } catch (const std::exception& e) {
    report.pass = false;
    report.detail = std::string("replay raised: ") + e.what();
    return report;
  }

  if (fresh.header != trace.header) {
    report.pass = false;
    report.detail = "header mismatch";
    return report;
  }
  size_t common = std::min(fresh.records.size(), trace.records.size());
  for (size_t i = 0; i < common; ++i) {
    if (fresh.records[i] != trace.records[i]) {
      report.pass = false;
      report.mismatch_index = static_cast<int>(i);
      report.detail = "record " + std::to_string(i) +
                      " diverges: expected " + fresh.records[i].dump() +
                      ", trace has " + trace.records[i].dump();
      return report;
    }
  }
  if (fresh.records.size() != trace.records.size()) {
    report.pass = false;
    report.mismatch_index = static_cast<int>(common);
    report.detail = "trace has " + std::to_string(trace.records.size()) +
                    " records, replay produced " +
                    std::to_string(fresh.records.size());
  }
  return report;
}

}  // namespace efx
