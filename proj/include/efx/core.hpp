#pragma once

#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "efx/allocation.hpp"
#include "efx/instance.hpp"
#include "efx/value.hpp"

namespace efx {

struct Params {
  Rational alpha = Rational(2, 3);
  Rational beta = Rational(1, 2);
  Rational epsilon = Rational(1, 2);
};

// One failing (envier, envied, removed good) triple with the exact values.
struct EfxViolation {
  int envier;
  int envied;
  int removed_good;
  Value own;
  Value scaled_other;  // alpha * v_envier(X_envied \ removed_good)
};

struct EfxCertificate {
  bool pass = true;
  Rational alpha;
  std::vector<EfxViolation> violations;
  nlohmann::ordered_json to_json() const;
};

struct CharityViolation {
  int agent;
  Value own;
  Value pool_threshold;  // v_a(P(X)) or (1-eps) * v_a(P(X))
};

struct CharityCertificate {
  bool pass = true;
  std::optional<Rational> heavy_epsilon;
  std::vector<CharityViolation> violations;
  nlohmann::ordered_json to_json() const;
};

Value value_of(const Instance& inst, int type, const GoodSet& goods);

// v_a(X_a) >= alpha * v_a(X_b \ h) for every h in X_b. For additive values
// this reduces to one comparison against the removal of a's least-valued good
// of X_b.
bool is_alpha_efx_toward(const Instance& inst, int a, int b,
                         const Allocation& x, const Rational& alpha);

EfxCertificate check_alpha_efx(const Instance& inst, const Allocation& x,
                               const Rational& alpha);

// heavy_epsilon absent: no agent envies the pool. Present: no agent envies
// the pool up to the factor (1 - eps).
CharityCertificate check_charity(const Instance& inst, const Allocation& x,
                                 const Rational& alpha,
                                 const std::optional<Rational>& heavy_epsilon);

// g is beta-critical for a: v_a(g) > beta * v_a(X_a). g must be pooled.
bool is_critical(const Instance& inst, int a, int g, const Allocation& x,
                 const Rational& beta);

// Every pool good with a nonempty claimant set.
std::map<int, std::vector<int>> critical_goods(const Instance& inst,
                                               const Allocation& x,
                                               const Rational& beta);

// Within each group, permute bundles so values are non-decreasing.
Allocation enforce_ordering_invariant(const Instance& inst, Allocation x);
bool ordering_invariant_holds(const Instance& inst, const Allocation& x);

// First agent of each group; requires the ordering invariant.
std::vector<int> leading_agents(const Instance& inst, const Allocation& x);

// Folds the symbolic tags into the base values: v'[t][g] = v[t][g] + eps*2^g.
// Exists to cross-validate the tag semantics on tiny instances.
Instance explicit_perturbation(const Instance& inst, const Rational& epsilon);

}  // namespace efx
