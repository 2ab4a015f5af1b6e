#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "efx/core.hpp"
#include "efx/envy_graph.hpp"
#include "test_util.hpp"

using namespace efx;
using testutil::make_instance;

TEST_SUITE("core") {

TEST_CASE("value_of sums bases and tags componentwise") {
  Instance inst = make_instance({{1, 1, 1, 1}}, {1});
  CHECK(value_of(inst, 0, {0, 1, 2}).base == Rational(3));
  CHECK(value_of(inst, 0, {}) == zero_value());

  Instance inst2 = make_instance({{2, 3}}, {1});
  Value v = value_of(inst2, 0, {0, 1});
  CHECK(v.base == Rational(5));
  CHECK(v.tag == Rational(3));  // 2^0 + 2^1
}

TEST_CASE("value_of rejects bad indices") {
  Instance inst = make_instance({{1, 2}}, {1});
  CHECK_THROWS_AS(value_of(inst, 1, {0}), input_error);
  CHECK_THROWS_AS(value_of(inst, 0, {5}), input_error);
}

TEST_CASE("tags make distinct bundles compare unequal") {
  std::mt19937_64 rng(11);
  Instance inst = gen_random_instance(2, {1, 1}, 6, 5, rng());
  for (int s = 0; s < 64; ++s)
    for (int t = 0; t < 64; ++t) {
      if (s == t) continue;
      GoodSet a, b;
      for (int g = 0; g < 6; ++g) {
        if (s & (1 << g)) a.insert(g);
        if (t & (1 << g)) b.insert(g);
      }
      CHECK(value_of(inst, 0, a) != value_of(inst, 0, b));
    }
}

TEST_CASE("is_alpha_efx_toward on the spec arithmetic") {
  // singleton target bundles never violate
  Instance one = make_instance({{9, 1}, {9, 1}}, {1, 1});
  Allocation x;
  x.bundles = {{1}, {0}};
  CHECK(is_alpha_efx_toward(one, 0, 1, x, Rational(1)));

  // own 1, other two goods worth 3 each, alpha 2/3: 1 < 2 fails
  Instance inst = make_instance({{1, 3, 3}, {1, 3, 3}}, {1, 1});
  Allocation y;
  y.bundles = {{0}, {1, 2}};
  CHECK_FALSE(is_alpha_efx_toward(inst, 0, 1, y, Rational(2, 3)));

  // own 2, other two goods worth 2 each: 2 >= 4/3 holds
  Instance inst2 = make_instance({{2, 2, 2}, {2, 2, 2}}, {1, 1});
  Allocation z;
  z.bundles = {{0}, {1, 2}};
  CHECK(is_alpha_efx_toward(inst2, 0, 1, z, Rational(2, 3)));
}

TEST_CASE("check_alpha_efx certificates") {
  Instance inst = make_instance({{4, 3, 2}, {1, 5, 2}}, {1, 1});
  Allocation singletons;
  singletons.bundles = {{0}, {1}};
  singletons.pool = {2};
  CHECK(check_alpha_efx(inst, singletons, Rational(1)).pass);

  Instance bad = make_instance({{1, 3, 3}, {1, 3, 3}}, {1, 1});
  Allocation y;
  y.bundles = {{0}, {1, 2}};
  EfxCertificate cert = check_alpha_efx(bad, y, Rational(2, 3));
  CHECK_FALSE(cert.pass);
  REQUIRE(!cert.violations.empty());
  CHECK(cert.violations[0].envier == 0);
  CHECK(cert.violations[0].envied == 1);
}

TEST_CASE("check_alpha_efx agrees with a direct removal loop") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 200; ++round) {
    int k = 1 + static_cast<int>(rng() % 2);
    std::vector<int> sizes(k, 1);
    if (k == 1) sizes[0] = 2 + static_cast<int>(rng() % 3);
    Instance inst = gen_random_instance(k, sizes, 1 + rng() % 6, 9, rng());
    Allocation x = testutil::random_allocation(inst, rng);
    Rational alpha(1 + rng() % 3, 3);

    bool direct = true;
    for (int a = 0; a < inst.n() && direct; ++a)
      for (int b = 0; b < inst.n() && direct; ++b) {
        if (a == b) continue;
        for (int h : x.bundles[b]) {
          GoodSet rest = x.bundles[b];
          rest.erase(h);
          if (inst.agent_bundle_value(a, x.bundles[a]) <
              alpha * inst.agent_bundle_value(a, rest)) {
            direct = false;
            break;
          }
        }
      }
    CHECK(check_alpha_efx(inst, x, alpha).pass == direct);
  }
}

TEST_CASE("alpha monotonicity: pass at 1 implies pass below") {
  std::mt19937_64 rng(31);
  int found = 0;
  for (int round = 0; round < 400 && found < 40; ++round) {
    Instance inst = gen_random_instance(2, {1, 2}, 1 + rng() % 5, 6, rng());
    Allocation x = testutil::random_allocation(inst, rng);
    if (!check_alpha_efx(inst, x, Rational(1)).pass) continue;
    ++found;
    CHECK(check_alpha_efx(inst, x, Rational(2, 3)).pass);
    CHECK(check_alpha_efx(inst, x, Rational(1, 2)).pass);
  }
  CHECK(found > 0);
}

TEST_CASE("check_charity") {
  Instance inst = make_instance({{1, 2, 3}}, {1});
  Allocation all;
  all.bundles = {{0, 1, 2}};
  CHECK(check_charity(inst, all, Rational(1), std::nullopt).pass);

  Allocation empty_handed;
  empty_handed.bundles = {{}};
  empty_handed.pool = {0, 1, 2};
  CHECK_FALSE(check_charity(inst, empty_handed, Rational(1), std::nullopt).pass);

  // (1 - eps) scaling: own 3, pool 5; 3 >= (1/2)*5 holds, 3 >= 5 does not
  Instance inst2 = make_instance({{3, 5}}, {1});
  Allocation part;
  part.bundles = {{0}};
  part.pool = {1};
  CHECK_FALSE(check_charity(inst2, part, Rational(1), std::nullopt).pass);
  CHECK(check_charity(inst2, part, Rational(1), Rational(1, 2)).pass);
}

TEST_CASE("is_critical strict comparison and pool precondition") {
  Instance inst = make_instance({{4, 3, 1}}, {1});
  Allocation x;
  x.bundles = {{0}};
  x.pool = {1, 2};
  CHECK(is_critical(inst, 0, 1, x, Rational(1, 2)));        // 3 > 2
  CHECK_FALSE(is_critical(inst, 0, 2, x, Rational(1, 2)));  // 1 < 2
  CHECK_THROWS_AS(is_critical(inst, 0, 0, x, Rational(1, 2)), input_error);
}

TEST_CASE("base ties in criticality are broken by tags") {
  // v(g2) = 2 equals beta * own base 4; own tag 2^0 scaled by 1/2 is far
  // below tag 2^2, so the strict Value comparison holds.
  Instance inst = make_instance({{4, 9, 2}}, {1});
  Allocation x;
  x.bundles = {{0}};
  x.pool = {1, 2};
  CHECK(is_critical(inst, 0, 2, x, Rational(1, 2)));
}

TEST_CASE("criticality propagates to the leading agent") {
  std::mt19937_64 rng(47);
  for (int round = 0; round < 100; ++round) {
    Instance inst = gen_random_instance(3, {2, 3, 2}, 2 + rng() % 8, 12, rng());
    Allocation x = enforce_ordering_invariant(
        inst, testutil::random_allocation(inst, rng));
    if (x.pool.empty()) continue;
    for (int t = 0; t < inst.k(); ++t) {
      int lead = inst.group_first(t);
      for (int j = 1; j < inst.group_size(t); ++j)
        for (int g : x.pool)
          if (is_critical(inst, lead + j, g, x, Rational(1, 2)))
            CHECK(is_critical(inst, lead, g, x, Rational(1, 2)));
    }
  }
}

TEST_CASE("critical_goods map") {
  Instance inst = make_instance({{2, 9}, {2, 1}}, {1, 1});
  Allocation x;
  x.bundles = {{0}, {}};
  x.pool = {1};
  auto crits = critical_goods(inst, x, Rational(1, 2));
  REQUIRE(crits.count(1));
  CHECK(crits[1] == std::vector<int>{0, 1});

  Allocation complete;
  complete.bundles = {{0}, {1}};
  CHECK(critical_goods(inst, complete, Rational(1, 2)).empty());
}

TEST_CASE("ordering invariant enforcement") {
  Instance inst = make_instance({{5, 1, 3}}, {2});
  Allocation x;
  x.bundles = {{0}, {1}};  // 5 before 1: out of order
  x.pool = {2};
  Allocation y = enforce_ordering_invariant(inst, x);
  CHECK(y.bundles[0] == GoodSet{1});
  CHECK(y.bundles[1] == GoodSet{0});
  CHECK(ordering_invariant_holds(inst, y));
  CHECK(enforce_ordering_invariant(inst, y) == y);
}

TEST_CASE("ordering invariant is idempotent on random states") {
  std::mt19937_64 rng(59);
  for (int round = 0; round < 100; ++round) {
    Instance inst = testutil::corpus_few_types(rng());
    Allocation x = testutil::random_allocation(inst, rng);
    Allocation once = enforce_ordering_invariant(inst, x);
    CHECK(enforce_ordering_invariant(inst, once) == once);
    CHECK(ordering_invariant_holds(inst, once));
    CHECK(once.is_partition(inst));
  }
}

TEST_CASE("leading_agents") {
  Instance inst = make_instance({{1, 2, 3}}, {3});
  Allocation x;
  x.bundles = {{0}, {1}, {2}};
  auto leaders = leading_agents(inst, x);
  CHECK(leaders == std::vector<int>{0});

  Instance inst4 = make_instance(
      {{1, 2, 3, 4}, {4, 3, 2, 1}, {1, 1, 1, 1}, {2, 2, 2, 2}}, {1, 1, 1, 1});
  Allocation y;
  y.bundles = {{0}, {1}, {2}, {3}};
  CHECK(leading_agents(inst4, y).size() == 4);

  // violated invariant is an internal error
  Instance two = make_instance({{5, 1}}, {2});
  Allocation bad;
  bad.bundles = {{0}, {1}};
  CHECK_THROWS_AS(leading_agents(two, bad), contract_error);
}

TEST_CASE("sources of the plain graph are leading agents") {
  std::mt19937_64 rng(61);
  for (int round = 0; round < 100; ++round) {
    Instance inst = testutil::corpus_few_types(rng());
    if (inst.m() < inst.n()) continue;
    Allocation x;
    x.bundles.assign(inst.n(), {});
    int g = 0;
    for (int a = 0; a < inst.n(); ++a) x.bundles[a] = {g++};
    for (; g < inst.m(); ++g) {
      if (rng() % 2)
        x.pool.insert(g);
      else
        x.bundles[rng() % inst.n()].insert(g);
    }
    x = enforce_ordering_invariant(inst, x);
    auto leaders = leading_agents(inst, x);
    EnvyGraph plain = build_envy_graph(inst, x, GraphKind::Plain);
    auto srcs = sources(plain);
    CHECK(srcs.size() <= static_cast<size_t>(inst.k()));
    for (int s : srcs)
      CHECK(std::find(leaders.begin(), leaders.end(), s) != leaders.end());
  }
}

TEST_CASE("explicit_perturbation") {
  Instance inst = make_instance({{5}}, {1});
  CHECK_THROWS_AS(explicit_perturbation(inst, Rational(0)), input_error);
  Instance p = explicit_perturbation(inst, Rational(1, 4));
  CHECK(p.base_value(0, 0) == Rational(21, 4));  // 5 + (1/4)*2^0
}

TEST_CASE("tag semantics equal explicit perturbation on small m") {
  std::mt19937_64 rng(67);
  std::vector<Rational> alphas = {Rational(1), Rational(2, 3), Rational(1, 2)};
  for (int round = 0; round < 10; ++round) {
    int m = 2 + static_cast<int>(rng() % 7);  // up to 8
    Instance inst = gen_random_instance(1, {1}, m, 20, rng());
    Rational eps(BigInt(1), pow2(m + 8));
    Instance pert = explicit_perturbation(inst, eps);

    std::vector<Value> tagged(1 << m);
    std::vector<Rational> folded(1 << m);
    for (int mask = 0; mask < (1 << m); ++mask) {
      GoodSet s;
      for (int g = 0; g < m; ++g)
        if (mask & (1 << g)) s.insert(g);
      tagged[mask] = value_of(inst, 0, s);
      folded[mask] = value_of(pert, 0, s).base;
    }
    for (const Rational& alpha : alphas)
      for (int a = 0; a < (1 << m); ++a)
        for (int b = 0; b < (1 << m); ++b) {
          Value lhs = alpha * tagged[a];
          int tag_cmp = lhs < tagged[b] ? -1 : (tagged[b] < lhs ? 1 : 0);
          Rational flhs = alpha * folded[a];
          int fold_cmp = flhs < folded[b] ? -1 : (folded[b] < flhs ? 1 : 0);
          REQUIRE(tag_cmp == fold_cmp);
        }
  }
}

TEST_CASE("instance and allocation JSON round-trips") {
  std::mt19937_64 rng(71);
  for (int round = 0; round < 50; ++round) {
    Instance inst = testutil::corpus_few_types(rng());
    Instance back = Instance::from_json(inst.to_json());
    CHECK(back.to_json() == inst.to_json());
    Allocation x = testutil::random_allocation(inst, rng);
    Allocation xb =
        Allocation::from_json(nlohmann::json::parse(x.to_json().dump()));
    CHECK(xb == x);
  }
  Instance frac = Instance::from_json(nlohmann::json::parse(
      R"({"m":2,"types":[{"count":1,"values":["3/2",4]}]})"));
  CHECK(frac.base_value(0, 0) == Rational(3, 2));
  CHECK(frac.base_value(0, 1) == Rational(4));
  CHECK_THROWS_AS(parse_rational("0.5"), input_error);
  CHECK_THROWS_AS(parse_rational("1/0"), input_error);
}

TEST_CASE("partition check") {
  Instance inst = make_instance({{1, 1}}, {1});
  Allocation ok;
  ok.bundles = {{0}};
  ok.pool = {1};
  CHECK(ok.is_partition(inst));
  Allocation dup;
  dup.bundles = {{0, 1}};
  dup.pool = {1};
  CHECK_FALSE(dup.is_partition(inst));
  Allocation missing;
  missing.bundles = {{0}};
  CHECK_FALSE(missing.is_partition(inst));
}

}  // TEST_SUITE core
