#include <gtest/gtest.h>

#include <random>

#include "descend/nat.hpp"

using namespace descend;

namespace {

Nat v(const char* n) { return Nat::var(n); }
Nat l(std::uint64_t x) { return Nat::lit(x); }

// Random expressions over m, n, k with + and *.
class NatGen {
 public:
  explicit NatGen(std::uint64_t seed) : rng_(seed) {}

  Nat expr(int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 1);
    switch (pick(rng_)) {
      case 0: return l(std::uniform_int_distribution<std::uint64_t>(0, 8)(rng_));
      case 1: return v(vars_[std::uniform_int_distribution<int>(0, 2)(rng_)]);
      case 2:
      case 3: return expr(depth - 1) + expr(depth - 1);
      default: return expr(depth - 1) * expr(depth - 1);
    }
  }

  NatValues env() {
    std::uniform_int_distribution<std::int64_t> d(1, 16);
    return {{"m", d(rng_)}, {"n", d(rng_)}, {"k", d(rng_)}};
  }

 private:
  std::mt19937_64 rng_;
  const char* vars_[3] = {"m", "n", "k"};
};

TEST(NatNormalize, FoldsConstants) { EXPECT_EQ(normalize(l(2) * l(4) + l(1)), l(9)); }

TEST(NatNormalize, CollectsLikeTerms) { EXPECT_EQ(normalize(v("n") + v("n")), normalize(l(2) * v("n"))); }

TEST(NatNormalize, SortsMonomialVariables) {
  EXPECT_EQ(normalize(v("m") * v("n")), normalize(v("n") * v("m")));
  EXPECT_EQ(normalize(v("n") * v("m")).str(), "m*n");
}

TEST(NatEq, Examples) {
  EXPECT_EQ(nat_eq(v("n") + v("n"), l(2) * v("n")), Tri::True);
  EXPECT_EQ(nat_eq(l(32), l(1024)), Tri::False);
  EXPECT_EQ(nat_eq(v("n"), v("m")), Tri::Unknown);
}

TEST(NatDivides, Examples) {
  EXPECT_EQ(divides(l(8), l(32)), Tri::True);
  EXPECT_EQ(divides(l(8), v("k") * l(8)), Tri::True);
  EXPECT_EQ(divides(l(3), l(32)), Tri::False);
  EXPECT_THROW(divides(l(0), l(4)), NatError);
}

TEST(NatLe, Examples) {
  EXPECT_EQ(nat_le(l(32), l(64)), Tri::True);
  EXPECT_EQ(nat_le(l(64), l(32)), Tri::False);
  EXPECT_EQ(nat_le(v("k"), v("n")), Tri::Unknown);
}

TEST(NatSubst, Examples) {
  EXPECT_EQ(normalize(subst(v("n") / l(32), {{"n", l(1024)}})), l(32));
  EXPECT_EQ(nat_eq(subst(v("n") + v("m"), {{"n", l(2)}}), v("m") + l(2)), Tri::True);
  EXPECT_EQ(subst(l(5), {{"n", l(9)}}), l(5));
}

TEST(NatEvaluate, FloorDivisionAndMissingVariables) {
  EXPECT_EQ(evaluate(v("n") / l(4), {{"n", 9}}), 2);
  EXPECT_EQ(evaluate(v("n") % l(4), {{"n", 9}}), 1);
  EXPECT_EQ(evaluate(v("n"), {}), std::nullopt);
  EXPECT_EQ(evaluate(l(4) / (v("n") - v("n")), {{"n", 3}}), std::nullopt);
}

TEST(NatProperty, NormalizeIsIdempotentAndPreservesValue) {
  NatGen g(0x5eed01);
  for (int i = 0; i < 2000; ++i) {
    Nat n = g.expr(4);
    Nat once = normalize(n);
    ASSERT_EQ(normalize(once), once) << n.str();
    for (int j = 0; j < 4; ++j) {
      NatValues env = g.env();
      ASSERT_EQ(evaluate(once, env), evaluate(n, env)) << n.str();
    }
  }
}

TEST(NatProperty, DefiniteEqualityAnswersAreSound) {
  NatGen g(0x5eed02);
  int definite = 0;
  for (int i = 0; i < 3000; ++i) {
    Nat a = g.expr(2), b = g.expr(2);
    Tri t = nat_eq(a, b);
    if (t == Tri::Unknown) continue;
    ++definite;
    for (int j = 0; j < 8; ++j) {
      NatValues env = g.env();
      if (t == Tri::True) {
        ASSERT_EQ(evaluate(a, env), evaluate(b, env)) << a.str() << " vs " << b.str();
      }
    }
    if (t == Tri::False) {
      ASSERT_NE(evaluate(a, {}), evaluate(b, {})) << a.str() << " vs " << b.str();
    }
  }
  EXPECT_GT(definite, 100);
}

TEST(NatProperty, DivisibilityIsSoundOnSmallAssignments) {
  NatGen g(0x5eed03);
  std::mt19937_64 rng(0x5eed04);
  for (int i = 0; i < 1500; ++i) {
    Nat k = l(std::uniform_int_distribution<std::uint64_t>(1, 8)(rng));
    Nat n = g.expr(3);
    if (divides(k, n) != Tri::True) continue;
    for (std::int64_t m = 1; m <= 16; ++m) {
      NatValues env{{"m", m}, {"n", (m * 5) % 16 + 1}, {"k", (m * 11) % 16 + 1}};
      ASSERT_EQ(*evaluate(n, env) % *evaluate(k, env), 0) << k.str() << " | " << n.str();
    }
  }
}

TEST(NatProperty, LessOrEqualIsSoundOnGroundValues) {
  NatGen g(0x5eed05);
  for (int i = 0; i < 1500; ++i) {
    Nat a = g.expr(2), b = g.expr(2);
    Tri t = nat_le(a, b);
    for (int j = 0; j < 6 && t != Tri::Unknown; ++j) {
      NatValues env = g.env();
      auto x = evaluate(a, env), y = evaluate(b, env);
      if (t == Tri::True) ASSERT_LE(*x, *y) << a.str() << " <= " << b.str();
    }
  }
}

}  // namespace
