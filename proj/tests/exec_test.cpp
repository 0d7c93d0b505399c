#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "descend/exec.hpp"
#include "descend/interp.hpp"

using namespace descend;

namespace {

Dim dim(std::initializer_list<std::pair<Axis, std::uint64_t>> axes) {
  Dim d;
  for (const auto& [a, n] : axes) d.axes.push_back({a, Nat::lit(n)});
  return d;
}

ExecResource grid_1d() { return ExecResource::grid(dim({{Axis::X, 2}}), dim({{Axis::X, 2}})); }

TEST(ExecForall, RecordsThePath) {
  auto g = ExecResource::grid(dim({{Axis::X, 2}, {Axis::Y, 2}, {Axis::Z, 1}}),
                              dim({{Axis::X, 4}, {Axis::Y, 4}, {Axis::Z, 4}}));
  auto e = refine_forall(refine_forall(g, Axis::X), Axis::Z);
  ASSERT_EQ(e.path().size(), 2u);
  EXPECT_EQ(e.path()[0].kind, ExecStep::Kind::Forall);
  EXPECT_EQ(e.path()[0].axis, Axis::X);
  EXPECT_EQ(e.path()[1].axis, Axis::Z);
  EXPECT_EQ(e.path()[1].level, DimLevel::Block);
  EXPECT_EQ(e.remaining_axes(), std::vector<Axis>{Axis::Y});
}

TEST(ExecForall, AbsentAxisIsAnError) {
  try {
    refine_forall(grid_1d(), Axis::Y);
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.kind, ExecError::Kind::AxisAbsent);
  }
}

TEST(ExecForall, BlockAxesAreConsumedBeforeThreadAxes) {
  auto b = refine_forall(grid_1d(), Axis::X);
  EXPECT_EQ(b.active_level(), DimLevel::Thread);
  auto t = refine_forall(b, Axis::X);
  EXPECT_EQ(t.path()[1].level, DimLevel::Thread);
  EXPECT_EQ(t.active_level(), std::nullopt);
  EXPECT_THROW(refine_forall(t, Axis::X), ExecError);
}

TEST(ExecLevelOf, Examples) {
  auto g = grid_1d();
  EXPECT_EQ(exec_level(g).kind, ExecLevel::Kind::GpuGrid);
  EXPECT_EQ(exec_level(g).str(), "gpu.grid<X<2>, X<2>>");
  EXPECT_EQ(exec_level(refine_forall(g, Axis::X)).kind, ExecLevel::Kind::GpuBlock);
  EXPECT_EQ(exec_level(refine_forall(refine_forall(g, Axis::X), Axis::X)).kind, ExecLevel::Kind::GpuThread);
  EXPECT_EQ(exec_level(ExecResource::cpu_thread()).kind, ExecLevel::Kind::CpuThread);
}

TEST(ExecSplit, FstBlockOfTheBlockFamily) {
  auto g = ExecResource::grid(dim({{Axis::X, 2}, {Axis::Y, 2}, {Axis::Z, 1}}), dim({{Axis::X, 4}}));
  auto blocks = refine_forall(refine_forall(g, Axis::X), Axis::Z);
  auto fst = refine_split(blocks, Axis::Y, Nat::lit(1), true);
  EXPECT_EQ(fst.extent(DimLevel::Block, Axis::Y), Nat::lit(1));
  auto ids = enumerate_threads(fst);
  EXPECT_EQ(ids.size(), 2u * 1u * 4u);
  for (const auto& [b, t] : ids) EXPECT_EQ(b[1], 0);
}

TEST(ExecSplit, BoundarySplitsAndBoundViolation) {
  auto blk = ExecResource::block(dim({{Axis::X, 32}}));
  auto g = ExecResource::grid(dim({{Axis::X, 1}}), dim({{Axis::X, 32}}));
  auto b = refine_forall(g, Axis::X);
  EXPECT_EQ(enumerate_threads(refine_split(b, Axis::X, Nat::lit(32), true)).size(), 32u);
  EXPECT_TRUE(enumerate_threads(refine_split(b, Axis::X, Nat::lit(32), false)).empty());
  EXPECT_THROW(refine_split(b, Axis::X, Nat::lit(33), true), ExecError);
  EXPECT_THROW(refine_split(blk, Axis::X, Nat::lit(33), true), ExecError);
}

TEST(ExecRelation, Examples) {
  auto e = refine_forall(ExecResource::grid(dim({{Axis::X, 2}, {Axis::Y, 2}}), dim({{Axis::X, 4}})), Axis::X);
  EXPECT_EQ(relation(refine_split(e, Axis::Y, Nat::lit(1), true), refine_split(e, Axis::Y, Nat::lit(1), false)),
            ExecRelation::Disjoint);
  EXPECT_EQ(relation(e, refine_forall(e, Axis::Y)), ExecRelation::Overlapping);
  EXPECT_EQ(relation(refine_forall(e, Axis::Y), refine_forall(e, Axis::Y)), ExecRelation::Identical);
}

// Random refinement of a small grid.
class ResourceGen {
 public:
  explicit ResourceGen(std::uint64_t seed) : rng_(seed) {}

  ExecResource base() {
    std::uniform_int_distribution<std::uint64_t> ext(1, 4);
    return ExecResource::grid(dim({{Axis::X, ext(rng_)}, {Axis::Y, ext(rng_)}}), dim({{Axis::X, ext(rng_)}, {Axis::Y, ext(rng_)}}));
  }

  ExecResource refine(ExecResource e, int steps) {
    for (int i = 0; i < steps; ++i) {
      auto level = e.active_level();
      auto axes = e.remaining_axes();
      if (!level || axes.empty()) break;
      Axis a = axes[std::uniform_int_distribution<std::size_t>(0, axes.size() - 1)(rng_)];
      if (std::uniform_int_distribution<int>(0, 2)(rng_) == 0) {
        e = refine_forall(e, a);
      } else {
        auto ext = e.extent(*level, a)->ground_value().value();
        auto pos = std::uniform_int_distribution<std::int64_t>(0, ext)(rng_);
        e = refine_split(e, a, Nat::lit(static_cast<std::uint64_t>(pos)), std::uniform_int_distribution<int>(0, 1)(rng_) == 0);
      }
    }
    return e;
  }

  ExecResource prefix_of(const ExecResource& e) {
    return e.prefix(std::uniform_int_distribution<std::size_t>(0, e.path().size())(rng_));
  }

 private:
  std::mt19937_64 rng_;
};

TEST(ExecProperty, RelationIsSoundAgainstEnumeration) {
  ResourceGen gen(0xe7ec01);
  int disjoint = 0, identical = 0;
  for (int i = 0; i < 3000; ++i) {
    ExecResource root = gen.base();
    ExecResource shared = gen.refine(root, 2);
    ExecResource a = gen.refine(shared, 3);
    ExecResource b = i % 4 == 0 ? gen.prefix_of(a) : gen.refine(gen.prefix_of(shared), 3);
    auto sa = enumerate_threads(a), sb = enumerate_threads(b);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    switch (relation(a, b)) {
      case ExecRelation::Disjoint: {
        ++disjoint;
        std::vector<std::pair<Coords, Coords>> both;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
        ASSERT_TRUE(both.empty()) << a.str() << " vs " << b.str();
        break;
      }
      case ExecRelation::Identical:
        ++identical;
        ASSERT_EQ(sa, sb) << a.str() << " vs " << b.str();
        break;
      case ExecRelation::Overlapping: break;
    }
  }
  EXPECT_GT(disjoint, 50);
  EXPECT_GT(identical, 50);
}

TEST(ExecProperty, RefinementsAreEmptyOnlyAtSplitBoundaries) {
  ResourceGen gen(0xe7ec02);
  for (int i = 0; i < 2000; ++i) {
    ExecResource e = gen.refine(gen.base(), 4);
    if (!enumerate_threads(e).empty()) continue;
    bool boundary = false;
    for (std::size_t k = 0; k < e.path().size(); ++k) {
      const auto& st = e.path()[k];
      if (st.kind != ExecStep::Kind::Split) continue;
      auto pos = st.pos.ground_value().value();
      auto ext = e.prefix(k).extent(st.level, st.axis)->ground_value().value();
      boundary = boundary || (st.fst && pos == 0) || (!st.fst && pos == ext);
    }
    ASSERT_TRUE(boundary) << e.str();
  }
}

}  // namespace
