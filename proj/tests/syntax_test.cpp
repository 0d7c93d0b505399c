#include <gtest/gtest.h>

#include <functional>

#include "support.hpp"

using namespace descend;
using dtest::parse_text;

namespace {

void walk(const Term& t, const std::function<void(const Term&)>& f) {
  f(t);
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, LetTerm>) walk(*n.init, f);
        if constexpr (std::is_same_v<N, AssignTerm>) walk(*n.value, f);
        if constexpr (std::is_same_v<N, BlockTerm>) {
          for (const auto& s : n.stmts) walk(s, f);
        }
        if constexpr (std::is_same_v<N, CallTerm>) {
          for (const auto& a : n.args) walk(a, f);
        }
        if constexpr (std::is_same_v<N, ForEachTerm>) walk(*n.body, f);
        if constexpr (std::is_same_v<N, ForNatTerm>) walk(*n.body, f);
        if constexpr (std::is_same_v<N, SchedTerm>) walk(*n.body, f);
        if constexpr (std::is_same_v<N, SplitTerm>) {
          walk(*n.fst, f);
          walk(*n.snd, f);
        }
        if constexpr (std::is_same_v<N, BinaryTerm>) {
          walk(*n.lhs, f);
          walk(*n.rhs, f);
        }
      },
      t.node);
}

std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto& f : dtest::accept_files()) out.push_back("accept/" + f + ".desc");
  for (const auto& c : dtest::reject_cases()) out.push_back("reject/" + c.file + ".desc");
  return out;
}

TEST(Parse, ListingTransposeShape) {
  auto l = dtest::load_corpus("accept/transpose_listing.desc");
  ASSERT_TRUE(l.program) << render_text(l.diags, l.src);
  const FunctionDef* f = l.program->find_function("transpose");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->exec.kind, ExecLevel::Kind::GpuGrid);
  std::vector<const SchedTerm*> scheds;
  int syncs = 0, loops = 0;
  walk(f->body, [&](const Term& t) {
    if (auto* s = t.as<SchedTerm>()) scheds.push_back(s);
    if (t.as<SyncTerm>()) ++syncs;
    if (t.as<ForNatTerm>()) ++loops;
  });
  ASSERT_EQ(scheds.size(), 2u);
  EXPECT_EQ(scheds[0]->exec, "grid");
  EXPECT_EQ(scheds[0]->binder, "block");
  EXPECT_EQ(scheds[0]->axes, (std::vector<Axis>{Axis::Y, Axis::X}));
  EXPECT_EQ(scheds[1]->exec, "block");
  EXPECT_EQ(syncs, 1);
  EXPECT_EQ(loops, 2);
}

TEST(Parse, MissingExecAnnotationIsASyntaxError) {
  auto l = parse_text("fn f() -> () { () }");
  EXPECT_FALSE(l.program);
  ASSERT_FALSE(l.diags.empty());
  EXPECT_EQ(l.diags[0].code, ErrorCode::Parse);
  EXPECT_LE(l.diags[0].primary.span.end, l.src.text().size());
}

TEST(Parse, DiagnosticsPointIntoTheInput) {
  const char* bad[] = {"fn", "fn f(x: ) -[t: cpu.thread]-> () {}", "fn f() -[t: cpu.thread]-> () { let = 1 }",
                       "view v<n: nat> = ;", "fn f() -[t: gpu.grid<X<>, X<1>>]-> () {}", "fn f() -[t: cpu.thread]-> () { 1 + }"};
  for (const char* s : bad) {
    auto l = parse_text(s);
    EXPECT_FALSE(l.program) << s;
    for (const auto& d : l.diags) {
      EXPECT_EQ(d.code, ErrorCode::Parse) << s;
      EXPECT_LE(d.primary.span.begin, d.primary.span.end) << s;
      EXPECT_LE(d.primary.span.end, l.src.text().size()) << s;
    }
  }
}

TEST(Print, LetAndSchedForms) {
  auto l = parse_text("fn f() -[t: cpu.thread]-> () { let x: i32 = 0; () }");
  ASSERT_TRUE(l.program);
  EXPECT_NE(pretty_print(*l.program).find("let x: i32 = 0"), std::string::npos);
  auto t = dtest::load_corpus("accept/transpose_listing.desc");
  ASSERT_TRUE(t.program);
  EXPECT_NE(pretty_print(*t.program).find("sched(Y,X) block in grid {"), std::string::npos);
}

TEST(Print, RoundTripsTheCorpus) {
  for (const auto& file : corpus_files()) {
    auto l = dtest::load_corpus(file);
    ASSERT_TRUE(l.program) << file;
    std::string printed = pretty_print(*l.program);
    auto again = parse_text(printed, file + " (printed)");
    ASSERT_TRUE(again.program) << file << "\n" << render_text(again.diags, again.src);
    EXPECT_EQ(dump_ast(*again.program), dump_ast(*l.program)) << file;
    EXPECT_EQ(pretty_print(*again.program), printed) << file;
  }
}

TEST(Parse, EveryTermHasASpanInsideTheInput) {
  for (const auto& file : corpus_files()) {
    auto l = dtest::load_corpus(file);
    ASSERT_TRUE(l.program) << file;
    for (const FunctionDef* f : l.program->functions()) {
      walk(f->body, [&](const Term& t) {
        EXPECT_LT(t.span.begin, t.span.end) << file;
        EXPECT_LE(t.span.end, l.src.text().size()) << file;
        EXPECT_TRUE(f->span.contains(t.span)) << file;
      });
    }
  }
}

TEST(Parse, FragmentParsers) {
  Diagnostics d;
  SourceFile p("<p>", "arr.group::<8>.transpose[[thread]][2]");
  auto place = parse_place(p, d);
  ASSERT_TRUE(place) << render_text(d, p);
  EXPECT_EQ(place->root, "arr");
  ASSERT_EQ(place->steps.size(), 4u);
  EXPECT_EQ(place->steps[0].kind, PlaceStep::Kind::View);
  EXPECT_EQ(place->steps[2].kind, PlaceStep::Kind::Select);
  EXPECT_EQ(place->steps[3].kind, PlaceStep::Kind::Index);
  EXPECT_EQ(print_place(*place), "arr.group::<8>.transpose[[thread]][2]");

  SourceFile t("<t>", "[[f64; n*2]; 4]");
  auto ty = parse_type(t, d);
  ASSERT_TRUE(ty);
  EXPECT_EQ(ty->str(), "[[f64; n*2]; 4]");

  SourceFile n("<n>", "b*s + 1");
  auto nat = parse_nat(n, d);
  ASSERT_TRUE(nat);
  EXPECT_EQ(evaluate(*nat, {{"b", 2}, {"s", 3}}), 7);
}

TEST(Parse, LineCommentsAreIgnored) {
  auto a = parse_text("fn f() -[t: cpu.thread]-> () { // hi\n let x = 1; () }");
  auto b = parse_text("fn f() -[t: cpu.thread]-> () { let x = 1; () }");
  ASSERT_TRUE(a.program && b.program);
  EXPECT_EQ(dump_ast(*a.program), dump_ast(*b.program));
}

}  // namespace
