#include <gtest/gtest.h>

#include <chrono>

#include "support.hpp"

using namespace descend;
using dtest::check_text;
using dtest::codes;

namespace {

const char* kGrid = "fn k(arr: &uniq gpu.global [f64; 64], src: & gpu.global [f64; 64])\n"
                    " -[grid: gpu.grid<X<2>, X<32>>]-> () {\n"
                    "  sched(X) block in grid {\n"
                    "    sched(X) thread in block {\n";
const char* kGridEnd = "\n    }\n  }\n}\n";

std::string thread_body(const std::string& body) { return std::string(kGrid) + body + kGridEnd; }

std::string spanned(const dtest::Loaded& l, const Span& s) { return l.src.text().substr(s.begin, s.end - s.begin); }

TEST(CheckCorpus, AcceptsEveryAcceptProgramQuickly) {
  for (const auto& f : dtest::accept_files()) {
    auto l = dtest::load_corpus("accept/" + f + ".desc");
    ASSERT_TRUE(l.program) << f;
    auto t0 = std::chrono::steady_clock::now();
    CheckResult r = check_program(*l.program);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_TRUE(r.ok) << f << "\n" << render_text(r.diags, l.src);
    EXPECT_LT(secs, 5.0) << f;
  }
}

TEST(CheckCorpus, RejectsWithExactlyTheMappedCode) {
  for (const auto& c : dtest::reject_cases()) {
    auto l = dtest::load_corpus("reject/" + c.file + ".desc");
    ASSERT_TRUE(l.program) << c.file;
    CheckResult r = check_program(*l.program);
    EXPECT_FALSE(r.ok) << c.file;
    EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>(static_cast<std::size_t>(c.count), c.code))
        << c.file << "\n" << render_text(r.diags, l.src);
    for (const auto& d : r.diags) {
      EXPECT_LT(d.primary.span.begin, d.primary.span.end) << c.file;
      EXPECT_LE(d.primary.span.end, l.src.text().size()) << c.file;
    }
  }
}

TEST(CheckCorpus, MessagesAndSpans) {
  auto diag = [](const std::string& file) {
    auto l = dtest::load_corpus("reject/" + file + ".desc");
    CheckResult r = check_program(*l.program);
    EXPECT_FALSE(r.diags.empty()) << file;
    return std::make_pair(std::move(l), r.diags.empty() ? Diagnostic{} : r.diags[0]);
  };
  {
    auto [l, d] = diag("rev_per_block");
    EXPECT_EQ(d.message, "conflicting memory access");
    EXPECT_EQ(spanned(l, d.primary.span), "arr[[thread]]");
    ASSERT_EQ(d.related.size(), 1u);
    EXPECT_EQ(spanned(l, d.related[0].span), "arr.rev[[thread]]");
  }
  {
    auto [l, d] = diag("sync_under_split");
    EXPECT_EQ(d.message, "barrier not allowed here");
    EXPECT_EQ(spanned(l, d.primary.span), "sync");
  }
  {
    auto [l, d] = diag("copy_swapped");
    EXPECT_EQ(d.primary.text, "expected reference to `gpu.global`, found reference to `cpu.mem`");
    EXPECT_EQ(spanned(l, d.primary.span), "h_vec");
  }
  {
    auto [l, d] = diag("cpu_deref");
    EXPECT_NE(d.message.find("cannot dereference"), std::string::npos) << d.message;
    EXPECT_NE(spanned(l, d.primary.span).find("*vec"), std::string::npos);
  }
  {
    auto [l, d] = diag("launch_mismatch");
    EXPECT_EQ(d.primary.text, "expected `[f64; SIZE]`, found `[f64; ELEMS]`");
    EXPECT_EQ(spanned(l, d.primary.span), "d_vec");
  }
}

TEST(CheckRender, ConflictRendersWithCarets) {
  auto l = dtest::load_corpus("reject/rev_per_block.desc");
  CheckResult r = check_program(*l.program);
  std::string text = render_text(r.diags, l.src);
  EXPECT_NE(text.find("error[E_CONFLICT]: conflicting memory access"), std::string::npos) << text;
  EXPECT_NE(text.find("^^^^^^^^^^^^^"), std::string::npos) << text;
  EXPECT_NE(text.find("-----------------"), std::string::npos) << text;
}

TEST(CheckAccess, CorrectNarrowingIsAccepted) {
  auto r = check_text(thread_body("      arr.group::<32>[[block]][[thread]] = 1.0"));
  EXPECT_TRUE(r.ok) << r.diags.size();
}

TEST(CheckAccess, MissingBlockSelectViolatesNarrowing) {
  auto r = check_text(std::string(kGrid).replace(std::string(kGrid).find("[f64; 64]"), 9, "[f64; 32]") +
                      "      arr[[thread]] = 1.0" + kGridEnd);
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Narrow});
}

TEST(CheckAccess, SharedReadsBySiblingsCoexist) {
  auto r = check_text(thread_body("      let a = src[0];\n      let b = src[0];\n"
                                  "      arr.group::<32>[[block]][[thread]] = a + b"));
  EXPECT_TRUE(r.ok);
}

TEST(CheckAccess, WriteAfterOverlappingSiblingReadConflicts) {
  auto r = check_text(thread_body("      let a = arr.group::<32>[[block]].rev[[thread]];\n"
                                  "      arr.group::<32>[[block]][[thread]] = a"));
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Conflict});
}

TEST(CheckAccess, SyncReleasesLoans) {
  auto r = check_text(
      "fn k(arr: &uniq gpu.global [f64; 64]) -[grid: gpu.grid<X<2>, X<32>>]-> () {\n"
      "  sched(X) block in grid {\n"
      "    let tmp = alloc::<gpu.shared, [f64; 32]>();\n"
      "    sched(X) thread in block {\n"
      "      tmp[[thread]] = arr.group::<32>[[block]][[thread]];\n"
      "      sync;\n"
      "      arr.group::<32>[[block]][[thread]] = tmp.rev[[thread]]\n"
      "    }\n  }\n}\n");
  EXPECT_TRUE(r.ok);
}

TEST(CheckSync, GridLevelBarrierIsRejected) {
  auto r = check_text("fn k() -[grid: gpu.grid<X<2>, X<32>>]-> () {\n  sync\n}\n");
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Sync});
}

TEST(CheckSched, ThreadLevelHasNoAxesLeft) {
  auto r = check_text(thread_body("      sched(X) t in thread { () }"));
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Size});
}

TEST(CheckSched, TwoAxesDesugarToNestedRefinements) {
  const char* two =
      "fn k(a: &uniq gpu.global [[f64; 4]; 4]) -[grid: gpu.grid<X<1>, XY<4,4>>]-> () {\n"
      "  sched(X) block in grid { sched(Y,X) thread in block { a.group::<4>[[block]][[thread]] = 1.0 } }\n}\n";
  const char* nested =
      "fn k(a: &uniq gpu.global [[f64; 4]; 4]) -[grid: gpu.grid<X<1>, XY<4,4>>]-> () {\n"
      "  sched(X) block in grid { sched(Y) row in block { sched(X) thread in row { a.group::<4>[[block]][[row]][[thread]] = 1.0 } } }\n}\n";
  EXPECT_TRUE(check_text(two).ok);
  EXPECT_TRUE(check_text(nested).ok);
}

TEST(CheckOwnership, CopiesAndMoves) {
  EXPECT_TRUE(check_text("fn f() -[t: cpu.thread]-> () { let x: i32 = 1; let a = x; let b = x; () }").ok);
  auto r = check_text(
      "fn f() -[t: cpu.thread]-> () {\n"
      "  let a: [i32; 4] @ cpu.mem = CpuHeap::new([0; 4]);\n"
      "  let b = a;\n"
      "  let c = a;\n"
      "  ()\n}\n");
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Move});
}

TEST(CheckLaunch, MatchingLaunchIsAccepted) {
  auto l = dtest::load_corpus("accept/scale_vec.desc");
  EXPECT_TRUE(check_program(*l.program).ok);
}

TEST(CheckLaunch, CpuMemoryCannotCrossTheBoundary) {
  auto r = check_text(
      "fn scale(vec: &uniq gpu.global [f64; 64]) -[grid: gpu.grid<X<1>, X<64>>]-> () {\n"
      "  sched(X) block in grid { sched(X) thread in block { vec.group::<64>[[block]][[thread]] = 1.0 } }\n}\n"
      "fn host(h: &uniq cpu.mem [f64; 64]) -[t: cpu.thread]-> () {\n"
      "  scale::<<<X<1>, X<64>>>>(h)\n}\n");
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Mem});
}

TEST(CheckLaunch, DimensionMismatchIsALaunchError) {
  auto r = check_text(
      "fn scale(vec: &uniq gpu.global [f64; 64]) -[grid: gpu.grid<X<1>, X<64>>]-> () {\n"
      "  sched(X) block in grid { sched(X) thread in block { vec.group::<64>[[block]][[thread]] = 1.0 } }\n}\n"
      "fn host(d: &uniq gpu.global [f64; 64]) -[t: cpu.thread]-> () {\n"
      "  scale::<<<X<1>, X<32>>>>(d)\n}\n");
  EXPECT_EQ(codes(r.diags), std::vector<ErrorCode>{ErrorCode::Launch});
}

TEST(CheckAlloc, SharedAllocationOnlyAtBlockLevel) {
  auto r = check_text(thread_body("      let t = alloc::<gpu.shared, [f64; 4]>();\n      ()"));
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.diags.size(), 1u);
}

TEST(CheckDeterminism, RecheckingGivesIdenticalDiagnostics) {
  for (const auto& c : dtest::reject_cases()) {
    auto a = dtest::load_corpus("reject/" + c.file + ".desc");
    auto b = dtest::load_corpus("reject/" + c.file + ".desc");
    std::string ra = render_json(check_program(*a.program).diags, a.src);
    std::string rb = render_json(check_program(*b.program).diags, b.src);
    EXPECT_EQ(ra, rb) << c.file;
  }
}

TEST(CheckSafetyOff, UnsafeProgramsStillResolve) {
  for (const char* f : {"rev_per_block", "forgotten_sync", "sync_under_split", "narrowing"}) {
    auto l = dtest::load_corpus(std::string("reject/") + f + ".desc");
    CheckResult r = check_program(*l.program, {false});
    EXPECT_TRUE(r.ok) << f << "\n" << render_text(r.diags, l.src);
  }
  for (const char* f : {"copy_swapped", "cpu_deref", "launch_mismatch"}) {
    auto l = dtest::load_corpus(std::string("reject/") + f + ".desc");
    EXPECT_FALSE(check_program(*l.program, {false}).ok) << f;
  }
}

}  // namespace
