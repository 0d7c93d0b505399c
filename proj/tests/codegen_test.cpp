#include <gtest/gtest.h>

#include <random>
#include <regex>

#include "descend/codegen.hpp"
#include "descend/ground.hpp"
#include "descend/lower.hpp"
#include "descend/mono.hpp"
#include "index_equiv.hpp"
#include "support.hpp"

using namespace descend;

namespace {

Program checked(const std::string& rel) {
  auto l = dtest::load_corpus(rel);
  if (!l.program) throw std::runtime_error("parse " + rel);
  CheckResult r = check_program(*l.program);
  if (!r.ok) throw std::runtime_error(render_text(r.diags, l.src));
  return std::move(*l.program);
}

Program checked_text(const std::string& text) {
  auto l = dtest::parse_text(text);
  if (!l.program) throw std::runtime_error(render_text(l.diags, l.src));
  CheckResult r = check_program(*l.program);
  if (!r.ok) throw std::runtime_error(render_text(r.diags, l.src));
  return std::move(*l.program);
}

MonoRoot root(const std::string& fn, std::map<std::string, std::uint64_t> nats) {
  MonoRoot r;
  r.function = fn;
  for (const auto& [k, v] : nats) r.nats[k] = Nat::lit(v);
  return r;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

TEST(Emit, TransposeMatchesTheGoldenFile) {
  std::string cu = compile_to_cuda(checked("accept/transpose_listing.desc"));
  EXPECT_EQ(cu, dtest::slurp(dtest::corpus_path("golden/transpose_listing.cu")));
}

TEST(Emit, TransposeHasTheListingStructure) {
  std::string cu = compile_to_cuda(checked("accept/transpose_listing.desc"));
  EXPECT_EQ(count(cu, "__global__ void transpose("), 1u);
  EXPECT_EQ(count(cu, "for (int i = 0; i < 4; ++i)"), 2u);
  EXPECT_EQ(count(cu, "__syncthreads();"), 1u);
  EXPECT_EQ(count(cu, "__shared__ double tmp[1024];"), 1u);
  // both tile offsets scale by the row length
  EXPECT_NE(cu.find("input[(blockIdx.y*32 + i*8 + threadIdx.y)*2048 + blockIdx.x*32 + threadIdx.x]"), std::string::npos);
  EXPECT_NE(cu.find("output[(blockIdx.x*32 + i*8 + threadIdx.y)*2048 + blockIdx.y*32 + threadIdx.x]"), std::string::npos);
}

TEST(Emit, IsDeterministic) {
  for (const auto& f : dtest::accept_files()) {
    std::string a = compile_to_cuda(checked("accept/" + f + ".desc"));
    std::string b = compile_to_cuda(checked("accept/" + f + ".desc"));
    EXPECT_EQ(a, b) << f;
  }
}

TEST(Mono, LaunchSpecializesTheKernel) {
  std::string cu = compile_to_cuda(checked("accept/scale_vec.desc"));
  EXPECT_EQ(count(cu, "__global__ void"), 1u);
  EXPECT_NE(cu.find("__global__ void scale_vec_32_32(double* vec)"), std::string::npos) << cu;
  EXPECT_NE(cu.find("vec[blockIdx.x*32 + threadIdx.x] = vec[blockIdx.x*32 + threadIdx.x] * 3.0;"), std::string::npos) << cu;
  EXPECT_NE(cu.find("scale_vec_32_32<<<dim3(32, 1, 1), dim3(32, 1, 1)>>>(d_vec);"), std::string::npos) << cu;
}

TEST(Mono, TwoLaunchSizesGiveTwoKernels) {
  Program p = checked_text(
      "fn scale<n: nat>(v: &uniq gpu.global [f64; n]) -[grid: gpu.grid<X<1>, X<n>>]-> () {\n"
      "  sched(X) block in grid { sched(X) thread in block { v.group::<n>[[block]][[thread]] = 2.0 } }\n}\n"
      "fn host(a: &uniq gpu.global [f64; 512], b: &uniq gpu.global [f64; 1024]) -[t: cpu.thread]-> () {\n"
      "  scale::<<<X<1>, X<512>>>>(&uniq *a);\n"
      "  scale::<<<X<1>, X<1024>>>>(&uniq *b)\n}\n");
  std::string cu = compile_to_cuda(p);
  EXPECT_EQ(count(cu, "__global__ void"), 2u);
  EXPECT_NE(cu.find("__global__ void scale_512("), std::string::npos);
  EXPECT_NE(cu.find("__global__ void scale_1024("), std::string::npos);
}

TEST(Mono, BlockFunctionsAreInlined) {
  Program p = checked_text(
      "fn fill(tile: &uniq gpu.shared [f64; 32]) -[blk: gpu.block<X<32>>]-> () {\n"
      "  sched(X) thread in blk { tile[[thread]] = 1.0 }\n}\n"
      "fn k(arr: &uniq gpu.global [f64; 64]) -[grid: gpu.grid<X<2>, X<32>>]-> () {\n"
      "  sched(X) block in grid {\n"
      "    let tmp = alloc::<gpu.shared, [f64; 32]>();\n"
      "    fill(&uniq tmp);\n"
      "    sched(X) thread in block { sync; arr.group::<32>[[block]][[thread]] = tmp.rev[[thread]] }\n"
      "  }\n}\n");
  std::string cu = compile_to_cuda(p);
  EXPECT_EQ(cu.find("__device__"), std::string::npos);
  EXPECT_EQ(cu.find("fill"), std::string::npos) << cu;
  EXPECT_NE(cu.find("tmp[threadIdx.x] = 1.0;"), std::string::npos) << cu;
  EXPECT_NE(cu.find("arr[blockIdx.x*32 + threadIdx.x] = tmp[31 - threadIdx.x];"), std::string::npos) << cu;
}

TEST(Mono, ResidualSizesAreErrors) {
  Program p = checked("accept/reduce.desc");
  MonoOptions o;
  o.roots = {root("reduce", {{"b", 2}})};
  EXPECT_THROW(monomorphize(p, o), MonoError);
}

TEST(Mono, MangledNames) {
  Program p = checked("accept/transpose.desc");
  const FunctionDef* f = p.find_function("transpose");
  EXPECT_EQ(mangle(*f, {{"b", Nat::lit(2)}, {"s", Nat::lit(4)}, {"k", Nat::lit(1)}}, {}, {}), "transpose_2_4_1");
}

TEST(Emit, SplitBecomesAGuard) {
  Program p = checked_text(
      "fn k(arr: &uniq gpu.global [i32; 64]) -[grid: gpu.grid<X<1>, X<64>>]-> () {\n"
      "  sched(X) block in grid {\n"
      "    split(X) block at 32 {\n"
      "      lo => { sched(X) t in lo { arr.group::<64>[[block]].split::<32>.fst[[t]] = 1 } },\n"
      "      hi => { sched(X) t in hi { arr.group::<64>[[block]].split::<32>.snd[[t]] = 2 } }\n"
      "    }\n  }\n}\n");
  std::string cu = compile_to_cuda(p);
  EXPECT_NE(cu.find("if (threadIdx.x < 32) {"), std::string::npos) << cu;
  EXPECT_NE(cu.find("} else {"), std::string::npos) << cu;
  EXPECT_NE(cu.find("arr[blockIdx.x*64 + threadIdx.x] = 1;"), std::string::npos) << cu;
  EXPECT_NE(cu.find("arr[blockIdx.x*64 + threadIdx.x] = 2;"), std::string::npos) << cu;
}

TEST(Emit, HostIntrinsics) {
  std::string cu = compile_to_cuda(checked("accept/scale_vec.desc"));
  EXPECT_NE(cu.find("double* d_vec = descend_alloc_copy(h_vec, 1024);"), std::string::npos) << cu;
  EXPECT_NE(cu.find("descend_copy_to_host(d_vec, h_vec, 1024);"), std::string::npos) << cu;
  EXPECT_NE(cu.find("cudaFree(d_vec);"), std::string::npos) << cu;
  MonoOptions o;
  o.roots = {root("alloc_demo", {{"n", 8}})};
  std::string demo = compile_to_cuda(checked("accept/scale_vec.desc"), o);
  EXPECT_NE(demo.find("int* cpu_array = descend_cpu_new<int>(8, 0);"), std::string::npos) << demo;
  EXPECT_NE(demo.find("delete[] cpu_array;"), std::string::npos) << demo;
}

// Places of a specialized kernel with the ranges of their enclosing loops.
TEST(IndexEquivalence, CorpusKernelsAtDeskScale) {
  struct Case {
    const char* file;
    const char* fn;
    std::map<std::string, std::uint64_t> nats;
  };
  const Case cases[] = {{"transpose", "transpose", {{"b", 2}, {"s", 2}, {"k", 2}}},
                        {"transpose", "transpose", {{"b", 1}, {"s", 4}, {"k", 1}}},
                        {"reduce", "reduce", {{"b", 2}, {"k", 4}}},
                        {"scan", "scan", {{"b", 2}, {"k", 2}}},
                        {"matmul", "matmul", {{"b", 2}, {"t", 2}, {"n", 4}}},
                        {"reverse_blocks", "reverse_blocks", {{"b", 2}, {"t", 4}}},
                        {"scale_vec", "scale_vec", {{"b", 4}, {"t", 4}}}};
  for (const auto& c : cases) {
    MonoOptions o;
    o.roots = {root(c.fn, c.nats)};
    o.use_default_roots = false;
    Program p = checked(std::string("accept/") + c.file + ".desc");
    Program m = monomorphize(p, o);
    const FunctionDef* f = m.find_function(mangle(*p.find_function(c.fn), o.roots[0].nats, {}, {}));
    ASSERT_NE(f, nullptr) << c.file;
    dtest::EquivStats st = dtest::index_equivalence(*f, 1u << 16, 7);
    EXPECT_GT(st.points, 0u) << c.file;
    EXPECT_EQ(st.mismatches, 0u) << c.file << ": " << st.first;
  }
}

TEST(IndexEquivalence, ListingTransposeSampled) {
  Program m = monomorphize(checked("accept/transpose_listing.desc"));
  const FunctionDef* f = m.find_function("transpose");
  ASSERT_NE(f, nullptr);
  dtest::EquivStats st = dtest::index_equivalence(*f, 6, 11);
  EXPECT_EQ(st.places, 4u);
  EXPECT_EQ(st.mismatches, 0u) << st.first;
}

}  // namespace
