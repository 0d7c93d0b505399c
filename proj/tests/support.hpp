#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "descend/interp.hpp"
#include "descend/parser.hpp"
#include "descend/typecheck.hpp"

namespace descend {
inline void PrintTo(ErrorCode c, std::ostream* os) { *os << code_name(c); }
}  // namespace descend

namespace dtest {

using namespace descend;

inline std::string corpus_path(const std::string& rel) { return std::string(DESCEND_CORPUS_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline const std::vector<std::string>& accept_files() {
  static const std::vector<std::string> files = {"transpose_listing", "transpose", "reduce", "scan",
                                                 "matmul", "reverse_blocks", "scale_vec"};
  return files;
}

struct RejectCase {
  std::string file;
  ErrorCode code;
  int count;
};

inline const std::vector<RejectCase>& reject_cases() {
  static const std::vector<RejectCase> cases = {
      {"rev_per_block", ErrorCode::Conflict, 1}, {"forgotten_sync", ErrorCode::Conflict, 1},
      {"sync_under_split", ErrorCode::Sync, 1},  {"copy_swapped", ErrorCode::Mem, 1},
      {"cpu_deref", ErrorCode::Mem, 1},          {"launch_mismatch", ErrorCode::Launch, 1},
      {"narrowing", ErrorCode::Narrow, 2},       {"listing_verbatim", ErrorCode::Size, 2},
  };
  return cases;
}

struct Loaded {
  SourceFile src;
  std::optional<Program> program;
  Diagnostics diags;
};

inline Loaded parse_text(const std::string& text, const std::string& name = "<test>") {
  Loaded l{SourceFile(name, text), std::nullopt, {}};
  ParseResult pr = parse(l.src);
  l.program = std::move(pr.program);
  l.diags = std::move(pr.diags);
  return l;
}

inline Loaded load_corpus(const std::string& rel) { return parse_text(slurp(corpus_path(rel)), rel); }

inline std::vector<ErrorCode> codes(const Diagnostics& ds) {
  std::vector<ErrorCode> out;
  for (const auto& d : ds) out.push_back(d.code);
  return out;
}

// Parses and checks; parse failures come back as the parse diagnostics.
inline CheckResult check_text(const std::string& text) {
  Loaded l = parse_text(text);
  if (!l.program) return {false, l.diags};
  return check_program(*l.program);
}

// Launch configurations of a grid function with every used axis extent and
// every size left free by the grid drawn from {1, 2, 4}.
struct Launch {
  SimConfig cfg;
  std::string label;
};

inline std::vector<Launch> desk_launches(const FunctionDef& f, std::int64_t max_threads = 64) {
  const std::int64_t choices[] = {1, 2, 4};
  std::vector<std::string> free;
  for (const auto& tp : f.tparams) {
    bool in_grid = false;
    for (const Dim* d : {&f.exec.blocks, &f.exec.threads}) {
      for (const auto& [a, n] : d->axes) in_grid = in_grid || free_vars(n).count(tp.name) > 0;
    }
    if (!in_grid) free.push_back(tp.name);
  }
  std::vector<std::pair<int, int>> slots;  // (0 blocks / 1 threads, axis)
  for (int lvl = 0; lvl < 2; ++lvl) {
    const Dim& d = lvl == 0 ? f.exec.blocks : f.exec.threads;
    for (const auto& [a, n] : d.axes) slots.push_back({lvl, static_cast<int>(a)});
  }
  std::size_t total = slots.size() + free.size();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < total; ++i) combos *= 3;
  std::vector<Launch> out;
  for (std::size_t c = 0; c < combos; ++c) {
    Launch l;
    std::size_t rem = c;
    for (const auto& [lvl, a] : slots) {
      (lvl == 0 ? l.cfg.blocks : l.cfg.threads)[static_cast<std::size_t>(a)] = choices[rem % 3];
      rem /= 3;
    }
    for (const auto& v : free) {
      l.cfg.nats[v] = choices[rem % 3];
      rem /= 3;
    }
    l.cfg.max_threads = max_threads;
    auto prod = [](const Coords& x) { return x[0] * x[1] * x[2]; };
    if (prod(l.cfg.blocks) * prod(l.cfg.threads) > max_threads) continue;
    try {
      l.cfg.nats = infer_grid_nats(f, l.cfg);
    } catch (const std::invalid_argument&) {
      continue;
    }
    std::ostringstream os;
    os << f.name << " grid(" << l.cfg.blocks[0] << "," << l.cfg.blocks[1] << "," << l.cfg.blocks[2] << ") block("
       << l.cfg.threads[0] << "," << l.cfg.threads[1] << "," << l.cfg.threads[2] << ")";
    for (const auto& [k, v] : l.cfg.nats) os << " " << k << "=" << v;
    l.label = os.str();
    out.push_back(std::move(l));
  }
  return out;
}

// Deterministic small inputs: element i of buffer `name` gets (i * 7 + seed) % 23.
inline void fill_inputs(SimConfig& cfg, const FunctionDef& f, int seed = 1) {
  for (const auto& p : f.params) {
    cfg.generators[p.name] = [seed](std::int64_t i) { return static_cast<double>((i * 7 + seed) % 23); };
  }
}

}  // namespace dtest

#include <chrono>

#include "descend/ground.hpp"
#include "descend/view_check.hpp"

namespace dtest {

struct SweepStats {
  std::size_t chains = 0;      // well-typed chains compared
  std::size_t rejected = 0;    // chains failing a side condition
  std::size_t cells = 0;       // compared offsets
  std::size_t mismatches = 0;
  std::size_t shape_errors = 0;  // view typing disagreeing with the oracle shape
  std::string first_failure;
  double seconds = 0;
};

// Steps of one chain element: a view, or a split followed by a projection.
inline std::vector<std::vector<RStep>> sweep_elements() {
  const std::uint64_t args[] = {1, 2, 4, 8, 16, 32, 64};
  auto view = [](const std::string& name, std::vector<Nat> a = {}, ViewChain inner = {}) {
    RStep s;
    s.kind = RStep::Kind::View;
    s.view.name = name;
    s.view.args = std::move(a);
    s.view.inner = std::move(inner);
    return s;
  };
  std::vector<ViewInst> inner;
  std::vector<std::vector<RStep>> out;
  for (auto k : args) {
    out.push_back({view("group", {Nat::lit(k)})});
    inner.push_back(out.back()[0].view);
    for (bool fst : {true, false}) {
      RStep p;
      p.kind = fst ? RStep::Kind::Fst : RStep::Kind::Snd;
      out.push_back({view("split", {Nat::lit(k)}), p});
    }
  }
  out.push_back({view("transpose")});
  inner.push_back(out.back()[0].view);
  out.push_back({view("reverse")});
  inner.push_back(out.back()[0].view);
  for (const auto& v : inner) out.push_back({view("map", {}, {v})});
  return out;
}

inline std::optional<DataType> step_type(const RStep& s, const DataType& t) {
  switch (s.kind) {
    case RStep::Kind::View: return view_output_type(s.view, t);
    case RStep::Kind::Fst:
    case RStep::Kind::Snd:
      if (t.kind() != DataType::Kind::Tuple) return std::nullopt;
      return t.elems().at(s.kind == RStep::Kind::Fst ? 0 : 1);
    default: return std::nullopt;
  }
}

// Every chain of at most `max_len` elements over 1-D roots of each size and
// 2-D roots with both extents from `sizes`.
inline SweepStats view_lowering_sweep(const std::vector<std::uint64_t>& sizes = {8, 16, 32, 64}, int max_len = 3) {
  auto start = std::chrono::steady_clock::now();
  SweepStats st;
  const auto elems = sweep_elements();
  std::vector<DataType> roots;
  DataType i32 = DataType::scalar(ScalarKind::I32);
  for (auto n : sizes) roots.push_back(DataType::array(i32, Nat::lit(n)));
  for (auto r : sizes) {
    for (auto c : sizes) roots.push_back(DataType::array(DataType::array(i32, Nat::lit(c)), Nat::lit(r)));
  }
  std::function<void(const DataType&, const DataType&, std::vector<RStep>&, int)> go =
      [&](const DataType& root, const DataType& ty, std::vector<RStep>& steps, int len) {
        if (!steps.empty()) {
          ++st.chains;
          try {
            ViewComparison c = compare_view_lowering(steps, root);
            st.cells += c.oracle.size();
            st.mismatches += c.mismatches;
            if (ground_shape(ty) != c.shape) ++st.shape_errors;
            if ((c.mismatches || ground_shape(ty) != c.shape) && st.first_failure.empty()) {
              RPlace p{"arr", steps};
              st.first_failure = root.str() + " " + p.str() + " lowered " + c.expr;
            }
          } catch (const std::exception& e) {
            ++st.mismatches;
            if (st.first_failure.empty()) st.first_failure = root.str() + ": " + e.what();
          }
        }
        if (len == max_len) return;
        for (const auto& el : elems) {
          DataType t = ty;
          bool ok = true;
          try {
            for (const auto& s : el) {
              auto next = step_type(s, t);
              if (!next) {
                ok = false;
                break;
              }
              t = *next;
            }
          } catch (const ViewError&) {
            ok = false;
          }
          if (!ok || !t.is_arrayish()) {
            ++st.rejected;
            continue;
          }
          steps.insert(steps.end(), el.begin(), el.end());
          go(root, t, steps, len + 1);
          steps.resize(steps.size() - el.size());
        }
      };
  for (const auto& r : roots) {
    std::vector<RStep> steps;
    go(r, r, steps, 0);
  }
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return st;
}

}  // namespace dtest
