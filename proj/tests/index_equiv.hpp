#pragma once

// Lowered indices of every place of a kernel compared against the ground
// oracle over the kernel's thread and loop coordinates.

#include <random>
#include <tuple>
#include <type_traits>

#include "descend/ground.hpp"
#include "descend/lower.hpp"
#include "descend/mono.hpp"
#include "support.hpp"

namespace dtest {

struct PlaceSite {
  const PlaceInfo* info;
  std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> loops;
};

inline void collect(const Term& t, std::vector<std::tuple<std::string, std::int64_t, std::int64_t>>& loops,
                    std::vector<PlaceSite>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, PlaceTerm>) {
          if (n.place.info && !n.place.info->is_nat) out.push_back({n.place.info.get(), loops});
        }
        if constexpr (std::is_same_v<N, AssignTerm>) {
          if (n.place.info) out.push_back({n.place.info.get(), loops});
          collect(*n.value, loops, out);
        }
        if constexpr (std::is_same_v<N, LetTerm>) collect(*n.init, loops, out);
        if constexpr (std::is_same_v<N, BlockTerm>) {
          for (const auto& s : n.stmts) collect(s, loops, out);
        }
        if constexpr (std::is_same_v<N, ForNatTerm>) {
          loops.emplace_back(n.var, *n.lo.ground_value(), *n.hi.ground_value());
          collect(*n.body, loops, out);
          loops.pop_back();
        }
        if constexpr (std::is_same_v<N, SchedTerm>) collect(*n.body, loops, out);
        if constexpr (std::is_same_v<N, SplitTerm>) {
          collect(*n.fst, loops, out);
          collect(*n.snd, loops, out);
        }
        if constexpr (std::is_same_v<N, BinaryTerm>) {
          collect(*n.lhs, loops, out);
          collect(*n.rhs, loops, out);
        }
        if constexpr (std::is_same_v<N, UnaryTerm>) collect(*n.operand, loops, out);
      },
      t.node);
}

struct EquivStats {
  std::size_t places = 0, points = 0, mismatches = 0;
  std::string first;
};

// Compares lower_place with the ground oracle at every coordinate, or at
// `samples` random coordinates when the space is larger.
inline EquivStats index_equivalence(const FunctionDef& f, std::size_t samples, std::uint64_t seed) {
  EquivStats st;
  std::vector<std::tuple<std::string, std::int64_t, std::int64_t>> loops;
  std::vector<PlaceSite> sites;
  collect(f.body, loops, sites);
  auto extent = [](const Dim& d, int a) {
    const Nat* n = d.extent(static_cast<Axis>(a));
    return n ? *n->ground_value() : 1;
  };
  std::mt19937_64 rng(seed);
  for (const auto& site : sites) {
    ++st.places;
    const RPlace& rp = site.info->rplace;
    LIndex idx = lower_place(rp, site.info->root_type);
    // dimensions: 3 block axes, 3 thread axes, loops
    std::vector<std::pair<std::string, std::pair<std::int64_t, std::int64_t>>> dims;
    const char* ax[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) dims.push_back({std::string("blockIdx.") + ax[a], {0, extent(f.exec.blocks, a)}});
    for (int a = 0; a < 3; ++a) dims.push_back({std::string("threadIdx.") + ax[a], {0, extent(f.exec.threads, a)}});
    for (const auto& [v, lo, hi] : site.loops) dims.push_back({v, {lo, hi}});
    std::size_t space = 1;
    for (const auto& d : dims) space *= static_cast<std::size_t>(d.second.second - d.second.first);
    bool exhaustive = space <= samples;
    std::size_t n = exhaustive ? space : samples;
    for (std::size_t k = 0; k < n; ++k) {
      SymValues env;
      NatValues nats;
      std::size_t rem = k;
      for (const auto& [name, range] : dims) {
        auto w = static_cast<std::size_t>(range.second - range.first);
        std::int64_t v = range.first + static_cast<std::int64_t>(exhaustive ? rem % w : std::uniform_int_distribution<std::size_t>(0, w - 1)(rng));
        rem /= w;
        env[name] = v;
        if (name.find('.') == std::string::npos) nats[name] = v;
      }
      SelectCoords coords;
      bool inside = true;
      for (const auto& s : rp.steps) {
        if (s.kind != RStep::Kind::Select) continue;
        std::vector<std::int64_t> cs;
        for (Axis a : s.sel_axes) {
          std::string sym = axis_symbol(s.sel_level, a);
          std::int64_t rel = select_index(s.exec, s.sel_level, a).eval(env);
          std::int64_t ext = *s.exec.extent(s.sel_level, a)->ground_value();
          inside = inside && rel >= 0 && rel < ext;
          cs.push_back(rel);
          (void)sym;
        }
        coords[s.exec_name] = cs;
      }
      if (!inside) continue;
      ++st.points;
      std::int64_t want = place_offsets(rp, site.info->root_type, coords, nats).at(0);
      std::int64_t got = idx.eval(env);
      if (want != got) {
        ++st.mismatches;
        if (st.first.empty()) st.first = rp.str() + ": lowered " + idx.str() + " = " + std::to_string(got) + ", oracle " + std::to_string(want);
      }
    }
  }
  return st;
}

}  // namespace dtest
