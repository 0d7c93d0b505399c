#include "descend/view_check.hpp"

#include "descend/ground.hpp"
#include "descend/lower.hpp"

namespace descend {

ViewComparison compare_view_lowering(const std::vector<RStep>& steps, const DataType& root_type) {
  GValue g = GValue::iota(ground_shape(root_type));
  for (const auto& s : steps) {
    switch (s.kind) {
      case RStep::Kind::Fst: g = project(g, true); break;
      case RStep::Kind::Snd: g = project(g, false); break;
      case RStep::Kind::View: g = apply_view(s.view, g); break;
      case RStep::Kind::Index: {
        auto v = s.index.ground_value();
        if (!v) throw ViewError(ErrorCode::Type, "index `" + s.index.str() + "` is not ground");
        g = g.slice(*v);
        break;
      }
      case RStep::Kind::Select: throw ViewError(ErrorCode::Type, "selections have no ground table");
    }
  }
  if (g.is_tuple) throw ViewError(ErrorCode::Type, "the place is a pair; project it with .fst or .snd");

  ViewComparison out;
  out.shape = g.shape;
  out.oracle = g.offs;
  RPlace rp;
  rp.root = "arr";
  rp.steps = steps;
  std::vector<LIndex> coords;
  for (std::size_t d = 0; d < g.shape.size(); ++d) coords.push_back(LIndex::sym("i" + std::to_string(d)));
  LIndex idx = lower_place(rp, root_type, coords);
  out.expr = idx.str();

  std::vector<std::int64_t> c(g.shape.size(), 0);
  SymValues env;
  for (std::size_t k = 0; k < g.offs.size(); ++k) {
    std::size_t rem = k;
    for (std::size_t d = g.shape.size(); d-- > 0;) {
      auto ext = static_cast<std::size_t>(g.shape[d]);
      env["i" + std::to_string(d)] = static_cast<std::int64_t>(rem % ext);
      rem /= ext;
    }
    std::int64_t v = idx.eval(env);
    out.lowered.push_back(v);
    if (v != g.offs[k]) ++out.mismatches;
  }
  return out;
}

std::vector<RStep> view_steps(const PlaceExpr& p, const Program& prog) {
  std::vector<RStep> out;
  for (const auto& s : p.steps) {
    RStep r;
    switch (s.kind) {
      case PlaceStep::Kind::Fst: r.kind = RStep::Kind::Fst; break;
      case PlaceStep::Kind::Snd: r.kind = RStep::Kind::Snd; break;
      case PlaceStep::Kind::Index:
        r.kind = RStep::Kind::Index;
        r.index = s.index;
        break;
      case PlaceStep::Kind::View:
        for (const auto& v : expand_chain({s.view}, prog)) {
          RStep vs;
          vs.kind = RStep::Kind::View;
          vs.view = v;
          out.push_back(vs);
        }
        continue;
      default: throw ViewError(ErrorCode::Type, "only views, projections and indices can be expanded");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace descend
