#pragma once

// Side-by-side evaluation of a lowered view chain against the ground
// oracle table.

#include <cstdint>
#include <string>
#include <vector>

#include "descend/ast.hpp"
#include "descend/views.hpp"

namespace descend {

struct ViewComparison {
  std::string expr;                  // lowered offset over coordinates i0, i1, ...
  std::vector<std::int64_t> shape;   // shape of the viewed place
  std::vector<std::int64_t> lowered; // row-major over `shape`
  std::vector<std::int64_t> oracle;
  std::size_t mismatches = 0;
};

// `steps` may hold View, Fst, Snd and Index steps with ground sizes. Throws
// ViewError or GroundError when a side condition fails.
ViewComparison compare_view_lowering(const std::vector<RStep>& steps, const DataType& root_type);

// Steps of a place made of views and projections only, user views expanded.
std::vector<RStep> view_steps(const PlaceExpr& p, const Program& prog);

}  // namespace descend
