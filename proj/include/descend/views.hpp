#pragma once

// View typing, user view expansion, and resolved places with their
// syntactic overlap relation.

#include <stdexcept>
#include <string>
#include <vector>

#include "descend/ast.hpp"
#include "descend/diagnostics.hpp"
#include "descend/exec.hpp"

namespace descend {

class ViewError : public std::runtime_error {
 public:
  ViewError(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
  ErrorCode code;  // Size for side conditions, Type for shapes and names
};

bool is_basic_view(const std::string& name);

// Expands user aliases (transitively, including inside `map`) into basic
// views. `rev` is normalized to `reverse`.
ViewChain expand_user_view(const ViewInst& v, const Program& prog);
ViewChain expand_chain(const ViewChain& chain, const Program& prog);

// Output type of one basic view applied to an array or array view.
DataType view_output_type(const ViewInst& v, const DataType& input);
DataType apply_chain(const ViewChain& chain, const DataType& input);

// A place with references resolved to their referents and user views
// expanded.
struct RStep {
  enum class Kind { Fst, Snd, Index, Select, View };
  Kind kind = Kind::Fst;
  Nat index;
  ExecResource exec;
  std::string exec_name;
  std::vector<Axis> sel_axes;  // own axes of the selecting binder, outermost dimension first
  DimLevel sel_level = DimLevel::Thread;
  ViewInst view;

  std::string str() const;
};

struct RPlace {
  std::string root;
  std::vector<RStep> steps;

  std::string key() const;  // exact text including storage ids
  std::string str() const;  // display form without storage ids
};

bool steps_equal(const RStep& a, const RStep& b);
bool chains_equal(const ViewChain& a, const ViewChain& b);

enum class Overlap { Disjoint, Overlapping };
const char* to_string(Overlap o);

Overlap places_overlap(const RPlace& a, const RPlace& b);

}  // namespace descend
