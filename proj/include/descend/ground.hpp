#pragma once

// Ground semantics of views and places: tables mapping output coordinates to
// flat offsets of the root array, built by direct construction.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "descend/ast.hpp"
#include "descend/views.hpp"

namespace descend {

class GroundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A ground view value: either a tuple, or a row-major table of flat offsets
/// with the given shape.
struct GValue {
  bool is_tuple = false;
  std::vector<GValue> parts;
  std::vector<std::int64_t> shape;
  std::vector<std::int64_t> offs;

  static GValue iota(std::vector<std::int64_t> shape);
  std::size_t slice_size() const;  // product of shape[1..]
  GValue slice(std::int64_t i) const;
};

// Ground shape of nested arrays/views down to the scalar element.
std::vector<std::int64_t> ground_shape(const DataType& t);

GValue apply_view(const ViewInst& v, const GValue& in);
GValue view_permutation(const ViewChain& chain, const std::vector<std::int64_t>& shape);
GValue project(const GValue& v, bool fst);

// Per-select coordinates keyed by the selecting resource's name; one entry
// per consumed dimension, outermost first.
using SelectCoords = std::map<std::string, std::vector<std::int64_t>>;

std::vector<std::int64_t> place_offsets(const RPlace& p, const DataType& root_type, const SelectCoords& coords,
                                        const NatValues& env = {});
std::set<std::int64_t> place_index_map(const RPlace& p, const DataType& root_type, const SelectCoords& coords,
                                       const NatValues& env = {});

}  // namespace descend
