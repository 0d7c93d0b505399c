#pragma once

// Flow-sensitive ownership, borrow, narrowing, access-conflict,
// synchronization, memory-space and launch checking.

#include <optional>
#include <string>

#include "descend/ast.hpp"
#include "descend/diagnostics.hpp"
#include "descend/views.hpp"

namespace descend {

/// Resolution of a place expression, attached to the AST by the checker.
struct PlaceInfo {
  RPlace rplace;        // root is a unique storage key
  DataType type;        // type of the place itself
  std::string root_name;
  DataType root_type;   // type of the storage the place indexes into
  std::optional<Memory> root_mem;  // nullopt for values private to the executing thread
  bool is_nat = false;  // the place names a size variable used as a value
  Nat nat;
};

struct CheckResult {
  bool ok = false;
  Diagnostics diags;
};

struct CheckOptions {
  // false: skip narrowing, conflict, borrow and barrier placement checks, so
  // that unsafe programs can still be resolved and simulated
  bool safety = true;
};

CheckResult check_program(Program& p, const CheckOptions& opts = {});

// Structural comparison of data types with provable size equality.
Tri types_equal(const DataType& a, const DataType& b);
bool is_copyable(const DataType& t);
DataType subst_type(const DataType& t, const NatBindings& nats, const std::map<std::string, Memory>& mems = {},
                    const std::map<std::string, DataType>& types = {});

}  // namespace descend
