#pragma once

// Monomorphization: specializes reachable functions to ground size, memory
// and type arguments and inlines calls to block- and thread-level functions.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "descend/ast.hpp"
#include "descend/diagnostics.hpp"
#include "descend/typecheck.hpp"

namespace descend {

class MonoError : public std::runtime_error {
 public:
  explicit MonoError(const std::string& msg, Diagnostics d = {}) : std::runtime_error(msg), diags(std::move(d)) {}
  Diagnostics diags;  // diagnostics of the specialized program, when it fails to check
};

struct MonoRoot {
  std::string function;
  NatBindings nats;
  std::map<std::string, Memory> mems;
  std::map<std::string, DataType> types;
};

struct MonoOptions {
  // When set, only these instances (and what they reach) are produced.
  // Otherwise every function without generic parameters on a cpu.thread or
  // gpu.grid is a root.
  std::vector<MonoRoot> roots;
  bool use_default_roots = true;
  CheckOptions check;
};

// `name` followed by `_<arg>` for every generic argument in parameter order.
std::string mangle(const FunctionDef& f, const NatBindings& nats, const std::map<std::string, Memory>& mems,
                   const std::map<std::string, DataType>& types);

// Takes a checked program and returns a checked ground program. Throws
// MonoError when a size stays symbolic or the specialization is rejected.
Program monomorphize(const Program& p, const MonoOptions& opts = {});

}  // namespace descend
