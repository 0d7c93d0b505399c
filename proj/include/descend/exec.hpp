#pragma once

// Execution resources: a base (cpu thread or gpu grid) refined by a path of
// forall and split steps.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "descend/ast.hpp"

namespace descend {

enum class DimLevel { Block, Thread };

struct ExecStep {
  enum class Kind { Forall, Split };
  Kind kind = Kind::Forall;
  Axis axis = Axis::X;
  DimLevel level = DimLevel::Block;
  Nat pos;           // Split
  bool fst = true;   // Split: projection

  std::string str() const;
};

struct ExecBase {
  bool gpu = false;
  Dim blocks;   // empty below grid level
  Dim threads;  // empty at thread level

  std::string str() const;
  friend bool operator==(const ExecBase& a, const ExecBase& b) { return a.str() == b.str(); }
};

class ExecError : public std::runtime_error {
 public:
  enum class Kind { AxisAbsent, AxisConsumed, NoAxes, OutOfBounds, Unprovable };
  ExecError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

class ExecResource {
 public:
  static ExecResource cpu_thread();
  static ExecResource grid(Dim blocks, Dim threads);
  static ExecResource block(Dim threads);
  static ExecResource gpu_thread();
  static ExecResource from_level(const ExecLevel& level);

  const ExecBase& base() const { return base_; }
  const std::vector<ExecStep>& path() const { return path_; }

  // The dimension level the next refinement applies to; nullopt when every
  // axis is consumed (or on the cpu).
  std::optional<DimLevel> active_level() const;
  // Axes of the active level that are not yet consumed by a forall.
  std::vector<Axis> remaining_axes() const;
  bool consumed(DimLevel level, Axis axis) const;
  // Extent of an axis after the restrictions of every split on the path.
  std::optional<Nat> extent(DimLevel level, Axis axis) const;

  ExecResource with_step(ExecStep s) const;
  ExecResource prefix(std::size_t n) const;

  std::string str() const;
  friend bool operator==(const ExecResource& a, const ExecResource& b) { return a.str() == b.str(); }
  friend bool operator<(const ExecResource& a, const ExecResource& b) { return a.str() < b.str(); }

 private:
  ExecBase base_;
  std::vector<ExecStep> path_;
};

ExecResource refine_forall(const ExecResource& e, Axis axis);
ExecResource refine_split(const ExecResource& e, Axis axis, const Nat& pos, bool fst);

ExecLevel exec_level(const ExecResource& e);

enum class ExecRelation { Identical, Disjoint, Overlapping };
const char* to_string(ExecRelation r);

// Throws std::logic_error when the bases differ.
ExecRelation relation(const ExecResource& a, const ExecResource& b);

// True when `a`'s path is a prefix of `b`'s (same base).
bool is_ancestor_or_self(const ExecResource& a, const ExecResource& b);

}  // namespace descend
