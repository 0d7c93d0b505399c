#pragma once

// Lowering of checked, monomorphized programs to a small imperative IR with
// raw integer indices. The CUDA emitter prints this IR and the IR evaluator
// executes it.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "descend/ast.hpp"
#include "descend/views.hpp"

namespace descend {

class LowerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SymValues = std::map<std::string, std::int64_t>;

/// Integer index expression over blockIdx/threadIdx symbols, loop variables
/// and constants.
class LIndex {
 public:
  enum class Kind { Lit, Sym, Add, Sub, Mul, Div, Mod };

  LIndex() : LIndex(lit(0)) {}
  static LIndex lit(std::int64_t v);
  static LIndex sym(std::string name);
  static LIndex from_nat(const Nat& n);
  static LIndex bin(Kind k, const LIndex& a, const LIndex& b);  // without folding

  friend LIndex operator+(const LIndex& a, const LIndex& b);
  friend LIndex operator-(const LIndex& a, const LIndex& b);
  friend LIndex operator*(const LIndex& a, const LIndex& b);
  friend LIndex operator/(const LIndex& a, const LIndex& b);
  friend LIndex operator%(const LIndex& a, const LIndex& b);

  Kind kind() const { return node_->kind; }
  std::int64_t value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  bool is_lit(std::int64_t v) const { return kind() == Kind::Lit && value() == v; }
  LIndex lhs() const { return LIndex(node_->lhs); }  // binary only
  LIndex rhs() const { return LIndex(node_->rhs); }

  // Throws LowerError on an unbound symbol or a division by zero.
  std::int64_t eval(const SymValues& env) const;
  std::string str() const;

 private:
  struct Node {
    Kind kind = Kind::Lit;
    std::int64_t value = 0;
    std::string name;
    std::shared_ptr<const Node> lhs, rhs;
  };
  explicit LIndex(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  void print(std::string& out, int ctx_prec, bool right) const;
  std::shared_ptr<const Node> node_;
};

// Symbol for the index of an execution axis, e.g. `threadIdx.y`.
std::string axis_symbol(DimLevel level, Axis a);

// Flat offset of the element of `p` at coordinates `rest` of the place's
// own remaining dimensions (missing trailing coordinates are zero). Views are
// undone starting with the last one applied.
LIndex lower_place(const RPlace& p, const DataType& root_type, const std::vector<LIndex>& rest = {});

// Index of a select coordinate: the axis index relative to the sub-range
// selected by the splits on the resource's path.
LIndex select_index(const ExecResource& e, DimLevel level, Axis a);

// ---------------------------------------------------------------------------
// IR

struct LExpr {
  enum class Kind { Int, Float, Bool, Load, Index, Var, Ptr, Binary, Unary };
  Kind kind = Kind::Int;
  ScalarKind type = ScalarKind::I32;
  std::int64_t ival = 0;
  double fval = 0;
  bool bval = false;
  std::string text;  // literal spelling of floats
  std::string var;   // Load, Var, Ptr
  std::optional<LIndex> idx;  // Load: element offset; none for scalar locals
  LIndex index;      // Index, Ptr offset
  BinOp op = BinOp::Add;
  UnOp uop = UnOp::Neg;
  std::vector<LExpr> args;
};

struct LVarDecl {
  std::string name;
  ScalarKind elem = ScalarKind::I32;
  std::int64_t count = 0;  // 0 for a scalar
};

struct LStmt {
  enum class Kind {
    Block,
    DeclLocal,   // decl (+ optional init for scalars)
    DeclShared,  // decl
    DeclPtr,     // decl = ptr expr
    Assign,      // var[idx] = value
    If,          // cond_sym < bound
    For,         // for var in [lo, hi)
    Sync,
    Launch,
    CpuNew,      // decl = new buffer filled with value
    AllocCopy,   // decl = gpu copy of src
    CopyToHost,  // args: src (gpu), dst (cpu)
    CopyToGpu,   // args: dst (gpu), src (cpu)
    Free,
  };
  Kind kind = Kind::Block;
  std::vector<LStmt> body;  // Block, For, If-then
  std::vector<LStmt> els;   // If-else
  LVarDecl decl;
  std::string var;  // Assign target, For variable, Free target, Launch callee
  std::optional<LIndex> idx;
  LExpr value;
  std::vector<LExpr> args;
  std::string cond_sym;
  LIndex bound, lo, hi;
  bool gpu = false;  // Free
  std::array<std::int64_t, 3> blocks{1, 1, 1};
  std::array<std::int64_t, 3> threads{1, 1, 1};
  std::int64_t count = 0;  // copy element count
};

struct LParam {
  std::string name;
  ScalarKind elem = ScalarKind::I32;
  bool pointer = false;
  bool is_const = false;
  std::int64_t count = 0;  // pointee element count
};

struct LFunction {
  std::string name;
  bool kernel = false;
  std::vector<LParam> params;
  std::array<std::int64_t, 3> blocks{1, 1, 1};
  std::array<std::int64_t, 3> threads{1, 1, 1};
  std::vector<LStmt> body;
};

struct LProgram {
  std::vector<LFunction> functions;
  const LFunction* find(const std::string& name) const;
};

const char* c_type(ScalarKind s);

// Lowers a checked, monomorphized program.
LProgram lower_program(const Program& p);

}  // namespace descend
