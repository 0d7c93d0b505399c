#pragma once

// Abstract syntax of Descend programs: data types, execution levels, place
// expressions, views and terms.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "descend/nat.hpp"
#include "descend/source.hpp"

namespace descend {

/// Owning pointer with deep-copy semantics, used for recursive AST members.
template <class T>
class Box {
 public:
  Box() : ptr_(std::make_unique<T>()) {}
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

 private:
  std::unique_ptr<T> ptr_;
};

// ---------------------------------------------------------------------------
// Execution dimensions and levels

enum class Axis { X = 0, Y = 1, Z = 2 };
const char* axis_name(Axis a);

/// A dimension form such as `XY<64,64>`: the present axes in X, Y, Z order.
struct Dim {
  std::vector<std::pair<Axis, Nat>> axes;

  const Nat* extent(Axis a) const;
  std::string str() const;
};

struct ExecLevel {
  enum class Kind { CpuThread, GpuGrid, GpuBlock, GpuThread };
  Kind kind = Kind::CpuThread;
  Dim blocks;   // GpuGrid
  Dim threads;  // GpuGrid, GpuBlock

  bool is_gpu() const { return kind != Kind::CpuThread; }
  std::string str() const;
};

// ---------------------------------------------------------------------------
// Memories and data types

struct Memory {
  enum class Kind { CpuMem, GpuGlobal, GpuShared, Var };
  Kind kind = Kind::CpuMem;
  std::string var;

  static Memory cpu() { return {Kind::CpuMem, {}}; }
  static Memory global() { return {Kind::GpuGlobal, {}}; }
  static Memory shared() { return {Kind::GpuShared, {}}; }
  static Memory variable(std::string n) { return {Kind::Var, std::move(n)}; }

  std::string str() const;
  friend bool operator==(const Memory& a, const Memory& b) { return a.kind == b.kind && a.var == b.var; }
};

enum class ScalarKind { I32, F32, F64, Bool, Unit };
const char* scalar_name(ScalarKind s);

enum class Uniqueness { Shrd, Uniq };

class DataType {
 public:
  enum class Kind { Scalar, Tuple, Array, View, Ref, Boxed, Var };

  DataType() : DataType(scalar(ScalarKind::Unit)) {}
  static DataType scalar(ScalarKind s);
  static DataType tuple(std::vector<DataType> elems);
  static DataType array(DataType elem, Nat size);
  static DataType view(DataType elem, Nat size);
  static DataType ref(Uniqueness u, Memory mem, DataType target);
  static DataType boxed(DataType target, Memory mem);
  static DataType var(std::string name);

  Kind kind() const { return node_->kind; }
  ScalarKind scalar_kind() const { return node_->scalar; }
  const std::vector<DataType>& elems() const { return node_->elems; }
  const DataType& elem() const { return node_->elems.front(); }  // array, view, ref, boxed
  const Nat& size() const { return node_->size; }
  Uniqueness uniq() const { return node_->uniq; }
  const Memory& mem() const { return node_->mem; }
  const std::string& name() const { return node_->name; }

  bool is_scalar(ScalarKind s) const { return kind() == Kind::Scalar && scalar_kind() == s; }
  bool is_unit() const { return is_scalar(ScalarKind::Unit); }
  bool is_arrayish() const { return kind() == Kind::Array || kind() == Kind::View; }
  bool is_numeric() const;

  std::string str() const;

 private:
  struct Node {
    Kind kind = Kind::Scalar;
    ScalarKind scalar = ScalarKind::Unit;
    std::vector<DataType> elems;
    Nat size;
    Uniqueness uniq = Uniqueness::Shrd;
    Memory mem;
    std::string name;
  };
  explicit DataType(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Views and place expressions

/// A view application, e.g. `group::<8>` or `map(transpose)`.
struct ViewInst {
  std::string name;
  std::vector<Nat> args;
  std::vector<ViewInst> inner;  // argument chain of `map`
  Span span;

  std::string str() const;
};
using ViewChain = std::vector<ViewInst>;
std::string chain_str(const ViewChain& chain);

struct PlaceInfo;  // filled in by the type checker

struct PlaceStep {
  enum class Kind { Fst, Snd, Deref, Index, Select, View };
  Kind kind = Kind::Fst;
  Nat index;         // Index
  std::string exec;  // Select
  ViewInst view;     // View
  Span span;
};

struct PlaceExpr {
  std::string root;
  Span root_span;
  std::vector<PlaceStep> steps;
  Span span;

  std::shared_ptr<const PlaceInfo> info;
};

// ---------------------------------------------------------------------------
// Terms

struct Term;

struct GenericArg {
  enum class Kind { Nat, Mem, Type };
  Kind kind = Kind::Nat;
  Nat nat;
  Memory mem;
  DataType type;
  Span span;
};

struct PlaceTerm {
  PlaceExpr place;
};
struct LetTerm {
  std::string name;
  Span name_span;
  std::optional<DataType> annot;
  Box<Term> init;
  std::string key;  // storage key, set by the type checker
};
struct AssignTerm {
  PlaceExpr place;
  Box<Term> value;
};
struct BorrowTerm {
  Uniqueness uniq = Uniqueness::Shrd;
  PlaceExpr place;
};
struct BlockTerm {
  std::vector<Term> stmts;
};
struct LaunchConfig {
  Dim blocks;
  Dim threads;
  Span span;
};
struct CallTerm {
  std::string callee;
  Span callee_span;
  std::vector<GenericArg> generics;
  std::optional<LaunchConfig> launch;
  std::vector<Term> args;

  // Instantiation chosen by the type checker.
  NatBindings nat_inst;
  std::map<std::string, Memory> mem_inst;
  std::map<std::string, DataType> type_inst;
};
struct ForEachTerm {
  std::string var;
  Box<Term> collection;
  Box<Term> body;
};
struct ForNatTerm {
  std::string var;
  Nat lo;
  Nat hi;
  Box<Term> body;
};
struct SchedTerm {
  std::vector<Axis> axes;  // empty: every remaining axis of the current level
  std::string binder;
  std::string exec;
  Span header;
  Box<Term> body;
};
struct SplitTerm {
  Axis axis = Axis::X;
  std::string exec;
  Nat pos;
  Span header;
  std::string fst_binder;
  Box<Term> fst;
  std::string snd_binder;
  Box<Term> snd;
};
struct SyncTerm {};
struct LitTerm {
  enum class Kind { Int, Float, Bool, Unit };
  Kind kind = Kind::Unit;
  std::int64_t int_value = 0;
  double float_value = 0;
  bool bool_value = false;
  std::string text;
};
enum class BinOp { Add, Sub, Mul, Div, Rem, Lt, Le, Gt, Ge, Eq, Ne, And, Or };
const char* binop_text(BinOp op);
struct BinaryTerm {
  BinOp op = BinOp::Add;
  Box<Term> lhs;
  Box<Term> rhs;
};
enum class UnOp { Neg, Not };
struct UnaryTerm {
  UnOp op = UnOp::Neg;
  Box<Term> operand;
};
struct ArrayRepeatTerm {
  Box<Term> value;
  Nat count;
};
struct TupleTerm {
  std::vector<Term> elems;
};

struct Term {
  using Node = std::variant<PlaceTerm, LetTerm, AssignTerm, BorrowTerm, BlockTerm, CallTerm, ForEachTerm, ForNatTerm,
                            SchedTerm, SplitTerm, SyncTerm, LitTerm, BinaryTerm, UnaryTerm, ArrayRepeatTerm, TupleTerm>;
  Node node;
  Span span;
  DataType type;  // set by the type checker

  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

// ---------------------------------------------------------------------------
// Items

enum class KindSort { Dt, Nat, Mem };

struct TypeParam {
  std::string name;
  KindSort kind = KindSort::Nat;
  Span span;
};

struct Param {
  std::string name;
  DataType type;
  Span span;
  std::string key;  // storage key, set by the type checker
};

struct FunctionDef {
  std::string name;
  Span name_span;
  std::vector<TypeParam> tparams;
  std::vector<Param> params;
  std::string exec_binder;
  ExecLevel exec;
  Span exec_span;
  DataType ret;
  Term body;  // always a BlockTerm
  Span span;

  bool is_polymorphic() const { return !tparams.empty(); }
};

struct ViewDef {
  std::string name;
  std::vector<std::string> params;  // all of kind nat
  ViewChain body;
  Span span;
};

using Item = std::variant<ViewDef, FunctionDef>;

struct Program {
  std::vector<Item> items;

  const FunctionDef* find_function(const std::string& name) const;
  FunctionDef* find_function(const std::string& name);
  const ViewDef* find_view(const std::string& name) const;
  std::vector<const FunctionDef*> functions() const;
  std::vector<FunctionDef*> functions();
};

}  // namespace descend
