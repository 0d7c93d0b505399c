#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "descend/exec.hpp"
#include "descend/typecheck.hpp"
#include "descend/views.hpp"

namespace descend::detail {

struct CheckError {
  Diagnostic diag;
  bool silent = false;  // already reported, or caused by a poisoned variable
};

struct VarInfo {
  std::string name;
  std::string key;  // unique storage key, `name@id`
  DataType type;
  int depth = 0;
  ExecResource owner;
  Span decl;
  bool moved = false;
  Span moved_at;
  bool poisoned = false;

  // `let r = &p`: r stands for p.
  bool has_alias = false;
  RPlace alias;
  Uniqueness alias_mode = Uniqueness::Shrd;
  Span alias_span;
  std::shared_ptr<const PlaceInfo> alias_info;
  ExecResource alias_owner;
  std::vector<std::string> alias_parents;  // keys of alias variables traversed by the borrow

  // `for x in p`: x names the place p[_i_x].
  bool is_place_alias = false;
  PlaceExpr place_alias;
};

struct ExecBinder {
  std::string name;
  ExecResource res;
  std::vector<Axis> own_axes;  // sorted X, Y, Z
  DimLevel level = DimLevel::Thread;
  std::size_t first_own = 0;  // path index of the first forall introduced by this binder
  Span header;
  bool is_split = false;
};

struct Loan {
  Uniqueness mode = Uniqueness::Shrd;
  RPlace place;
  Span span;
  bool synced = false;
};

struct AccessEntry {
  ExecResource exec;
  Loan loan;
};

enum class Access { Read, Write, Borrow, Probe };

struct Resolved {
  RPlace rp;
  DataType type;
  std::string root_name;
  DataType root_type;
  std::optional<Memory> root_mem;
  ExecResource owner;
  bool is_nat = false;
  Nat nat;
  VarInfo* var = nullptr;  // the root variable when the place is the variable itself
  bool whole_var = true;
  std::vector<std::pair<Memory, Span>> derefs;
  std::vector<std::string> deref_text;
  bool through_shrd = false;
  Span shrd_span;
  std::vector<std::string> traversed;
};

struct NatRange {
  Nat lo;
  Nat hi;
};

class Checker {
 public:
  explicit Checker(Program& prog) : prog_(prog) {}
  CheckResult run();

  // check_types.cpp
  void check_view_defs();
  void check_function(FunctionDef& f);
  void validate_type(const DataType& t, Span span);
  void validate_nat(const Nat& n, Span span);
  [[noreturn]] void fail(ErrorCode code, std::string msg, Span span, std::string label = {},
                         std::vector<Label> related = {});
  void report(const Diagnostic& d);
  static std::string level_name(ExecLevel::Kind k);
  std::string cur_level_name() const;
  Span cur_header() const;

  // check_places.cpp
  Resolved resolve(PlaceExpr& p, Uniqueness mode, bool auto_deref_end);
  void check_mem(const Resolved& r);
  void access(const Resolved& r, Uniqueness mode, Access kind, Span span, bool record);
  void check_narrowing(const Resolved& r, Access kind, Span span);
  void check_conflicts(const Resolved& r, Uniqueness mode, Span span);
  void check_live_borrows(const Resolved& r, Uniqueness mode, Span span);
  void attach(PlaceExpr& p, const Resolved& r);
  std::set<std::size_t> covered(const std::vector<RStep>& steps, std::size_t upto) const;
  const ExecBinder* binder_for_index(std::size_t i) const;

  // check_terms.cpp
  void block(Term& t, bool new_scope = true);
  void stmt(Term& t);
  DataType expr(Term& t, const DataType* expected);
  DataType read_place(Term& t, PlaceExpr& p);
  DataType borrow(Term& t, Uniqueness u, PlaceExpr& p, bool record, Resolved* out = nullptr);
  void let(Term& t, LetTerm& l);
  void assign(Term& t, AssignTerm& a);
  void sched(Term& t, SchedTerm& s);
  void split(Term& t, SplitTerm& s);
  void sync(Term& t);
  void for_each(Term& t, ForEachTerm& f);
  void for_nat(Term& t, ForNatTerm& f);
  DataType binary(Term& t, BinaryTerm& b, const DataType* expected);
  void expect_type(const DataType& expected, const DataType& found, Span span, ErrorCode mismatch = ErrorCode::Type);
  void leave_scope(std::size_t mark);
  VarInfo& declare(const std::string& name, DataType type, Span decl);
  VarInfo* lookup(const std::string& name);
  const ExecBinder* find_binder(const std::string& name) const;
  bool is_nat_name(const std::string& name) const;

  // check_calls.cpp
  DataType call(Term& t, CallTerm& c, const DataType* expected);
  DataType intrinsic(Term& t, CallTerm& c);
  DataType call_arg(Term& arg, const DataType* expected);

  Program& prog_;
  bool safety_ = true;
  Diagnostics diags_;
  std::set<std::string> seen_;

  // Per-function state.
  FunctionDef* fn_ = nullptr;
  std::map<std::string, KindSort> delta_;
  std::deque<VarInfo> vars_;
  int depth_ = 0;
  int next_id_ = 0;
  std::vector<ExecBinder> binders_;
  struct SplitHeader {
    std::string exec;
    Span header;
    std::size_t index = 0;  // path index of the split step
  };
  std::vector<SplitHeader> split_headers_;
  std::vector<Span> sched_headers_;
  ExecResource cur_;
  std::vector<AccessEntry> A_;
  std::map<std::string, NatRange> ranges_;
};

}  // namespace descend::detail
