// Statements and expressions.

#include <algorithm>

#include "check_internal.hpp"

namespace descend::detail {

namespace {

bool is_literal(const Term& t) {
  if (t.as<LitTerm>()) return true;
  if (const auto* u = t.as<UnaryTerm>()) return u->op == UnOp::Neg && is_literal(*u->operand);
  return false;
}

bool same_shape(const DataType& a, const DataType& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case DataType::Kind::Scalar: return a.scalar_kind() == b.scalar_kind();
    case DataType::Kind::Var: return a.name() == b.name();
    case DataType::Kind::Tuple:
      if (a.elems().size() != b.elems().size()) return false;
      for (std::size_t i = 0; i < a.elems().size(); ++i) {
        if (!same_shape(a.elems()[i], b.elems()[i])) return false;
      }
      return true;
    case DataType::Kind::Array:
    case DataType::Kind::View: return same_shape(a.elem(), b.elem());
    case DataType::Kind::Ref: return a.uniq() == b.uniq() && a.mem() == b.mem() && same_shape(a.elem(), b.elem());
    case DataType::Kind::Boxed: return a.mem() == b.mem() && same_shape(a.elem(), b.elem());
  }
  return false;
}

std::size_t block_prefix_len(const ExecResource& e) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < e.path().size(); ++i) {
    if (e.path()[i].level == DimLevel::Block) n = i + 1;
  }
  return n;
}

}  // namespace

VarInfo& Checker::declare(const std::string& name, DataType type, Span decl) {
  VarInfo v;
  v.name = name;
  v.key = name + "@" + std::to_string(next_id_++);
  v.type = std::move(type);
  v.depth = depth_;
  v.owner = cur_;
  v.decl = decl;
  vars_.push_back(std::move(v));
  return vars_.back();
}

void Checker::leave_scope(std::size_t mark) {
  while (vars_.size() > mark) vars_.pop_back();
}

void Checker::expect_type(const DataType& expected, const DataType& found, Span span, ErrorCode mismatch) {
  Tri eq = types_equal(expected, found);
  if (eq == Tri::True) return;
  ErrorCode code = same_shape(expected, found) ? ErrorCode::Size : mismatch;
  fail(code, "mismatched types", span, "expected `" + expected.str() + "`, found `" + found.str() + "`");
}

void Checker::block(Term& t, bool new_scope) {
  auto* b = t.as<BlockTerm>();
  t.type = DataType::scalar(ScalarKind::Unit);
  if (!b) {
    try {
      stmt(t);
    } catch (const CheckError& e) {
      if (!e.silent) report(e.diag);
    }
    return;
  }
  std::size_t mark = vars_.size();
  if (new_scope) ++depth_;
  for (auto& s : b->stmts) {
    try {
      stmt(s);
    } catch (const CheckError& e) {
      if (!e.silent) report(e.diag);
    }
  }
  if (new_scope) {
    --depth_;
    leave_scope(mark);
  }
}

void Checker::stmt(Term& t) {
  t.type = DataType::scalar(ScalarKind::Unit);
  if (auto* l = t.as<LetTerm>()) return let(t, *l);
  if (auto* a = t.as<AssignTerm>()) return assign(t, *a);
  if (t.as<BlockTerm>()) return block(t);
  if (auto* s = t.as<SchedTerm>()) return sched(t, *s);
  if (auto* s = t.as<SplitTerm>()) return split(t, *s);
  if (t.as<SyncTerm>()) return sync(t);
  if (auto* f = t.as<ForEachTerm>()) return for_each(t, *f);
  if (auto* f = t.as<ForNatTerm>()) return for_nat(t, *f);
  expr(t, nullptr);
}

void Checker::let(Term& t, LetTerm& l) {
  (void)t;
  try {
    if (l.annot) validate_type(*l.annot, l.name_span);
    DataType ty;
    std::optional<Resolved> alias;
    Uniqueness mode = Uniqueness::Shrd;
    VarInfo* copied = nullptr;
    if (auto* b = l.init->as<BorrowTerm>()) {
      Resolved r;
      ty = borrow(*l.init, b->uniq, b->place, false, &r);
      l.init->type = ty;
      alias = r;
      mode = b->uniq;
    } else {
      if (auto* pt = l.init->as<PlaceTerm>(); pt && pt->place.steps.empty()) {
        VarInfo* src = lookup(pt->place.root);
        if (src && src->has_alias) copied = src;
      }
      ty = expr(*l.init, l.annot ? &*l.annot : nullptr);
    }
    if (l.annot) {
      expect_type(*l.annot, ty, l.init->span);
      ty = *l.annot;
    }
    if (ty.kind() == DataType::Kind::View) {
      fail(ErrorCode::Type, "views cannot be stored in variables", l.init->span, "borrow the view instead");
    }
    VarInfo& v = declare(l.name, ty, l.name_span);
    l.key = v.key;
    if (alias) {
      auto* b = l.init->as<BorrowTerm>();
      v.has_alias = true;
      v.alias = alias->rp;
      v.alias_mode = mode;
      v.alias_span = l.init->span;
      v.alias_info = b->place.info;
      v.alias_owner = alias->owner;
      v.alias_parents = alias->traversed;
    } else if (copied) {
      v.has_alias = true;
      v.alias = copied->alias;
      v.alias_mode = copied->alias_mode;
      v.alias_span = copied->alias_span;
      v.alias_info = copied->alias_info;
      v.alias_owner = copied->alias_owner;
      v.alias_parents = copied->alias_parents;
      v.alias_parents.push_back(copied->key);
    }
  } catch (const CheckError& e) {
    if (!e.silent) report(e.diag);
    declare(l.name, l.annot ? *l.annot : DataType(), l.name_span).poisoned = true;
  }
}

void Checker::assign(Term& t, AssignTerm& a) {
  (void)t;
  VarInfo* target = a.place.steps.empty() ? lookup(a.place.root) : nullptr;
  bool reinit = target && target->moved;
  if (reinit) target->moved = false;
  Resolved r;
  try {
    r = resolve(a.place, Uniqueness::Uniq, false);
  } catch (...) {
    if (reinit) target->moved = true;
    throw;
  }
  if (r.is_nat) fail(ErrorCode::Type, "cannot assign to size variable `" + a.place.root + "`", a.place.span);
  if (r.type.kind() == DataType::Kind::View) {
    fail(ErrorCode::Type, "cannot assign to a view as a whole", a.place.span, "select or index an element instead");
  }
  DataType pt = r.type;
  DataType vt = expr(*a.value, &pt);
  expect_type(pt, vt, a.value->span);
  access(r, Uniqueness::Uniq, Access::Write, a.place.span, true);
  attach(a.place, r);
  if (vt.kind() == DataType::Kind::Ref) {
    if (auto* b = a.value->as<BorrowTerm>()) {
      VarInfo* src = lookup(b->place.root);
      VarInfo* dst = lookup(a.place.root);
      if (src && dst && src->depth > dst->depth) {
        fail(ErrorCode::Borrow, "`" + src->name + "` does not live long enough", b->place.span,
             "borrowed value does not live long enough", {{a.place.span, "assigned to a longer-lived place here"}});
      }
    }
  }
}

void Checker::sched(Term& t, SchedTerm& s) {
  (void)t;
  if (!cur_.base().gpu) fail(ErrorCode::Type, "`sched` requires a GPU execution resource", s.header);
  const ExecBinder* b = find_binder(s.exec);
  if (!b) fail(ErrorCode::Type, "cannot find execution resource `" + s.exec + "`", s.header, "not found");
  if (!(b->res == cur_)) {
    fail(ErrorCode::Type, "`" + s.exec + "` is not the current execution resource", s.header,
         "the current execution resource is `" + cur_.str() + "`");
  }
  std::vector<Axis> axes = s.axes.empty() ? cur_.remaining_axes() : s.axes;
  if (axes.empty()) {
    fail(ErrorCode::Size, "cannot schedule over `" + s.exec + "`: no dimensions left to schedule over", s.header);
  }
  ExecResource e = cur_;
  auto lvl = e.active_level();
  std::size_t first = e.path().size();
  for (Axis a : axes) {
    if (e.active_level() != lvl) {
      fail(ErrorCode::Size, "the dimensions of one `sched` must belong to a single level", s.header);
    }
    try {
      e = refine_forall(e, a);
    } catch (const ExecError& x) {
      fail(ErrorCode::Size, x.what(), s.header);
    }
  }
  ExecBinder nb;
  nb.name = s.binder;
  nb.res = e;
  nb.own_axes = axes;
  std::sort(nb.own_axes.begin(), nb.own_axes.end());
  nb.level = *lvl;
  nb.first_own = first;
  nb.header = s.header;

  ExecResource saved = cur_;
  binders_.push_back(nb);
  sched_headers_.push_back(s.header);
  cur_ = e;
  block(*s.body);
  cur_ = saved;
  sched_headers_.pop_back();
  binders_.pop_back();
}

void Checker::split(Term& t, SplitTerm& s) {
  (void)t;
  if (!cur_.base().gpu) fail(ErrorCode::Type, "`split` requires a GPU execution resource", s.header);
  const ExecBinder* b = find_binder(s.exec);
  if (!b) fail(ErrorCode::Type, "cannot find execution resource `" + s.exec + "`", s.header, "not found");
  if (!(b->res == cur_)) {
    fail(ErrorCode::Type, "`" + s.exec + "` is not the current execution resource", s.header,
         "the current execution resource is `" + cur_.str() + "`");
  }
  validate_nat(s.pos, s.header);
  ExecResource parts[2];
  try {
    parts[0] = refine_split(cur_, s.axis, s.pos, true);
    parts[1] = refine_split(cur_, s.axis, s.pos, false);
  } catch (const ExecError& x) {
    fail(ErrorCode::Size, x.what(), s.header);
  }
  ExecResource saved = cur_;
  const std::string* names[2] = {&s.fst_binder, &s.snd_binder};
  Term* bodies[2] = {&*s.fst, &*s.snd};
  for (int i = 0; i < 2; ++i) {
    ExecBinder nb;
    nb.name = *names[i];
    nb.res = parts[i];
    nb.level = parts[i].path().back().level;
    nb.header = s.header;
    nb.is_split = true;
    binders_.push_back(nb);
    split_headers_.push_back({s.exec, s.header, saved.path().size()});
    cur_ = parts[i];
    block(*bodies[i]);
    cur_ = saved;
    split_headers_.pop_back();
    binders_.pop_back();
  }
}

void Checker::sync(Term& t) {
  if (!cur_.base().gpu) {
    fail(ErrorCode::Sync, "barrier not allowed here", t.span, "`sync` cannot be performed by a CPU thread");
  }
  if (!safety_) return;
  for (std::size_t i = 0; i < cur_.path().size(); ++i) {
    const ExecStep& st = cur_.path()[i];
    if (st.kind != ExecStep::Kind::Split || st.level != DimLevel::Thread) continue;
    std::vector<Label> rel;
    for (const auto& h : split_headers_) {
      if (h.index == i) rel.push_back({h.header, "`" + h.exec + "` is split here"});
    }
    fail(ErrorCode::Sync, "barrier not allowed here", t.span, "`sync` not performed by all threads in the block", rel);
  }
  ExecLevel lvl = exec_level(cur_);
  if (lvl.kind != ExecLevel::Kind::GpuThread) {
    std::string why = lvl.kind == ExecLevel::Kind::GpuGrid
                          ? "the blocks of a grid are only synchronized when the kernel finishes"
                          : "`sync` must be performed by the individual threads of a block";
    fail(ErrorCode::Sync, "barrier not allowed here", t.span, why,
         {{cur_header(), "executed by `" + level_name(lvl.kind) + "`"}});
  }
  ExecResource b = cur_.prefix(block_prefix_len(cur_));
  for (auto& e : A_) {
    if (is_ancestor_or_self(b, e.exec)) e.loan.synced = true;
  }
}

void Checker::for_each(Term& t, ForEachTerm& f) {
  (void)t;
  auto k = exec_level(cur_).kind;
  if (k != ExecLevel::Kind::GpuThread && k != ExecLevel::Kind::CpuThread) {
    fail(ErrorCode::Type, "`for` over a collection is only allowed for single threads", f.collection->span,
         "executed by `" + level_name(k) + "`");
  }
  auto* pt = f.collection->as<PlaceTerm>();
  if (!pt) fail(ErrorCode::Type, "expected a place to iterate over", f.collection->span);
  Resolved r = resolve(pt->place, Uniqueness::Shrd, true);
  if (!r.type.is_arrayish()) {
    fail(ErrorCode::Type, "cannot iterate over a value of type `" + r.type.str() + "`", f.collection->span);
  }
  attach(pt->place, r);
  f.collection->type = r.type;
  std::string iv = "_i_" + f.var;
  if (ranges_.count(iv) || is_nat_name(f.var)) {
    fail(ErrorCode::Type, "loop variable `" + f.var + "` shadows an enclosing loop variable", f.collection->span);
  }
  ranges_[iv] = {Nat::lit(0), r.type.size()};
  std::size_t mark = vars_.size();
  ++depth_;
  VarInfo& v = declare(f.var, r.type.elem(), f.collection->span);
  v.is_place_alias = true;
  v.place_alias = pt->place;
  PlaceStep idx;
  idx.kind = PlaceStep::Kind::Index;
  idx.index = Nat::var(iv);
  idx.span = pt->place.span;
  v.place_alias.steps.push_back(idx);
  block(*f.body);
  --depth_;
  leave_scope(mark);
  ranges_.erase(iv);
}

void Checker::for_nat(Term& t, ForNatTerm& f) {
  validate_nat(f.lo, t.span);
  validate_nat(f.hi, t.span);
  if (nat_le(f.lo, f.hi) == Tri::False) {
    fail(ErrorCode::Size, "the range `[" + f.lo.str() + ".." + f.hi.str() + "]` is empty", t.span);
  }
  if (is_nat_name(f.var) || lookup(f.var)) {
    fail(ErrorCode::Type, "loop variable `" + f.var + "` shadows an enclosing name", t.span);
  }
  ranges_[f.var] = {f.lo, f.hi};
  block(*f.body);
  ranges_.erase(f.var);
}

DataType Checker::read_place(Term& t, PlaceExpr& p) {
  (void)t;
  Resolved r = resolve(p, Uniqueness::Shrd, false);
  if (r.is_nat) {
    attach(p, r);
    return r.type;
  }
  if (is_copyable(r.type)) {
    access(r, Uniqueness::Shrd, Access::Read, p.span, true);
  } else {
    if (!r.whole_var || !r.var) {
      fail(ErrorCode::Move, "cannot move out of `" + r.rp.str() + "`", p.span,
           "move occurs because the value has type `" + r.type.str() + "`, which is not copyable");
    }
    check_live_borrows(r, Uniqueness::Uniq, p.span);
    r.var->moved = true;
    r.var->moved_at = p.span;
  }
  attach(p, r);
  return r.type;
}

DataType Checker::borrow(Term& t, Uniqueness u, PlaceExpr& p, bool record, Resolved* out) {
  (void)t;
  Resolved r = resolve(p, u, true);
  if (r.is_nat) fail(ErrorCode::Type, "cannot borrow size variable `" + p.root + "`", p.span);
  Memory mem;
  if (r.root_mem) {
    mem = *r.root_mem;
  } else if (!cur_.base().gpu) {
    mem = Memory::cpu();
  } else {
    fail(ErrorCode::Type, "cannot borrow `" + r.rp.str() + "`", p.span,
         "values private to a GPU thread cannot be referenced");
  }
  access(r, u, Access::Borrow, p.span, record);
  attach(p, r);
  if (out) *out = r;
  return DataType::ref(u, mem, r.type);
}

DataType Checker::binary(Term& t, BinaryTerm& b, const DataType* expected) {
  (void)t;
  const DataType boolean = DataType::scalar(ScalarKind::Bool);
  if (b.op == BinOp::And || b.op == BinOp::Or) {
    DataType l = expr(*b.lhs, &boolean);
    expect_type(boolean, l, b.lhs->span);
    DataType r = expr(*b.rhs, &boolean);
    expect_type(boolean, r, b.rhs->span);
    return boolean;
  }
  bool arith = b.op == BinOp::Add || b.op == BinOp::Sub || b.op == BinOp::Mul || b.op == BinOp::Div ||
               b.op == BinOp::Rem;
  const DataType* hint = arith ? expected : nullptr;
  DataType lt;
  DataType rt;
  if (is_literal(*b.lhs) && !is_literal(*b.rhs)) {
    rt = expr(*b.rhs, hint);
    lt = expr(*b.lhs, &rt);
  } else {
    lt = expr(*b.lhs, hint);
    rt = expr(*b.rhs, &lt);
  }
  bool eq_op = b.op == BinOp::Eq || b.op == BinOp::Ne;
  if (!lt.is_numeric() && !(eq_op && lt.is_scalar(ScalarKind::Bool))) {
    fail(ErrorCode::Type, std::string("cannot apply `") + binop_text(b.op) + "` to `" + lt.str() + "`", b.lhs->span);
  }
  expect_type(lt, rt, b.rhs->span);
  return arith ? lt : boolean;
}

DataType Checker::expr(Term& t, const DataType* expected) {
  DataType ty;
  if (auto* p = t.as<PlaceTerm>()) {
    ty = read_place(t, p->place);
  } else if (auto* b = t.as<BorrowTerm>()) {
    ty = borrow(t, b->uniq, b->place, true);
  } else if (auto* c = t.as<CallTerm>()) {
    ty = call(t, *c, expected);
  } else if (auto* l = t.as<LitTerm>()) {
    switch (l->kind) {
      case LitTerm::Kind::Int:
        ty = expected && expected->is_numeric() ? *expected : DataType::scalar(ScalarKind::I32);
        break;
      case LitTerm::Kind::Float:
        if (expected && (expected->is_scalar(ScalarKind::F32) || expected->is_scalar(ScalarKind::F64))) {
          ty = *expected;
        } else {
          ty = DataType::scalar(ScalarKind::F64);
        }
        break;
      case LitTerm::Kind::Bool: ty = DataType::scalar(ScalarKind::Bool); break;
      case LitTerm::Kind::Unit: ty = DataType::scalar(ScalarKind::Unit); break;
    }
  } else if (auto* bin = t.as<BinaryTerm>()) {
    ty = binary(t, *bin, expected);
  } else if (auto* u = t.as<UnaryTerm>()) {
    if (u->op == UnOp::Neg) {
      ty = expr(*u->operand, expected);
      if (!ty.is_numeric()) fail(ErrorCode::Type, "cannot negate a value of type `" + ty.str() + "`", t.span);
    } else {
      DataType boolean = DataType::scalar(ScalarKind::Bool);
      ty = expr(*u->operand, &boolean);
      expect_type(boolean, ty, u->operand->span);
    }
  } else if (auto* a = t.as<ArrayRepeatTerm>()) {
    validate_nat(a->count, t.span);
    const DataType* inner = expected && expected->is_arrayish() ? &expected->elem() : nullptr;
    DataType et = expr(*a->value, inner);
    if (!is_copyable(et)) {
      fail(ErrorCode::Type, "array repetition requires a copyable element, found `" + et.str() + "`", a->value->span);
    }
    ty = DataType::array(et, normalize(a->count));
  } else if (auto* tu = t.as<TupleTerm>()) {
    std::vector<DataType> es;
    for (std::size_t i = 0; i < tu->elems.size(); ++i) {
      const DataType* inner = expected && expected->kind() == DataType::Kind::Tuple &&
                                      expected->elems().size() == tu->elems.size()
                                  ? &expected->elems()[i]
                                  : nullptr;
      es.push_back(expr(tu->elems[i], inner));
    }
    ty = DataType::tuple(std::move(es));
  } else {
    fail(ErrorCode::Type, "expected an expression", t.span, "statements do not produce values");
  }
  t.type = ty;
  return ty;
}

}  // namespace descend::detail
