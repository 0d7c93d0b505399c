#include "descend/lower.hpp"

#include <algorithm>
#include <set>

#include "descend/typecheck.hpp"

namespace descend {

// ---------------------------------------------------------------------------
// LIndex

LIndex LIndex::lit(std::int64_t v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Lit;
  n->value = v;
  return LIndex(n);
}

LIndex LIndex::sym(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sym;
  n->name = std::move(name);
  return LIndex(n);
}

LIndex LIndex::bin(Kind k, const LIndex& a, const LIndex& b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = a.node_;
  n->rhs = b.node_;
  return LIndex(n);
}

namespace {

// x + k for a literal k, merging a literal on the right of x
LIndex add_const(const LIndex& x, std::int64_t k);

}  // namespace

LIndex operator+(const LIndex& a, const LIndex& b) {
  if (a.kind() == LIndex::Kind::Lit && b.kind() == LIndex::Kind::Lit) return LIndex::lit(a.value() + b.value());
  if (b.kind() == LIndex::Kind::Lit) return add_const(a, b.value());
  if (a.is_lit(0)) return b;
  if (b.is_lit(0)) return a;
  return LIndex::bin(LIndex::Kind::Add, a, b);
}

LIndex operator-(const LIndex& a, const LIndex& b) {
  if (a.kind() == LIndex::Kind::Lit && b.kind() == LIndex::Kind::Lit) return LIndex::lit(a.value() - b.value());
  if (b.kind() == LIndex::Kind::Lit) return add_const(a, -b.value());
  if (b.is_lit(0)) return a;
  return LIndex::bin(LIndex::Kind::Sub, a, b);
}

LIndex operator*(const LIndex& a, const LIndex& b) {
  if (a.kind() == LIndex::Kind::Lit && b.kind() == LIndex::Kind::Lit) return LIndex::lit(a.value() * b.value());
  if (a.is_lit(0) || b.is_lit(0)) return LIndex::lit(0);
  if (a.is_lit(1)) return b;
  if (b.is_lit(1)) return a;
  return LIndex::bin(LIndex::Kind::Mul, a, b);
}

LIndex operator/(const LIndex& a, const LIndex& b) {
  if (a.kind() == LIndex::Kind::Lit && b.kind() == LIndex::Kind::Lit && b.value() != 0) {
    return LIndex::lit(a.value() / b.value());
  }
  if (b.is_lit(1)) return a;
  return LIndex::bin(LIndex::Kind::Div, a, b);
}

LIndex operator%(const LIndex& a, const LIndex& b) {
  if (a.kind() == LIndex::Kind::Lit && b.kind() == LIndex::Kind::Lit && b.value() != 0) {
    return LIndex::lit(a.value() % b.value());
  }
  if (b.is_lit(1)) return LIndex::lit(0);
  return LIndex::bin(LIndex::Kind::Mod, a, b);
}

namespace {

LIndex add_const(const LIndex& x, std::int64_t k) {
  if (k == 0) return x;
  if (x.kind() == LIndex::Kind::Lit) return LIndex::lit(x.value() + k);
  LIndex base = x;
  std::int64_t c = k;
  if (x.kind() == LIndex::Kind::Add && x.rhs().kind() == LIndex::Kind::Lit) {
    base = x.lhs();
    c += x.rhs().value();
  } else if (x.kind() == LIndex::Kind::Sub && x.rhs().kind() == LIndex::Kind::Lit) {
    base = x.lhs();
    c -= x.rhs().value();
  }
  if (c == 0) return base;
  if (c > 0) return LIndex::bin(LIndex::Kind::Add, base, LIndex::lit(c));
  return LIndex::bin(LIndex::Kind::Sub, base, LIndex::lit(-c));
}

}  // namespace

LIndex LIndex::from_nat(const Nat& n) {
  if (auto v = n.ground_value()) return lit(*v);
  switch (n.kind()) {
    case Nat::Kind::Lit: return lit(static_cast<std::int64_t>(n.value()));
    case Nat::Kind::Var: return sym(n.name());
    case Nat::Kind::Add: return from_nat(n.lhs()) + from_nat(n.rhs());
    case Nat::Kind::Sub: return from_nat(n.lhs()) - from_nat(n.rhs());
    case Nat::Kind::Mul: return from_nat(n.lhs()) * from_nat(n.rhs());
    case Nat::Kind::Div: return from_nat(n.lhs()) / from_nat(n.rhs());
    case Nat::Kind::Mod: return from_nat(n.lhs()) % from_nat(n.rhs());
  }
  return lit(0);
}

std::int64_t LIndex::eval(const SymValues& env) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Lit: return n.value;
    case Kind::Sym: {
      auto it = env.find(n.name);
      if (it == env.end()) throw LowerError("unbound index symbol `" + n.name + "`");
      return it->second;
    }
    default: break;
  }
  std::int64_t a = LIndex(n.lhs).eval(env);
  std::int64_t b = LIndex(n.rhs).eval(env);
  switch (n.kind) {
    case Kind::Add: return a + b;
    case Kind::Sub: return a - b;
    case Kind::Mul: return a * b;
    case Kind::Div:
      if (b == 0) throw LowerError("division by zero in index");
      return a / b;
    case Kind::Mod:
      if (b == 0) throw LowerError("division by zero in index");
      return a % b;
    default: return 0;
  }
}

namespace {

int prec(LIndex::Kind k) {
  switch (k) {
    case LIndex::Kind::Add:
    case LIndex::Kind::Sub: return 1;
    case LIndex::Kind::Mul:
    case LIndex::Kind::Div:
    case LIndex::Kind::Mod: return 2;
    default: return 3;
  }
}

const char* op_text(LIndex::Kind k) {
  switch (k) {
    case LIndex::Kind::Add: return " + ";
    case LIndex::Kind::Sub: return " - ";
    case LIndex::Kind::Mul: return "*";
    case LIndex::Kind::Div: return "/";
    case LIndex::Kind::Mod: return "%";
    default: return "";
  }
}

}  // namespace

// ctx_prec: precedence of the parent operator; right: this node is the right
// operand of a parent that is not associative with it.
void LIndex::print(std::string& out, int ctx_prec, bool right) const {
  const Node& n = *node_;
  if (n.kind == Kind::Lit) {
    if (n.value < 0) out += "(" + std::to_string(n.value) + ")";
    else out += std::to_string(n.value);
    return;
  }
  if (n.kind == Kind::Sym) {
    out += n.name;
    return;
  }
  int p = prec(n.kind);
  bool parens = p < ctx_prec || (p == ctx_prec && right);
  if (parens) out += "(";
  LIndex(n.lhs).print(out, p, false);
  out += op_text(n.kind);
  LIndex r(n.rhs);
  bool strict = n.kind == Kind::Sub || n.kind == Kind::Div || n.kind == Kind::Mod ||
                (n.kind == Kind::Mul && (r.kind() == Kind::Div || r.kind() == Kind::Mod));
  r.print(out, p, strict);
  if (parens) out += ")";
}

std::string LIndex::str() const {
  std::string s;
  print(s, 0, false);
  return s;
}

std::string axis_symbol(DimLevel level, Axis a) {
  std::string s = level == DimLevel::Block ? "blockIdx." : "threadIdx.";
  switch (a) {
    case Axis::X: return s + "x";
    case Axis::Y: return s + "y";
    case Axis::Z: return s + "z";
  }
  return s;
}

LIndex select_index(const ExecResource& e, DimLevel level, Axis a) {
  LIndex off = LIndex::lit(0);
  for (const auto& st : e.path()) {
    if (st.kind == ExecStep::Kind::Split && st.level == level && st.axis == a && !st.fst) {
      off = off + LIndex::from_nat(st.pos);
    }
  }
  return LIndex::sym(axis_symbol(level, a)) - off;
}

// ---------------------------------------------------------------------------
// Places

namespace {

// Maps coordinates of the chain's output back to coordinates of its input.
std::vector<LIndex> undo_chain(const ViewChain& chain, const DataType& input, std::vector<LIndex> c,
                               std::optional<bool>& proj);

std::vector<LIndex> undo_view(const ViewInst& v, const DataType& in, std::vector<LIndex> c, std::optional<bool>& proj) {
  auto need = [&](std::size_t k) {
    while (c.size() < k) c.push_back(LIndex::lit(0));
  };
  if (v.name == "split") {
    if (!proj) throw LowerError("split view without projection");
    need(1);
    if (!*proj) c[0] = c[0] + LIndex::from_nat(v.args.at(0));
    proj.reset();
    return c;
  }
  if (proj) throw LowerError("projection of a non-tuple view `" + v.name + "`");
  if (v.name == "group") {
    need(2);
    LIndex k = LIndex::from_nat(v.args.at(0));
    std::vector<LIndex> out{c[0] * k + c[1]};
    out.insert(out.end(), c.begin() + 2, c.end());
    return out;
  }
  if (v.name == "transpose") {
    need(2);
    std::swap(c[0], c[1]);
    return c;
  }
  if (v.name == "reverse" || v.name == "rev") {
    need(1);
    c[0] = LIndex::from_nat(in.size()) - LIndex::lit(1) - c[0];
    return c;
  }
  if (v.name == "map") {
    need(1);
    std::optional<bool> inner_proj;
    std::vector<LIndex> rest(c.begin() + 1, c.end());
    auto back = undo_chain(v.inner, in.elem(), rest, inner_proj);
    std::vector<LIndex> out{c[0]};
    out.insert(out.end(), back.begin(), back.end());
    return out;
  }
  throw LowerError("unknown view `" + v.name + "`");
}

std::vector<LIndex> undo_chain(const ViewChain& chain, const DataType& input, std::vector<LIndex> c,
                               std::optional<bool>& proj) {
  std::vector<DataType> types{input};
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) types.push_back(view_output_type(chain[i], types.back()));
  for (std::size_t i = chain.size(); i-- > 0;) c = undo_view(chain[i], types[i], std::move(c), proj);
  return c;
}

}  // namespace

LIndex lower_place(const RPlace& p, const DataType& root_type, const std::vector<LIndex>& rest) {
  std::vector<DataType> types{root_type};
  for (const auto& s : p.steps) {
    const DataType& t = types.back();
    switch (s.kind) {
      case RStep::Kind::Fst:
      case RStep::Kind::Snd:
        if (t.kind() != DataType::Kind::Tuple) throw LowerError("projection of a non-tuple");
        types.push_back(t.elems()[s.kind == RStep::Kind::Fst ? 0 : 1]);
        break;
      case RStep::Kind::Index: types.push_back(t.elem()); break;
      case RStep::Kind::Select: {
        DataType e = t;
        for (std::size_t i = 0; i < s.sel_axes.size(); ++i) e = e.elem();
        types.push_back(e);
        break;
      }
      case RStep::Kind::View: types.push_back(view_output_type(s.view, t)); break;
    }
  }
  std::vector<LIndex> c = rest;
  std::optional<bool> proj;
  for (std::size_t i = p.steps.size(); i-- > 0;) {
    const RStep& s = p.steps[i];
    const DataType& before = types[i];
    switch (s.kind) {
      case RStep::Kind::Fst:
      case RStep::Kind::Snd:
        if (i == 0 || p.steps[i - 1].kind != RStep::Kind::View || p.steps[i - 1].view.name != "split") {
          throw LowerError("tuple values are not supported in lowered code");
        }
        proj = s.kind == RStep::Kind::Fst;
        break;
      case RStep::Kind::Index: c.insert(c.begin(), LIndex::from_nat(s.index)); break;
      case RStep::Kind::Select: {
        std::vector<LIndex> sel;
        for (Axis a : s.sel_axes) sel.push_back(select_index(s.exec, s.sel_level, a));
        c.insert(c.begin(), sel.begin(), sel.end());
        break;
      }
      case RStep::Kind::View: c = undo_view(s.view, before, std::move(c), proj); break;
    }
  }
  if (proj) throw LowerError("dangling projection");
  std::vector<LIndex> dims;
  for (const DataType* t = &root_type; t->is_arrayish(); t = &t->elem()) dims.push_back(LIndex::from_nat(t->size()));
  if (c.size() > dims.size()) throw LowerError("too many coordinates for the root array");
  if (dims.empty()) return LIndex::lit(0);
  while (c.size() < dims.size()) c.push_back(LIndex::lit(0));
  LIndex off = c[0];
  for (std::size_t j = 1; j < dims.size(); ++j) off = off * dims[j] + c[j];
  return off;
}

// ---------------------------------------------------------------------------
// Programs

const LFunction* LProgram::find(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const char* c_type(ScalarKind s) {
  switch (s) {
    case ScalarKind::I32: return "int";
    case ScalarKind::F32: return "float";
    case ScalarKind::F64: return "double";
    case ScalarKind::Bool: return "bool";
    case ScalarKind::Unit: return "void";
  }
  return "void";
}

namespace {

ScalarKind scalar_of(const DataType& t) {
  const DataType* c = &t;
  while (c->is_arrayish()) c = &c->elem();
  if (c->kind() != DataType::Kind::Scalar) throw LowerError("values of type `" + t.str() + "` are not supported");
  return c->scalar_kind();
}

std::int64_t count_of(const DataType& t) {
  std::int64_t n = 1;
  for (const DataType* c = &t; c->is_arrayish(); c = &c->elem()) {
    auto v = c->size().ground_value();
    if (!v) throw LowerError("size `" + c->size().str() + "` is not ground");
    n *= *v;
  }
  return n;
}

std::array<std::int64_t, 3> dims3(const Dim& d) {
  std::array<std::int64_t, 3> a{1, 1, 1};
  for (const auto& [ax, n] : d.axes) {
    auto v = n.ground_value();
    if (!v) throw LowerError("size `" + n.str() + "` is not ground");
    a[static_cast<std::size_t>(ax)] = *v;
  }
  return a;
}

std::string base_key(std::string k) {
  while (!k.empty() && k.back() == '*') k.pop_back();
  return k;
}

class Lowerer {
 public:
  explicit Lowerer(const Program& p) : prog_(p) {}

  LFunction function(const FunctionDef& f) {
    names_.clear();
    used_.clear();
    ptrs_.clear();
    res_.clear();
    LFunction out;
    out.name = f.name;
    out.kernel = f.exec.kind == ExecLevel::Kind::GpuGrid;
    if (f.exec.kind == ExecLevel::Kind::GpuGrid) {
      out.blocks = dims3(f.exec.blocks);
      out.threads = dims3(f.exec.threads);
    }
    for (const auto& p : f.params) {
      LParam lp;
      lp.name = declare(p.key, p.name);
      if (p.type.kind() == DataType::Kind::Ref) {
        ptrs_.insert(p.key);
        lp.pointer = true;
        lp.is_const = p.type.uniq() == Uniqueness::Shrd;
        lp.elem = scalar_of(p.type.elem());
        lp.count = count_of(p.type.elem());
      } else if (p.type.kind() == DataType::Kind::Scalar) {
        lp.elem = p.type.scalar_kind();
      } else {
        throw LowerError("parameter `" + p.name + "` of type `" + p.type.str() + "` is not supported");
      }
      out.params.push_back(lp);
    }
    res_.push_back({f.exec_binder, ExecResource::from_level(f.exec)});
    out.body = block(*f.body.as<BlockTerm>());
    return out;
  }

 private:
  std::string declare(const std::string& key, const std::string& name) {
    std::string c = name;
    for (int n = 1; used_.count(c); ++n) c = name + "_" + std::to_string(n);
    used_.insert(c);
    names_[key] = c;
    return c;
  }

  std::string cname(const std::string& key) const {
    auto it = names_.find(base_key(key));
    if (it == names_.end()) throw LowerError("no storage for `" + key + "`");
    return it->second;
  }

  const ExecResource& resource(const std::string& name) const {
    for (auto it = res_.rbegin(); it != res_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    throw LowerError("unknown execution resource `" + name + "`");
  }

  static const PlaceInfo& info(const PlaceExpr& p) {
    if (!p.info) throw LowerError("place `" + p.root + "` was not resolved");
    return *p.info;
  }

  std::vector<LStmt> block(const BlockTerm& b) {
    std::vector<LStmt> out;
    std::vector<LStmt> frees;
    for (const auto& s : b.stmts) stmt(s, out, frees);
    for (auto it = frees.rbegin(); it != frees.rend(); ++it) out.push_back(*it);
    return out;
  }

  std::vector<LStmt> body(const Term& t) {
    if (const auto* b = t.as<BlockTerm>()) return block(*b);
    std::vector<LStmt> out, frees;
    stmt(t, out, frees);
    out.insert(out.end(), frees.begin(), frees.end());
    return out;
  }

  LExpr ptr(const Term& t) {
    const PlaceExpr* p = nullptr;
    if (const auto* b = t.as<BorrowTerm>()) p = &b->place;
    if (const auto* pt = t.as<PlaceTerm>()) p = &pt->place;
    if (!p) throw LowerError("expected a reference argument");
    const PlaceInfo& in = info(*p);
    if (!through_ptr(in)) throw LowerError("cannot take the address of `" + in.rplace.str() + "`");
    LExpr e;
    e.kind = LExpr::Kind::Ptr;
    e.var = cname(in.rplace.root);
    e.index = lower_place(in.rplace, in.root_type);
    return e;
  }

  void stmt(const Term& t, std::vector<LStmt>& out, std::vector<LStmt>& frees) {
    if (const auto* l = t.as<LetTerm>()) return let(*l, out, frees);
    if (const auto* a = t.as<AssignTerm>()) {
      const PlaceInfo& in = info(a->place);
      if (in.type.kind() != DataType::Kind::Scalar) {
        throw LowerError("assignment of non-scalar values is not supported");
      }
      LStmt s;
      s.kind = LStmt::Kind::Assign;
      s.var = cname(in.rplace.root);
      s.idx = element_index(in);
      s.value = expr(*a->value);
      out.push_back(std::move(s));
      return;
    }
    if (const auto* b = t.as<BlockTerm>()) {
      LStmt s;
      s.kind = LStmt::Kind::Block;
      s.body = block(*b);
      out.push_back(std::move(s));
      return;
    }
    if (const auto* s = t.as<SchedTerm>()) {
      ExecResource r = resource(s->exec);
      std::vector<Axis> axes = s->axes.empty() ? r.remaining_axes() : s->axes;
      for (Axis a : axes) r = refine_forall(r, a);
      res_.push_back({s->binder, r});
      LStmt st;
      st.kind = LStmt::Kind::Block;
      st.body = body(*s->body);
      res_.pop_back();
      out.push_back(std::move(st));
      return;
    }
    if (const auto* s = t.as<SplitTerm>()) {
      const ExecResource& r = resource(s->exec);
      auto level = r.active_level();
      if (!level) throw LowerError("split of a resource without axes");
      LStmt st;
      st.kind = LStmt::Kind::If;
      st.cond_sym = axis_symbol(*level, s->axis);
      LIndex off = LIndex::lit(0);
      for (const auto& step : r.path()) {
        if (step.kind == ExecStep::Kind::Split && step.level == *level && step.axis == s->axis && !step.fst) {
          off = off + LIndex::from_nat(step.pos);
        }
      }
      st.bound = off + LIndex::from_nat(s->pos);
      res_.push_back({s->fst_binder, refine_split(r, s->axis, s->pos, true)});
      st.body = body(*s->fst);
      res_.pop_back();
      res_.push_back({s->snd_binder, refine_split(r, s->axis, s->pos, false)});
      st.els = body(*s->snd);
      res_.pop_back();
      out.push_back(std::move(st));
      return;
    }
    if (t.as<SyncTerm>()) {
      LStmt st;
      st.kind = LStmt::Kind::Sync;
      out.push_back(st);
      return;
    }
    if (const auto* f = t.as<ForNatTerm>()) {
      LStmt st;
      st.kind = LStmt::Kind::For;
      st.var = f->var;
      st.lo = LIndex::from_nat(f->lo);
      st.hi = LIndex::from_nat(f->hi);
      st.body = body(*f->body);
      out.push_back(std::move(st));
      return;
    }
    if (const auto* f = t.as<ForEachTerm>()) {
      const auto* pt = f->collection->as<PlaceTerm>();
      if (!pt) throw LowerError("expected a place to iterate over");
      const PlaceInfo& in = info(pt->place);
      LStmt st;
      st.kind = LStmt::Kind::For;
      st.var = "_i_" + f->var;
      st.lo = LIndex::lit(0);
      st.hi = LIndex::from_nat(in.type.size());
      st.body = body(*f->body);
      out.push_back(std::move(st));
      return;
    }
    if (const auto* c = t.as<CallTerm>()) return call(*c, out);
    // Expression statements without effects are dropped.
  }

  void call(const CallTerm& c, std::vector<LStmt>& out) {
    if (c.launch) {
      LStmt st;
      st.kind = LStmt::Kind::Launch;
      st.var = c.callee;
      st.blocks = dims3(c.launch->blocks);
      st.threads = dims3(c.launch->threads);
      for (const auto& a : c.args) {
        bool is_ref = a.type.kind() == DataType::Kind::Ref || a.as<BorrowTerm>();
        st.args.push_back(is_ref ? ptr(a) : expr(a));
      }
      out.push_back(std::move(st));
      return;
    }
    if (c.callee == "copy_mem_to_host" || c.callee == "copy_mem_to_gpu") {
      LStmt st;
      st.kind = c.callee == "copy_mem_to_host" ? LStmt::Kind::CopyToHost : LStmt::Kind::CopyToGpu;
      st.args = {ptr(c.args[0]), ptr(c.args[1])};
      st.count = count_of(c.args[0].type.elem());
      out.push_back(std::move(st));
      return;
    }
    throw LowerError("call to `" + c.callee + "` cannot be lowered here");
  }

  void let(const LetTerm& l, std::vector<LStmt>& out, std::vector<LStmt>& frees) {
    const Term& init = *l.init;
    DataType ty = l.annot ? *l.annot : init.type;
    if (ty.kind() == DataType::Kind::Ref) return;  // borrows are resolved statically
    if (const auto* c = init.as<CallTerm>()) {
      LStmt st;
      st.decl.name = declare(l.key, l.name);
      ptrs_.insert(l.key);
      if (c->callee == "alloc") {
        const DataType& et = c->generics.at(1).type;
        st.kind = LStmt::Kind::DeclShared;
        st.decl.elem = scalar_of(et);
        st.decl.count = count_of(et);
        out.push_back(std::move(st));
        return;
      }
      if (c->callee == "GpuGlobal::alloc_copy") {
        st.kind = LStmt::Kind::AllocCopy;
        st.decl.elem = scalar_of(ty.elem());
        st.decl.count = count_of(ty.elem());
        st.args.push_back(ptr(c->args.at(0)));
        out.push_back(st);
        LStmt f;
        f.kind = LStmt::Kind::Free;
        f.var = st.decl.name;
        f.gpu = true;
        frees.push_back(f);
        return;
      }
      if (c->callee == "CpuHeap::new") {
        st.kind = LStmt::Kind::CpuNew;
        st.decl.elem = scalar_of(ty.elem());
        st.decl.count = count_of(ty.elem());
        const Term& v = c->args.at(0);
        if (const auto* r = v.as<ArrayRepeatTerm>()) {
          if (r->value->as<ArrayRepeatTerm>()) throw LowerError("nested array literals are not supported");
          st.value = expr(*r->value);
        } else {
          st.value = expr(v);
        }
        out.push_back(st);
        LStmt f;
        f.kind = LStmt::Kind::Free;
        f.var = st.decl.name;
        frees.push_back(f);
        return;
      }
      throw LowerError("call to `" + c->callee + "` cannot initialize a variable");
    }
    LStmt st;
    st.kind = LStmt::Kind::DeclLocal;
    st.decl.elem = scalar_of(ty);
    if (ty.kind() == DataType::Kind::Scalar) {
      st.decl.name = declare(l.key, l.name);
      st.value = expr(init);
      out.push_back(std::move(st));
      return;
    }
    const auto* r = init.as<ArrayRepeatTerm>();
    if (!ty.is_arrayish() || !r || r->value->as<ArrayRepeatTerm>() || ty.elem().is_arrayish()) {
      throw LowerError("local value `" + l.name + "` of type `" + ty.str() + "` is not supported");
    }
    st.decl.name = declare(l.key, l.name);
    st.decl.count = count_of(ty);
    out.push_back(st);
    LStmt fill;
    fill.kind = LStmt::Kind::For;
    fill.var = "_k_" + st.decl.name;
    fill.lo = LIndex::lit(0);
    fill.hi = LIndex::lit(st.decl.count);
    LStmt as;
    as.kind = LStmt::Kind::Assign;
    as.var = st.decl.name;
    as.idx = LIndex::sym(fill.var);
    as.value = expr(*r->value);
    fill.body.push_back(std::move(as));
    out.push_back(std::move(fill));
  }

  // Offset for element loads and stores; none for scalar locals.
  bool through_ptr(const PlaceInfo& in) const {
    const std::string& k = in.rplace.root;
    return (!k.empty() && k.back() == '*') || ptrs_.count(k);
  }

  std::optional<LIndex> element_index(const PlaceInfo& in) const {
    if (!through_ptr(in) && !in.root_type.is_arrayish()) return std::nullopt;
    return lower_place(in.rplace, in.root_type);
  }

  LExpr expr(const Term& t) {
    LExpr e;
    if (t.type.kind() == DataType::Kind::Scalar) e.type = t.type.scalar_kind();
    if (const auto* l = t.as<LitTerm>()) {
      switch (l->kind) {
        case LitTerm::Kind::Int:
        case LitTerm::Kind::Float:
          if (e.type == ScalarKind::F32 || e.type == ScalarKind::F64) {
            e.kind = LExpr::Kind::Float;
            e.fval = l->kind == LitTerm::Kind::Int ? static_cast<double>(l->int_value) : l->float_value;
            e.text = l->text;
            if (e.text.find_first_of(".eE") == std::string::npos) e.text += ".0";
            if (e.type == ScalarKind::F32) e.text += "f";
          } else {
            e.kind = LExpr::Kind::Int;
            e.ival = l->int_value;
          }
          return e;
        case LitTerm::Kind::Bool:
          e.kind = LExpr::Kind::Bool;
          e.bval = l->bool_value;
          return e;
        case LitTerm::Kind::Unit: throw LowerError("unit values cannot be lowered");
      }
    }
    if (const auto* p = t.as<PlaceTerm>()) {
      const PlaceInfo& in = info(p->place);
      if (in.is_nat) {
        e.kind = LExpr::Kind::Index;
        e.type = ScalarKind::I32;
        e.index = LIndex::from_nat(in.nat);
        return e;
      }
      if (in.type.kind() != DataType::Kind::Scalar) {
        throw LowerError("reading a value of type `" + in.type.str() + "` is not supported");
      }
      e.kind = LExpr::Kind::Load;
      e.type = in.type.scalar_kind();
      e.var = cname(in.rplace.root);
      e.idx = element_index(in);
      return e;
    }
    if (const auto* b = t.as<BinaryTerm>()) {
      e.kind = LExpr::Kind::Binary;
      e.op = b->op;
      e.args.push_back(expr(*b->lhs));
      e.args.push_back(expr(*b->rhs));
      return e;
    }
    if (const auto* u = t.as<UnaryTerm>()) {
      e.kind = LExpr::Kind::Unary;
      e.uop = u->op;
      e.args.push_back(expr(*u->operand));
      return e;
    }
    throw LowerError("expression cannot be lowered");
  }

  const Program& prog_;
  std::map<std::string, std::string> names_;
  std::set<std::string> used_;
  std::set<std::string> ptrs_;  // keys of pointer-valued variables
  std::vector<std::pair<std::string, ExecResource>> res_;
};

}  // namespace

LProgram lower_program(const Program& p) {
  LProgram out;
  Lowerer lw(p);
  for (const FunctionDef* f : p.functions()) {
    auto k = f->exec.kind;
    if (k != ExecLevel::Kind::GpuGrid && k != ExecLevel::Kind::CpuThread) continue;
    if (!f->tparams.empty()) continue;
    out.functions.push_back(lw.function(*f));
  }
  return out;
}

}  // namespace descend
