#include "descend/mono.hpp"

#include <cctype>
#include <deque>
#include <set>

namespace descend {

namespace {

struct Inst {
  NatBindings nats;
  std::map<std::string, Memory> mems;
  std::map<std::string, DataType> types;
};

Memory subst_mem(const Memory& m, const Inst& in) {
  if (m.kind != Memory::Kind::Var) return m;
  auto it = in.mems.find(m.var);
  return it == in.mems.end() ? m : it->second;
}

DataType subst_dt(const DataType& t, const Inst& in) { return subst_type(t, in.nats, in.mems, in.types); }

void subst_dim(Dim& d, const Inst& in) {
  for (auto& ax : d.axes) ax.second = subst(ax.second, in.nats);
}

void subst_view(ViewInst& v, const Inst& in) {
  for (auto& a : v.args) a = subst(a, in.nats);
  for (auto& w : v.inner) subst_view(w, in);
}

void subst_place(PlaceExpr& p, const Inst& in) {
  for (auto& s : p.steps) {
    if (s.kind == PlaceStep::Kind::Index) s.index = subst(s.index, in.nats);
    if (s.kind == PlaceStep::Kind::View) subst_view(s.view, in);
  }
  p.info.reset();
}

void subst_term(Term& t, const Inst& in);

void subst_box(Box<Term>& b, const Inst& in) { subst_term(*b, in); }

void subst_term(Term& t, const Inst& in) {
  if (auto* p = t.as<PlaceTerm>()) {
    auto it = in.nats.find(p->place.root);
    if (p->place.steps.empty() && it != in.nats.end()) {
      auto v = it->second.ground_value();
      if (v) {
        LitTerm l;
        l.kind = LitTerm::Kind::Int;
        l.int_value = *v;
        l.text = std::to_string(*v);
        t.node = l;
        return;
      }
    }
    subst_place(p->place, in);
  } else if (auto* l = t.as<LetTerm>()) {
    if (l->annot) l->annot = subst_dt(*l->annot, in);
    subst_box(l->init, in);
  } else if (auto* a = t.as<AssignTerm>()) {
    subst_place(a->place, in);
    subst_box(a->value, in);
  } else if (auto* b = t.as<BorrowTerm>()) {
    subst_place(b->place, in);
  } else if (auto* b = t.as<BlockTerm>()) {
    for (auto& s : b->stmts) subst_term(s, in);
  } else if (auto* c = t.as<CallTerm>()) {
    for (auto& g : c->generics) {
      g.nat = subst(g.nat, in.nats);
      g.mem = subst_mem(g.mem, in);
      g.type = subst_dt(g.type, in);
    }
    if (c->launch) {
      subst_dim(c->launch->blocks, in);
      subst_dim(c->launch->threads, in);
    }
    for (auto& a : c->args) subst_term(a, in);
    for (auto& [k, v] : c->nat_inst) v = subst(v, in.nats);
    for (auto& [k, v] : c->mem_inst) v = subst_mem(v, in);
    for (auto& [k, v] : c->type_inst) v = subst_dt(v, in);
  } else if (auto* f = t.as<ForEachTerm>()) {
    subst_box(f->collection, in);
    subst_box(f->body, in);
  } else if (auto* f = t.as<ForNatTerm>()) {
    f->lo = subst(f->lo, in.nats);
    f->hi = subst(f->hi, in.nats);
    subst_box(f->body, in);
  } else if (auto* s = t.as<SchedTerm>()) {
    subst_box(s->body, in);
  } else if (auto* s = t.as<SplitTerm>()) {
    s->pos = subst(s->pos, in.nats);
    subst_box(s->fst, in);
    subst_box(s->snd, in);
  } else if (auto* b = t.as<BinaryTerm>()) {
    subst_box(b->lhs, in);
    subst_box(b->rhs, in);
  } else if (auto* u = t.as<UnaryTerm>()) {
    subst_box(u->operand, in);
  } else if (auto* r = t.as<ArrayRepeatTerm>()) {
    subst_box(r->value, in);
    r->count = subst(r->count, in.nats);
  } else if (auto* tu = t.as<TupleTerm>()) {
    for (auto& e : tu->elems) subst_term(e, in);
  }
}

// Renames uses of an execution resource until a binder shadows it.
void rename_exec(Term& t, const std::string& from, const std::string& to);

void rename_exec_place(PlaceExpr& p, const std::string& from, const std::string& to) {
  for (auto& s : p.steps) {
    if (s.kind == PlaceStep::Kind::Select && s.exec == from) s.exec = to;
  }
}

void rename_exec(Term& t, const std::string& from, const std::string& to) {
  auto rec = [&](Term& x) { rename_exec(x, from, to); };
  if (auto* p = t.as<PlaceTerm>()) {
    rename_exec_place(p->place, from, to);
  } else if (auto* l = t.as<LetTerm>()) {
    rec(*l->init);
  } else if (auto* a = t.as<AssignTerm>()) {
    rename_exec_place(a->place, from, to);
    rec(*a->value);
  } else if (auto* b = t.as<BorrowTerm>()) {
    rename_exec_place(b->place, from, to);
  } else if (auto* b = t.as<BlockTerm>()) {
    for (auto& s : b->stmts) rec(s);
  } else if (auto* c = t.as<CallTerm>()) {
    for (auto& a : c->args) rec(a);
  } else if (auto* f = t.as<ForEachTerm>()) {
    rec(*f->collection);
    rec(*f->body);
  } else if (auto* f = t.as<ForNatTerm>()) {
    rec(*f->body);
  } else if (auto* s = t.as<SchedTerm>()) {
    if (s->exec == from) s->exec = to;
    if (s->binder != from) rec(*s->body);
  } else if (auto* s = t.as<SplitTerm>()) {
    if (s->exec == from) s->exec = to;
    if (s->fst_binder != from) rec(*s->fst);
    if (s->snd_binder != from) rec(*s->snd);
  } else if (auto* b = t.as<BinaryTerm>()) {
    rec(*b->lhs);
    rec(*b->rhs);
  } else if (auto* u = t.as<UnaryTerm>()) {
    rec(*u->operand);
  } else if (auto* r = t.as<ArrayRepeatTerm>()) {
    rec(*r->value);
  } else if (auto* tu = t.as<TupleTerm>()) {
    for (auto& e : tu->elems) rec(e);
  }
}

void rename_var(Term& t, const std::string& from, const std::string& to) {
  auto rec = [&](Term& x) { rename_var(x, from, to); };
  auto place = [&](PlaceExpr& p) {
    if (p.root == from) p.root = to;
  };
  if (auto* p = t.as<PlaceTerm>()) {
    place(p->place);
  } else if (auto* l = t.as<LetTerm>()) {
    rec(*l->init);
  } else if (auto* a = t.as<AssignTerm>()) {
    place(a->place);
    rec(*a->value);
  } else if (auto* b = t.as<BorrowTerm>()) {
    place(b->place);
  } else if (auto* b = t.as<BlockTerm>()) {
    for (auto& s : b->stmts) rec(s);
  } else if (auto* c = t.as<CallTerm>()) {
    for (auto& a : c->args) rec(a);
  } else if (auto* f = t.as<ForEachTerm>()) {
    rec(*f->collection);
    rec(*f->body);
  } else if (auto* f = t.as<ForNatTerm>()) {
    rec(*f->body);
  } else if (auto* s = t.as<SchedTerm>()) {
    rec(*s->body);
  } else if (auto* s = t.as<SplitTerm>()) {
    rec(*s->fst);
    rec(*s->snd);
  } else if (auto* b = t.as<BinaryTerm>()) {
    rec(*b->lhs);
    rec(*b->rhs);
  } else if (auto* u = t.as<UnaryTerm>()) {
    rec(*u->operand);
  } else if (auto* r = t.as<ArrayRepeatTerm>()) {
    rec(*r->value);
  } else if (auto* tu = t.as<TupleTerm>()) {
    for (auto& e : tu->elems) rec(e);
  }
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

class Mono {
 public:
  Mono(const Program& p, const MonoOptions& o) : src_(p), opts_(o) {}

  Program run() {
    std::vector<MonoRoot> roots = opts_.roots;
    if (opts_.use_default_roots && roots.empty()) {
      for (const FunctionDef* f : src_.functions()) {
        auto k = f->exec.kind;
        if (f->tparams.empty() && (k == ExecLevel::Kind::CpuThread || k == ExecLevel::Kind::GpuGrid)) {
          roots.push_back({f->name, {}, {}, {}});
        }
      }
    }
    for (const auto& r : roots) {
      const FunctionDef* f = src_.find_function(r.function);
      if (!f) throw MonoError("cannot find function `" + r.function + "`");
      request(*f, Inst{r.nats, r.mems, r.types});
    }
    while (!work_.empty()) {
      auto [f, in, name] = work_.front();
      work_.pop_front();
      out_fns_.push_back(instantiate(*f, in, name));
    }
    Program out;
    for (const auto& item : src_.items) {
      if (std::holds_alternative<ViewDef>(item)) out.items.push_back(item);
    }
    for (auto& f : out_fns_) out.items.emplace_back(std::move(f));
    CheckResult r = check_program(out, opts_.check);
    if (!r.ok) throw MonoError("the specialized program does not type-check", r.diags);
    return out;
  }

 private:
  std::string request(const FunctionDef& f, const Inst& in) {
    for (const auto& tp : f.tparams) {
      bool bound = false;
      switch (tp.kind) {
        case KindSort::Nat: {
          auto it = in.nats.find(tp.name);
          bound = it != in.nats.end() && it->second.ground_value().has_value();
          break;
        }
        case KindSort::Mem: {
          auto it = in.mems.find(tp.name);
          bound = it != in.mems.end() && it->second.kind != Memory::Kind::Var;
          break;
        }
        case KindSort::Dt: bound = in.types.count(tp.name) > 0; break;
      }
      if (!bound) throw MonoError("unresolved generic parameter `" + tp.name + "` of `" + f.name + "`");
    }
    std::string name = mangle(f, in.nats, in.mems, in.types);
    if (done_.insert(name).second) work_.push_back({&f, in, name});
    return name;
  }

  FunctionDef instantiate(const FunctionDef& f, const Inst& in, const std::string& name) {
    FunctionDef g = f;
    g.name = name;
    g.tparams.clear();
    for (auto& p : g.params) {
      p.type = subst_dt(p.type, in);
      p.key.clear();
    }
    subst_dim(g.exec.blocks, in);
    subst_dim(g.exec.threads, in);
    for (const Dim* d : {&g.exec.blocks, &g.exec.threads}) {
      for (const auto& ax : d->axes) {
        if (!ax.second.ground_value()) {
          throw MonoError("size `" + ax.second.str() + "` of `" + f.name + "` is not ground");
        }
      }
    }
    subst_term(g.body, in);
    calls(g.body, g.exec_binder);
    return g;
  }

  void calls(Term& t, const std::string& binder) {
    if (auto* c = t.as<CallTerm>()) {
      for (auto& a : c->args) calls(a, binder);
      const FunctionDef* f = src_.find_function(c->callee);
      if (!f) return;
      Inst in{c->nat_inst, c->mem_inst, c->type_inst};
      auto k = f->exec.kind;
      if (k == ExecLevel::Kind::GpuGrid || k == ExecLevel::Kind::CpuThread) {
        c->callee = request(*f, in);
        c->generics.clear();
        c->nat_inst.clear();
        c->mem_inst.clear();
        c->type_inst.clear();
        return;
      }
      t.node = inline_call(*f, in, *c, binder);
      calls(t, binder);
      return;
    }
    if (auto* l = t.as<LetTerm>()) return calls(*l->init, binder);
    if (auto* a = t.as<AssignTerm>()) return calls(*a->value, binder);
    if (auto* b = t.as<BlockTerm>()) {
      for (auto& s : b->stmts) calls(s, binder);
      return;
    }
    if (auto* f = t.as<ForEachTerm>()) return calls(*f->body, binder);
    if (auto* f = t.as<ForNatTerm>()) return calls(*f->body, binder);
    if (auto* s = t.as<SchedTerm>()) return calls(*s->body, s->binder);
    if (auto* s = t.as<SplitTerm>()) {
      calls(*s->fst, s->fst_binder);
      calls(*s->snd, s->snd_binder);
      return;
    }
    if (auto* b = t.as<BinaryTerm>()) {
      calls(*b->lhs, binder);
      calls(*b->rhs, binder);
    }
  }

  BlockTerm inline_call(const FunctionDef& f, const Inst& in, CallTerm& c, const std::string& binder) {
    for (const auto& tp : f.tparams) {
      if (tp.kind == KindSort::Nat && !(in.nats.count(tp.name) && in.nats.at(tp.name).ground_value())) {
        throw MonoError("unresolved generic parameter `" + tp.name + "` of `" + f.name + "`");
      }
    }
    Term body = f.body;
    subst_term(body, in);
    if (f.exec_binder != binder) rename_exec(body, f.exec_binder, binder);
    BlockTerm out;
    int id = inline_count_++;
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      const Param& p = f.params[i];
      std::string fresh = p.name + "_" + f.name + "_" + std::to_string(id);
      rename_var(body, p.name, fresh);
      Term arg = std::move(c.args[i]);
      if (p.type.kind() == DataType::Kind::Ref && arg.as<PlaceTerm>()) {
        BorrowTerm b;
        b.uniq = p.type.uniq();
        b.place = arg.as<PlaceTerm>()->place;
        PlaceStep d;
        d.kind = PlaceStep::Kind::Deref;
        d.span = b.place.span;
        b.place.steps.push_back(d);
        arg.node = std::move(b);
      }
      LetTerm l;
      l.name = fresh;
      l.name_span = arg.span;
      l.annot = subst_dt(p.type, in);
      Span sp = arg.span;
      l.init = std::move(arg);
      Term lt;
      lt.node = std::move(l);
      lt.span = sp;
      out.stmts.push_back(std::move(lt));
    }
    out.stmts.push_back(std::move(body));
    return out;
  }

  struct Work {
    const FunctionDef* f;
    Inst in;
    std::string name;
  };

  const Program& src_;
  const MonoOptions& opts_;
  std::deque<Work> work_;
  std::set<std::string> done_;
  std::vector<FunctionDef> out_fns_;
  int inline_count_ = 0;
};

}  // namespace

std::string mangle(const FunctionDef& f, const NatBindings& nats, const std::map<std::string, Memory>& mems,
                   const std::map<std::string, DataType>& types) {
  std::string s = f.name;
  for (const auto& tp : f.tparams) {
    switch (tp.kind) {
      case KindSort::Nat: {
        auto it = nats.find(tp.name);
        auto v = it == nats.end() ? std::nullopt : it->second.ground_value();
        s += "_" + (v ? std::to_string(*v) : sanitize(it == nats.end() ? tp.name : it->second.str()));
        break;
      }
      case KindSort::Mem: {
        auto it = mems.find(tp.name);
        s += "_" + sanitize(it == mems.end() ? tp.name : it->second.str());
        break;
      }
      case KindSort::Dt: {
        auto it = types.find(tp.name);
        s += "_" + sanitize(it == types.end() ? tp.name : it->second.str());
        break;
      }
    }
  }
  return s;
}

Program monomorphize(const Program& p, const MonoOptions& opts) { return Mono(p, opts).run(); }

}  // namespace descend
