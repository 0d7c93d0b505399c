// Pretty printer and structural dump.

#include <sstream>

#include "descend/parser.hpp"

namespace descend {

namespace {

std::string ind(int n) { return std::string(static_cast<std::size_t>(n) * 2, ' '); }

int prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::Eq:
    case BinOp::Ne: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Rem: return 5;
  }
  return 0;
}

bool is_cmp(BinOp op) { return prec(op) == 3; }

std::string generic_str(const GenericArg& g) {
  switch (g.kind) {
    case GenericArg::Kind::Nat: return g.nat.str();
    case GenericArg::Kind::Mem: return g.mem.str();
    case GenericArg::Kind::Type: return g.type.str();
  }
  return "?";
}

std::string expr_str(const Term& t, int min_prec, int indent);

std::string call_str(const CallTerm& c, int indent) {
  std::string s = c.callee;
  if (!c.generics.empty()) {
    s += "::<";
    for (std::size_t i = 0; i < c.generics.size(); ++i) {
      if (i) s += ", ";
      s += generic_str(c.generics[i]);
    }
    s += ">";
  }
  if (c.launch) {
    if (c.generics.empty()) s += "::";
    s += "<<<" + c.launch->blocks.str() + ", " + c.launch->threads.str() + ">>>";
  }
  s += "(";
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    if (i) s += ", ";
    s += expr_str(c.args[i], 0, indent);
  }
  return s + ")";
}

std::string expr_str(const Term& t, int min_prec, int indent) {
  if (const auto* p = t.as<PlaceTerm>()) return print_place(p->place);
  if (const auto* l = t.as<LitTerm>()) return l->kind == LitTerm::Kind::Unit ? "()" : l->text;
  if (const auto* b = t.as<BorrowTerm>()) {
    return std::string(b->uniq == Uniqueness::Uniq ? "&uniq " : "&") + print_place(b->place);
  }
  if (const auto* c = t.as<CallTerm>()) return call_str(*c, indent);
  if (const auto* b = t.as<BinaryTerm>()) {
    int p = prec(b->op);
    int lp = is_cmp(b->op) ? p + 1 : p;
    std::string s = expr_str(*b->lhs, lp, indent) + " " + binop_text(b->op) + " " + expr_str(*b->rhs, p + 1, indent);
    return p < min_prec ? "(" + s + ")" : s;
  }
  if (const auto* u = t.as<UnaryTerm>()) {
    std::string s = std::string(u->op == UnOp::Neg ? "-" : "!") + expr_str(*u->operand, 6, indent);
    return 6 < min_prec ? "(" + s + ")" : s;
  }
  if (const auto* a = t.as<ArrayRepeatTerm>()) return "[" + expr_str(*a->value, 0, indent) + "; " + a->count.str() + "]";
  if (const auto* tu = t.as<TupleTerm>()) {
    std::string s = "(";
    for (std::size_t i = 0; i < tu->elems.size(); ++i) {
      if (i) s += ", ";
      s += expr_str(tu->elems[i], 0, indent);
    }
    if (tu->elems.size() == 1) s += ",";
    return s + ")";
  }
  // Statement forms used in expression position are printed as statements.
  return print_term(t, indent);
}

bool block_like(const Term& t) {
  return t.as<BlockTerm>() || t.as<SchedTerm>() || t.as<SplitTerm>() || t.as<ForEachTerm>() || t.as<ForNatTerm>();
}

std::string block_str(const Term& t, int indent) {
  const auto* b = t.as<BlockTerm>();
  if (!b || b->stmts.empty()) return "{}";
  std::string s = "{\n";
  for (const auto& st : b->stmts) {
    s += ind(indent + 1) + print_term(st, indent + 1);
    if (!block_like(st)) s += ";";
    s += "\n";
  }
  return s + ind(indent) + "}";
}

}  // namespace

std::string print_place(const PlaceExpr& p) {
  std::string s = p.root;
  bool pending_deref = false;
  for (const auto& st : p.steps) {
    if (st.kind == PlaceStep::Kind::Deref) {
      s = "*" + s;
      pending_deref = true;
      continue;
    }
    if (pending_deref) {
      s = "(" + s + ")";
      pending_deref = false;
    }
    switch (st.kind) {
      case PlaceStep::Kind::Fst: s += ".fst"; break;
      case PlaceStep::Kind::Snd: s += ".snd"; break;
      case PlaceStep::Kind::Index: s += "[" + st.index.str() + "]"; break;
      case PlaceStep::Kind::Select: s += "[[" + st.exec + "]]"; break;
      case PlaceStep::Kind::View: s += "." + st.view.str(); break;
      case PlaceStep::Kind::Deref: break;
    }
  }
  return s;
}

std::string print_term(const Term& t, int indent) {
  if (const auto* l = t.as<LetTerm>()) {
    std::string s = "let " + l->name;
    if (l->annot) s += ": " + l->annot->str();
    return s + " = " + expr_str(*l->init, 0, indent);
  }
  if (const auto* a = t.as<AssignTerm>()) return print_place(a->place) + " = " + expr_str(*a->value, 0, indent);
  if (t.as<BlockTerm>()) return block_str(t, indent);
  if (const auto* s = t.as<SchedTerm>()) {
    std::string h = "sched";
    if (!s->axes.empty()) {
      h += "(";
      for (std::size_t i = 0; i < s->axes.size(); ++i) {
        if (i) h += ",";
        h += axis_name(s->axes[i]);
      }
      h += ")";
    }
    return h + " " + s->binder + " in " + s->exec + " " + block_str(*s->body, indent);
  }
  if (const auto* s = t.as<SplitTerm>()) {
    std::string r = std::string("split(") + axis_name(s->axis) + ") " + s->exec + " at " + s->pos.str() + " {\n";
    r += ind(indent + 1) + s->fst_binder + " => " + block_str(*s->fst, indent + 1) + ",\n";
    r += ind(indent + 1) + s->snd_binder + " => " + block_str(*s->snd, indent + 1) + "\n";
    return r + ind(indent) + "}";
  }
  if (const auto* f = t.as<ForNatTerm>()) {
    return "for " + f->var + " in [" + f->lo.str() + ".." + f->hi.str() + "] " + block_str(*f->body, indent);
  }
  if (const auto* f = t.as<ForEachTerm>()) {
    return "for " + f->var + " in " + expr_str(*f->collection, 0, indent) + " " + block_str(*f->body, indent);
  }
  if (t.as<SyncTerm>()) return "sync";
  return expr_str(t, 0, indent);
}

std::string pretty_print(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.items.size(); ++i) {
    if (i) out += "\n";
    if (const auto* v = std::get_if<ViewDef>(&p.items[i])) {
      out += "view " + v->name;
      if (!v->params.empty()) {
        out += "<";
        for (std::size_t k = 0; k < v->params.size(); ++k) {
          if (k) out += ", ";
          out += v->params[k] + ": nat";
        }
        out += ">";
      }
      out += " = " + chain_str(v->body) + "\n";
      continue;
    }
    const auto& f = std::get<FunctionDef>(p.items[i]);
    out += "fn " + f.name;
    if (!f.tparams.empty()) {
      out += "<";
      for (std::size_t k = 0; k < f.tparams.size(); ++k) {
        if (k) out += ", ";
        const auto& tp = f.tparams[k];
        out += tp.name + ": " + (tp.kind == KindSort::Nat ? "nat" : tp.kind == KindSort::Mem ? "mem" : "dt");
      }
      out += ">";
    }
    out += "(";
    for (std::size_t k = 0; k < f.params.size(); ++k) {
      if (k) out += ", ";
      out += f.params[k].name + ": " + f.params[k].type.str();
    }
    out += ") -[" + f.exec_binder + ": " + f.exec.str() + "]-> " + f.ret.str() + " " + block_str(f.body, 0) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural dump

namespace {

void dump_place(std::ostream& os, const PlaceExpr& p) {
  os << "(place " << p.root;
  for (const auto& s : p.steps) {
    switch (s.kind) {
      case PlaceStep::Kind::Fst: os << " fst"; break;
      case PlaceStep::Kind::Snd: os << " snd"; break;
      case PlaceStep::Kind::Deref: os << " deref"; break;
      case PlaceStep::Kind::Index: os << " (idx " << s.index.str() << ")"; break;
      case PlaceStep::Kind::Select: os << " (sel " << s.exec << ")"; break;
      case PlaceStep::Kind::View: os << " (view " << s.view.str() << ")"; break;
    }
  }
  os << ")";
}

void dump_term(std::ostream& os, const Term& t) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PlaceTerm>) {
          dump_place(os, n.place);
        } else if constexpr (std::is_same_v<T, LetTerm>) {
          os << "(let " << n.name << " " << (n.annot ? n.annot->str() : "_") << " ";
          dump_term(os, *n.init);
          os << ")";
        } else if constexpr (std::is_same_v<T, AssignTerm>) {
          os << "(assign ";
          dump_place(os, n.place);
          os << " ";
          dump_term(os, *n.value);
          os << ")";
        } else if constexpr (std::is_same_v<T, BorrowTerm>) {
          os << "(borrow " << (n.uniq == Uniqueness::Uniq ? "uniq " : "shrd ");
          dump_place(os, n.place);
          os << ")";
        } else if constexpr (std::is_same_v<T, BlockTerm>) {
          os << "(block";
          for (const auto& s : n.stmts) {
            os << " ";
            dump_term(os, s);
          }
          os << ")";
        } else if constexpr (std::is_same_v<T, CallTerm>) {
          os << "(call " << n.callee << " (";
          for (const auto& g : n.generics) os << " " << generic_str(g);
          os << ")";
          if (n.launch) os << " (launch " << n.launch->blocks.str() << " " << n.launch->threads.str() << ")";
          for (const auto& a : n.args) {
            os << " ";
            dump_term(os, a);
          }
          os << ")";
        } else if constexpr (std::is_same_v<T, ForEachTerm>) {
          os << "(for_each " << n.var << " ";
          dump_term(os, *n.collection);
          os << " ";
          dump_term(os, *n.body);
          os << ")";
        } else if constexpr (std::is_same_v<T, ForNatTerm>) {
          os << "(for_nat " << n.var << " " << n.lo.str() << " " << n.hi.str() << " ";
          dump_term(os, *n.body);
          os << ")";
        } else if constexpr (std::is_same_v<T, SchedTerm>) {
          os << "(sched (";
          for (auto a : n.axes) os << axis_name(a);
          os << ") " << n.binder << " " << n.exec << " ";
          dump_term(os, *n.body);
          os << ")";
        } else if constexpr (std::is_same_v<T, SplitTerm>) {
          os << "(split " << axis_name(n.axis) << " " << n.exec << " " << n.pos.str() << " " << n.fst_binder << " ";
          dump_term(os, *n.fst);
          os << " " << n.snd_binder << " ";
          dump_term(os, *n.snd);
          os << ")";
        } else if constexpr (std::is_same_v<T, SyncTerm>) {
          os << "(sync)";
        } else if constexpr (std::is_same_v<T, LitTerm>) {
          os << "(lit " << (n.kind == LitTerm::Kind::Unit ? "()" : n.text) << ")";
        } else if constexpr (std::is_same_v<T, BinaryTerm>) {
          os << "(" << binop_text(n.op) << " ";
          dump_term(os, *n.lhs);
          os << " ";
          dump_term(os, *n.rhs);
          os << ")";
        } else if constexpr (std::is_same_v<T, UnaryTerm>) {
          os << "(" << (n.op == UnOp::Neg ? "neg" : "not") << " ";
          dump_term(os, *n.operand);
          os << ")";
        } else if constexpr (std::is_same_v<T, ArrayRepeatTerm>) {
          os << "(repeat ";
          dump_term(os, *n.value);
          os << " " << n.count.str() << ")";
        } else if constexpr (std::is_same_v<T, TupleTerm>) {
          os << "(tuple";
          for (const auto& e : n.elems) {
            os << " ";
            dump_term(os, e);
          }
          os << ")";
        }
      },
      t.node);
}

}  // namespace

std::string dump_ast(const Program& p) {
  std::ostringstream os;
  for (const auto& item : p.items) {
    if (const auto* v = std::get_if<ViewDef>(&item)) {
      os << "(view " << v->name << " (";
      for (const auto& q : v->params) os << " " << q;
      os << ") " << chain_str(v->body) << ")\n";
      continue;
    }
    const auto& f = std::get<FunctionDef>(item);
    os << "(fn " << f.name << " (";
    for (const auto& tp : f.tparams) os << " " << tp.name << ":" << static_cast<int>(tp.kind);
    os << ") (";
    for (const auto& q : f.params) os << " " << q.name << ":" << q.type.str();
    os << ") " << f.exec_binder << ":" << f.exec.str() << " " << f.ret.str() << " ";
    dump_term(os, f.body);
    os << ")\n";
  }
  return os.str();
}

}  // namespace descend
