// Place resolution and the access safety check.

#include <algorithm>

#include "check_internal.hpp"
#include "descend/parser.hpp"

namespace descend::detail {

namespace {

bool is_ptr(const DataType& t) { return t.kind() == DataType::Kind::Ref || t.kind() == DataType::Kind::Boxed; }

std::string step_text(const PlaceStep& s) {
  switch (s.kind) {
    case PlaceStep::Kind::Fst: return ".fst";
    case PlaceStep::Kind::Snd: return ".snd";
    case PlaceStep::Kind::Index: return "[" + s.index.str() + "]";
    case PlaceStep::Kind::Select: return "[[" + s.exec + "]]";
    case PlaceStep::Kind::View: return "." + s.view.str();
    case PlaceStep::Kind::Deref: return "";
  }
  return "";
}

std::size_t block_prefix_len(const ExecResource& e) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < e.path().size(); ++i) {
    if (e.path()[i].level == DimLevel::Block) n = i + 1;
  }
  return n;
}

}  // namespace

VarInfo* Checker::lookup(const std::string& name) {
  for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
    if (it->name == name) return &*it;
  }
  return nullptr;
}

const ExecBinder* Checker::find_binder(const std::string& name) const {
  for (auto it = binders_.rbegin(); it != binders_.rend(); ++it) {
    if (it->name == name) return &*it;
  }
  return nullptr;
}

bool Checker::is_nat_name(const std::string& name) const {
  if (ranges_.count(name)) return true;
  auto it = delta_.find(name);
  return it != delta_.end() && it->second == KindSort::Nat;
}

const ExecBinder* Checker::binder_for_index(std::size_t i) const {
  for (auto it = binders_.rbegin(); it != binders_.rend(); ++it) {
    if (!it->own_axes.empty() && it->first_own <= i && i < it->first_own + it->own_axes.size()) return &*it;
  }
  return nullptr;
}

std::set<std::size_t> Checker::covered(const std::vector<RStep>& steps, std::size_t upto) const {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < upto && i < steps.size(); ++i) {
    const RStep& s = steps[i];
    if (s.kind != RStep::Kind::Select) continue;
    std::size_t len = s.exec.path().size();
    std::size_t k = s.sel_axes.size();
    for (std::size_t j = len - k; j < len; ++j) out.insert(j);
  }
  return out;
}

Resolved Checker::resolve(PlaceExpr& p, Uniqueness mode, bool auto_deref_end) {
  Resolved r;
  VarInfo* v = lookup(p.root);
  if (!v && is_nat_name(p.root)) {
    if (!p.steps.empty()) fail(ErrorCode::Type, "size variable `" + p.root + "` is not a place", p.span);
    r.is_nat = true;
    r.nat = Nat::var(p.root);
    r.type = DataType::scalar(ScalarKind::I32);
    return r;
  }
  if (!v) fail(ErrorCode::Type, "cannot find value `" + p.root + "` in this scope", p.root_span, "not found in this scope");
  if (v->poisoned) throw CheckError{{}, true};
  if (v->moved) {
    fail(ErrorCode::Move, "use of moved value `" + p.root + "`", p.root_span, "value used here after move",
         {{v->moved_at, "value moved here"}});
  }
  if (v->is_place_alias) {
    PlaceExpr inner = v->place_alias;
    r = resolve(inner, mode, false);
    r.var = nullptr;
    r.whole_var = false;
  } else {
    r.rp.root = v->key;
    r.type = v->type;
    r.root_name = v->name;
    r.root_type = v->type;
    r.owner = v->owner;
    r.var = v;
    r.whole_var = true;
  }

  std::string text = p.root;
  Span prefix = p.root_span;

  auto reroot = [&]() {
    if (!r.rp.steps.empty()) {
      r.rp.root = r.rp.key() + "*";
      r.rp.steps.clear();
    }
  };

  auto deref = [&](Span s) {
    DataType t = r.type;
    std::string dtext = "*" + text;
    if (t.kind() == DataType::Kind::Ref) {
      if (r.var && r.whole_var && r.var->has_alias) {
        VarInfo* a = r.var;
        r.traversed.push_back(a->key);
        r.traversed.insert(r.traversed.end(), a->alias_parents.begin(), a->alias_parents.end());
        r.rp = a->alias;
        r.root_type = a->alias_info->root_type;
        r.root_mem = a->alias_info->root_mem;
        r.root_name = a->alias_info->root_name;
        r.owner = a->alias_owner;
      } else {
        reroot();
        r.root_type = t.elem();
        r.root_mem = t.mem();
      }
      if (t.uniq() == Uniqueness::Shrd && !r.through_shrd) {
        r.through_shrd = true;
        r.shrd_span = s;
      }
      r.type = t.elem();
    } else if (t.kind() == DataType::Kind::Boxed) {
      reroot();
      r.root_type = t.elem();
      r.root_mem = t.mem();
      r.type = t.elem();
    } else {
      fail(ErrorCode::Type, "type `" + t.str() + "` cannot be dereferenced", s, "not a reference");
    }
    r.derefs.emplace_back(t.mem(), s);
    r.deref_text.push_back(dtext);
    r.whole_var = false;
    text = dtext;
  };

  for (std::size_t si = 0; si < p.steps.size(); ++si) {
    PlaceStep& s = p.steps[si];
    if (s.kind == PlaceStep::Kind::Deref) {
      deref(s.span);
      prefix = Span::join(prefix, s.span);
      if (si + 1 < p.steps.size()) text = "(" + text + ")";
      continue;
    }
    while (is_ptr(r.type)) deref(prefix);
    r.whole_var = false;
    RStep rs;
    switch (s.kind) {
      case PlaceStep::Kind::Fst:
      case PlaceStep::Kind::Snd: {
        if (r.type.kind() != DataType::Kind::Tuple || r.type.elems().size() != 2) {
          fail(ErrorCode::Type, "no field `" + step_text(s).substr(1) + "` on type `" + r.type.str() + "`", s.span);
        }
        bool fst = s.kind == PlaceStep::Kind::Fst;
        rs.kind = fst ? RStep::Kind::Fst : RStep::Kind::Snd;
        r.type = r.type.elems()[fst ? 0 : 1];
        r.rp.steps.push_back(rs);
        break;
      }
      case PlaceStep::Kind::Index: {
        validate_nat(s.index, s.span);
        if (!r.type.is_arrayish()) {
          fail(ErrorCode::Type, "cannot index into a value of type `" + r.type.str() + "`", s.span);
        }
        NatBindings maxes;
        for (const auto& [name, rg] : ranges_) maxes[name] = rg.hi - Nat::lit(1);
        Nat top = subst(s.index, maxes);
        Tri ok = nat_le(top + Nat::lit(1), r.type.size());
        if (ok == Tri::False) {
          fail(ErrorCode::Size, "index out of bounds", s.span,
               "index `" + s.index.str() + "` may reach `" + normalize(top).str() + "` but the size is `" +
                   r.type.size().str() + "`");
        }
        if (ok == Tri::Unknown) {
          fail(ErrorCode::Size,
               "cannot prove size constraint `" + normalize(top).str() + " < " + r.type.size().str() + "`", s.span,
               "index may be out of bounds");
        }
        rs.kind = RStep::Kind::Index;
        rs.index = normalize(s.index);
        r.type = r.type.elem();
        r.rp.steps.push_back(rs);
        break;
      }
      case PlaceStep::Kind::Select: {
        const ExecBinder* b = find_binder(s.exec);
        if (!b) fail(ErrorCode::Type, "cannot find execution resource `" + s.exec + "`", s.span, "not found");
        if (b->own_axes.empty()) {
          fail(ErrorCode::Type, "cannot select with `" + s.exec + "`", s.span,
               "`" + s.exec + "` does not schedule over any dimension");
        }
        for (Axis a : b->own_axes) {
          if (!r.type.is_arrayish()) {
            fail(ErrorCode::Type, "cannot select from a value of type `" + r.type.str() + "`", s.span,
                 "`" + s.exec + "` needs one array dimension per scheduled dimension");
          }
          Nat ext = *b->res.extent(b->level, a);
          Tri eq = nat_eq(ext, r.type.size());
          if (eq != Tri::True) {
            std::string msg = eq == Tri::False ? std::string("mismatched sizes in select")
                                               : "cannot prove size constraint `" + ext.str() + " == " +
                                                     r.type.size().str() + "`";
            fail(ErrorCode::Size, msg, s.span,
                 "`" + s.exec + "` has extent `" + ext.str() + "` in dimension `" + axis_name(a) +
                     "` but the array has size `" + r.type.size().str() + "`");
          }
          r.type = r.type.elem();
        }
        rs.kind = RStep::Kind::Select;
        rs.exec = b->res;
        rs.exec_name = b->name;
        rs.sel_axes = b->own_axes;
        rs.sel_level = b->level;
        r.rp.steps.push_back(rs);
        break;
      }
      case PlaceStep::Kind::View: {
        try {
          ViewChain chain = expand_user_view(s.view, prog_);
          for (auto& inst : chain) {
            std::vector<const ViewInst*> work{&inst};
            while (!work.empty()) {
              const ViewInst* w = work.back();
              work.pop_back();
              for (const auto& a : w->args) validate_nat(a, s.span);
              for (const auto& in : w->inner) work.push_back(&in);
            }
            r.type = view_output_type(inst, r.type);
            RStep vs;
            vs.kind = RStep::Kind::View;
            vs.view = inst;
            r.rp.steps.push_back(vs);
          }
        } catch (const ViewError& e) {
          fail(e.code, e.what(), s.span, "in this view application");
        }
        break;
      }
      case PlaceStep::Kind::Deref: break;
    }
    prefix = Span::join(prefix, s.span);
    text += step_text(s);
  }
  if (auto_deref_end) {
    while (is_ptr(r.type)) deref(prefix);
  }
  return r;
}

void Checker::attach(PlaceExpr& p, const Resolved& r) {
  auto info = std::make_shared<PlaceInfo>();
  info->rplace = r.rp;
  info->type = r.type;
  info->root_name = r.root_name;
  info->root_type = r.root_type;
  info->root_mem = r.root_mem;
  info->is_nat = r.is_nat;
  info->nat = r.nat;
  p.info = info;
}

void Checker::check_mem(const Resolved& r) {
  bool gpu = cur_.base().gpu;
  for (std::size_t i = 0; i < r.derefs.size(); ++i) {
    const Memory& m = r.derefs[i].first;
    bool bad = gpu ? m.kind == Memory::Kind::CpuMem
                   : (m.kind == Memory::Kind::GpuGlobal || m.kind == Memory::Kind::GpuShared);
    if (!bad) continue;
    fail(ErrorCode::Mem, "cannot dereference `" + r.deref_text[i] + "` pointing to `" + m.str() + "`",
         r.derefs[i].second, "dereferencing pointer in `" + m.str() + "` memory",
         {{cur_header(), "executed by `" + cur_level_name() + "`"}});
  }
}

void Checker::check_narrowing(const Resolved& r, Access kind, Span span) {
  if (!cur_.base().gpu) return;
  std::size_t own = r.owner.path().size();
  auto cov = covered(r.rp.steps, r.rp.steps.size());
  for (std::size_t i = own; i < cur_.path().size(); ++i) {
    if (cur_.path()[i].kind != ExecStep::Kind::Forall || cov.count(i)) continue;
    const ExecBinder* b = binder_for_index(i);
    std::string who = b ? b->name : "execution resource";
    std::vector<Label> rel;
    if (b) rel.push_back({b->header, "`" + who + "` is scheduled here"});
    fail(ErrorCode::Narrow, "narrowing violated", span,
         "every `" + who + "` would gain unique access to the same memory", rel);
  }
  if (kind == Access::Write && exec_level(cur_).kind != ExecLevel::Kind::GpuThread) {
    bool private_value = !r.root_mem && r.owner == cur_;
    if (!private_value) {
      fail(ErrorCode::Narrow, "cannot write to shared memory from `" + cur_level_name() + "`", span,
           "writes must be performed by individual threads", {{cur_header(), "executed here"}});
    }
  }
}

void Checker::check_conflicts(const Resolved& r, Uniqueness mode, Span span) {
  std::size_t own = r.owner.path().size();
  std::size_t blen = block_prefix_len(cur_);
  for (const auto& e : A_) {
    if (e.loan.mode == Uniqueness::Shrd && mode == Uniqueness::Shrd) continue;
    if (places_overlap(e.loan.place, r.rp) == Overlap::Disjoint) continue;
    ExecRelation rel = relation(e.exec, cur_);
    if (rel == ExecRelation::Disjoint) continue;
    std::size_t common = 0;
    std::size_t n = std::min(e.loan.place.steps.size(), r.rp.steps.size());
    while (common < n && steps_equal(e.loan.place.steps[common], r.rp.steps[common])) ++common;
    auto cov = covered(r.rp.steps, common);
    auto all_covered = [&](std::size_t from, std::size_t to) {
      for (std::size_t i = from; i < to && i < cur_.path().size(); ++i) {
        if (cur_.path()[i].kind == ExecStep::Kind::Forall && !cov.count(i)) return false;
      }
      return true;
    };
    if (rel == ExecRelation::Identical && all_covered(own, cur_.path().size())) continue;
    if (e.loan.synced && (own >= blen || all_covered(own, blen))) continue;
    fail(ErrorCode::Conflict, "conflicting memory access", span,
         "cannot select memory because of a conflicting prior selection",
         {{e.loan.span, "conflicting prior selection here"}});
  }
}

void Checker::check_live_borrows(const Resolved& r, Uniqueness mode, Span span) {
  for (const auto& v : vars_) {
    if (!v.has_alias || v.poisoned) continue;
    if (std::find(r.traversed.begin(), r.traversed.end(), v.key) != r.traversed.end()) continue;
    if (v.alias_mode == Uniqueness::Shrd && mode == Uniqueness::Shrd) continue;
    if (places_overlap(v.alias, r.rp) == Overlap::Disjoint) continue;
    fail(ErrorCode::Borrow, "cannot access `" + r.rp.str() + "` because it is borrowed by `" + v.name + "`", span,
         mode == Uniqueness::Uniq ? "unique access occurs here" : "access occurs here",
         {{v.alias_span, "borrow occurs here"}});
  }
}

void Checker::access(const Resolved& r, Uniqueness mode, Access kind, Span span, bool record) {
  if (r.is_nat) return;
  if (kind == Access::Read || kind == Access::Write) check_mem(r);
  if (mode == Uniqueness::Uniq && r.through_shrd) {
    fail(ErrorCode::Borrow, "cannot " + std::string(kind == Access::Write ? "assign" : "borrow uniquely") +
                                " through a shared reference",
         span, "this place is behind a `&shrd` reference", {{r.shrd_span, "shared reference dereferenced here"}});
  }
  if (safety_) {
    if (mode == Uniqueness::Uniq) check_narrowing(r, kind, span);
    check_conflicts(r, mode, span);
    check_live_borrows(r, mode, span);
  }
  if (record) A_.push_back({cur_, Loan{mode, r.rp, span, false}});
}

}  // namespace descend::detail
