#include <algorithm>

#include "check_internal.hpp"

namespace descend {

Tri types_equal(const DataType& a, const DataType& b) {
  if (a.kind() != b.kind()) return Tri::False;
  switch (a.kind()) {
    case DataType::Kind::Scalar: return a.scalar_kind() == b.scalar_kind() ? Tri::True : Tri::False;
    case DataType::Kind::Var: return a.name() == b.name() ? Tri::True : Tri::False;
    case DataType::Kind::Tuple: {
      if (a.elems().size() != b.elems().size()) return Tri::False;
      Tri r = Tri::True;
      for (std::size_t i = 0; i < a.elems().size(); ++i) r = tri_and(r, types_equal(a.elems()[i], b.elems()[i]));
      return r;
    }
    case DataType::Kind::Array:
    case DataType::Kind::View: return tri_and(types_equal(a.elem(), b.elem()), nat_eq(a.size(), b.size()));
    case DataType::Kind::Ref:
      if (a.uniq() != b.uniq() || !(a.mem() == b.mem())) return Tri::False;
      return types_equal(a.elem(), b.elem());
    case DataType::Kind::Boxed:
      if (!(a.mem() == b.mem())) return Tri::False;
      return types_equal(a.elem(), b.elem());
  }
  return Tri::False;
}

bool is_copyable(const DataType& t) {
  switch (t.kind()) {
    case DataType::Kind::Scalar: return true;
    case DataType::Kind::Tuple:
      return std::all_of(t.elems().begin(), t.elems().end(), [](const DataType& e) { return is_copyable(e); });
    case DataType::Kind::Ref: return t.uniq() == Uniqueness::Shrd;
    default: return false;
  }
}

namespace {

Memory subst_mem(const Memory& m, const std::map<std::string, Memory>& mems) {
  if (m.kind != Memory::Kind::Var) return m;
  auto it = mems.find(m.var);
  return it == mems.end() ? m : it->second;
}

}  // namespace

DataType subst_type(const DataType& t, const NatBindings& nats, const std::map<std::string, Memory>& mems,
                    const std::map<std::string, DataType>& types) {
  switch (t.kind()) {
    case DataType::Kind::Scalar: return t;
    case DataType::Kind::Var: {
      auto it = types.find(t.name());
      return it == types.end() ? t : it->second;
    }
    case DataType::Kind::Tuple: {
      std::vector<DataType> es;
      for (const auto& e : t.elems()) es.push_back(subst_type(e, nats, mems, types));
      return DataType::tuple(std::move(es));
    }
    case DataType::Kind::Array: return DataType::array(subst_type(t.elem(), nats, mems, types), subst(t.size(), nats));
    case DataType::Kind::View: return DataType::view(subst_type(t.elem(), nats, mems, types), subst(t.size(), nats));
    case DataType::Kind::Ref:
      return DataType::ref(t.uniq(), subst_mem(t.mem(), mems), subst_type(t.elem(), nats, mems, types));
    case DataType::Kind::Boxed: return DataType::boxed(subst_type(t.elem(), nats, mems, types), subst_mem(t.mem(), mems));
  }
  return t;
}

CheckResult check_program(Program& p, const CheckOptions& opts) {
  detail::Checker c(p);
  c.safety_ = opts.safety;
  return c.run();
}

namespace detail {

CheckResult Checker::run() {
  check_view_defs();
  for (FunctionDef* f : prog_.functions()) check_function(*f);
  CheckResult r;
  r.diags = diags_;
  r.ok = diags_.empty();
  return r;
}

void Checker::report(const Diagnostic& d) {
  std::string key = std::string(code_name(d.code)) + ":" + std::to_string(d.primary.span.begin) + ":" +
                    std::to_string(d.primary.span.end) + ":" + d.message;
  if (seen_.insert(key).second) diags_.push_back(d);
}

void Checker::fail(ErrorCode code, std::string msg, Span span, std::string label, std::vector<Label> related) {
  CheckError e;
  e.diag.code = code;
  e.diag.message = std::move(msg);
  e.diag.primary = {span, std::move(label)};
  e.diag.related = std::move(related);
  throw e;
}

std::string Checker::level_name(ExecLevel::Kind k) {
  switch (k) {
    case ExecLevel::Kind::CpuThread: return "cpu.Thread";
    case ExecLevel::Kind::GpuGrid: return "gpu.Grid";
    case ExecLevel::Kind::GpuBlock: return "gpu.Block";
    case ExecLevel::Kind::GpuThread: return "gpu.Thread";
  }
  return "?";
}

std::string Checker::cur_level_name() const { return level_name(exec_level(cur_).kind); }

Span Checker::cur_header() const {
  if (!sched_headers_.empty()) return sched_headers_.back();
  return fn_ ? fn_->exec_span : Span{};
}

void Checker::check_view_defs() {
  for (const auto& item : prog_.items) {
    const auto* v = std::get_if<ViewDef>(&item);
    if (!v) continue;
    ViewInst inst;
    inst.name = v->name;
    for (const auto& p : v->params) inst.args.push_back(Nat::var(p));
    inst.span = v->span;
    try {
      expand_user_view(inst, prog_);
      std::set<std::string> params(v->params.begin(), v->params.end());
      std::vector<const ViewInst*> work;
      for (const auto& b : v->body) work.push_back(&b);
      while (!work.empty()) {
        const ViewInst* cur = work.back();
        work.pop_back();
        for (const auto& a : cur->args) {
          for (const auto& fv : free_vars(a)) {
            if (!params.count(fv)) {
              throw ViewError(ErrorCode::Type, "cannot find size variable `" + fv + "` in view `" + v->name + "`");
            }
          }
        }
        for (const auto& in : cur->inner) work.push_back(&in);
      }
    } catch (const ViewError& e) {
      Diagnostic d;
      d.code = ErrorCode::Type;
      d.message = e.what();
      d.primary = {v->span, "in this view definition"};
      report(d);
    }
  }
}

void Checker::validate_nat(const Nat& n, Span span) {
  for (const auto& fv : free_vars(n)) {
    auto it = delta_.find(fv);
    if (it != delta_.end() && it->second == KindSort::Nat) continue;
    if (ranges_.count(fv)) continue;
    fail(ErrorCode::Type, "cannot find size variable `" + fv + "` in this scope", span, "not found");
  }
}

void Checker::validate_type(const DataType& t, Span span) {
  switch (t.kind()) {
    case DataType::Kind::Scalar: return;
    case DataType::Kind::Var: {
      auto it = delta_.find(t.name());
      if (it == delta_.end() || it->second != KindSort::Dt) {
        fail(ErrorCode::Type, "cannot find type `" + t.name() + "` in this scope", span, "not found");
      }
      return;
    }
    case DataType::Kind::Tuple:
      for (const auto& e : t.elems()) validate_type(e, span);
      return;
    case DataType::Kind::Array:
    case DataType::Kind::View:
      validate_nat(t.size(), span);
      validate_type(t.elem(), span);
      return;
    case DataType::Kind::Ref:
    case DataType::Kind::Boxed:
      if (t.mem().kind == Memory::Kind::Var) {
        auto it = delta_.find(t.mem().var);
        if (it == delta_.end() || it->second != KindSort::Mem) {
          fail(ErrorCode::Type, "cannot find memory `" + t.mem().var + "` in this scope", span, "not found");
        }
      }
      validate_type(t.elem(), span);
      return;
  }
}

void Checker::check_function(FunctionDef& f) {
  fn_ = &f;
  delta_.clear();
  vars_.clear();
  depth_ = 0;
  binders_.clear();
  split_headers_.clear();
  sched_headers_.clear();
  A_.clear();
  ranges_.clear();
  cur_ = ExecResource::from_level(f.exec);

  try {
    for (const auto& tp : f.tparams) {
      if (!delta_.emplace(tp.name, tp.kind).second) {
        fail(ErrorCode::Type, "the parameter `" + tp.name + "` is declared more than once", tp.span, "redeclared");
      }
    }
    for (const Dim* d : {&f.exec.blocks, &f.exec.threads}) {
      for (const auto& [a, n] : d->axes) validate_nat(n, f.exec_span);
    }
    validate_type(f.ret, f.span);
    if (!f.ret.is_unit()) {
      fail(ErrorCode::Type, "functions must return `()`", f.name_span, "returns `" + f.ret.str() + "`");
    }
  } catch (const CheckError& e) {
    if (!e.silent) report(e.diag);
    return;
  }

  ExecBinder b;
  b.name = f.exec_binder;
  b.res = cur_;
  b.header = f.exec_span;
  binders_.push_back(b);

  for (auto& p : f.params) {
    try {
      validate_type(p.type, p.span);
      for (const auto& v : vars_) {
        if (v.name == p.name) fail(ErrorCode::Type, "parameter `" + p.name + "` is bound more than once", p.span);
      }
      p.key = declare(p.name, p.type, p.span).key;
    } catch (const CheckError& e) {
      if (!e.silent) report(e.diag);
      declare(p.name, p.type, p.span).poisoned = true;
    }
  }
  block(f.body);
}

}  // namespace detail
}  // namespace descend
