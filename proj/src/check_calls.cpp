// Function calls, kernel launches and the memory intrinsics.

#include "check_internal.hpp"

namespace descend::detail {

namespace {

bool is_intrinsic(const std::string& name) {
  return name == "alloc" || name == "CpuHeap::new" || name == "GpuGlobal::alloc_copy" || name == "copy_mem_to_host" ||
         name == "copy_mem_to_gpu";
}

std::string ref_text(const DataType& t) {
  if (t.kind() == DataType::Kind::Ref) return "reference to `" + t.mem().str() + "`";
  return "`" + t.str() + "`";
}

struct Inst {
  const FunctionDef* f;
  NatBindings nats;
  std::map<std::string, Memory> mems;
  std::map<std::string, DataType> types;

  KindSort* kind_of(const std::string& name, KindSort& out) const {
    for (const auto& tp : f->tparams) {
      if (tp.name == name) {
        out = tp.kind;
        return &out;
      }
    }
    return nullptr;
  }
  bool is_param(const std::string& name, KindSort k) const {
    KindSort s;
    return kind_of(name, s) && s == k;
  }
  bool bound(const TypeParam& tp) const {
    switch (tp.kind) {
      case KindSort::Nat: return nats.count(tp.name) > 0;
      case KindSort::Mem: return mems.count(tp.name) > 0;
      case KindSort::Dt: return types.count(tp.name) > 0;
    }
    return false;
  }

  void unify_nat(const Nat& pat, const Nat& actual) {
    if (pat.is_var() && is_param(pat.name(), KindSort::Nat) && !nats.count(pat.name())) {
      nats[pat.name()] = normalize(actual);
    }
  }

  void unify(const DataType& pat, const DataType& actual) {
    if (pat.kind() == DataType::Kind::Var) {
      if (is_param(pat.name(), KindSort::Dt) && !types.count(pat.name())) types[pat.name()] = actual;
      return;
    }
    if (pat.kind() != actual.kind()) return;
    switch (pat.kind()) {
      case DataType::Kind::Tuple:
        if (pat.elems().size() == actual.elems().size()) {
          for (std::size_t i = 0; i < pat.elems().size(); ++i) unify(pat.elems()[i], actual.elems()[i]);
        }
        return;
      case DataType::Kind::Array:
      case DataType::Kind::View:
        unify_nat(pat.size(), actual.size());
        unify(pat.elem(), actual.elem());
        return;
      case DataType::Kind::Ref:
      case DataType::Kind::Boxed:
        if (pat.mem().kind == Memory::Kind::Var && is_param(pat.mem().var, KindSort::Mem) && !mems.count(pat.mem().var)) {
          mems[pat.mem().var] = actual.mem();
        }
        unify(pat.elem(), actual.elem());
        return;
      default: return;
    }
  }

  DataType apply(const DataType& t) const { return subst_type(t, nats, mems, types); }
};

}  // namespace

DataType Checker::call_arg(Term& arg, const DataType* expected) {
  if (auto* pt = arg.as<PlaceTerm>()) {
    Resolved probe = resolve(pt->place, Uniqueness::Shrd, false);
    if (!probe.is_nat && probe.type.kind() == DataType::Kind::Ref) {
      DataType t = borrow(arg, probe.type.uniq(), pt->place, true);
      arg.type = t;
      return t;
    }
  }
  return expr(arg, expected);
}

DataType Checker::intrinsic(Term& t, CallTerm& c) {
  auto level = exec_level(cur_).kind;
  auto cpu_only = [&]() {
    if (level != ExecLevel::Kind::CpuThread) {
      fail(ErrorCode::Mem, "`" + c.callee + "` can only be called by a CPU thread", c.callee_span,
           "executed by `" + level_name(level) + "`", {{cur_header(), "execution resource introduced here"}});
    }
  };
  auto arity = [&](std::size_t n) {
    if (c.args.size() != n) {
      fail(ErrorCode::Type,
           "`" + c.callee + "` takes " + std::to_string(n) + " argument(s) but " + std::to_string(c.args.size()) +
               " were supplied",
           t.span);
    }
  };
  auto ref_arg = [&](std::size_t i, Memory::Kind mem, bool uniq) {
    Term& a = c.args[i];
    DataType at = call_arg(a, nullptr);
    if (at.kind() != DataType::Kind::Ref) {
      fail(ErrorCode::Type, "mismatched types", a.span,
           std::string("expected a reference to `") + Memory{mem, {}}.str() + "`, found `" + at.str() + "`");
    }
    if (at.mem().kind != mem) {
      fail(ErrorCode::Mem, "mismatched types", a.span,
           "expected reference to `" + Memory{mem, {}}.str() + "`, found " + ref_text(at));
    }
    if (uniq && at.uniq() != Uniqueness::Uniq) {
      fail(ErrorCode::Borrow, "mismatched types", a.span, "expected a unique reference `&uniq`, found `" + at.str() + "`");
    }
    return at;
  };

  if (c.callee == "alloc") {
    if (c.generics.size() != 2 || c.generics[0].kind != GenericArg::Kind::Mem ||
        c.generics[1].kind != GenericArg::Kind::Type) {
      fail(ErrorCode::Type, "`alloc` expects a memory and a data type: `alloc::<gpu.shared, T>()`", t.span);
    }
    arity(0);
    const Memory& m = c.generics[0].mem;
    if (m.kind != Memory::Kind::GpuShared) {
      fail(ErrorCode::Mem, "`alloc` can only allocate `gpu.shared` memory", c.generics[0].span,
           "found `" + m.str() + "`");
    }
    if (level != ExecLevel::Kind::GpuBlock) {
      fail(ErrorCode::Mem, "shared memory can only be allocated by a `gpu.Block`", t.span,
           "executed by `" + level_name(level) + "`", {{cur_header(), "execution resource introduced here"}});
    }
    validate_type(c.generics[1].type, c.generics[1].span);
    return DataType::boxed(c.generics[1].type, m);
  }
  if (c.callee == "CpuHeap::new") {
    cpu_only();
    arity(1);
    DataType v = expr(c.args[0], nullptr);
    return DataType::boxed(v, Memory::cpu());
  }
  if (c.callee == "GpuGlobal::alloc_copy") {
    cpu_only();
    arity(1);
    DataType r = ref_arg(0, Memory::Kind::CpuMem, false);
    return DataType::boxed(r.elem(), Memory::global());
  }
  cpu_only();
  arity(2);
  bool to_host = c.callee == "copy_mem_to_host";
  DataType a = ref_arg(0, Memory::Kind::GpuGlobal, !to_host);
  DataType b = ref_arg(1, Memory::Kind::CpuMem, to_host);
  expect_type(a.elem(), b.elem(), c.args[1].span);
  return DataType::scalar(ScalarKind::Unit);
}

DataType Checker::call(Term& t, CallTerm& c, const DataType* expected) {
  (void)expected;
  if (is_intrinsic(c.callee) && !prog_.find_function(c.callee)) return intrinsic(t, c);
  FunctionDef* f = prog_.find_function(c.callee);
  if (!f) fail(ErrorCode::Type, "cannot find function `" + c.callee + "`", c.callee_span, "not found");
  auto callee = f->exec.kind;
  auto level = exec_level(cur_);
  if (c.launch) {
    if (callee != ExecLevel::Kind::GpuGrid) {
      fail(ErrorCode::Launch, "`" + c.callee + "` is not a GPU grid function and cannot be launched", c.launch->span,
           "`" + c.callee + "` is executed by `" + level_name(callee) + "`");
    }
    if (level.kind != ExecLevel::Kind::CpuThread) {
      fail(ErrorCode::Launch, "kernels can only be launched by a CPU thread", c.launch->span,
           "executed by `" + level_name(level.kind) + "`");
    }
  } else {
    if (callee == ExecLevel::Kind::GpuGrid) {
      fail(ErrorCode::Launch, "GPU grid function `" + c.callee + "` must be launched with a launch configuration",
           c.callee_span, "add `::<<<blocks, threads>>>` to launch it");
    }
    if (callee != level.kind) {
      fail(ErrorCode::Type, "`" + c.callee + "` must be called by `" + level_name(callee) + "`", c.callee_span,
           "called by `" + level_name(level.kind) + "`", {{f->exec_span, "declared here"}});
    }
  }

  Inst in{f, {}, {}, {}};
  if (c.generics.size() > f->tparams.size()) {
    fail(ErrorCode::Type,
         "`" + c.callee + "` takes " + std::to_string(f->tparams.size()) + " generic argument(s) but " +
             std::to_string(c.generics.size()) + " were supplied",
         c.callee_span);
  }
  for (std::size_t i = 0; i < c.generics.size(); ++i) {
    const TypeParam& tp = f->tparams[i];
    GenericArg& g = c.generics[i];
    bool bare_var_type = g.kind == GenericArg::Kind::Type && g.type.kind() == DataType::Kind::Var;
    switch (tp.kind) {
      case KindSort::Nat:
        if (bare_var_type) {
          g.kind = GenericArg::Kind::Nat;
          g.nat = Nat::var(g.type.name());
        }
        if (g.kind != GenericArg::Kind::Nat) fail(ErrorCode::Type, "expected a size for `" + tp.name + "`", g.span);
        validate_nat(g.nat, g.span);
        in.nats[tp.name] = normalize(g.nat);
        break;
      case KindSort::Mem:
        if (bare_var_type) {
          g.kind = GenericArg::Kind::Mem;
          g.mem = Memory::variable(g.type.name());
        }
        if (g.kind == GenericArg::Kind::Nat && g.nat.is_var()) {
          g.kind = GenericArg::Kind::Mem;
          g.mem = Memory::variable(g.nat.name());
        }
        if (g.kind != GenericArg::Kind::Mem) fail(ErrorCode::Type, "expected a memory for `" + tp.name + "`", g.span);
        in.mems[tp.name] = g.mem;
        break;
      case KindSort::Dt:
        if (g.kind == GenericArg::Kind::Nat && g.nat.is_var()) {
          g.kind = GenericArg::Kind::Type;
          g.type = DataType::var(g.nat.name());
        }
        if (g.kind != GenericArg::Kind::Type) fail(ErrorCode::Type, "expected a data type for `" + tp.name + "`", g.span);
        validate_type(g.type, g.span);
        in.types[tp.name] = g.type;
        break;
    }
  }

  auto dims_match = [&](const Dim& pat, const Dim& actual, Span span, ErrorCode code, const char* what) {
    bool same = pat.axes.size() == actual.axes.size();
    for (std::size_t i = 0; same && i < pat.axes.size(); ++i) same = pat.axes[i].first == actual.axes[i].first;
    if (!same) {
      fail(code, std::string("mismatched ") + what, span,
           "`" + c.callee + "` expects `" + pat.str() + "`, found `" + actual.str() + "`", {{f->exec_span, "declared here"}});
    }
    for (std::size_t i = 0; i < pat.axes.size(); ++i) in.unify_nat(pat.axes[i].second, actual.axes[i].second);
  };
  Dim block_threads = level.threads;
  if (c.launch) {
    for (const Dim* d : {&c.launch->blocks, &c.launch->threads}) {
      for (const auto& ax : d->axes) validate_nat(ax.second, c.launch->span);
    }
    dims_match(f->exec.blocks, c.launch->blocks, c.launch->span, ErrorCode::Launch, "launch configuration");
    dims_match(f->exec.threads, c.launch->threads, c.launch->span, ErrorCode::Launch, "launch configuration");
  } else if (callee == ExecLevel::Kind::GpuBlock) {
    dims_match(f->exec.threads, block_threads, c.callee_span, ErrorCode::Size, "block dimensions");
  }

  if (c.args.size() != f->params.size()) {
    fail(ErrorCode::Type,
         "`" + c.callee + "` takes " + std::to_string(f->params.size()) + " argument(s) but " +
             std::to_string(c.args.size()) + " were supplied",
         t.span);
  }
  std::vector<DataType> arg_types;
  for (std::size_t i = 0; i < c.args.size(); ++i) {
    DataType pt = in.apply(f->params[i].type);
    DataType at = call_arg(c.args[i], &pt);
    in.unify(f->params[i].type, at);
    arg_types.push_back(at);
  }
  for (const auto& tp : f->tparams) {
    if (!in.bound(tp)) {
      fail(ErrorCode::Size, "cannot infer `" + tp.name + "` for the call to `" + c.callee + "`", c.callee_span,
           "specify it with `::<...>`");
    }
  }

  auto check_dims = [&](const Dim& pat, const Dim& actual, Span span, ErrorCode code, const char* what) {
    for (std::size_t i = 0; i < pat.axes.size(); ++i) {
      Nat want = subst(pat.axes[i].second, in.nats);
      if (nat_eq(want, actual.axes[i].second) != Tri::True) {
        Dim w = pat;
        for (auto& ax : w.axes) ax.second = subst(ax.second, in.nats);
        fail(code, std::string("mismatched ") + what, span,
             "expected `" + w.str() + "`, found `" + actual.str() + "`", {{f->exec_span, "declared here"}});
      }
    }
  };
  if (c.launch) {
    check_dims(f->exec.blocks, c.launch->blocks, c.launch->span, ErrorCode::Launch, "launch configuration");
    check_dims(f->exec.threads, c.launch->threads, c.launch->span, ErrorCode::Launch, "launch configuration");
  } else if (callee == ExecLevel::Kind::GpuBlock) {
    check_dims(f->exec.threads, block_threads, c.callee_span, ErrorCode::Size, "block dimensions");
  }

  for (std::size_t i = 0; i < c.args.size(); ++i) {
    DataType want = in.apply(f->params[i].type);
    const DataType& got = arg_types[i];
    Span span = c.args[i].span;
    bool want_ref = want.kind() == DataType::Kind::Ref;
    bool got_ref = got.kind() == DataType::Kind::Ref;
    if (c.launch && got_ref && got.mem().kind == Memory::Kind::CpuMem) {
      fail(ErrorCode::Mem, "mismatched types", span, "expected reference to `gpu.global`, found reference to `cpu.mem`");
    }
    if (want_ref && got_ref && !(want.mem() == got.mem())) {
      fail(ErrorCode::Mem, "mismatched types", span,
           "expected reference to `" + want.mem().str() + "`, found reference to `" + got.mem().str() + "`");
    }
    if (c.launch && !got_ref && !is_copyable(got)) {
      fail(ErrorCode::Launch, "kernel arguments must be GPU references or copyable values", span,
           "found `" + got.str() + "`");
    }
    Tri eq = types_equal(want, got);
    if (eq == Tri::True) continue;
    std::string label = want_ref && got_ref && want.uniq() == got.uniq()
                            ? "expected `" + want.elem().str() + "`, found `" + got.elem().str() + "`"
                            : "expected `" + want.str() + "`, found `" + got.str() + "`";
    ErrorCode code = c.launch ? ErrorCode::Launch : ErrorCode::Type;
    if (!c.launch) {
      try {
        expect_type(want, got, span);
      } catch (CheckError& e) {
        code = e.diag.code;
      }
    }
    fail(code, "mismatched types", span, label);
  }

  c.nat_inst = in.nats;
  c.mem_inst = in.mems;
  c.type_inst = in.types;
  return in.apply(f->ret);
}

}  // namespace descend::detail
