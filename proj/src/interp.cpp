#include "descend/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "descend/ground.hpp"
#include "descend/mono.hpp"
#include "descend/typecheck.hpp"

namespace descend {

// ---------------------------------------------------------------------------
// Values

Value Value::of_int(std::int64_t v) {
  Value x;
  x.kind = ScalarKind::I32;
  x.i = static_cast<std::int32_t>(static_cast<std::uint32_t>(v));
  return x;
}

Value Value::of_bool(bool b) {
  Value x;
  x.kind = ScalarKind::Bool;
  x.i = b ? 1 : 0;
  return x;
}

Value Value::of_float(ScalarKind k, double v) {
  Value x;
  x.kind = k;
  x.f = k == ScalarKind::F32 ? static_cast<double>(static_cast<float>(v)) : v;
  return x;
}

Value Value::zero(ScalarKind k) { return convert(k, 0); }

Value Value::convert(ScalarKind k, double v) {
  switch (k) {
    case ScalarKind::F32:
    case ScalarKind::F64: return of_float(k, v);
    case ScalarKind::Bool: return of_bool(v != 0);
    default: return of_int(static_cast<std::int64_t>(v));
  }
}

double Value::as_double() const {
  return kind == ScalarKind::F32 || kind == ScalarKind::F64 ? f : static_cast<double>(i);
}

namespace {

struct SimFailure {
  SimStatus status;
  std::string message;
};

[[noreturn]] void runtime(const std::string& msg) { throw SimFailure{SimStatus::RuntimeError, msg}; }

}  // namespace

Value eval_binary(BinOp op, const Value& a, const Value& b) {
  bool fl = a.kind == ScalarKind::F32 || a.kind == ScalarKind::F64;
  switch (op) {
    case BinOp::And: return Value::of_bool(a.i && b.i);
    case BinOp::Or: return Value::of_bool(a.i || b.i);
    case BinOp::Lt: return Value::of_bool(fl ? a.f < b.f : a.i < b.i);
    case BinOp::Le: return Value::of_bool(fl ? a.f <= b.f : a.i <= b.i);
    case BinOp::Gt: return Value::of_bool(fl ? a.f > b.f : a.i > b.i);
    case BinOp::Ge: return Value::of_bool(fl ? a.f >= b.f : a.i >= b.i);
    case BinOp::Eq: return Value::of_bool(fl ? a.f == b.f : a.i == b.i);
    case BinOp::Ne: return Value::of_bool(fl ? a.f != b.f : a.i != b.i);
    default: break;
  }
  if (fl) {
    switch (op) {
      case BinOp::Add: return Value::of_float(a.kind, a.f + b.f);
      case BinOp::Sub: return Value::of_float(a.kind, a.f - b.f);
      case BinOp::Mul: return Value::of_float(a.kind, a.f * b.f);
      case BinOp::Div: return Value::of_float(a.kind, a.f / b.f);
      case BinOp::Rem: return Value::of_float(a.kind, std::fmod(a.f, b.f));
      default: break;
    }
  }
  switch (op) {
    case BinOp::Add: return Value::of_int(a.i + b.i);
    case BinOp::Sub: return Value::of_int(a.i - b.i);
    case BinOp::Mul: return Value::of_int(a.i * b.i);
    case BinOp::Div:
      if (b.i == 0) runtime("integer division by zero");
      return Value::of_int(a.i / b.i);
    case BinOp::Rem:
      if (b.i == 0) runtime("integer division by zero");
      return Value::of_int(a.i % b.i);
    default: return a;
  }
}

Value eval_unary(UnOp op, const Value& a) {
  if (op == UnOp::Not) return Value::of_bool(!a.i);
  if (a.kind == ScalarKind::F32 || a.kind == ScalarKind::F64) return Value::of_float(a.kind, -a.f);
  return Value::of_int(-a.i);
}

const char* to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Ok: return "ok";
    case SimStatus::BarrierDivergence: return "barrier_divergence";
    case SimStatus::OutOfBounds: return "out_of_bounds";
    case SimStatus::Rejected: return "rejected";
    case SimStatus::ConfigError: return "config_error";
    case SimStatus::RuntimeError: return "runtime_error";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Races

std::vector<Race> detect_races(const AccessLog& log) {
  std::map<std::pair<int, std::int64_t>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    cells[{r.buffer, r.offset}].push_back(i);
  }
  std::vector<Race> out;
  for (const auto& [cell, idx] : cells) {
    bool any_write = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return log.records[i].write; });
    if (!any_write) continue;
    for (std::size_t x = 0; x < idx.size(); ++x) {
      const auto& a = log.records[idx[x]];
      for (std::size_t y = x + 1; y < idx.size(); ++y) {
        const auto& b = log.records[idx[y]];
        if (!a.write && !b.write) continue;
        if (a.block == b.block && a.thread == b.thread) continue;
        if (a.block == b.block && a.epoch != b.epoch) continue;
        out.push_back({a, b});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

NatValues infer_grid_nats(const FunctionDef& f, const SimConfig& cfg) {
  if (f.exec.kind != ExecLevel::Kind::GpuGrid) throw std::invalid_argument("`" + f.name + "` is not a gpu.grid function");
  NatValues env = cfg.nats;
  struct Eq {
    Nat pat;
    std::int64_t value;
  };
  std::vector<Eq> eqs;
  auto collect = [&](const Dim& d, const Coords& c, const char* what) {
    for (int a = 0; a < 3; ++a) {
      const Nat* n = d.extent(static_cast<Axis>(a));
      if (n) {
        eqs.push_back({*n, c[static_cast<std::size_t>(a)]});
      } else if (c[static_cast<std::size_t>(a)] != 1) {
        throw std::invalid_argument(std::string(what) + " dimension " + axis_name(static_cast<Axis>(a)) +
                                    " is not used by `" + f.name + "` and must be 1");
      }
    }
  };
  collect(f.exec.blocks, cfg.blocks, "block");
  collect(f.exec.threads, cfg.threads, "thread");
  for (bool progress = true; progress;) {
    progress = false;
    for (const auto& e : eqs) {
      std::vector<std::string> unbound;
      for (const auto& v : free_vars(e.pat)) {
        if (!env.count(v)) unbound.push_back(v);
      }
      if (unbound.size() != 1) continue;
      for (std::int64_t guess = 1; guess <= e.value; ++guess) {
        NatValues t = env;
        t[unbound[0]] = guess;
        if (evaluate(e.pat, t) == e.value) {
          env = t;
          progress = true;
          break;
        }
      }
    }
  }
  for (const auto& tp : f.tparams) {
    if (tp.kind != KindSort::Nat) throw std::invalid_argument("generic parameter `" + tp.name + "` is not a size");
    if (!env.count(tp.name)) throw std::invalid_argument("cannot infer `" + tp.name + "`; pass it explicitly");
  }
  for (const auto& e : eqs) {
    auto v = evaluate(e.pat, env);
    if (!v || *v != e.value) {
      throw std::invalid_argument("extent `" + e.pat.str() + "` does not match " + std::to_string(e.value));
    }
  }
  NatValues out;
  for (const auto& tp : f.tparams) out[tp.name] = env.at(tp.name);
  return out;
}

namespace {

std::int64_t product(const Coords& c) { return c[0] * c[1] * c[2]; }

ScalarKind scalar_of(const DataType& t) {
  const DataType* c = &t;
  while (c->is_arrayish()) c = &c->elem();
  if (c->kind() != DataType::Kind::Scalar) runtime("values of type `" + t.str() + "` are not supported");
  return c->scalar_kind();
}

std::int64_t count_of(const DataType& t) {
  std::int64_t n = 1;
  for (const DataType* c = &t; c->is_arrayish(); c = &c->elem()) {
    auto v = c->size().ground_value();
    if (!v) runtime("size `" + c->size().str() + "` is not ground");
    n *= *v;
  }
  return n;
}

std::string coords_str(const Coords& c) {
  return "(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
}

std::string base_key(std::string k) {
  while (!k.empty() && k.back() == '*') k.pop_back();
  return k;
}

struct Prepared {
  Program mono;
  std::string instance;
};

// Checks, infers sizes and specializes; on failure fills `res`.
bool prepare(const Program& p, const std::string& kernel, const SimConfig& cfg, const RunOptions& opts, Prepared& out,
             RunResult& res) {
  res.blocks = cfg.blocks;
  res.threads = cfg.threads;
  Program copy = p;
  CheckResult cr = check_program(copy, {opts.check_safety});
  if (!cr.ok) {
    res.status = SimStatus::Rejected;
    res.message = "the program does not type-check";
    res.diags = cr.diags;
    return false;
  }
  const FunctionDef* f = copy.find_function(kernel);
  if (!f) {
    res.status = SimStatus::ConfigError;
    res.message = "cannot find function `" + kernel + "`";
    return false;
  }
  for (std::int64_t e : {cfg.blocks[0], cfg.blocks[1], cfg.blocks[2], cfg.threads[0], cfg.threads[1], cfg.threads[2]}) {
    if (e < 1) {
      res.status = SimStatus::ConfigError;
      res.message = "extents must be positive";
      return false;
    }
  }
  if (product(cfg.blocks) * product(cfg.threads) > cfg.max_threads) {
    res.status = SimStatus::ConfigError;
    res.message = "configuration exceeds " + std::to_string(cfg.max_threads) + " threads";
    return false;
  }
  try {
    res.nats = infer_grid_nats(*f, cfg);
  } catch (const std::invalid_argument& e) {
    res.status = SimStatus::ConfigError;
    res.message = e.what();
    return false;
  }
  MonoOptions mo;
  MonoRoot root;
  root.function = kernel;
  for (const auto& [k, v] : res.nats) root.nats[k] = Nat::lit(static_cast<std::uint64_t>(v));
  mo.roots.push_back(root);
  mo.use_default_roots = false;
  mo.check.safety = opts.check_safety;
  try {
    out.mono = monomorphize(copy, mo);
  } catch (const MonoError& e) {
    res.status = SimStatus::Rejected;
    res.message = e.what();
    res.diags = e.diags;
    return false;
  }
  out.instance = mangle(*f, root.nats, {}, {});
  res.instance = out.instance;
  return true;
}

// Memory, logging and parameter binding shared by both evaluators.
struct Machine {
  std::vector<std::vector<Value>> bufs;
  AccessLog log;
  std::map<std::string, int> params;  // parameter name -> buffer
  std::vector<std::pair<std::string, int>> param_order;

  int add(const std::string& name, ScalarKind k, std::int64_t n) {
    bufs.emplace_back(static_cast<std::size_t>(std::max<std::int64_t>(n, 1)), Value::zero(k));
    log.buffer_names.push_back(name);
    return static_cast<int>(bufs.size()) - 1;
  }

  void check(int b, std::int64_t off) const {
    if (off < 0 || off >= static_cast<std::int64_t>(bufs[static_cast<std::size_t>(b)].size())) {
      throw SimFailure{SimStatus::OutOfBounds, "offset " + std::to_string(off) + " out of bounds of `" +
                                                   log.buffer_names[static_cast<std::size_t>(b)] + "`"};
    }
  }

  Value read(int b, std::int64_t off, const Coords& blk, const Coords& th, int epoch) {
    check(b, off);
    log.records.push_back({blk, th, b, off, false, epoch});
    return bufs[static_cast<std::size_t>(b)][static_cast<std::size_t>(off)];
  }

  void write(int b, std::int64_t off, const Value& v, const Coords& blk, const Coords& th, int epoch) {
    check(b, off);
    log.records.push_back({blk, th, b, off, true, epoch});
    auto& cell = bufs[static_cast<std::size_t>(b)][static_cast<std::size_t>(off)];
    cell = Value::convert(cell.kind, v.as_double());
  }

  // Creates parameter buffers of a specialized kernel.
  void bind_params(const FunctionDef& f, const SimConfig& cfg, std::map<std::string, int>& by_key,
                   std::map<std::string, int>* by_name) {
    for (const auto& p : f.params) {
      int b = -1;
      if (p.type.kind() == DataType::Kind::Ref) {
        ScalarKind k = scalar_of(p.type.elem());
        std::int64_t n = count_of(p.type.elem());
        b = add(p.name, k, n);
        auto it = cfg.inputs.find(p.name);
        if (it != cfg.inputs.end()) {
          if (static_cast<std::int64_t>(it->second.size()) != n) {
            throw SimFailure{SimStatus::ConfigError, "input `" + p.name + "` has " + std::to_string(it->second.size()) +
                                                         " elements, expected " + std::to_string(n)};
          }
          for (std::size_t i = 0; i < it->second.size(); ++i) bufs[static_cast<std::size_t>(b)][i] = Value::convert(k, it->second[i]);
        } else if (auto g = cfg.generators.find(p.name); g != cfg.generators.end()) {
          for (std::int64_t i = 0; i < n; ++i) bufs[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] = Value::convert(k, g->second(i));
        }
        param_order.push_back({p.name, b});
      } else if (p.type.kind() == DataType::Kind::Scalar) {
        b = add(p.name, p.type.scalar_kind(), 1);
        auto it = cfg.scalars.find(p.name);
        if (it != cfg.scalars.end()) bufs[static_cast<std::size_t>(b)][0] = Value::convert(p.type.scalar_kind(), it->second);
      } else {
        throw SimFailure{SimStatus::ConfigError, "parameter `" + p.name + "` of type `" + p.type.str() + "` is not supported"};
      }
      by_key[p.key] = b;
      if (by_name) (*by_name)[p.name] = b;
      params[p.name] = b;
    }
  }

  void finish(RunResult& res) {
    for (const auto& [name, b] : param_order) res.buffers[name] = bufs[static_cast<std::size_t>(b)];
    res.log = std::move(log);
  }
};

struct ThreadState {
  Coords tid{0, 0, 0};
  int epoch = 0;
  std::vector<std::map<std::string, int>> scopes;
};

std::vector<ThreadState> make_threads(const Coords& dims) {
  std::vector<ThreadState> ts;
  for (std::int64_t z = 0; z < dims[2]; ++z) {
    for (std::int64_t y = 0; y < dims[1]; ++y) {
      for (std::int64_t x = 0; x < dims[0]; ++x) {
        ThreadState t;
        t.tid = {x, y, z};
        t.scopes.emplace_back();
        ts.push_back(std::move(t));
      }
    }
  }
  return ts;
}

template <class F>
void for_each_block(const Coords& dims, F f) {
  for (std::int64_t z = 0; z < dims[2]; ++z) {
    for (std::int64_t y = 0; y < dims[1]; ++y) {
      for (std::int64_t x = 0; x < dims[0]; ++x) f(Coords{x, y, z});
    }
  }
}

const Coords kCollective{-1, -1, -1};

// ---------------------------------------------------------------------------
// Evaluation of the checked program

class AstSim {
 public:
  AstSim(Machine& m, const FunctionDef& f, const SimConfig& cfg) : m_(m), fn_(f), cfg_(cfg) {}

  void run() {
    m_.bind_params(fn_, cfg_, kernel_env_, nullptr);
    for_each_block(cfg_.blocks, [&](const Coords& b) { run_block(b); });
  }

 private:
  struct Ctx {
    ExecResource res;
    std::vector<ThreadState*> active;
    bool per_thread = false;
  };

  void run_block(const Coords& b) {
    bid_ = b;
    threads_ = make_threads(cfg_.threads);
    block_scopes_.assign(1, {});
    block_epoch_ = 0;
    binders_.clear();
    Ctx c;
    c.res = ExecResource::from_level(fn_.exec);
    for (auto& t : threads_) c.active.push_back(&t);
    binders_.push_back({fn_.exec_binder, c.res});
    exec(fn_.body, c);
  }

  const ExecResource& binder(const std::string& name) const {
    for (auto it = binders_.rbegin(); it != binders_.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    runtime("unknown execution resource `" + name + "`");
  }

  std::int64_t nat(const Nat& n) const {
    auto v = evaluate(n, nats_);
    if (!v) runtime("size `" + n.str() + "` is not ground");
    return *v;
  }

  std::int64_t snd_offset(const ExecResource& e, DimLevel level, Axis a) const {
    std::int64_t off = 0;
    for (const auto& st : e.path()) {
      if (st.kind == ExecStep::Kind::Split && st.level == level && st.axis == a && !st.fst) off += nat(st.pos);
    }
    return off;
  }

  void push_scope(Ctx& c) {
    if (c.per_thread) {
      for (auto* t : c.active) t->scopes.emplace_back();
    } else {
      block_scopes_.emplace_back();
    }
  }

  void pop_scope(Ctx& c) {
    if (c.per_thread) {
      for (auto* t : c.active) t->scopes.pop_back();
    } else {
      block_scopes_.pop_back();
    }
  }

  void exec(const Term& t, Ctx& c) {
    if (const auto* b = t.as<BlockTerm>()) {
      push_scope(c);
      for (const auto& s : b->stmts) exec(s, c);
      pop_scope(c);
      return;
    }
    if (const auto* s = t.as<SchedTerm>()) {
      ExecResource r = binder(s->exec);
      std::vector<Axis> axes = s->axes.empty() ? r.remaining_axes() : s->axes;
      for (Axis a : axes) r = refine_forall(r, a);
      Ctx nc{r, c.active, c.per_thread || exec_level(r).kind == ExecLevel::Kind::GpuThread};
      binders_.push_back({s->binder, r});
      exec(*s->body, nc);
      binders_.pop_back();
      return;
    }
    if (const auto* s = t.as<SplitTerm>()) {
      const ExecResource r = binder(s->exec);
      auto level = r.active_level();
      if (!level) runtime("split of a resource without axes");
      std::int64_t pos = nat(s->pos) + snd_offset(r, *level, s->axis);
      std::size_t ax = static_cast<std::size_t>(s->axis);
      std::vector<ThreadState*> lo, hi;
      if (*level == DimLevel::Block) {
        (bid_[ax] < pos ? lo : hi) = c.active;
      } else {
        for (auto* th : c.active) (th->tid[ax] < pos ? lo : hi).push_back(th);
      }
      for (int side = 0; side < 2; ++side) {
        auto& part = side == 0 ? lo : hi;
        if (part.empty()) continue;
        ExecResource sub = refine_split(r, s->axis, s->pos, side == 0);
        Ctx nc{sub, part, c.per_thread};
        binders_.push_back({side == 0 ? s->fst_binder : s->snd_binder, sub});
        exec(side == 0 ? *s->fst : *s->snd, nc);
        binders_.pop_back();
      }
      return;
    }
    if (t.as<SyncTerm>()) {
      if (c.active.size() != threads_.size()) {
        throw SimFailure{SimStatus::BarrierDivergence,
                         "block " + coords_str(bid_) + ": " + std::to_string(c.active.size()) + " of " +
                             std::to_string(threads_.size()) + " threads reach the barrier"};
      }
      for (auto& th : threads_) ++th.epoch;
      ++block_epoch_;
      return;
    }
    if (const auto* f = t.as<ForNatTerm>()) {
      std::int64_t lo = nat(f->lo), hi = nat(f->hi);
      for (std::int64_t i = lo; i < hi; ++i) {
        nats_[f->var] = i;
        exec(*f->body, c);
      }
      nats_.erase(f->var);
      return;
    }
    if (const auto* f = t.as<ForEachTerm>()) {
      const auto* pt = f->collection->as<PlaceTerm>();
      if (!pt || !pt->place.info) runtime("unresolved collection");
      std::int64_t n = nat(pt->place.info->type.size());
      std::string iv = "_i_" + f->var;
      for (std::int64_t i = 0; i < n; ++i) {
        nats_[iv] = i;
        exec(*f->body, c);
      }
      nats_.erase(iv);
      return;
    }
    if (c.per_thread) {
      for (auto* th : c.active) single(t, th);
    } else {
      single(t, nullptr);
    }
  }

  int lookup(const std::string& key, ThreadState* th) const {
    std::string k = base_key(key);
    if (th) {
      for (auto it = th->scopes.rbegin(); it != th->scopes.rend(); ++it) {
        auto f = it->find(k);
        if (f != it->end()) return f->second;
      }
    }
    for (auto it = block_scopes_.rbegin(); it != block_scopes_.rend(); ++it) {
      auto f = it->find(k);
      if (f != it->end()) return f->second;
    }
    auto f = kernel_env_.find(k);
    if (f != kernel_env_.end()) return f->second;
    runtime("no storage for `" + key + "`");
  }

  void bind(const std::string& key, int b, ThreadState* th) {
    if (th) th->scopes.back()[key] = b;
    else block_scopes_.back()[key] = b;
  }

  std::vector<std::int64_t> offsets(const PlaceInfo& in, ThreadState* th) const {
    SelectCoords coords;
    for (const auto& s : in.rplace.steps) {
      if (s.kind != RStep::Kind::Select) continue;
      std::vector<std::int64_t> cs;
      for (Axis a : s.sel_axes) {
        std::size_t ax = static_cast<std::size_t>(a);
        std::int64_t g;
        if (s.sel_level == DimLevel::Block) {
          g = bid_[ax];
        } else {
          if (!th) runtime("thread selection outside of a thread");
          g = th->tid[ax];
        }
        cs.push_back(g - snd_offset(s.exec, s.sel_level, a));
      }
      coords[s.exec_name] = cs;
    }
    try {
      return place_offsets(in.rplace, in.root_type, coords, nats_);
    } catch (const GroundError& e) {
      throw SimFailure{SimStatus::OutOfBounds, e.what()};
    }
  }

  const Coords& who(ThreadState* th) const { return th ? th->tid : kCollective; }
  int epoch(ThreadState* th) const { return th ? th->epoch : block_epoch_; }

  void single(const Term& t, ThreadState* th) {
    if (const auto* l = t.as<LetTerm>()) {
      const Term& init = *l->init;
      DataType ty = l->annot ? *l->annot : init.type;
      if (ty.kind() == DataType::Kind::Ref) {
        if (!init.as<BorrowTerm>() && !init.as<PlaceTerm>()) runtime("unsupported reference initializer");
        return;  // resolved statically
      }
      if (const auto* c = init.as<CallTerm>()) {
        if (c->callee != "alloc") runtime("call to `" + c->callee + "` inside a kernel");
        const DataType& et = c->generics.at(1).type;
        int b = m_.add(l->name + "@block" + coords_str(bid_), scalar_of(et), count_of(et));
        bind(l->key, b, th);
        return;
      }
      std::vector<Value> cells = values(init, th);
      std::string name = l->name + (th ? "@thread" + coords_str(bid_) + coords_str(th->tid) : "@block" + coords_str(bid_));
      int b = m_.add(name, scalar_of(ty), static_cast<std::int64_t>(cells.size()));
      // initialization is not an access of shared state
      for (std::size_t i = 0; i < cells.size(); ++i) m_.bufs[static_cast<std::size_t>(b)][i] = cells[i];
      bind(l->key, b, th);
      return;
    }
    if (const auto* a = t.as<AssignTerm>()) {
      if (!a->place.info) runtime("unresolved place");
      std::vector<Value> vs = values(*a->value, th);
      int b = lookup(a->place.info->rplace.root, th);
      auto offs = offsets(*a->place.info, th);
      if (offs.size() != vs.size()) runtime("assignment of mismatched sizes");
      for (std::size_t i = 0; i < offs.size(); ++i) m_.write(b, offs[i], vs[i], bid_, who(th), epoch(th));
      return;
    }
    if (t.as<CallTerm>()) runtime("calls inside a specialized kernel are not supported");
    values(t, th);
  }

  std::vector<Value> values(const Term& t, ThreadState* th) {
    if (const auto* p = t.as<PlaceTerm>()) {
      const auto* in = p->place.info.get();
      if (!in) runtime("unresolved place");
      if (in->is_nat) return {Value::of_int(nat(in->nat))};
      int b = lookup(in->rplace.root, th);
      std::vector<Value> out;
      for (std::int64_t o : offsets(*in, th)) out.push_back(m_.read(b, o, bid_, who(th), epoch(th)));
      return out;
    }
    if (const auto* r = t.as<ArrayRepeatTerm>()) {
      std::vector<Value> one = values(*r->value, th);
      std::vector<Value> out;
      for (std::int64_t i = 0; i < nat(r->count); ++i) out.insert(out.end(), one.begin(), one.end());
      return out;
    }
    if (const auto* tu = t.as<TupleTerm>()) {
      std::vector<Value> out;
      for (const auto& e : tu->elems) {
        auto v = values(e, th);
        out.insert(out.end(), v.begin(), v.end());
      }
      return out;
    }
    return {scalar(t, th)};
  }

  Value scalar(const Term& t, ThreadState* th) {
    ScalarKind k = t.type.kind() == DataType::Kind::Scalar ? t.type.scalar_kind() : ScalarKind::I32;
    if (const auto* l = t.as<LitTerm>()) {
      switch (l->kind) {
        case LitTerm::Kind::Int: return Value::convert(k, static_cast<double>(l->int_value));
        case LitTerm::Kind::Float: return Value::convert(k, l->float_value);
        case LitTerm::Kind::Bool: return Value::of_bool(l->bool_value);
        case LitTerm::Kind::Unit: return Value::of_int(0);
      }
    }
    if (t.as<PlaceTerm>()) {
      auto v = values(t, th);
      if (v.size() != 1) runtime("expected a scalar");
      return v[0];
    }
    if (const auto* b = t.as<BinaryTerm>()) {
      Value x = scalar(*b->lhs, th);
      Value y = scalar(*b->rhs, th);
      return eval_binary(b->op, x, y);
    }
    if (const auto* u = t.as<UnaryTerm>()) return eval_unary(u->op, scalar(*u->operand, th));
    if (t.as<BorrowTerm>()) runtime("references cannot be used as values here");
    runtime("unsupported expression");
  }

  Machine& m_;
  const FunctionDef& fn_;
  const SimConfig& cfg_;
  std::map<std::string, int> kernel_env_;
  Coords bid_{0, 0, 0};
  std::vector<ThreadState> threads_;
  std::vector<std::map<std::string, int>> block_scopes_;
  int block_epoch_ = 0;
  std::vector<std::pair<std::string, ExecResource>> binders_;
  NatValues nats_;
};

// ---------------------------------------------------------------------------
// Evaluation of the lowered IR

class IrSim {
 public:
  IrSim(Machine& m, const LFunction& f, const SimConfig& cfg) : m_(m), fn_(f), cfg_(cfg) {}

  void run(const FunctionDef& def) {
    std::map<std::string, int> by_key;
    m_.bind_params(def, cfg_, by_key, &params_);
    for_each_block(cfg_.blocks, [&](const Coords& b) { run_block(b); });
  }

 private:
  void run_block(const Coords& b) {
    bid_ = b;
    threads_ = make_threads(cfg_.threads);
    block_scopes_.assign(1, {});
    std::vector<ThreadState*> all;
    for (auto& t : threads_) all.push_back(&t);
    stmts(fn_.body, all);
  }

  SymValues env(const ThreadState* th) const {
    SymValues e = loops_;
    const char* names[3] = {"x", "y", "z"};
    for (std::size_t a = 0; a < 3; ++a) {
      e[std::string("blockIdx.") + names[a]] = bid_[a];
      if (th) e[std::string("threadIdx.") + names[a]] = th->tid[a];
    }
    return e;
  }

  std::int64_t idx(const LIndex& i, const ThreadState* th) const {
    try {
      return i.eval(env(th));
    } catch (const LowerError& e) {
      runtime(e.what());
    }
  }

  int lookup(const std::string& name, ThreadState* th) const {
    for (auto it = th->scopes.rbegin(); it != th->scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    for (auto it = block_scopes_.rbegin(); it != block_scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    auto f = params_.find(name);
    if (f != params_.end()) return f->second;
    runtime("no storage for `" + name + "`");
  }

  void stmts(const std::vector<LStmt>& ss, std::vector<ThreadState*>& active) {
    for (const auto& s : ss) stmt(s, active);
  }

  void stmt(const LStmt& s, std::vector<ThreadState*>& active) {
    switch (s.kind) {
      case LStmt::Kind::Block:
        for (auto* t : active) t->scopes.emplace_back();
        block_scopes_.emplace_back();
        stmts(s.body, active);
        block_scopes_.pop_back();
        for (auto* t : active) t->scopes.pop_back();
        return;
      case LStmt::Kind::DeclShared: {
        int b = m_.add(s.decl.name + "@block" + coords_str(bid_), s.decl.elem, s.decl.count);
        block_scopes_.back()[s.decl.name] = b;
        return;
      }
      case LStmt::Kind::DeclLocal:
        for (auto* th : active) {
          int b = m_.add(s.decl.name + "@thread" + coords_str(bid_) + coords_str(th->tid), s.decl.elem, s.decl.count);
          if (s.decl.count == 0) m_.bufs[static_cast<std::size_t>(b)][0] = Value::convert(s.decl.elem, eval(s.value, th).as_double());
          th->scopes.back()[s.decl.name] = b;
        }
        return;
      case LStmt::Kind::Assign:
        for (auto* th : active) {
          Value v = eval(s.value, th);
          int b = lookup(s.var, th);
          m_.write(b, s.idx ? idx(*s.idx, th) : 0, v, bid_, th->tid, th->epoch);
        }
        return;
      case LStmt::Kind::If: {
        std::vector<ThreadState*> yes, no;
        for (auto* th : active) {
          auto e = env(th);
          auto it = e.find(s.cond_sym);
          if (it == e.end()) runtime("unbound symbol `" + s.cond_sym + "`");
          (it->second < idx(s.bound, th) ? yes : no).push_back(th);
        }
        if (!yes.empty()) stmts(s.body, yes);
        if (!no.empty()) stmts(s.els, no);
        return;
      }
      case LStmt::Kind::For: {
        std::int64_t lo = idx(s.lo, nullptr), hi = idx(s.hi, nullptr);
        for (std::int64_t i = lo; i < hi; ++i) {
          loops_[s.var] = i;
          stmts(s.body, active);
        }
        loops_.erase(s.var);
        return;
      }
      case LStmt::Kind::Sync:
        if (active.size() != threads_.size()) {
          throw SimFailure{SimStatus::BarrierDivergence,
                           "block " + coords_str(bid_) + ": " + std::to_string(active.size()) + " of " +
                               std::to_string(threads_.size()) + " threads reach the barrier"};
        }
        for (auto& th : threads_) ++th.epoch;
        return;
      default: runtime("host statement inside a kernel");
    }
  }

  Value eval(const LExpr& e, ThreadState* th) {
    switch (e.kind) {
      case LExpr::Kind::Int: return Value::of_int(e.ival);
      case LExpr::Kind::Float: return Value::of_float(e.type, e.fval);
      case LExpr::Kind::Bool: return Value::of_bool(e.bval);
      case LExpr::Kind::Index: return Value::of_int(idx(e.index, th));
      case LExpr::Kind::Load: {
        int b = lookup(e.var, th);
        return m_.read(b, e.idx ? idx(*e.idx, th) : 0, bid_, th->tid, th->epoch);
      }
      case LExpr::Kind::Binary: {
        Value x = eval(e.args[0], th);
        Value y = eval(e.args[1], th);
        return eval_binary(e.op, x, y);
      }
      case LExpr::Kind::Unary: return eval_unary(e.uop, eval(e.args[0], th));
      default: runtime("pointer values inside a kernel");
    }
  }

  Machine& m_;
  const LFunction& fn_;
  const SimConfig& cfg_;
  std::map<std::string, int> params_;
  Coords bid_{0, 0, 0};
  std::vector<ThreadState> threads_;
  std::vector<std::map<std::string, int>> block_scopes_;
  SymValues loops_;
};

}  // namespace

std::vector<std::pair<Coords, Coords>> enumerate_threads(const ExecResource& e) {
  auto ground = [](const Dim& d) {
    Coords c{1, 1, 1};
    for (const auto& [a, n] : d.axes) {
      auto v = n.ground_value();
      if (!v) throw std::invalid_argument("extent `" + n.str() + "` is not ground");
      c[static_cast<std::size_t>(a)] = *v;
    }
    return c;
  };
  if (!e.base().gpu) throw std::invalid_argument("not a gpu resource");
  Coords blocks = ground(e.base().blocks), threads = ground(e.base().threads);
  struct Bound {
    DimLevel level;
    std::size_t axis;
    std::int64_t lo, hi;
  };
  std::vector<Bound> bounds;
  std::map<std::pair<int, int>, std::int64_t> offset;  // start of the current sub-range
  for (const auto& st : e.path()) {
    if (st.kind != ExecStep::Kind::Split) continue;
    auto v = st.pos.ground_value();
    if (!v) throw std::invalid_argument("split position is not ground");
    auto key = std::make_pair(static_cast<int>(st.level), static_cast<int>(st.axis));
    std::int64_t start = offset[key], cut = start + *v;
    if (st.fst) {
      bounds.push_back({st.level, static_cast<std::size_t>(st.axis), start, cut});
    } else {
      bounds.push_back({st.level, static_cast<std::size_t>(st.axis), cut, std::numeric_limits<std::int64_t>::max()});
      offset[key] = cut;
    }
  }
  std::vector<std::pair<Coords, Coords>> out;
  for_each_block(blocks, [&](const Coords& b) {
    for_each_block(threads, [&](const Coords& t) {
      for (const auto& bd : bounds) {
        std::int64_t c = (bd.level == DimLevel::Block ? b : t)[bd.axis];
        if (c < bd.lo || c >= bd.hi) return;
      }
      out.push_back({b, t});
    });
  });
  return out;
}

RunResult run_kernel(const Program& p, const std::string& kernel, const SimConfig& cfg, const RunOptions& opts) {
  RunResult res;
  Prepared prep;
  if (!prepare(p, kernel, cfg, opts, prep, res)) return res;
  const FunctionDef* f = prep.mono.find_function(prep.instance);
  Machine m;
  try {
    AstSim(m, *f, cfg).run();
  } catch (const SimFailure& e) {
    res.status = e.status;
    res.message = e.message;
  }
  m.finish(res);
  return res;
}

RunResult run_lowered(const Program& p, const std::string& kernel, const SimConfig& cfg, const RunOptions& opts) {
  RunResult res;
  Prepared prep;
  if (!prepare(p, kernel, cfg, opts, prep, res)) return res;
  const FunctionDef* f = prep.mono.find_function(prep.instance);
  Machine m;
  try {
    LProgram lp = lower_program(prep.mono);
    const LFunction* lf = lp.find(prep.instance);
    if (!lf) throw SimFailure{SimStatus::RuntimeError, "no lowered kernel `" + prep.instance + "`"};
    IrSim(m, *lf, cfg).run(*f);
  } catch (const SimFailure& e) {
    res.status = e.status;
    res.message = e.message;
  } catch (const LowerError& e) {
    res.status = SimStatus::RuntimeError;
    res.message = e.what();
  }
  m.finish(res);
  return res;
}

}  // namespace descend
