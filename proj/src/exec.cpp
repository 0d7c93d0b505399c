#include "descend/exec.hpp"

namespace descend {

std::string ExecStep::str() const {
  if (kind == Kind::Forall) return std::string(".forall(") + axis_name(axis) + ")";
  return ".split(" + pos.str() + ", " + axis_name(axis) + ")." + (fst ? "fst" : "snd");
}

std::string ExecBase::str() const {
  if (!gpu) return "cpu.thread";
  if (!blocks.axes.empty()) return "gpu.grid<" + blocks.str() + ", " + threads.str() + ">";
  if (!threads.axes.empty()) return "gpu.block<" + threads.str() + ">";
  return "gpu.thread";
}

ExecResource ExecResource::cpu_thread() { return {}; }

ExecResource ExecResource::grid(Dim blocks, Dim threads) {
  ExecResource e;
  e.base_.gpu = true;
  e.base_.blocks = std::move(blocks);
  e.base_.threads = std::move(threads);
  return e;
}

ExecResource ExecResource::block(Dim threads) {
  ExecResource e;
  e.base_.gpu = true;
  e.base_.threads = std::move(threads);
  return e;
}

ExecResource ExecResource::gpu_thread() {
  ExecResource e;
  e.base_.gpu = true;
  return e;
}

ExecResource ExecResource::from_level(const ExecLevel& level) {
  switch (level.kind) {
    case ExecLevel::Kind::CpuThread: return cpu_thread();
    case ExecLevel::Kind::GpuGrid: return grid(level.blocks, level.threads);
    case ExecLevel::Kind::GpuBlock: return block(level.threads);
    case ExecLevel::Kind::GpuThread: return gpu_thread();
  }
  return cpu_thread();
}

bool ExecResource::consumed(DimLevel level, Axis axis) const {
  for (const auto& s : path_) {
    if (s.kind == ExecStep::Kind::Forall && s.level == level && s.axis == axis) return true;
  }
  return false;
}

std::optional<DimLevel> ExecResource::active_level() const {
  if (!base_.gpu) return std::nullopt;
  for (const auto& [a, n] : base_.blocks.axes) {
    if (!consumed(DimLevel::Block, a)) return DimLevel::Block;
  }
  for (const auto& [a, n] : base_.threads.axes) {
    if (!consumed(DimLevel::Thread, a)) return DimLevel::Thread;
  }
  return std::nullopt;
}

std::vector<Axis> ExecResource::remaining_axes() const {
  std::vector<Axis> out;
  auto lvl = active_level();
  if (!lvl) return out;
  const Dim& d = *lvl == DimLevel::Block ? base_.blocks : base_.threads;
  for (const auto& [a, n] : d.axes) {
    if (!consumed(*lvl, a)) out.push_back(a);
  }
  return out;
}

std::optional<Nat> ExecResource::extent(DimLevel level, Axis axis) const {
  const Dim& d = level == DimLevel::Block ? base_.blocks : base_.threads;
  const Nat* full = d.extent(axis);
  if (!full) return std::nullopt;
  Nat n = *full;
  for (const auto& s : path_) {
    if (s.kind == ExecStep::Kind::Split && s.level == level && s.axis == axis) {
      n = normalize(s.fst ? s.pos : n - s.pos);
    }
  }
  return n;
}

ExecResource ExecResource::with_step(ExecStep s) const {
  ExecResource e = *this;
  e.path_.push_back(std::move(s));
  return e;
}

ExecResource ExecResource::prefix(std::size_t n) const {
  ExecResource e = *this;
  if (n < e.path_.size()) e.path_.resize(n);
  return e;
}

std::string ExecResource::str() const {
  std::string s = base_.str();
  for (const auto& st : path_) s += st.str();
  return s;
}

namespace {

DimLevel check_axis(const ExecResource& e, Axis axis, const char* what) {
  auto lvl = e.active_level();
  if (!lvl) {
    throw ExecError(ExecError::Kind::NoAxes,
                    std::string("cannot ") + what + " `" + e.str() + "`: no dimensions left to schedule over");
  }
  const Dim& d = *lvl == DimLevel::Block ? e.base().blocks : e.base().threads;
  const char* lvl_name = *lvl == DimLevel::Block ? "block" : "thread";
  if (!d.extent(axis)) {
    throw ExecError(ExecError::Kind::AxisAbsent, std::string("dimension `") + axis_name(axis) + "` does not exist in the " +
                                                     lvl_name + " dimensions `" + d.str() + "`");
  }
  if (e.consumed(*lvl, axis)) {
    throw ExecError(ExecError::Kind::AxisConsumed,
                    std::string("dimension `") + axis_name(axis) + "` of the " + lvl_name + " level is already scheduled");
  }
  return *lvl;
}

}  // namespace

ExecResource refine_forall(const ExecResource& e, Axis axis) {
  DimLevel lvl = check_axis(e, axis, "schedule over");
  ExecStep s;
  s.kind = ExecStep::Kind::Forall;
  s.axis = axis;
  s.level = lvl;
  return e.with_step(s);
}

ExecResource refine_split(const ExecResource& e, Axis axis, const Nat& pos, bool fst) {
  DimLevel lvl = check_axis(e, axis, "split");
  Nat ext = *e.extent(lvl, axis);
  Tri ok = nat_le(pos, ext);
  if (ok == Tri::False) {
    throw ExecError(ExecError::Kind::OutOfBounds,
                    "split position `" + pos.str() + "` exceeds the extent `" + ext.str() + "` of dimension `" + axis_name(axis) + "`");
  }
  if (ok == Tri::Unknown) {
    throw ExecError(ExecError::Kind::Unprovable, "cannot prove size constraint `" + pos.str() + " <= " + ext.str() + "`");
  }
  ExecStep s;
  s.kind = ExecStep::Kind::Split;
  s.axis = axis;
  s.level = lvl;
  s.pos = normalize(pos);
  s.fst = fst;
  return e.with_step(s);
}

ExecLevel exec_level(const ExecResource& e) {
  ExecLevel out;
  if (!e.base().gpu) return out;
  auto lvl = e.active_level();
  auto reduced = [&](DimLevel l, const Dim& d) {
    Dim r;
    for (const auto& [a, n] : d.axes) {
      if (!e.consumed(l, a)) r.axes.emplace_back(a, *e.extent(l, a));
    }
    return r;
  };
  if (lvl == DimLevel::Block) {
    out.kind = ExecLevel::Kind::GpuGrid;
    out.blocks = reduced(DimLevel::Block, e.base().blocks);
    out.threads = reduced(DimLevel::Thread, e.base().threads);
  } else if (lvl == DimLevel::Thread) {
    out.kind = ExecLevel::Kind::GpuBlock;
    out.threads = reduced(DimLevel::Thread, e.base().threads);
  } else {
    out.kind = ExecLevel::Kind::GpuThread;
  }
  return out;
}

const char* to_string(ExecRelation r) {
  switch (r) {
    case ExecRelation::Identical: return "Identical";
    case ExecRelation::Disjoint: return "Disjoint";
    case ExecRelation::Overlapping: return "Overlapping";
  }
  return "?";
}

ExecRelation relation(const ExecResource& a, const ExecResource& b) {
  if (!(a.base() == b.base())) {
    throw std::logic_error("relation between execution resources of different bases: " + a.str() + " vs " + b.str());
  }
  const auto& pa = a.path();
  const auto& pb = b.path();
  std::size_t n = std::min(pa.size(), pb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (pa[i].str() == pb[i].str()) continue;
    const ExecStep& x = pa[i];
    const ExecStep& y = pb[i];
    if (x.kind == ExecStep::Kind::Split && y.kind == ExecStep::Kind::Split && x.axis == y.axis && x.level == y.level &&
        x.fst != y.fst && nat_eq(x.pos, y.pos) == Tri::True) {
      return ExecRelation::Disjoint;
    }
    return ExecRelation::Overlapping;
  }
  return pa.size() == pb.size() ? ExecRelation::Identical : ExecRelation::Overlapping;
}

bool is_ancestor_or_self(const ExecResource& a, const ExecResource& b) {
  if (!(a.base() == b.base()) || a.path().size() > b.path().size()) return false;
  for (std::size_t i = 0; i < a.path().size(); ++i) {
    if (a.path()[i].str() != b.path()[i].str()) return false;
  }
  return true;
}

}  // namespace descend
