#include "descend/ast.hpp"

namespace descend {

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
  }
  return "?";
}

const Nat* Dim::extent(Axis a) const {
  for (const auto& [ax, n] : axes) {
    if (ax == a) return &n;
  }
  return nullptr;
}

std::string Dim::str() const {
  std::string names;
  std::string args;
  for (const auto& [ax, n] : axes) {
    names += axis_name(ax);
    if (!args.empty()) args += ",";
    args += n.str();
  }
  return names + "<" + args + ">";
}

std::string ExecLevel::str() const {
  switch (kind) {
    case Kind::CpuThread: return "cpu.thread";
    case Kind::GpuGrid: return "gpu.grid<" + blocks.str() + ", " + threads.str() + ">";
    case Kind::GpuBlock: return "gpu.block<" + threads.str() + ">";
    case Kind::GpuThread: return "gpu.thread";
  }
  return "?";
}

std::string Memory::str() const {
  switch (kind) {
    case Kind::CpuMem: return "cpu.mem";
    case Kind::GpuGlobal: return "gpu.global";
    case Kind::GpuShared: return "gpu.shared";
    case Kind::Var: return var;
  }
  return "?";
}

const char* scalar_name(ScalarKind s) {
  switch (s) {
    case ScalarKind::I32: return "i32";
    case ScalarKind::F32: return "f32";
    case ScalarKind::F64: return "f64";
    case ScalarKind::Bool: return "bool";
    case ScalarKind::Unit: return "()";
  }
  return "?";
}

DataType DataType::scalar(ScalarKind s) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Scalar;
  n->scalar = s;
  return DataType(std::move(n));
}

DataType DataType::tuple(std::vector<DataType> elems) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Tuple;
  n->elems = std::move(elems);
  return DataType(std::move(n));
}

DataType DataType::array(DataType elem, Nat size) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Array;
  n->elems.push_back(std::move(elem));
  n->size = std::move(size);
  return DataType(std::move(n));
}

DataType DataType::view(DataType elem, Nat size) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::View;
  n->elems.push_back(std::move(elem));
  n->size = std::move(size);
  return DataType(std::move(n));
}

DataType DataType::ref(Uniqueness u, Memory mem, DataType target) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ref;
  n->uniq = u;
  n->mem = std::move(mem);
  n->elems.push_back(std::move(target));
  return DataType(std::move(n));
}

DataType DataType::boxed(DataType target, Memory mem) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Boxed;
  n->mem = std::move(mem);
  n->elems.push_back(std::move(target));
  return DataType(std::move(n));
}

DataType DataType::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->name = std::move(name);
  return DataType(std::move(n));
}

bool DataType::is_numeric() const {
  return kind() == Kind::Scalar && (scalar_kind() == ScalarKind::I32 || scalar_kind() == ScalarKind::F32 ||
                                    scalar_kind() == ScalarKind::F64);
}

std::string DataType::str() const {
  switch (kind()) {
    case Kind::Scalar: return scalar_name(scalar_kind());
    case Kind::Tuple: {
      std::string s = "(";
      for (std::size_t i = 0; i < elems().size(); ++i) {
        if (i) s += ", ";
        s += elems()[i].str();
      }
      if (elems().size() == 1) s += ",";
      return s + ")";
    }
    case Kind::Array: return "[" + elem().str() + "; " + size().str() + "]";
    case Kind::View: return "[[" + elem().str() + "; " + size().str() + "]]";
    case Kind::Ref:
      return std::string("&") + (uniq() == Uniqueness::Uniq ? "uniq " : "shrd ") + mem().str() + " " + elem().str();
    case Kind::Boxed: return elem().str() + " @ " + mem().str();
    case Kind::Var: return name();
  }
  return "?";
}

std::string ViewInst::str() const {
  std::string s = name;
  if (name == "map") return s + "(" + chain_str(inner) + ")";
  if (!args.empty()) {
    s += "::<";
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) s += ", ";
      s += args[i].str();
    }
    s += ">";
  }
  return s;
}

std::string chain_str(const ViewChain& chain) {
  std::string s;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) s += ".";
    s += chain[i].str();
  }
  return s;
}

const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Rem: return "%";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

const FunctionDef* Program::find_function(const std::string& name) const {
  for (const auto& it : items) {
    if (const auto* f = std::get_if<FunctionDef>(&it); f && f->name == name) return f;
  }
  return nullptr;
}

FunctionDef* Program::find_function(const std::string& name) {
  for (auto& it : items) {
    if (auto* f = std::get_if<FunctionDef>(&it); f && f->name == name) return f;
  }
  return nullptr;
}

const ViewDef* Program::find_view(const std::string& name) const {
  for (const auto& it : items) {
    if (const auto* v = std::get_if<ViewDef>(&it); v && v->name == name) return v;
  }
  return nullptr;
}

std::vector<const FunctionDef*> Program::functions() const {
  std::vector<const FunctionDef*> out;
  for (const auto& it : items) {
    if (const auto* f = std::get_if<FunctionDef>(&it)) out.push_back(f);
  }
  return out;
}

std::vector<FunctionDef*> Program::functions() {
  std::vector<FunctionDef*> out;
  for (auto& it : items) {
    if (auto* f = std::get_if<FunctionDef>(&it)) out.push_back(f);
  }
  return out;
}

}  // namespace descend
