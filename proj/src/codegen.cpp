#include "descend/codegen.hpp"

#include <sstream>

namespace descend {

namespace {

int c_prec(BinOp op) {
  switch (op) {
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Rem: return 5;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 3;
    case BinOp::Eq:
    case BinOp::Ne: return 2;
    case BinOp::And: return 1;
    case BinOp::Or: return 0;
  }
  return 0;
}

bool atomic_index(const LIndex& i) { return i.kind() == LIndex::Kind::Lit || i.kind() == LIndex::Kind::Sym; }

void print_expr(std::string& out, const LExpr& e, int ctx, bool right) {
  switch (e.kind) {
    case LExpr::Kind::Int: out += e.ival < 0 ? "(" + std::to_string(e.ival) + ")" : std::to_string(e.ival); return;
    case LExpr::Kind::Float: out += e.text; return;
    case LExpr::Kind::Bool: out += e.bval ? "true" : "false"; return;
    case LExpr::Kind::Load:
      out += e.var;
      if (e.idx) out += "[" + e.idx->str() + "]";
      return;
    case LExpr::Kind::Index:
      out += atomic_index(e.index) ? e.index.str() : "(" + e.index.str() + ")";
      return;
    case LExpr::Kind::Var: out += e.var; return;
    case LExpr::Kind::Ptr:
      out += e.var;
      if (!e.index.is_lit(0)) out += " + " + (atomic_index(e.index) ? e.index.str() : "(" + e.index.str() + ")");
      return;
    case LExpr::Kind::Unary:
      out += e.uop == UnOp::Neg ? "-" : "!";
      print_expr(out, e.args[0], 6, false);
      return;
    case LExpr::Kind::Binary: {
      int p = c_prec(e.op);
      bool parens = p < ctx || (p == ctx && right);
      if (parens) out += "(";
      print_expr(out, e.args[0], p, false);
      out += " ";
      out += binop_text(e.op);
      out += " ";
      print_expr(out, e.args[1], p, true);
      if (parens) out += ")";
      return;
    }
  }
}

std::string dim3_str(const std::array<std::int64_t, 3>& d) {
  return "dim3(" + std::to_string(d[0]) + ", " + std::to_string(d[1]) + ", " + std::to_string(d[2]) + ")";
}

class Emitter {
 public:
  std::string run(const LProgram& p) {
    line("#include <cstddef>");
    line("#include <cuda_runtime.h>");
    line("");
    prelude();
    for (const auto& f : p.functions) {
      if (f.kernel) function(f);
    }
    for (const auto& f : p.functions) {
      if (!f.kernel) function(f);
    }
    return out_.str();
  }

 private:
  void line(const std::string& s) {
    if (!s.empty()) out_ << std::string(static_cast<std::size_t>(indent_) * 2, ' ') << s;
    out_ << "\n";
  }

  void prelude() {
    static const char* text =
        "template <typename T>\n"
        "static T* descend_cpu_new(std::size_t n, T value) {\n"
        "  T* p = new T[n];\n"
        "  for (std::size_t i = 0; i < n; ++i) p[i] = value;\n"
        "  return p;\n"
        "}\n"
        "\n"
        "template <typename T>\n"
        "static T* descend_alloc_copy(const T* src, std::size_t n) {\n"
        "  T* p = nullptr;\n"
        "  cudaMalloc(&p, n * sizeof(T));\n"
        "  cudaMemcpy(p, src, n * sizeof(T), cudaMemcpyHostToDevice);\n"
        "  return p;\n"
        "}\n"
        "\n"
        "template <typename T>\n"
        "static void descend_copy_to_host(const T* src, T* dst, std::size_t n) {\n"
        "  cudaMemcpy(dst, src, n * sizeof(T), cudaMemcpyDeviceToHost);\n"
        "}\n"
        "\n"
        "template <typename T>\n"
        "static void descend_copy_to_gpu(T* dst, const T* src, std::size_t n) {\n"
        "  cudaMemcpy(dst, src, n * sizeof(T), cudaMemcpyHostToDevice);\n"
        "}\n";
    out_ << text;
  }

  void function(const LFunction& f) {
    std::string sig = f.kernel ? "__global__ void " : "void ";
    sig += f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      const LParam& p = f.params[i];
      if (i) sig += ", ";
      if (p.is_const) sig += "const ";
      sig += c_type(p.elem);
      sig += p.pointer ? "* " : " ";
      sig += p.name;
    }
    sig += ") {";
    line("");
    line(sig);
    ++indent_;
    stmts(f.body);
    --indent_;
    line("}");
  }

  void stmts(const std::vector<LStmt>& ss) {
    for (const auto& s : ss) stmt(s);
  }

  void stmt(const LStmt& s) {
    switch (s.kind) {
      case LStmt::Kind::Block:
        line("{");
        ++indent_;
        stmts(s.body);
        --indent_;
        line("}");
        return;
      case LStmt::Kind::DeclLocal:
        if (s.decl.count == 0) {
          line(std::string(c_type(s.decl.elem)) + " " + s.decl.name + " = " + expr_str(s.value) + ";");
        } else {
          line(std::string(c_type(s.decl.elem)) + " " + s.decl.name + "[" + std::to_string(s.decl.count) + "];");
        }
        return;
      case LStmt::Kind::DeclShared:
        line(std::string("__shared__ ") + c_type(s.decl.elem) + " " + s.decl.name + "[" +
             std::to_string(s.decl.count) + "];");
        return;
      case LStmt::Kind::DeclPtr:
        line(std::string(c_type(s.decl.elem)) + "* " + s.decl.name + " = " + expr_str(s.value) + ";");
        return;
      case LStmt::Kind::Assign:
        line(s.var + (s.idx ? "[" + s.idx->str() + "]" : "") + " = " + expr_str(s.value) + ";");
        return;
      case LStmt::Kind::If:
        line("if (" + s.cond_sym + " < " + s.bound.str() + ") {");
        ++indent_;
        stmts(s.body);
        --indent_;
        if (!s.els.empty()) {
          line("} else {");
          ++indent_;
          stmts(s.els);
          --indent_;
        }
        line("}");
        return;
      case LStmt::Kind::For:
        line("for (int " + s.var + " = " + s.lo.str() + "; " + s.var + " < " + s.hi.str() + "; ++" + s.var + ") {");
        ++indent_;
        stmts(s.body);
        --indent_;
        line("}");
        return;
      case LStmt::Kind::Sync: line("__syncthreads();"); return;
      case LStmt::Kind::Launch: {
        std::string a;
        for (std::size_t i = 0; i < s.args.size(); ++i) a += (i ? ", " : "") + expr_str(s.args[i]);
        line(s.var + "<<<" + dim3_str(s.blocks) + ", " + dim3_str(s.threads) + ">>>(" + a + ");");
        return;
      }
      case LStmt::Kind::CpuNew:
        line(std::string(c_type(s.decl.elem)) + "* " + s.decl.name + " = descend_cpu_new<" + c_type(s.decl.elem) +
             ">(" + std::to_string(s.decl.count) + ", " + expr_str(s.value) + ");");
        return;
      case LStmt::Kind::AllocCopy:
        line(std::string(c_type(s.decl.elem)) + "* " + s.decl.name + " = descend_alloc_copy(" + expr_str(s.args[0]) +
             ", " + std::to_string(s.decl.count) + ");");
        return;
      case LStmt::Kind::CopyToHost:
        line("descend_copy_to_host(" + expr_str(s.args[0]) + ", " + expr_str(s.args[1]) + ", " +
             std::to_string(s.count) + ");");
        return;
      case LStmt::Kind::CopyToGpu:
        line("descend_copy_to_gpu(" + expr_str(s.args[0]) + ", " + expr_str(s.args[1]) + ", " +
             std::to_string(s.count) + ");");
        return;
      case LStmt::Kind::Free:
        line(s.gpu ? "cudaFree(" + s.var + ");" : "delete[] " + s.var + ";");
        return;
    }
  }

  std::ostringstream out_;
  int indent_ = 0;
};

}  // namespace

std::string expr_str(const LExpr& e) {
  std::string s;
  print_expr(s, e, -1, false);
  return s;
}

std::string emit_cuda(const LProgram& p) { return Emitter().run(p); }

std::string compile_to_cuda(const Program& checked, const MonoOptions& opts) {
  Program m = monomorphize(checked, opts);
  return emit_cuda(lower_program(m));
}

}  // namespace descend
