#pragma once

#include <stdexcept>
#include <vector>

#include "descend/ast.hpp"
#include "descend/diagnostics.hpp"
#include "descend/lexer.hpp"

namespace descend::detail {

struct SyntaxError : std::runtime_error {
  Diagnostic diag;
  explicit SyntaxError(Diagnostic d) : std::runtime_error(d.message), diag(std::move(d)) {}
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  // Items and statements
  Program program(Diagnostics& diags);
  ViewDef view_def();
  FunctionDef function_def();
  Term block();
  Term statement();

  // Expressions and places
  Term expr();
  PlaceExpr place();

  // Types and sizes
  DataType type();
  Memory memory();
  Nat nat();
  Dim dim();
  ExecLevel exec_level();
  ViewChain view_chain();
  ViewInst view_inst();
  Axis axis();

  bool at_end() const { return peek().kind == Tok::Eof; }
  const Token& peek(std::size_t k = 0) const;

  [[noreturn]] void fail(const std::string& msg, Span at, const std::string& label = "");

 private:
  Token next();
  bool check(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
  bool check_ident(const char* text, std::size_t ahead = 0) const;
  bool accept(Tok k);
  bool accept_ident(const char* text);
  Token expect(Tok k, const char* what = nullptr);
  Token expect_ident(const char* text = nullptr);
  std::uint32_t prev_end() const { return pos_ == 0 ? 0 : toks_[pos_ - 1].span.end; }
  Span from(std::uint32_t begin) const { return {begin, prev_end()}; }

  Nat nat_sum();
  Nat nat_product();
  Nat nat_atom();
  bool starts_memory() const;
  bool starts_type() const;
  bool at_launch() const;

  Term or_expr();
  Term and_expr();
  Term cmp_expr();
  Term add_expr();
  Term mul_expr();
  Term unary_expr();
  Term primary();
  Term call_after_name(const Token& name);
  std::vector<Term> call_args();
  std::vector<GenericArg> generic_args();
  LaunchConfig launch_config();
  void place_steps(PlaceExpr& p);
  Term sched_stmt();
  Term split_stmt();
  Term for_stmt();
  bool block_like(const Term& t) const;

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace descend::detail
