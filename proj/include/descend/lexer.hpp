#pragma once

#include <string>
#include <vector>

#include "descend/diagnostics.hpp"
#include "descend/source.hpp"

namespace descend {

enum class Tok {
  Ident,
  Int,
  Float,
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Lt,
  Gt,
  Le,
  Ge,
  EqEq,
  Ne,
  Assign,
  FatArrow,
  Arrow,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Amp,
  AndAnd,
  OrOr,
  Bang,
  At,
  Colon,
  ColonColon,
  Semi,
  Comma,
  Dot,
  DotDot,
  Eof,
};

const char* tok_name(Tok t);

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

/// Splits `src` into tokens, skipping whitespace and `//` comments. Lexical
/// errors are appended to `diags`; the offending character is skipped.
std::vector<Token> lex(const SourceFile& src, Diagnostics& diags);

}  // namespace descend
