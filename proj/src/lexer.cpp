#include "descend/lexer.hpp"

#include <cctype>

namespace descend {

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer literal";
    case Tok::Float: return "float literal";
    case Tok::LParen: return "`(`";
    case Tok::RParen: return "`)`";
    case Tok::LBrace: return "`{`";
    case Tok::RBrace: return "`}`";
    case Tok::LBracket: return "`[`";
    case Tok::RBracket: return "`]`";
    case Tok::Lt: return "`<`";
    case Tok::Gt: return "`>`";
    case Tok::Le: return "`<=`";
    case Tok::Ge: return "`>=`";
    case Tok::EqEq: return "`==`";
    case Tok::Ne: return "`!=`";
    case Tok::Assign: return "`=`";
    case Tok::FatArrow: return "`=>`";
    case Tok::Arrow: return "`->`";
    case Tok::Plus: return "`+`";
    case Tok::Minus: return "`-`";
    case Tok::Star: return "`*`";
    case Tok::Slash: return "`/`";
    case Tok::Percent: return "`%`";
    case Tok::Amp: return "`&`";
    case Tok::AndAnd: return "`&&`";
    case Tok::OrOr: return "`||`";
    case Tok::Bang: return "`!`";
    case Tok::At: return "`@`";
    case Tok::Colon: return "`:`";
    case Tok::ColonColon: return "`::`";
    case Tok::Semi: return "`;`";
    case Tok::Comma: return "`,`";
    case Tok::Dot: return "`.`";
    case Tok::DotDot: return "`..`";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

std::vector<Token> lex(const SourceFile& src, Diagnostics& diags) {
  const std::string& s = src.text();
  std::vector<Token> out;
  std::uint32_t i = 0;
  const auto n = static_cast<std::uint32_t>(s.size());
  auto peek = [&](std::uint32_t k) -> char { return i + k < n ? s[i + k] : '\0'; };
  auto push = [&](Tok kind, std::uint32_t len) {
    out.push_back({kind, s.substr(i, len), {i, i + len}});
    i += len;
  };

  while (i < n) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < n && s[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::uint32_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      push(Tok::Ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint32_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      bool is_float = false;
      if (j + 1 < n && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        is_float = true;
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      push(is_float ? Tok::Float : Tok::Int, j - i);
      continue;
    }
    switch (c) {
      case '(': push(Tok::LParen, 1); continue;
      case ')': push(Tok::RParen, 1); continue;
      case '{': push(Tok::LBrace, 1); continue;
      case '}': push(Tok::RBrace, 1); continue;
      case '[': push(Tok::LBracket, 1); continue;
      case ']': push(Tok::RBracket, 1); continue;
      case '<': peek(1) == '=' ? push(Tok::Le, 2) : push(Tok::Lt, 1); continue;
      case '>': peek(1) == '=' ? push(Tok::Ge, 2) : push(Tok::Gt, 1); continue;
      case '=':
        if (peek(1) == '=') push(Tok::EqEq, 2);
        else if (peek(1) == '>') push(Tok::FatArrow, 2);
        else push(Tok::Assign, 1);
        continue;
      case '!': peek(1) == '=' ? push(Tok::Ne, 2) : push(Tok::Bang, 1); continue;
      case '-': peek(1) == '>' ? push(Tok::Arrow, 2) : push(Tok::Minus, 1); continue;
      case '+': push(Tok::Plus, 1); continue;
      case '*': push(Tok::Star, 1); continue;
      case '/': push(Tok::Slash, 1); continue;
      case '%': push(Tok::Percent, 1); continue;
      case '&': peek(1) == '&' ? push(Tok::AndAnd, 2) : push(Tok::Amp, 1); continue;
      case '|':
        if (peek(1) == '|') {
          push(Tok::OrOr, 2);
          continue;
        }
        break;
      case '@': push(Tok::At, 1); continue;
      case ':': peek(1) == ':' ? push(Tok::ColonColon, 2) : push(Tok::Colon, 1); continue;
      case ';': push(Tok::Semi, 1); continue;
      case ',': push(Tok::Comma, 1); continue;
      case '.': peek(1) == '.' ? push(Tok::DotDot, 2) : push(Tok::Dot, 1); continue;
      default: break;
    }
    // Consume a whole UTF-8 sequence so the span covers one character.
    std::uint32_t len = 1;
    auto uc = static_cast<unsigned char>(c);
    if (uc >= 0xF0) len = 4;
    else if (uc >= 0xE0) len = 3;
    else if (uc >= 0xC0) len = 2;
    if (i + len > n) len = n - i;
    diags.push_back({ErrorCode::Parse, "unexpected character `" + s.substr(i, len) + "`", {{i, i + len}, "not valid here"}, {}});
    i += len;
  }
  out.push_back({Tok::Eof, "", {n, n}});
  return out;
}

}  // namespace descend
