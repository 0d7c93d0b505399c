// Parser infrastructure plus sizes, dimensions, types and view chains.

#include <set>

#include "parser_impl.hpp"

namespace descend::detail {

const Token& Parser::peek(std::size_t k) const {
  std::size_t i = pos_ + k;
  return i < toks_.size() ? toks_[i] : toks_.back();
}

Token Parser::next() {
  Token t = peek();
  if (pos_ < toks_.size() - 1) ++pos_;
  return t;
}

void Parser::fail(const std::string& msg, Span at, const std::string& label) {
  throw SyntaxError({ErrorCode::Parse, msg, {at, label}, {}});
}

bool Parser::check_ident(const char* text, std::size_t ahead) const {
  return peek(ahead).kind == Tok::Ident && peek(ahead).text == text;
}

bool Parser::accept(Tok k) {
  if (!check(k)) return false;
  next();
  return true;
}

bool Parser::accept_ident(const char* text) {
  if (!check_ident(text)) return false;
  next();
  return true;
}

Token Parser::expect(Tok k, const char* what) {
  if (!check(k)) {
    const Token& t = peek();
    std::string found = t.kind == Tok::Eof ? "end of input" : "`" + t.text + "`";
    fail(std::string("expected ") + (what ? what : tok_name(k)) + ", found " + found, t.span, "unexpected token");
  }
  return next();
}

Token Parser::expect_ident(const char* text) {
  if (text == nullptr) return expect(Tok::Ident, "identifier");
  if (!check_ident(text)) {
    const Token& t = peek();
    fail(std::string("expected `") + text + "`, found `" + t.text + "`", t.span, "unexpected token");
  }
  return next();
}

// ---------------------------------------------------------------------------
// Nat

Nat Parser::nat() { return nat_sum(); }

Nat Parser::nat_sum() {
  Nat acc = nat_product();
  for (;;) {
    if (accept(Tok::Plus)) acc = acc + nat_product();
    else if (accept(Tok::Minus)) acc = acc - nat_product();
    else return acc;
  }
}

Nat Parser::nat_product() {
  Nat acc = nat_atom();
  for (;;) {
    if (accept(Tok::Star)) acc = acc * nat_atom();
    else if (accept(Tok::Slash)) acc = acc / nat_atom();
    else if (accept(Tok::Percent)) acc = acc % nat_atom();
    else return acc;
  }
}

Nat Parser::nat_atom() {
  if (check(Tok::Int)) {
    Token t = next();
    try {
      return Nat::lit(std::stoull(t.text));
    } catch (const std::out_of_range&) {
      fail("integer literal out of range", t.span);
    }
  }
  if (check(Tok::Ident)) return Nat::var(next().text);
  if (accept(Tok::LParen)) {
    Nat n = nat();
    expect(Tok::RParen);
    return n;
  }
  const Token& t = peek();
  fail("expected a size expression, found `" + t.text + "`", t.span, "expected nat");
}

// ---------------------------------------------------------------------------
// Dimensions and execution levels

Axis Parser::axis() {
  Token t = expect(Tok::Ident, "axis");
  if (t.text == "X") return Axis::X;
  if (t.text == "Y") return Axis::Y;
  if (t.text == "Z") return Axis::Z;
  fail("expected axis `X`, `Y` or `Z`, found `" + t.text + "`", t.span, "not an axis");
}

Dim Parser::dim() {
  static const std::set<std::string> forms = {"X", "Y", "Z", "XY", "XZ", "YZ", "XYZ"};
  Token t = expect(Tok::Ident, "dimension");
  if (!forms.count(t.text)) fail("unknown dimension form `" + t.text + "`", t.span, "expected one of XYZ, XY, XZ, YZ, X, Y, Z");
  expect(Tok::Lt);
  Dim d;
  for (std::size_t i = 0; i < t.text.size(); ++i) {
    if (i) expect(Tok::Comma);
    Axis a = t.text[i] == 'X' ? Axis::X : t.text[i] == 'Y' ? Axis::Y : Axis::Z;
    d.axes.emplace_back(a, nat());
  }
  expect(Tok::Gt);
  return d;
}

ExecLevel Parser::exec_level() {
  Token dev = expect(Tok::Ident, "execution level");
  expect(Tok::Dot);
  Token lvl = expect(Tok::Ident, "execution level");
  ExecLevel e;
  if (dev.text == "cpu" && (lvl.text == "thread" || lvl.text == "Thread")) {
    e.kind = ExecLevel::Kind::CpuThread;
  } else if (dev.text == "gpu" && (lvl.text == "grid" || lvl.text == "Grid")) {
    e.kind = ExecLevel::Kind::GpuGrid;
    expect(Tok::Lt);
    e.blocks = dim();
    expect(Tok::Comma);
    e.threads = dim();
    expect(Tok::Gt);
  } else if (dev.text == "gpu" && (lvl.text == "block" || lvl.text == "Block")) {
    e.kind = ExecLevel::Kind::GpuBlock;
    expect(Tok::Lt);
    e.threads = dim();
    expect(Tok::Gt);
  } else if (dev.text == "gpu" && (lvl.text == "thread" || lvl.text == "Thread")) {
    e.kind = ExecLevel::Kind::GpuThread;
  } else {
    fail("unknown execution level `" + dev.text + "." + lvl.text + "`", Span::join(dev.span, lvl.span));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Memories and types

bool Parser::starts_memory() const {
  if (!check(Tok::Dot, 1)) return false;
  const std::string& d = peek().text;
  const std::string& m = peek(2).text;
  return (d == "cpu" && m == "mem") || (d == "gpu" && (m == "global" || m == "shared"));
}

Memory Parser::memory() {
  if (starts_memory()) {
    Token d = next();
    next();
    Token m = next();
    if (d.text == "cpu") return Memory::cpu();
    return m.text == "global" ? Memory::global() : Memory::shared();
  }
  return Memory::variable(expect(Tok::Ident, "memory").text);
}

bool Parser::starts_type() const {
  static const std::set<std::string> scalars = {"i32", "f32", "f64", "bool"};
  return check(Tok::LBracket) || check(Tok::LParen) || check(Tok::Amp) ||
         (check(Tok::Ident) && scalars.count(peek().text));
}

DataType Parser::type() {
  DataType base;
  Token start = peek();
  if (accept(Tok::LParen)) {
    if (accept(Tok::RParen)) {
      base = DataType::scalar(ScalarKind::Unit);
    } else {
      std::vector<DataType> elems{type()};
      bool tuple = false;
      while (accept(Tok::Comma)) {
        tuple = true;
        if (check(Tok::RParen)) break;
        elems.push_back(type());
      }
      expect(Tok::RParen);
      base = tuple ? DataType::tuple(std::move(elems)) : elems.front();
    }
  } else if (accept(Tok::LBracket)) {
    DataType inner = type();
    if (accept(Tok::Semi)) {
      Nat n = nat();
      expect(Tok::RBracket);
      base = DataType::array(inner, n);
    } else {
      // `[[d; n]]`: the inner `[d; n]` was read as an array type.
      Token close = expect(Tok::RBracket, "`;` or `]`");
      if (inner.kind() != DataType::Kind::Array) fail("malformed array view type", from(start.span.begin));
      (void)close;
      base = DataType::view(inner.elem(), inner.size());
    }
  } else if (accept(Tok::Amp)) {
    Uniqueness u = Uniqueness::Shrd;
    if (accept_ident("uniq")) u = Uniqueness::Uniq;
    else accept_ident("shrd");
    Memory m = memory();
    base = DataType::ref(u, m, type());
  } else {
    Token t = expect(Tok::Ident, "type");
    if (t.text == "i32") base = DataType::scalar(ScalarKind::I32);
    else if (t.text == "f32") base = DataType::scalar(ScalarKind::F32);
    else if (t.text == "f64") base = DataType::scalar(ScalarKind::F64);
    else if (t.text == "bool") base = DataType::scalar(ScalarKind::Bool);
    else base = DataType::var(t.text);
  }
  while (accept(Tok::At)) base = DataType::boxed(base, memory());
  return base;
}

// ---------------------------------------------------------------------------
// Views

ViewInst Parser::view_inst() {
  Token name = expect(Tok::Ident, "view name");
  ViewInst v;
  v.name = name.text;
  if (name.text == "map") {
    expect(Tok::LParen);
    v.inner = view_chain();
    expect(Tok::RParen);
  } else if (check(Tok::ColonColon) && check(Tok::Lt, 1)) {
    next();
    next();
    if (!check(Tok::Gt)) {
      v.args.push_back(nat());
      while (accept(Tok::Comma)) v.args.push_back(nat());
    }
    expect(Tok::Gt);
  }
  v.span = from(name.span.begin);
  return v;
}

ViewChain Parser::view_chain() {
  ViewChain chain{view_inst()};
  while (accept(Tok::Dot)) chain.push_back(view_inst());
  return chain;
}

}  // namespace descend::detail
