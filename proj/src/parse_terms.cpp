// Parser for places, expressions, statements and top-level items.

#include <map>

#include "descend/parser.hpp"
#include "parser_impl.hpp"

namespace descend::detail {

namespace {

Term mk(Term::Node node, Span span) {
  Term t;
  t.node = std::move(node);
  t.span = span;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Places

void Parser::place_steps(PlaceExpr& p) {
  for (;;) {
    if (check(Tok::Dot) && check(Tok::Ident, 1)) {
      Token dot = next();
      PlaceStep s;
      if (check_ident("fst") || check_ident("snd")) {
        Token t = next();
        s.kind = t.text == "fst" ? PlaceStep::Kind::Fst : PlaceStep::Kind::Snd;
      } else {
        s.kind = PlaceStep::Kind::View;
        s.view = view_inst();
      }
      s.span = from(dot.span.begin);
      p.steps.push_back(std::move(s));
    } else if (check(Tok::LBracket) && check(Tok::LBracket, 1)) {
      Token open = next();
      next();
      PlaceStep s;
      s.kind = PlaceStep::Kind::Select;
      s.exec = expect(Tok::Ident, "execution resource").text;
      expect(Tok::RBracket);
      expect(Tok::RBracket);
      s.span = from(open.span.begin);
      p.steps.push_back(std::move(s));
    } else if (check(Tok::LBracket)) {
      Token open = next();
      PlaceStep s;
      s.kind = PlaceStep::Kind::Index;
      s.index = nat();
      expect(Tok::RBracket);
      s.span = from(open.span.begin);
      p.steps.push_back(std::move(s));
    } else {
      break;
    }
  }
  p.span = from(p.span.begin);
}

PlaceExpr Parser::place() {
  Token start = peek();
  Term t = unary_expr();
  auto* pt = t.as<PlaceTerm>();
  if (!pt) fail("expected a place expression", t.span);
  (void)start;
  return std::move(pt->place);
}

// ---------------------------------------------------------------------------
// Expressions

Term Parser::expr() { return or_expr(); }

Term Parser::or_expr() {
  Term lhs = and_expr();
  while (accept(Tok::OrOr)) {
    Term rhs = and_expr();
    Span s = Span::join(lhs.span, rhs.span);
    lhs = mk(BinaryTerm{BinOp::Or, std::move(lhs), std::move(rhs)}, s);
  }
  return lhs;
}

Term Parser::and_expr() {
  Term lhs = cmp_expr();
  while (accept(Tok::AndAnd)) {
    Term rhs = cmp_expr();
    Span s = Span::join(lhs.span, rhs.span);
    lhs = mk(BinaryTerm{BinOp::And, std::move(lhs), std::move(rhs)}, s);
  }
  return lhs;
}

Term Parser::cmp_expr() {
  static const std::map<Tok, BinOp> ops = {{Tok::Lt, BinOp::Lt}, {Tok::Le, BinOp::Le}, {Tok::Gt, BinOp::Gt},
                                           {Tok::Ge, BinOp::Ge}, {Tok::EqEq, BinOp::Eq}, {Tok::Ne, BinOp::Ne}};
  Term lhs = add_expr();
  auto it = ops.find(peek().kind);
  if (it != ops.end()) {
    next();
    Term rhs = add_expr();
    Span s = Span::join(lhs.span, rhs.span);
    lhs = mk(BinaryTerm{it->second, std::move(lhs), std::move(rhs)}, s);
  }
  return lhs;
}

Term Parser::add_expr() {
  Term lhs = mul_expr();
  for (;;) {
    BinOp op;
    if (check(Tok::Plus)) op = BinOp::Add;
    else if (check(Tok::Minus)) op = BinOp::Sub;
    else return lhs;
    next();
    Term rhs = mul_expr();
    Span s = Span::join(lhs.span, rhs.span);
    lhs = mk(BinaryTerm{op, std::move(lhs), std::move(rhs)}, s);
  }
}

Term Parser::mul_expr() {
  Term lhs = unary_expr();
  for (;;) {
    BinOp op;
    if (check(Tok::Star)) op = BinOp::Mul;
    else if (check(Tok::Slash)) op = BinOp::Div;
    else if (check(Tok::Percent)) op = BinOp::Rem;
    else return lhs;
    next();
    Term rhs = unary_expr();
    Span s = Span::join(lhs.span, rhs.span);
    lhs = mk(BinaryTerm{op, std::move(lhs), std::move(rhs)}, s);
  }
}

Term Parser::unary_expr() {
  Token start = peek();
  if (accept(Tok::Star)) {
    Term inner = unary_expr();
    auto* pt = inner.as<PlaceTerm>();
    if (!pt) fail("only place expressions can be dereferenced", inner.span, "not a place");
    PlaceStep s;
    s.kind = PlaceStep::Kind::Deref;
    s.span = from(start.span.begin);
    pt->place.steps.push_back(std::move(s));
    pt->place.span = from(start.span.begin);
    inner.span = pt->place.span;
    return inner;
  }
  if (accept(Tok::Amp)) {
    Uniqueness u = Uniqueness::Shrd;
    if (accept_ident("uniq")) u = Uniqueness::Uniq;
    else accept_ident("shrd");
    Term inner = unary_expr();
    auto* pt = inner.as<PlaceTerm>();
    if (!pt) fail("only place expressions can be borrowed", inner.span, "not a place");
    return mk(BorrowTerm{u, std::move(pt->place)}, from(start.span.begin));
  }
  if (accept(Tok::Minus)) {
    Term inner = unary_expr();
    return mk(UnaryTerm{UnOp::Neg, std::move(inner)}, from(start.span.begin));
  }
  if (accept(Tok::Bang)) {
    Term inner = unary_expr();
    return mk(UnaryTerm{UnOp::Not, std::move(inner)}, from(start.span.begin));
  }
  return primary();
}

bool Parser::at_launch() const { return check(Tok::Lt) && check(Tok::Lt, 1) && check(Tok::Lt, 2); }

LaunchConfig Parser::launch_config() {
  Token open = expect(Tok::Lt);
  expect(Tok::Lt);
  expect(Tok::Lt);
  LaunchConfig cfg;
  cfg.blocks = dim();
  expect(Tok::Comma);
  cfg.threads = dim();
  expect(Tok::Gt);
  expect(Tok::Gt);
  expect(Tok::Gt);
  cfg.span = from(open.span.begin);
  return cfg;
}

std::vector<GenericArg> Parser::generic_args() {
  expect(Tok::Lt);
  std::vector<GenericArg> out;
  if (check(Tok::Gt)) {
    next();
    return out;
  }
  do {
    GenericArg g;
    std::uint32_t b = peek().span.begin;
    if (starts_memory()) {
      g.kind = GenericArg::Kind::Mem;
      g.mem = memory();
    } else if (starts_type()) {
      g.kind = GenericArg::Kind::Type;
      g.type = type();
    } else {
      g.kind = GenericArg::Kind::Nat;
      g.nat = nat();
    }
    g.span = from(b);
    out.push_back(std::move(g));
  } while (accept(Tok::Comma));
  expect(Tok::Gt);
  return out;
}

std::vector<Term> Parser::call_args() {
  expect(Tok::LParen);
  std::vector<Term> args;
  while (!check(Tok::RParen)) {
    args.push_back(expr());
    if (!accept(Tok::Comma)) break;
  }
  expect(Tok::RParen);
  return args;
}

Term Parser::call_after_name(const Token& name) {
  CallTerm c;
  c.callee = name.text;
  c.callee_span = name.span;
  if (check(Tok::ColonColon) && check(Tok::Ident, 1)) {
    next();
    Token t = next();
    c.callee += "::" + t.text;
    c.callee_span = Span::join(name.span, t.span);
  }
  if (check(Tok::ColonColon) && check(Tok::Lt, 1) && check(Tok::Lt, 2) && check(Tok::Lt, 3)) {
    next();
    c.launch = launch_config();
  } else if (check(Tok::ColonColon) && check(Tok::Lt, 1)) {
    next();
    c.generics = generic_args();
    if (at_launch()) c.launch = launch_config();
  } else if (at_launch()) {
    c.launch = launch_config();
  }
  c.args = call_args();
  return mk(std::move(c), from(name.span.begin));
}

Term Parser::primary() {
  Token t = peek();
  switch (t.kind) {
    case Tok::Int: {
      next();
      LitTerm l;
      l.kind = LitTerm::Kind::Int;
      l.text = t.text;
      try {
        l.int_value = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        fail("integer literal out of range", t.span);
      }
      return mk(l, t.span);
    }
    case Tok::Float: {
      next();
      LitTerm l;
      l.kind = LitTerm::Kind::Float;
      l.text = t.text;
      l.float_value = std::stod(t.text);
      return mk(l, t.span);
    }
    case Tok::LParen: {
      next();
      if (accept(Tok::RParen)) {
        LitTerm l;
        l.kind = LitTerm::Kind::Unit;
        return mk(l, from(t.span.begin));
      }
      Term first = expr();
      if (accept(Tok::Comma)) {
        TupleTerm tup;
        tup.elems.push_back(std::move(first));
        while (!check(Tok::RParen)) {
          tup.elems.push_back(expr());
          if (!accept(Tok::Comma)) break;
        }
        expect(Tok::RParen);
        return mk(std::move(tup), from(t.span.begin));
      }
      expect(Tok::RParen);
      if (auto* pt = first.as<PlaceTerm>()) {
        pt->place.span.begin = t.span.begin;
        place_steps(pt->place);
        first.span = pt->place.span;
      }
      return first;
    }
    case Tok::LBracket: {
      next();
      Term v = expr();
      expect(Tok::Semi);
      Nat n = nat();
      expect(Tok::RBracket);
      return mk(ArrayRepeatTerm{std::move(v), n}, from(t.span.begin));
    }
    case Tok::Ident: {
      if (t.text == "true" || t.text == "false") {
        next();
        LitTerm l;
        l.kind = LitTerm::Kind::Bool;
        l.bool_value = t.text == "true";
        l.text = t.text;
        return mk(l, t.span);
      }
      next();
      if (check(Tok::LParen) || check(Tok::ColonColon) || at_launch()) return call_after_name(t);
      PlaceExpr p;
      p.root = t.text;
      p.root_span = t.span;
      p.span = t.span;
      place_steps(p);
      Span s = p.span;
      return mk(PlaceTerm{std::move(p)}, s);
    }
    default: break;
  }
  std::string found = t.kind == Tok::Eof ? "end of input" : "`" + t.text + "`";
  fail("expected an expression, found " + found, t.span, "expected expression");
}

// ---------------------------------------------------------------------------
// Statements

bool Parser::block_like(const Term& t) const {
  return t.as<BlockTerm>() || t.as<SchedTerm>() || t.as<SplitTerm>() || t.as<ForEachTerm>() || t.as<ForNatTerm>();
}

Term Parser::block() {
  Token open = expect(Tok::LBrace);
  BlockTerm b;
  while (!check(Tok::RBrace)) {
    if (accept(Tok::Semi)) continue;
    Term t = statement();
    bool bl = block_like(t);
    b.stmts.push_back(std::move(t));
    if (check(Tok::RBrace)) break;
    if (accept(Tok::Semi)) continue;
    if (!bl) expect(Tok::Semi, "`;`");
  }
  expect(Tok::RBrace);
  return mk(std::move(b), from(open.span.begin));
}

Term Parser::sched_stmt() {
  Token kw = next();
  SchedTerm s;
  if (accept(Tok::LParen)) {
    s.axes.push_back(axis());
    while (accept(Tok::Comma)) s.axes.push_back(axis());
    expect(Tok::RParen);
  }
  s.binder = expect(Tok::Ident, "binder").text;
  expect_ident("in");
  s.exec = expect(Tok::Ident, "execution resource").text;
  s.header = from(kw.span.begin);
  s.body = block();
  return mk(std::move(s), from(kw.span.begin));
}

Term Parser::split_stmt() {
  Token kw = next();
  SplitTerm s;
  expect(Tok::LParen);
  s.axis = axis();
  expect(Tok::RParen);
  s.exec = expect(Tok::Ident, "execution resource").text;
  expect_ident("at");
  s.pos = nat();
  s.header = from(kw.span.begin);
  expect(Tok::LBrace);
  s.fst_binder = expect(Tok::Ident, "binder").text;
  expect(Tok::FatArrow);
  s.fst = block();
  accept(Tok::Comma);
  s.snd_binder = expect(Tok::Ident, "binder").text;
  expect(Tok::FatArrow);
  s.snd = block();
  accept(Tok::Comma);
  expect(Tok::RBrace);
  return mk(std::move(s), from(kw.span.begin));
}

Term Parser::for_stmt() {
  Token kw = next();
  std::string var = expect(Tok::Ident, "loop variable").text;
  expect_ident("in");
  bool range = false;
  if (check(Tok::LBracket)) {
    int depth = 0;
    for (std::size_t k = 0; peek(k).kind != Tok::Eof; ++k) {
      Tok tk = peek(k).kind;
      if (tk == Tok::LBracket || tk == Tok::LParen) ++depth;
      if (tk == Tok::RBracket || tk == Tok::RParen) --depth;
      if (depth == 0) break;
      if (depth == 1 && tk == Tok::DotDot) {
        range = true;
        break;
      }
    }
  }
  if (range) {
    next();
    ForNatTerm f;
    f.var = var;
    f.lo = nat();
    expect(Tok::DotDot);
    f.hi = nat();
    expect(Tok::RBracket);
    f.body = block();
    return mk(std::move(f), from(kw.span.begin));
  }
  Term coll = expr();
  Term body = block();
  return mk(ForEachTerm{var, std::move(coll), std::move(body)}, from(kw.span.begin));
}

Term Parser::statement() {
  Token s = peek();
  if (check_ident("let")) {
    next();
    LetTerm l;
    Token name = expect(Tok::Ident, "variable name");
    l.name = name.text;
    l.name_span = name.span;
    if (accept(Tok::Colon)) l.annot = type();
    expect(Tok::Assign);
    l.init = expr();
    return mk(std::move(l), from(s.span.begin));
  }
  if (check_ident("sched")) return sched_stmt();
  if (check_ident("split") && check(Tok::LParen, 1)) return split_stmt();
  if (check_ident("sync") && !check(Tok::LParen, 1)) {
    next();
    return mk(SyncTerm{}, s.span);
  }
  if (check_ident("for")) return for_stmt();
  if (check(Tok::LBrace)) return block();
  Term e = expr();
  if (accept(Tok::Assign)) {
    auto* pt = e.as<PlaceTerm>();
    if (!pt) fail("invalid assignment target", e.span, "not a place expression");
    Term rhs = expr();
    return mk(AssignTerm{std::move(pt->place), std::move(rhs)}, from(s.span.begin));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Items

ViewDef Parser::view_def() {
  Token kw = expect_ident("view");
  ViewDef v;
  v.name = expect(Tok::Ident, "view name").text;
  if (accept(Tok::Lt)) {
    do {
      v.params.push_back(expect(Tok::Ident, "parameter name").text);
      expect(Tok::Colon);
      expect_ident("nat");
    } while (accept(Tok::Comma));
    expect(Tok::Gt);
  }
  expect(Tok::Assign);
  v.body = view_chain();
  accept(Tok::Semi);
  v.span = from(kw.span.begin);
  return v;
}

FunctionDef Parser::function_def() {
  Token kw = expect_ident("fn");
  FunctionDef f;
  Token name = expect(Tok::Ident, "function name");
  f.name = name.text;
  f.name_span = name.span;
  if (accept(Tok::Lt)) {
    do {
      TypeParam tp;
      Token pn = expect(Tok::Ident, "type parameter");
      tp.name = pn.text;
      expect(Tok::Colon);
      Token k = expect(Tok::Ident, "kind");
      if (k.text == "nat") tp.kind = KindSort::Nat;
      else if (k.text == "mem") tp.kind = KindSort::Mem;
      else if (k.text == "dt" || k.text == "dty") tp.kind = KindSort::Dt;
      else fail("unknown kind `" + k.text + "`", k.span, "expected `nat`, `mem` or `dt`");
      tp.span = from(pn.span.begin);
      f.tparams.push_back(tp);
    } while (accept(Tok::Comma));
    expect(Tok::Gt);
  }
  expect(Tok::LParen);
  while (!check(Tok::RParen)) {
    Param p;
    Token pn = expect(Tok::Ident, "parameter name");
    p.name = pn.text;
    expect(Tok::Colon);
    p.type = type();
    p.span = from(pn.span.begin);
    f.params.push_back(std::move(p));
    if (!accept(Tok::Comma)) break;
  }
  expect(Tok::RParen);
  if (!(check(Tok::Minus) && check(Tok::LBracket, 1))) {
    fail("missing execution resource annotation `-[name: level]->`", peek().span, "expected `-[`");
  }
  Token dash = next();
  next();
  f.exec_binder = expect(Tok::Ident, "execution resource name").text;
  expect(Tok::Colon);
  f.exec = exec_level();
  expect(Tok::RBracket);
  expect(Tok::Arrow);
  f.exec_span = from(dash.span.begin);
  f.ret = type();
  f.body = block();
  f.span = from(kw.span.begin);
  return f;
}

Program Parser::program(Diagnostics& diags) {
  Program prog;
  std::map<std::string, Span> seen;
  while (!at_end()) {
    std::size_t start = pos_;
    try {
      if (check_ident("view")) {
        ViewDef v = view_def();
        std::string key = "view " + v.name;
        if (auto it = seen.find(key); it != seen.end()) {
          diags.push_back({ErrorCode::Parse, "duplicate definition of view `" + v.name + "`", {v.span, "redefined here"},
                           {{it->second, "first defined here"}}});
        } else {
          seen[key] = v.span;
          prog.items.emplace_back(std::move(v));
        }
      } else if (check_ident("fn")) {
        FunctionDef f = function_def();
        std::string key = "fn " + f.name;
        if (auto it = seen.find(key); it != seen.end()) {
          diags.push_back({ErrorCode::Parse, "duplicate definition of function `" + f.name + "`",
                           {f.name_span, "redefined here"}, {{it->second, "first defined here"}}});
        } else {
          seen[key] = f.name_span;
          prog.items.emplace_back(std::move(f));
        }
      } else {
        fail("expected `fn` or `view`, found `" + peek().text + "`", peek().span, "expected item");
      }
    } catch (const SyntaxError& e) {
      diags.push_back(e.diag);
      if (pos_ == start) next();
      while (!at_end() && !check_ident("fn") && !check_ident("view")) next();
    }
  }
  return prog;
}

}  // namespace descend::detail

namespace descend {

ParseResult parse(const SourceFile& src) {
  ParseResult r;
  auto toks = lex(src, r.diags);
  detail::Parser p(std::move(toks));
  Program prog = p.program(r.diags);
  if (r.diags.empty()) r.program = std::move(prog);
  return r;
}

namespace {

template <class T, class F>
std::optional<T> parse_fragment(const SourceFile& src, Diagnostics& diags, F&& f) {
  std::size_t before = diags.size();
  auto toks = lex(src, diags);
  if (diags.size() != before) return std::nullopt;
  detail::Parser p(std::move(toks));
  try {
    T value = f(p);
    if (!p.at_end()) p.fail("unexpected trailing input `" + p.peek().text + "`", p.peek().span);
    return value;
  } catch (const detail::SyntaxError& e) {
    diags.push_back(e.diag);
    return std::nullopt;
  }
}

}  // namespace

std::optional<PlaceExpr> parse_place(const SourceFile& src, Diagnostics& diags) {
  return parse_fragment<PlaceExpr>(src, diags, [](detail::Parser& p) { return p.place(); });
}

std::optional<DataType> parse_type(const SourceFile& src, Diagnostics& diags) {
  return parse_fragment<DataType>(src, diags, [](detail::Parser& p) { return p.type(); });
}

std::optional<Nat> parse_nat(const SourceFile& src, Diagnostics& diags) {
  return parse_fragment<Nat>(src, diags, [](detail::Parser& p) { return p.nat(); });
}

}  // namespace descend
