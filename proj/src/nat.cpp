#include "descend/nat.hpp"

#include <algorithm>
#include <sstream>
#include <utility>
#include <vector>

namespace descend {

const char* to_string(Tri t) {
  switch (t) {
    case Tri::True: return "True";
    case Tri::False: return "False";
    case Tri::Unknown: return "Unknown";
  }
  return "?";
}

struct Nat::Node {
  Kind kind;
  std::uint64_t value = 0;
  std::string name;
  std::optional<Nat> lhs;
  std::optional<Nat> rhs;
};

Nat Nat::lit(std::uint64_t value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Lit;
  n->value = value;
  return Nat(std::move(n));
}

Nat Nat::var(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Var;
  n->name = std::move(name);
  return Nat(std::move(n));
}

Nat Nat::binary(Kind kind, const Nat& lhs, const Nat& rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = lhs;
  n->rhs = rhs;
  return Nat(std::move(n));
}

Nat operator+(const Nat& a, const Nat& b) { return Nat::binary(Nat::Kind::Add, a, b); }
Nat operator-(const Nat& a, const Nat& b) { return Nat::binary(Nat::Kind::Sub, a, b); }
Nat operator*(const Nat& a, const Nat& b) { return Nat::binary(Nat::Kind::Mul, a, b); }
Nat operator/(const Nat& a, const Nat& b) { return Nat::binary(Nat::Kind::Div, a, b); }
Nat operator%(const Nat& a, const Nat& b) { return Nat::binary(Nat::Kind::Mod, a, b); }

Nat::Kind Nat::kind() const { return node_->kind; }
std::uint64_t Nat::value() const { return node_->value; }
const std::string& Nat::name() const { return node_->name; }
const Nat& Nat::lhs() const { return *node_->lhs; }
const Nat& Nat::rhs() const { return *node_->rhs; }

bool operator==(const Nat& a, const Nat& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Nat::Kind::Lit: return a.value() == b.value();
    case Nat::Kind::Var: return a.name() == b.name();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

namespace {

int precedence(Nat::Kind k) {
  switch (k) {
    case Nat::Kind::Add:
    case Nat::Kind::Sub: return 1;
    case Nat::Kind::Mul:
    case Nat::Kind::Div:
    case Nat::Kind::Mod: return 2;
    default: return 3;
  }
}

const char* op_text(Nat::Kind k) {
  switch (k) {
    case Nat::Kind::Add: return "+";
    case Nat::Kind::Sub: return "-";
    case Nat::Kind::Mul: return "*";
    case Nat::Kind::Div: return "/";
    case Nat::Kind::Mod: return "%";
    default: return "";
  }
}

void print(std::ostream& os, const Nat& n) {
  switch (n.kind()) {
    case Nat::Kind::Lit: os << n.value(); return;
    case Nat::Kind::Var: os << n.name(); return;
    default: break;
  }
  int p = precedence(n.kind());
  bool lparen = precedence(n.lhs().kind()) < p;
  bool rparen = precedence(n.rhs().kind()) < p ||
                (precedence(n.rhs().kind()) == p && n.kind() != Nat::Kind::Add &&
                 n.kind() != Nat::Kind::Mul);
  if (lparen) os << '(';
  print(os, n.lhs());
  if (lparen) os << ')';
  os << op_text(n.kind());
  if (rparen) os << '(';
  print(os, n.rhs());
  if (rparen) os << ')';
}

// ---------------------------------------------------------------------------
// Polynomial normal form.

using Monomial = std::vector<std::string>;  // sorted atom keys, with repeats

struct Poly {
  std::map<Monomial, std::int64_t> terms;
  std::map<std::string, Nat> atoms;

  static Poly constant(std::int64_t c) {
    Poly p;
    if (c != 0) p.terms[{}] = c;
    return p;
  }
  bool is_constant() const {
    return terms.empty() || (terms.size() == 1 && terms.begin()->first.empty());
  }
  std::int64_t constant_value() const {
    auto it = terms.find({});
    return it == terms.end() ? 0 : it->second;
  }
  void add_term(const Monomial& m, std::int64_t c) {
    if (c == 0) return;
    auto& slot = terms[m];
    slot += c;
    if (slot == 0) terms.erase(m);
  }
  void merge_atoms(const Poly& o) { atoms.insert(o.atoms.begin(), o.atoms.end()); }
};

Poly add(const Poly& a, const Poly& b, std::int64_t sign) {
  Poly r = a;
  r.merge_atoms(b);
  for (const auto& [m, c] : b.terms) r.add_term(m, sign * c);
  return r;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly r;
  r.merge_atoms(a);
  r.merge_atoms(b);
  for (const auto& [ma, ca] : a.terms) {
    for (const auto& [mb, cb] : b.terms) {
      Monomial m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      std::sort(m.begin(), m.end());
      r.add_term(m, ca * cb);
    }
  }
  return r;
}

bool contains_monomial(const Monomial& outer, const Monomial& inner, Monomial* rest) {
  // Multiset inclusion; both sorted.
  Monomial remaining;
  std::size_t j = 0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    if (j < inner.size() && outer[i] == inner[j]) {
      ++j;
    } else {
      remaining.push_back(outer[i]);
    }
  }
  if (j != inner.size()) return false;
  if (rest) *rest = std::move(remaining);
  return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

Nat to_nat(const Poly& p);
Poly to_poly(const Nat& n);

// Exact quotient when every monomial of `num` is divisible by the single
// monomial `den`.
std::optional<Poly> exact_quotient(const Poly& num, const Poly& den) {
  if (den.terms.size() != 1) return std::nullopt;
  const auto& [dm, dc] = *den.terms.begin();
  Poly r;
  r.merge_atoms(num);
  for (const auto& [m, c] : num.terms) {
    Monomial rest;
    if (!contains_monomial(m, dm, &rest)) return std::nullopt;
    if (c % dc != 0) return std::nullopt;
    r.add_term(rest, c / dc);
  }
  return r;
}

Poly atom_poly(const std::string& key, const Nat& atom) {
  Poly p;
  p.terms[{key}] = 1;
  p.atoms.emplace(key, atom);
  return p;
}

Poly to_poly(const Nat& n) {
  switch (n.kind()) {
    case Nat::Kind::Lit: return Poly::constant(static_cast<std::int64_t>(n.value()));
    case Nat::Kind::Var: {
      Poly p;
      p.terms[{n.name()}] = 1;
      return p;
    }
    case Nat::Kind::Add: return add(to_poly(n.lhs()), to_poly(n.rhs()), 1);
    case Nat::Kind::Sub: return add(to_poly(n.lhs()), to_poly(n.rhs()), -1);
    case Nat::Kind::Mul: return mul(to_poly(n.lhs()), to_poly(n.rhs()));
    case Nat::Kind::Div: {
      Poly a = to_poly(n.lhs());
      Poly b = to_poly(n.rhs());
      if (b.is_constant() && b.constant_value() != 0 && a.is_constant()) {
        return Poly::constant(floor_div(a.constant_value(), b.constant_value()));
      }
      if (!b.terms.empty()) {
        if (auto q = exact_quotient(a, b)) return *q;
      }
      Nat atom = Nat::binary(Nat::Kind::Div, to_nat(a), to_nat(b));
      return atom_poly("(" + atom.str() + ")", atom);
    }
    case Nat::Kind::Mod: {
      Poly a = to_poly(n.lhs());
      Poly b = to_poly(n.rhs());
      if (b.is_constant() && b.constant_value() != 0 && a.is_constant()) {
        return Poly::constant(floor_mod(a.constant_value(), b.constant_value()));
      }
      if (!b.terms.empty() && exact_quotient(a, b)) return Poly::constant(0);
      Nat atom = Nat::binary(Nat::Kind::Mod, to_nat(a), to_nat(b));
      return atom_poly("(" + atom.str() + ")", atom);
    }
  }
  return {};
}

Nat monomial_nat(const Poly& p, const Monomial& m, std::uint64_t coeff) {
  std::optional<Nat> acc;
  if (coeff != 1 || m.empty()) acc = Nat::lit(coeff);
  for (const auto& key : m) {
    auto it = p.atoms.find(key);
    Nat factor = it != p.atoms.end() ? it->second : Nat::var(key);
    acc = acc ? Nat::binary(Nat::Kind::Mul, *acc, factor) : factor;
  }
  return *acc;
}

Nat to_nat(const Poly& p) {
  // Variable monomials in lexicographic order, constant last.
  std::vector<std::pair<Monomial, std::int64_t>> ordered;
  for (const auto& [m, c] : p.terms)
    if (!m.empty()) ordered.emplace_back(m, c);
  if (auto it = p.terms.find({}); it != p.terms.end()) ordered.emplace_back(it->first, it->second);

  std::optional<Nat> acc;
  for (const auto& [m, c] : ordered) {
    if (c > 0) {
      Nat t = monomial_nat(p, m, static_cast<std::uint64_t>(c));
      acc = acc ? Nat::binary(Nat::Kind::Add, *acc, t) : t;
    }
  }
  for (const auto& [m, c] : ordered) {
    if (c < 0) {
      Nat t = monomial_nat(p, m, static_cast<std::uint64_t>(-c));
      acc = Nat::binary(Nat::Kind::Sub, acc ? *acc : Nat::lit(0), t);
    }
  }
  return acc ? *acc : Nat::lit(0);
}

bool poly_equal(const Poly& a, const Poly& b) { return a.terms == b.terms; }

}  // namespace

std::string Nat::str() const {
  std::ostringstream os;
  print(os, *this);
  return os.str();
}

std::optional<std::int64_t> Nat::ground_value() const {
  Poly p = to_poly(*this);
  if (!p.is_constant()) return std::nullopt;
  return p.constant_value();
}

Nat normalize(const Nat& n) { return to_nat(to_poly(n)); }

Tri nat_eq(const Nat& a, const Nat& b) {
  Poly pa = to_poly(a);
  Poly pb = to_poly(b);
  if (poly_equal(pa, pb)) return Tri::True;
  if (pa.is_constant() && pb.is_constant()) return Tri::False;
  return Tri::Unknown;
}

Tri divides(const Nat& k, const Nat& n) {
  Poly pk = to_poly(k);
  if (pk.terms.empty()) throw NatError("malformed view parameter: divisor is zero");
  Poly pn = to_poly(n);
  if (pk.is_constant() && pn.is_constant())
    return floor_mod(pn.constant_value(), pk.constant_value()) == 0 ? Tri::True : Tri::False;
  if (exact_quotient(pn, pk)) return Tri::True;
  return Tri::Unknown;
}

Tri nat_le(const Nat& a, const Nat& b) {
  Poly d = add(to_poly(b), to_poly(a), -1);
  if (d.is_constant()) return d.constant_value() >= 0 ? Tri::True : Tri::False;
  bool all_nonneg = std::all_of(d.terms.begin(), d.terms.end(),
                                [](const auto& t) { return t.second >= 0; });
  return all_nonneg ? Tri::True : Tri::Unknown;
}

namespace {
Nat subst_tree(const Nat& n, const NatBindings& bindings) {
  switch (n.kind()) {
    case Nat::Kind::Lit: return n;
    case Nat::Kind::Var: {
      auto it = bindings.find(n.name());
      return it == bindings.end() ? n : it->second;
    }
    default:
      return Nat::binary(n.kind(), subst_tree(n.lhs(), bindings), subst_tree(n.rhs(), bindings));
  }
}

void collect_vars(const Nat& n, std::set<std::string>& out) {
  switch (n.kind()) {
    case Nat::Kind::Lit: return;
    case Nat::Kind::Var: out.insert(n.name()); return;
    default:
      collect_vars(n.lhs(), out);
      collect_vars(n.rhs(), out);
  }
}
}  // namespace

Nat subst(const Nat& n, const NatBindings& bindings) { return normalize(subst_tree(n, bindings)); }

std::set<std::string> free_vars(const Nat& n) {
  std::set<std::string> out;
  collect_vars(n, out);
  return out;
}

std::optional<std::int64_t> evaluate(const Nat& n, const NatValues& values) {
  switch (n.kind()) {
    case Nat::Kind::Lit: return static_cast<std::int64_t>(n.value());
    case Nat::Kind::Var: {
      auto it = values.find(n.name());
      if (it == values.end()) return std::nullopt;
      return it->second;
    }
    default: break;
  }
  auto l = evaluate(n.lhs(), values);
  auto r = evaluate(n.rhs(), values);
  if (!l || !r) return std::nullopt;
  switch (n.kind()) {
    case Nat::Kind::Add: return *l + *r;
    case Nat::Kind::Sub: return *l - *r;
    case Nat::Kind::Mul: return *l * *r;
    case Nat::Kind::Div:
      if (*r == 0) return std::nullopt;
      return floor_div(*l, *r);
    case Nat::Kind::Mod:
      if (*r == 0) return std::nullopt;
      return floor_mod(*l, *r);
    default: return std::nullopt;
  }
}

}  // namespace descend
