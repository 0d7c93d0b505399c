#pragma once

// Symbolic natural-number size expressions.
//
// A Nat is an immutable expression tree over literals, variables, `+`, `-`,
// `*`, `/` and `mod`. `normalize` rewrites a Nat into a canonical
// sum-of-monomials form so that size comparisons reduce to structural
// equality. All decision procedures are conservative and three-valued.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace descend {

enum class Tri { False, True, Unknown };

inline Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}

const char* to_string(Tri t);

class NatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Nat {
 public:
  enum class Kind { Lit, Var, Add, Sub, Mul, Div, Mod };

  Nat() : Nat(lit(0)) {}
  static Nat lit(std::uint64_t value);
  static Nat var(std::string name);
  static Nat binary(Kind kind, const Nat& lhs, const Nat& rhs);

  friend Nat operator+(const Nat& a, const Nat& b);
  friend Nat operator-(const Nat& a, const Nat& b);
  friend Nat operator*(const Nat& a, const Nat& b);
  friend Nat operator/(const Nat& a, const Nat& b);
  friend Nat operator%(const Nat& a, const Nat& b);

  Kind kind() const;
  std::uint64_t value() const;      // Lit only
  const std::string& name() const;  // Var only
  const Nat& lhs() const;           // binary only
  const Nat& rhs() const;           // binary only

  bool is_lit() const { return kind() == Kind::Lit; }
  bool is_var() const { return kind() == Kind::Var; }

  // Value after normalization when the expression is variable free.
  std::optional<std::int64_t> ground_value() const;

  // Structural equality of the trees (not semantic equality).
  friend bool operator==(const Nat& a, const Nat& b);
  friend bool operator!=(const Nat& a, const Nat& b) { return !(a == b); }

  std::string str() const;

 private:
  struct Node;
  explicit Nat(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

using NatBindings = std::map<std::string, Nat>;
using NatValues = std::map<std::string, std::int64_t>;

Nat normalize(const Nat& n);

// True iff normal forms are identical; False iff both ground and different.
Tri nat_eq(const Nat& a, const Nat& b);

// Throws NatError when `k` is the literal zero.
Tri divides(const Nat& k, const Nat& n);

Tri nat_le(const Nat& a, const Nat& b);

Nat subst(const Nat& n, const NatBindings& bindings);

std::set<std::string> free_vars(const Nat& n);

// Evaluates with floor division; nullopt on a missing variable or division by
// zero.
std::optional<std::int64_t> evaluate(const Nat& n, const NatValues& values);

}  // namespace descend
