#include "descend/views.hpp"

#include <cctype>
#include <set>

namespace descend {

bool is_basic_view(const std::string& name) {
  return name == "split" || name == "group" || name == "transpose" || name == "reverse" || name == "rev" ||
         name == "map";
}

namespace {

std::size_t basic_arity(const std::string& name) { return name == "split" || name == "group" ? 1 : 0; }

ViewChain expand_rec(const ViewInst& v, const Program& prog, std::vector<std::string>& stack) {
  if (v.name == "map") {
    ViewInst m = v;
    m.inner.clear();
    for (const auto& in : v.inner) {
      auto e = expand_rec(in, prog, stack);
      m.inner.insert(m.inner.end(), e.begin(), e.end());
    }
    return {m};
  }
  if (is_basic_view(v.name)) {
    if (v.args.size() != basic_arity(v.name)) {
      throw ViewError(ErrorCode::Type, "view `" + v.name + "` takes " + std::to_string(basic_arity(v.name)) +
                                           " nat argument(s) but " + std::to_string(v.args.size()) + " were supplied");
    }
    ViewInst b = v;
    if (b.name == "rev") b.name = "reverse";
    for (auto& a : b.args) a = normalize(a);
    return {b};
  }
  const ViewDef* def = prog.find_view(v.name);
  if (!def) throw ViewError(ErrorCode::Type, "unknown view `" + v.name + "`");
  if (def->params.size() != v.args.size()) {
    throw ViewError(ErrorCode::Type, "view `" + v.name + "` takes " + std::to_string(def->params.size()) +
                                         " nat argument(s) but " + std::to_string(v.args.size()) + " were supplied");
  }
  for (const auto& s : stack) {
    if (s == v.name) throw ViewError(ErrorCode::Type, "view `" + v.name + "` is defined in terms of itself");
  }
  NatBindings b;
  for (std::size_t i = 0; i < def->params.size(); ++i) b[def->params[i]] = v.args[i];
  stack.push_back(v.name);
  ViewChain out;
  for (ViewInst in : def->body) {
    // Substitute the alias parameters into the body before expanding.
    std::vector<ViewInst*> work{&in};
    while (!work.empty()) {
      ViewInst* cur = work.back();
      work.pop_back();
      for (auto& a : cur->args) a = subst(a, b);
      for (auto& c : cur->inner) work.push_back(&c);
    }
    in.span = v.span;
    auto e = expand_rec(in, prog, stack);
    out.insert(out.end(), e.begin(), e.end());
  }
  stack.pop_back();
  return out;
}

DataType require_arrayish(const DataType& t, const ViewInst& v) {
  if (!t.is_arrayish()) {
    throw ViewError(ErrorCode::Type, "view `" + v.str() + "` expects an array, found `" + t.str() + "`");
  }
  return t;
}

}  // namespace

ViewChain expand_user_view(const ViewInst& v, const Program& prog) {
  std::vector<std::string> stack;
  return expand_rec(v, prog, stack);
}

ViewChain expand_chain(const ViewChain& chain, const Program& prog) {
  ViewChain out;
  for (const auto& v : chain) {
    auto e = expand_user_view(v, prog);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

DataType view_output_type(const ViewInst& v, const DataType& input) {
  require_arrayish(input, v);
  const DataType& d = input.elem();
  const Nat& n = input.size();
  if (v.name == "split") {
    const Nat& k = v.args.at(0);
    Tri ok = nat_le(k, n);
    if (ok == Tri::False) {
      throw ViewError(ErrorCode::Size, "split position `" + k.str() + "` exceeds the array size `" + n.str() + "`");
    }
    if (ok == Tri::Unknown) throw ViewError(ErrorCode::Size, "cannot prove size constraint `" + n.str() + " >= " + k.str() + "`");
    return DataType::tuple({DataType::view(d, normalize(k)), DataType::view(d, normalize(n - k))});
  }
  if (v.name == "group") {
    const Nat& k = v.args.at(0);
    Tri ok;
    try {
      ok = divides(k, n);
    } catch (const NatError&) {
      throw ViewError(ErrorCode::Size, "group size must not be zero");
    }
    if (ok == Tri::False) {
      throw ViewError(ErrorCode::Size, "group size `" + k.str() + "` does not divide the array size `" + n.str() + "`");
    }
    if (ok == Tri::Unknown) {
      throw ViewError(ErrorCode::Size, "cannot prove size constraint `" + k.str() + "` divides `" + n.str() + "`");
    }
    return DataType::view(DataType::view(d, normalize(k)), normalize(n / k));
  }
  if (v.name == "transpose") {
    if (!d.is_arrayish()) {
      throw ViewError(ErrorCode::Type, "view `transpose` expects a two-dimensional array, found `" + input.str() + "`");
    }
    return DataType::view(DataType::view(d.elem(), n), d.size());
  }
  if (v.name == "reverse" || v.name == "rev") return DataType::view(d, n);
  if (v.name == "map") {
    if (!d.is_arrayish()) {
      throw ViewError(ErrorCode::Type, "view `map` expects an array of arrays, found `" + input.str() + "`");
    }
    DataType e = apply_chain(v.inner, d);
    if (e.kind() == DataType::Kind::Tuple) {
      throw ViewError(ErrorCode::Type, "view `map` cannot produce an array of tuples");
    }
    return DataType::view(e, n);
  }
  throw ViewError(ErrorCode::Type, "unknown view `" + v.name + "`");
}

DataType apply_chain(const ViewChain& chain, const DataType& input) {
  DataType t = input;
  for (const auto& v : chain) t = view_output_type(v, t);
  return t;
}

// ---------------------------------------------------------------------------
// Resolved places

std::string RStep::str() const {
  switch (kind) {
    case Kind::Fst: return ".fst";
    case Kind::Snd: return ".snd";
    case Kind::Index: return "[" + index.str() + "]";
    case Kind::Select: return "[[" + exec_name + "]]";
    case Kind::View: return "." + view.str();
  }
  return "?";
}

std::string RPlace::key() const {
  std::string s = root;
  for (const auto& st : steps) s += st.str();
  return s;
}

std::string RPlace::str() const {
  std::string k = key();
  std::string out;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == '@') {
      while (i + 1 < k.size() && std::isdigit(static_cast<unsigned char>(k[i + 1]))) ++i;
      continue;
    }
    out += k[i];
  }
  return out;
}

bool chains_equal(const ViewChain& a, const ViewChain& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].args.size() != b[i].args.size()) return false;
    for (std::size_t k = 0; k < a[i].args.size(); ++k) {
      if (nat_eq(a[i].args[k], b[i].args[k]) != Tri::True) return false;
    }
    if (!chains_equal(a[i].inner, b[i].inner)) return false;
  }
  return true;
}

bool steps_equal(const RStep& a, const RStep& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case RStep::Kind::Fst:
    case RStep::Kind::Snd: return true;
    case RStep::Kind::Index: return nat_eq(a.index, b.index) == Tri::True;
    case RStep::Kind::Select: return a.exec == b.exec;
    case RStep::Kind::View: return chains_equal({a.view}, {b.view});
  }
  return false;
}

const char* to_string(Overlap o) { return o == Overlap::Disjoint ? "Disjoint" : "Overlapping"; }

Overlap places_overlap(const RPlace& a, const RPlace& b) {
  if (a.root != b.root) return Overlap::Disjoint;
  std::size_t n = std::min(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < n; ++i) {
    const RStep& x = a.steps[i];
    const RStep& y = b.steps[i];
    if (steps_equal(x, y)) continue;
    bool proj = (x.kind == RStep::Kind::Fst && y.kind == RStep::Kind::Snd) ||
                (x.kind == RStep::Kind::Snd && y.kind == RStep::Kind::Fst);
    if (proj) return Overlap::Disjoint;
    if (x.kind == RStep::Kind::Index && y.kind == RStep::Kind::Index && nat_eq(x.index, y.index) == Tri::False) {
      return Overlap::Disjoint;
    }
    return Overlap::Overlapping;
  }
  return Overlap::Overlapping;
}

}  // namespace descend
