#include "descend/ground.hpp"

#include <numeric>

namespace descend {

namespace {

std::int64_t ground(const Nat& n, const NatValues& env = {}) {
  auto v = evaluate(n, env);
  if (!v) throw GroundError("size `" + n.str() + "` is not ground");
  return *v;
}

std::int64_t product(const std::vector<std::int64_t>& s, std::size_t from) {
  std::int64_t p = 1;
  for (std::size_t i = from; i < s.size(); ++i) p *= s[i];
  return p;
}

GValue table(std::vector<std::int64_t> shape, std::vector<std::int64_t> offs) {
  GValue g;
  g.shape = std::move(shape);
  g.offs = std::move(offs);
  return g;
}

void require_table(const GValue& v, std::size_t min_rank, const std::string& what) {
  if (v.is_tuple) throw GroundError(what + " applied to a tuple");
  if (v.shape.size() < min_rank) throw GroundError(what + " needs rank " + std::to_string(min_rank));
}

}  // namespace

GValue GValue::iota(std::vector<std::int64_t> shape) {
  std::vector<std::int64_t> offs(static_cast<std::size_t>(product(shape, 0)));
  std::iota(offs.begin(), offs.end(), 0);
  return table(std::move(shape), std::move(offs));
}

std::size_t GValue::slice_size() const { return static_cast<std::size_t>(product(shape, 1)); }

GValue GValue::slice(std::int64_t i) const {
  require_table(*this, 1, "index");
  if (i < 0 || i >= shape[0]) {
    throw GroundError("index " + std::to_string(i) + " out of range for extent " + std::to_string(shape[0]));
  }
  std::size_t k = slice_size();
  auto b = offs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * k);
  return table({shape.begin() + 1, shape.end()}, {b, b + static_cast<std::ptrdiff_t>(k)});
}

std::vector<std::int64_t> ground_shape(const DataType& t) {
  std::vector<std::int64_t> s;
  const DataType* cur = &t;
  while (cur->is_arrayish()) {
    s.push_back(ground(cur->size()));
    cur = &cur->elem();
  }
  return s;
}

GValue project(const GValue& v, bool fst) {
  if (!v.is_tuple || v.parts.size() != 2) throw GroundError("projection of a non-pair");
  return v.parts[fst ? 0 : 1];
}

GValue apply_view(const ViewInst& v, const GValue& in) {
  if (v.name == "split") {
    require_table(in, 1, "split");
    std::int64_t k = ground(v.args.at(0));
    std::int64_t n = in.shape[0];
    if (k < 0 || k > n) throw GroundError("split position out of range");
    std::size_t inner = in.slice_size();
    auto cut = in.offs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * inner);
    auto s1 = in.shape;
    auto s2 = in.shape;
    s1[0] = k;
    s2[0] = n - k;
    GValue out;
    out.is_tuple = true;
    out.parts.push_back(table(s1, {in.offs.begin(), cut}));
    out.parts.push_back(table(s2, {cut, in.offs.end()}));
    return out;
  }
  if (v.name == "group") {
    require_table(in, 1, "group");
    std::int64_t k = ground(v.args.at(0));
    if (k <= 0 || in.shape[0] % k != 0) throw GroundError("group size does not divide the extent");
    std::vector<std::int64_t> s{in.shape[0] / k, k};
    s.insert(s.end(), in.shape.begin() + 1, in.shape.end());
    return table(std::move(s), in.offs);
  }
  if (v.name == "transpose") {
    require_table(in, 2, "transpose");
    std::int64_t a = in.shape[0];
    std::int64_t b = in.shape[1];
    std::size_t inner = static_cast<std::size_t>(product(in.shape, 2));
    std::vector<std::int64_t> s = in.shape;
    std::swap(s[0], s[1]);
    std::vector<std::int64_t> offs;
    offs.reserve(in.offs.size());
    for (std::int64_t j = 0; j < b; ++j) {
      for (std::int64_t i = 0; i < a; ++i) {
        std::size_t base = static_cast<std::size_t>(i * b + j) * inner;
        offs.insert(offs.end(), in.offs.begin() + static_cast<std::ptrdiff_t>(base),
                    in.offs.begin() + static_cast<std::ptrdiff_t>(base + inner));
      }
    }
    return table(std::move(s), std::move(offs));
  }
  if (v.name == "reverse" || v.name == "rev") {
    require_table(in, 1, "reverse");
    std::vector<std::int64_t> offs;
    offs.reserve(in.offs.size());
    for (std::int64_t i = in.shape[0] - 1; i >= 0; --i) {
      GValue s = in.slice(i);
      offs.insert(offs.end(), s.offs.begin(), s.offs.end());
    }
    return table(in.shape, std::move(offs));
  }
  if (v.name == "map") {
    require_table(in, 1, "map");
    std::vector<std::int64_t> offs;
    std::vector<std::int64_t> elem_shape;
    for (std::int64_t i = 0; i < in.shape[0]; ++i) {
      GValue e = in.slice(i);
      for (const auto& w : v.inner) e = apply_view(w, e);
      if (e.is_tuple) throw GroundError("map cannot produce a tuple");
      elem_shape = e.shape;
      offs.insert(offs.end(), e.offs.begin(), e.offs.end());
    }
    if (in.shape[0] == 0) {
      // no elements: the element shape comes from a stand-in element
      GValue e = GValue::iota(std::vector<std::int64_t>(in.shape.begin() + 1, in.shape.end()));
      for (const auto& w : v.inner) e = apply_view(w, e);
      if (e.is_tuple) throw GroundError("map cannot produce a tuple");
      elem_shape = e.shape;
    }
    std::vector<std::int64_t> s{in.shape[0]};
    s.insert(s.end(), elem_shape.begin(), elem_shape.end());
    return table(std::move(s), std::move(offs));
  }
  throw GroundError("unknown view `" + v.name + "`");
}

GValue view_permutation(const ViewChain& chain, const std::vector<std::int64_t>& shape) {
  GValue g = GValue::iota(shape);
  for (const auto& v : chain) g = apply_view(v, g);
  return g;
}

std::vector<std::int64_t> place_offsets(const RPlace& p, const DataType& root_type, const SelectCoords& coords,
                                        const NatValues& env) {
  GValue g = GValue::iota(ground_shape(root_type));
  for (const auto& s : p.steps) {
    switch (s.kind) {
      case RStep::Kind::Fst: g = project(g, true); break;
      case RStep::Kind::Snd: g = project(g, false); break;
      case RStep::Kind::Index: g = g.slice(ground(s.index, env)); break;
      case RStep::Kind::Select: {
        auto it = coords.find(s.exec_name);
        if (it == coords.end()) throw GroundError("no coordinates for `" + s.exec_name + "`");
        for (std::int64_t c : it->second) g = g.slice(c);
        break;
      }
      case RStep::Kind::View: g = apply_view(s.view, g); break;
    }
  }
  if (g.is_tuple) {
    std::vector<std::int64_t> all;
    std::vector<GValue> work{g};
    while (!work.empty()) {
      GValue cur = work.back();
      work.pop_back();
      if (cur.is_tuple) work.insert(work.end(), cur.parts.begin(), cur.parts.end());
      else all.insert(all.end(), cur.offs.begin(), cur.offs.end());
    }
    return all;
  }
  return g.offs;
}

std::set<std::int64_t> place_index_map(const RPlace& p, const DataType& root_type, const SelectCoords& coords,
                                       const NatValues& env) {
  auto v = place_offsets(p, root_type, coords, env);
  return {v.begin(), v.end()};
}

}  // namespace descend
