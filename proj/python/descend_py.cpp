#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "descend/codegen.hpp"
#include "descend/interp.hpp"
#include "descend/parser.hpp"
#include "descend/typecheck.hpp"
#include "descend/view_check.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace descend;

namespace {

class DescendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

py::object loads(const std::string& s) { return py::module_::import("json").attr("loads")(s); }

py::list diag_list(const Diagnostics& ds, const SourceFile& src) {
  py::list out;
  for (const auto& d : ds) out.append(loads(render_json(d, src)));
  return out;
}

Program parsed(const SourceFile& src) {
  ParseResult pr = parse(src);
  if (!pr.program) throw DescendError(render_text(pr.diags, src));
  return std::move(*pr.program);
}

Program checked(const SourceFile& src) {
  Program p = parsed(src);
  CheckResult r = check_program(p);
  if (!r.ok) throw DescendError(render_text(r.diags, src));
  return p;
}

py::dict check(const std::string& source, const std::string& name) {
  SourceFile src(name, source);
  ParseResult pr = parse(src);
  if (!pr.program) return py::dict("ok"_a = false, "diagnostics"_a = diag_list(pr.diags, src));
  CheckResult r = check_program(*pr.program);
  return py::dict("ok"_a = r.ok, "diagnostics"_a = diag_list(r.diags, src));
}

std::string emit(const std::string& source, const std::string& name) {
  SourceFile src(name, source);
  Program p = checked(src);
  try {
    return compile_to_cuda(p);
  } catch (const std::exception& e) {
    throw DescendError(e.what());
  }
}

Coords coords(const std::vector<std::int64_t>& v) {
  if (v.empty() || v.size() > 3) throw py::value_error("expected 1 to 3 extents");
  Coords c{1, 1, 1};
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i];
  return c;
}

py::object simulate(const std::string& source, const std::string& kernel, const std::vector<std::int64_t>& grid,
                    const std::vector<std::int64_t>& block, const NatValues& nats,
                    const std::map<std::string, std::vector<double>>& inputs, const std::map<std::string, double>& scalars,
                    bool checked_run, bool lowered, std::int64_t max_threads, std::size_t max_races) {
  SourceFile src("<input>", source);
  Program p = parsed(src);
  SimConfig cfg;
  cfg.blocks = coords(grid);
  cfg.threads = coords(block);
  cfg.nats = nats;
  cfg.inputs = inputs;
  cfg.scalars = scalars;
  cfg.max_threads = max_threads;
  RunResult r;
  {
    py::gil_scoped_release release;
    r = lowered ? run_lowered(p, kernel, cfg, {checked_run}) : run_kernel(p, kernel, cfg, {checked_run});
  }
  py::dict report = loads(report_json(r, max_races));
  if (r.status == SimStatus::Rejected) report["diagnostics"] = diag_list(r.diags, src);
  return std::move(report);
}

py::dict expand_views(const std::string& type_text, const std::string& place_text, const std::string& source) {
  Program p = source.empty() ? Program{} : parsed(SourceFile("<input>", source));
  Diagnostics diags;
  SourceFile tsrc("<type>", type_text), psrc("<place>", place_text);
  auto ty = parse_type(tsrc, diags);
  if (!ty) throw DescendError(render_text(diags, tsrc));
  auto pl = parse_place(psrc, diags);
  if (!pl) throw DescendError(render_text(diags, psrc));
  ViewComparison c;
  try {
    c = compare_view_lowering(view_steps(*pl, p), *ty);
  } catch (const std::exception& e) {
    throw DescendError(e.what());
  }
  return py::dict("expr"_a = c.expr, "shape"_a = c.shape, "lowered"_a = c.lowered, "oracle"_a = c.oracle,
                  "mismatches"_a = c.mismatches);
}

std::string normalize_nat(const std::string& text) {
  Diagnostics diags;
  SourceFile src("<nat>", text);
  auto n = parse_nat(src, diags);
  if (!n) throw DescendError(render_text(diags, src));
  return normalize(*n).str();
}

}  // namespace

PYBIND11_MODULE(descend, m) {
  m.doc() = "Checker, CUDA emitter and grid simulator for Descend programs";
  py::register_exception<DescendError>(m, "DescendError");

  m.def("check", &check, "source"_a, "name"_a = "<input>",
        "Type-check a program; returns {'ok': bool, 'diagnostics': [...]}.");
  m.def("emit_cuda", &emit, "source"_a, "name"_a = "<input>", "Compile a program to CUDA C++.");
  m.def("simulate", &simulate, "source"_a, "kernel"_a, "grid"_a = std::vector<std::int64_t>{1},
        "block"_a = std::vector<std::int64_t>{1}, "nats"_a = NatValues{},
        "inputs"_a = std::map<std::string, std::vector<double>>{}, "scalars"_a = std::map<std::string, double>{},
        "checked"_a = true, "lowered"_a = false, "max_threads"_a = 64, "max_races"_a = 32,
        "Simulate a gpu.grid function; returns the run report as a dict.");
  m.def("expand_views", &expand_views, "type"_a, "place"_a, "source"_a = "",
        "Lowered index of a view chain next to the reference offsets.");
  m.def("normalize_nat", &normalize_nat, "text"_a, "Canonical form of a size expression.");
}
