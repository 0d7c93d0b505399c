#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "descend/codegen.hpp"
#include "descend/ground.hpp"
#include "descend/interp.hpp"
#include "descend/parser.hpp"
#include "descend/typecheck.hpp"
#include "descend/view_check.hpp"

using namespace descend;

namespace {

constexpr int kOk = 0;
constexpr int kDiag = 1;
constexpr int kUsage = 2;

struct Input {
  std::optional<SourceFile> src;
  std::optional<Program> program;
};

bool json_format = false;

void print_diags(const Diagnostics& ds, const SourceFile& src) {
  std::cerr << (json_format ? render_json(ds, src) : render_text(ds, src));
}

// 0 on success; otherwise the exit code.
int load(const std::string& path, Input& in) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "error: cannot read `" << path << "`\n";
    return kUsage;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  in.src.emplace(path, ss.str());
  ParseResult pr = parse(*in.src);
  if (!pr.program) {
    print_diags(pr.diags, *in.src);
    return kDiag;
  }
  in.program = std::move(pr.program);
  return kOk;
}

int check_loaded(Input& in) {
  CheckResult r = check_program(*in.program);
  if (!r.ok) {
    print_diags(r.diags, *in.src);
    return kDiag;
  }
  return kOk;
}

std::optional<std::pair<std::string, std::int64_t>> key_value(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) return std::nullopt;
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(s.substr(eq + 1), &used);
    if (used != s.size() - eq - 1) return std::nullopt;
    return std::make_pair(s.substr(0, eq), v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

// "x[,y[,z]]"
std::optional<Coords> extents(const std::string& s) {
  auto parts = split(s, ',');
  if (parts.empty() || parts.size() > 3) return std::nullopt;
  Coords c{1, 1, 1};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    try {
      std::size_t used = 0;
      c[i] = std::stoll(parts[i], &used);
      if (used != parts[i].size()) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return c;
}

// "name=iota" | "name=iota1" | "name=fill:V" | "name=v0,v1,..."
bool add_init(const std::string& spec, SimConfig& cfg) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  std::string name = spec.substr(0, eq), rhs = spec.substr(eq + 1);
  try {
    if (rhs == "iota") {
      cfg.generators[name] = [](std::int64_t i) { return static_cast<double>(i); };
    } else if (rhs == "iota1") {
      cfg.generators[name] = [](std::int64_t i) { return static_cast<double>(i + 1); };
    } else if (rhs.rfind("fill:", 0) == 0) {
      double v = std::stod(rhs.substr(5));
      cfg.generators[name] = [v](std::int64_t) { return v; };
    } else {
      std::vector<double> vs;
      for (const auto& p : split(rhs, ',')) vs.push_back(std::stod(p));
      cfg.inputs[name] = vs;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

int cmd_check(const std::string& path) {
  Input in;
  if (int rc = load(path, in)) return rc;
  return check_loaded(in);
}

int cmd_emit(const std::string& path, const std::string& out, const std::vector<std::string>& insts) {
  Input in;
  if (int rc = load(path, in)) return rc;
  if (int rc = check_loaded(in)) return rc;
  MonoOptions mo;
  for (const auto& s : insts) {
    // fn or fn:k=v,k=v
    MonoRoot root;
    auto colon = s.find(':');
    root.function = s.substr(0, colon);
    if (colon != std::string::npos) {
      for (const auto& kv : split(s.substr(colon + 1), ',')) {
        auto p = key_value(kv);
        if (!p || p->second < 0) {
          std::cerr << "error: bad instantiation `" << s << "`\n";
          return kUsage;
        }
        root.nats[p->first] = Nat::lit(static_cast<std::uint64_t>(p->second));
      }
    }
    mo.roots.push_back(root);
  }
  std::string cu;
  try {
    cu = compile_to_cuda(*in.program, mo);
  } catch (const MonoError& e) {
    if (e.diags.empty()) std::cerr << "error: " << e.what() << "\n";
    print_diags(e.diags, *in.src);
    return kDiag;
  } catch (const LowerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiag;
  }
  if (out.empty() || out == "-") {
    std::cout << cu;
    return kOk;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f || !(f << cu)) {
    std::cerr << "error: cannot write `" << out << "`\n";
    return kUsage;
  }
  return kOk;
}

struct RunArgs {
  std::string path, kernel, grid = "1", block = "1";
  std::vector<std::string> nats, inits, scalars;
  bool unchecked = false, lowered = false;
  std::int64_t max_threads = 64;
  std::size_t max_races = 32;
};

int cmd_run(const RunArgs& a) {
  Input in;
  if (int rc = load(a.path, in)) return rc;
  SimConfig cfg;
  auto g = extents(a.grid), b = extents(a.block);
  if (!g || !b) {
    std::cerr << "error: extents are written x[,y[,z]]\n";
    return kUsage;
  }
  cfg.blocks = *g;
  cfg.threads = *b;
  cfg.max_threads = a.max_threads;
  for (const auto& s : a.nats) {
    auto p = key_value(s);
    if (!p) {
      std::cerr << "error: bad size binding `" << s << "`\n";
      return kUsage;
    }
    cfg.nats[p->first] = p->second;
  }
  for (const auto& s : a.inits) {
    if (!add_init(s, cfg)) {
      std::cerr << "error: bad initializer `" << s << "`\n";
      return kUsage;
    }
  }
  for (const auto& s : a.scalars) {
    auto eq = s.find('=');
    try {
      if (eq == std::string::npos) throw std::invalid_argument(s);
      cfg.scalars[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      std::cerr << "error: bad scalar `" << s << "`\n";
      return kUsage;
    }
  }
  RunOptions opts;
  opts.check_safety = !a.unchecked;
  RunResult r = a.lowered ? run_lowered(*in.program, a.kernel, cfg, opts) : run_kernel(*in.program, a.kernel, cfg, opts);
  if (r.status == SimStatus::Rejected) {
    if (r.diags.empty()) std::cerr << "error: " << r.message << "\n";
    print_diags(r.diags, *in.src);
    return kDiag;
  }
  if (r.status == SimStatus::ConfigError) {
    std::cerr << "error: " << r.message << "\n";
    return kUsage;
  }
  std::cout << report_json(r, a.max_races);
  if (!r.ok()) {
    std::cerr << "error: " << to_string(r.status) << ": " << r.message << "\n";
    return kDiag;
  }
  return detect_races(r.log).empty() ? kOk : kDiag;
}

int cmd_expand(const std::string& path, const std::string& type_text, const std::string& place_text) {
  Input in;
  if (!path.empty()) {
    if (int rc = load(path, in)) return rc;
  } else {
    in.program.emplace();
  }
  Diagnostics diags;
  SourceFile tsrc("<type>", type_text), psrc("<place>", place_text);
  auto ty = parse_type(tsrc, diags);
  if (!ty) {
    print_diags(diags, tsrc);
    return kUsage;
  }
  auto pl = parse_place(psrc, diags);
  if (!pl) {
    print_diags(diags, psrc);
    return kUsage;
  }
  ViewComparison c;
  try {
    c = compare_view_lowering(view_steps(*pl, *in.program), *ty);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiag;
  }
  std::cout << "place:   " << place_text << "\n";
  std::cout << "shape:  ";
  for (auto s : c.shape) std::cout << " " << s;
  std::cout << "\nlowered: " << c.expr << "\n\n";
  std::size_t w = 0;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < c.oracle.size(); ++k) {
    std::vector<std::int64_t> coord(c.shape.size());
    std::size_t rem = k;
    for (std::size_t d = c.shape.size(); d-- > 0;) {
      coord[d] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(c.shape[d]));
      rem /= static_cast<std::size_t>(c.shape[d]);
    }
    std::string l = "(";
    for (std::size_t d = 0; d < coord.size(); ++d) l += (d ? "," : "") + std::to_string(coord[d]);
    labels.push_back(l + ")");
    w = std::max(w, labels.back().size());
  }
  std::cout << std::string(w > 5 ? w - 5 : 0, ' ') << "coord  lowered  oracle\n";
  for (std::size_t k = 0; k < c.oracle.size(); ++k) {
    std::string lo = std::to_string(c.lowered[k]), or_ = std::to_string(c.oracle[k]);
    std::cout << std::string(w - labels[k].size(), ' ') << labels[k] << "  " << std::string(7 - std::min<std::size_t>(7, lo.size()), ' ')
              << lo << "  " << std::string(6 - std::min<std::size_t>(6, or_.size()), ' ') << or_
              << (c.lowered[k] == c.oracle[k] ? "" : "  MISMATCH") << "\n";
  }
  std::cout << "\n" << c.mismatches << " mismatches\n";
  return c.mismatches == 0 ? kOk : kDiag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"descendc: checker, CUDA emitter and grid simulator for Descend programs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "text";
  app.add_option("--format", format, "diagnostic format")->check(CLI::IsMember({"text", "json"}));

  std::string check_path;
  auto* check = app.add_subcommand("check", "type-check a program");
  check->add_option("file", check_path, "input .desc file")->required();

  std::string emit_path, emit_out;
  std::vector<std::string> insts;
  auto* emit = app.add_subcommand("emit-cuda", "compile a program to CUDA C++");
  emit->add_option("file", emit_path, "input .desc file")->required();
  emit->add_option("-o,--output", emit_out, "output .cu file (default: stdout)");
  emit->add_option("--inst", insts, "specialize fn:k=v,... (repeatable; default: every non-generic host/grid function)");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "simulate a gpu.grid function and print a JSON report");
  run->add_option("file", ra.path, "input .desc file")->required();
  run->add_option("kernel", ra.kernel, "gpu.grid function")->required();
  run->add_option("--grid", ra.grid, "blocks per grid x[,y[,z]]");
  run->add_option("--block", ra.block, "threads per block x[,y[,z]]");
  run->add_option("--nat", ra.nats, "size binding k=v (repeatable)");
  run->add_option("--init", ra.inits, "buffer init name=iota|iota1|fill:V|v0,v1,... (repeatable)");
  run->add_option("--scalar", ra.scalars, "scalar argument name=v (repeatable)");
  run->add_flag("--unchecked", ra.unchecked, "skip the safety checks and simulate anyway");
  run->add_flag("--lowered", ra.lowered, "simulate the lowered code instead of the source");
  run->add_option("--max-threads", ra.max_threads, "cap on simulated threads");
  run->add_option("--max-races", ra.max_races, "races listed in the report");

  std::string ev_path, ev_type, ev_place;
  auto* ev = app.add_subcommand("expand-views", "print a view chain's lowered index next to the oracle table");
  ev->add_option("--type", ev_type, "root array type, e.g. \"[f64; 32]\"")->required();
  ev->add_option("--place", ev_place, "place over root `arr`, e.g. \"arr.group::<8>.transpose\"")->required();
  ev->add_option("file", ev_path, "program providing user-defined views");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  json_format = format == "json";

  if (*check) return cmd_check(check_path);
  if (*emit) return cmd_emit(emit_path, emit_out, insts);
  if (*run) return cmd_run(ra);
  return cmd_expand(ev_path, ev_type, ev_place);
}
