#pragma once

// Deterministic grid simulator with access logging, race detection and a
// second evaluator for the lowered IR sharing the same value and memory
// model.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "descend/ast.hpp"
#include "descend/diagnostics.hpp"
#include "descend/exec.hpp"
#include "descend/lower.hpp"

namespace descend {

struct Value {
  ScalarKind kind = ScalarKind::I32;
  std::int64_t i = 0;  // i32 and bool
  double f = 0;        // f32 and f64

  static Value of_int(std::int64_t v);
  static Value of_bool(bool b);
  static Value of_float(ScalarKind k, double v);
  static Value zero(ScalarKind k);
  // Converts a plain number to a value of kind `k`.
  static Value convert(ScalarKind k, double v);

  double as_double() const;
  friend bool operator==(const Value& a, const Value& b) { return a.kind == b.kind && a.i == b.i && a.f == b.f; }
};

Value eval_binary(BinOp op, const Value& a, const Value& b);
Value eval_unary(UnOp op, const Value& a);

using Coords = std::array<std::int64_t, 3>;  // x, y, z

struct AccessRecord {
  Coords block{0, 0, 0};
  Coords thread{-1, -1, -1};  // -1: performed collectively by the block
  int buffer = 0;
  std::int64_t offset = 0;
  bool write = false;
  int epoch = 0;
};

struct AccessLog {
  std::vector<AccessRecord> records;
  std::vector<std::string> buffer_names;  // indexed by AccessRecord::buffer
};

struct Race {
  AccessRecord first;
  AccessRecord second;
};

// Pairs of accesses by different threads to the same cell, at least one a
// write, in the same epoch when both threads are in the same block.
std::vector<Race> detect_races(const AccessLog& log);

struct SimConfig {
  Coords blocks{1, 1, 1};
  Coords threads{1, 1, 1};
  NatValues nats;  // generic sizes not determined by the grid
  std::map<std::string, std::vector<double>> inputs;
  // element index -> initial value, for buffers absent from `inputs`
  std::map<std::string, std::function<double(std::int64_t)>> generators;
  std::map<std::string, double> scalars;
  std::int64_t max_threads = 64;
};

enum class SimStatus { Ok, BarrierDivergence, OutOfBounds, Rejected, ConfigError, RuntimeError };
const char* to_string(SimStatus s);

struct RunResult {
  SimStatus status = SimStatus::Ok;
  std::string message;
  Diagnostics diags;  // Rejected
  std::string instance;  // specialized kernel name
  NatValues nats;
  Coords blocks{1, 1, 1};
  Coords threads{1, 1, 1};
  std::map<std::string, std::vector<Value>> buffers;  // final contents of buffer parameters
  AccessLog log;

  bool ok() const { return status == SimStatus::Ok; }
};

struct RunOptions {
  bool check_safety = true;  // false: run programs the checker would reject
};

// Type-checks, specializes and simulates `kernel`.
RunResult run_kernel(const Program& p, const std::string& kernel, const SimConfig& cfg, const RunOptions& opts = {});

// Simulates the lowered form of the same specialization.
RunResult run_lowered(const Program& p, const std::string& kernel, const SimConfig& cfg, const RunOptions& opts = {});

// Nat bindings of a grid function for a launch configuration; throws
// std::invalid_argument when the configuration does not fit.
NatValues infer_grid_nats(const FunctionDef& f, const SimConfig& cfg);

// (block, thread) pairs covered by a ground gpu resource; forall steps cover
// every index, split steps keep their half.
std::vector<std::pair<Coords, Coords>> enumerate_threads(const ExecResource& e);

// Machine-readable run report: status, specialization, final buffers and
// races (at most `max_races` listed, all counted).
std::string report_json(const RunResult& r, std::size_t max_races = 32);

}  // namespace descend
