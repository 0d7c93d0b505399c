#include <nlohmann/json.hpp>

#include "descend/interp.hpp"

namespace descend {

namespace {

using nlohmann::json;

json value_json(const Value& v) {
  switch (v.kind) {
    case ScalarKind::F32:
    case ScalarKind::F64: return v.f;
    case ScalarKind::Bool: return v.i != 0;
    default: return v.i;
  }
}

json coords_json(const Coords& c) { return json::array({c[0], c[1], c[2]}); }

json access_json(const AccessRecord& a, const AccessLog& log) {
  json j;
  j["block"] = coords_json(a.block);
  j["thread"] = a.thread[0] < 0 ? json(nullptr) : coords_json(a.thread);
  j["buffer"] = log.buffer_names.at(static_cast<std::size_t>(a.buffer));
  j["offset"] = a.offset;
  j["kind"] = a.write ? "write" : "read";
  j["epoch"] = a.epoch;
  return j;
}

}  // namespace

std::string report_json(const RunResult& r, std::size_t max_races) {
  json j;
  j["status"] = to_string(r.status);
  if (!r.message.empty()) j["message"] = r.message;
  j["kernel"] = r.instance;
  j["nats"] = json::object();
  for (const auto& [k, v] : r.nats) j["nats"][k] = v;
  j["grid"] = coords_json(r.blocks);
  j["block"] = coords_json(r.threads);
  j["barrier_divergence"] = r.status == SimStatus::BarrierDivergence;
  j["accesses"] = r.log.records.size();
  j["buffers"] = json::object();
  for (const auto& [name, cells] : r.buffers) {
    json a = json::array();
    for (const auto& v : cells) a.push_back(value_json(v));
    j["buffers"][name] = a;
  }
  auto races = detect_races(r.log);
  j["race_count"] = races.size();
  j["races"] = json::array();
  for (std::size_t i = 0; i < races.size() && i < max_races; ++i) {
    j["races"].push_back({{"first", access_json(races[i].first, r.log)}, {"second", access_json(races[i].second, r.log)}});
  }
  return j.dump(2) + "\n";
}

}  // namespace descend
