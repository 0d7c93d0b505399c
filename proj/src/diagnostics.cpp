#include "descend/diagnostics.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

namespace descend {

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Conflict: return "E_CONFLICT";
    case ErrorCode::Narrow: return "E_NARROW";
    case ErrorCode::Sync: return "E_SYNC";
    case ErrorCode::Mem: return "E_MEM";
    case ErrorCode::Launch: return "E_LAUNCH";
    case ErrorCode::Move: return "E_MOVE";
    case ErrorCode::Borrow: return "E_BORROW";
    case ErrorCode::Size: return "E_SIZE";
    case ErrorCode::Parse: return "E_PARSE";
    case ErrorCode::Type: return "E_TYPE";
  }
  return "E_UNKNOWN";
}

namespace {

struct Underline {
  std::uint32_t col;
  std::uint32_t width;
  char mark;
  std::string text;
};

}  // namespace

std::string render_text(const Diagnostic& d, const SourceFile& src) {
  std::ostringstream os;
  LineCol at = src.locate(d.primary.span.begin);
  os << "error[" << code_name(d.code) << "]: " << d.message << '\n';
  os << " --> " << src.name() << ':' << at.line << ':' << at.column << '\n';

  std::map<std::uint32_t, std::vector<Underline>> by_line;
  auto add = [&](const Label& l, char mark) {
    LineCol b = src.locate(l.span.begin);
    LineCol e = src.locate(std::max(l.span.begin, l.span.end == 0 ? 0 : l.span.end - 1));
    std::uint32_t width = 1;
    if (e.line == b.line) {
      width = e.column - b.column + 1;
    } else {
      auto len = static_cast<std::uint32_t>(src.line_text(b.line).size());
      width = len >= b.column ? len - b.column + 1 : 1;
    }
    by_line[b.line].push_back({b.column, std::max<std::uint32_t>(width, 1), mark, l.text});
  };
  add(d.primary, '^');
  for (const auto& r : d.related) add(r, '-');

  std::uint32_t last = by_line.empty() ? 1 : by_line.rbegin()->first;
  std::size_t gutter = std::to_string(last).size();
  std::string pad(gutter, ' ');
  os << pad << " |\n";
  for (auto& [line, marks] : by_line) {
    os << std::string(gutter - std::to_string(line).size(), ' ') << line << " | " << src.line_text(line) << '\n';
    for (const auto& m : marks) {
      os << pad << " | " << std::string(m.col - 1, ' ') << std::string(m.width, m.mark);
      if (!m.text.empty()) os << ' ' << m.text;
      os << '\n';
    }
  }
  return os.str();
}

std::string render_text(const Diagnostics& ds, const SourceFile& src) {
  std::string out;
  for (const auto& d : ds) {
    out += render_text(d, src);
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json span_json(const Label& l, const SourceFile& src) {
  LineCol b = src.locate(l.span.begin);
  LineCol e = src.locate(l.span.end);
  return {{"begin", l.span.begin}, {"end", l.span.end},   {"line", b.line},
          {"column", b.column},    {"end_line", e.line}, {"end_column", e.column},
          {"label", l.text}};
}

}  // namespace

std::string render_json(const Diagnostic& d, const SourceFile& src) {
  nlohmann::json j;
  j["code"] = code_name(d.code);
  j["message"] = d.message;
  j["file"] = src.name();
  j["span"] = span_json(d.primary, src);
  j["related"] = nlohmann::json::array();
  for (const auto& r : d.related) j["related"].push_back(span_json(r, src));
  return j.dump();
}

std::string render_json(const Diagnostics& ds, const SourceFile& src) {
  std::string out;
  for (const auto& d : ds) {
    out += render_json(d, src);
    out += '\n';
  }
  return out;
}

}  // namespace descend
