#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace descend {

/// Half-open byte range into a source buffer.
struct Span {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  static Span join(Span a, Span b) { return {a.begin < b.begin ? a.begin : b.begin, a.end > b.end ? a.end : b.end}; }
  bool contains(Span other) const { return begin <= other.begin && other.end <= end; }
};

struct LineCol {
  std::uint32_t line = 1;    // 1-based
  std::uint32_t column = 1;  // 1-based, in bytes
};

class SourceFile {
 public:
  SourceFile(std::string name, std::string text);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }

  LineCol locate(std::uint32_t offset) const;
  std::string line_text(std::uint32_t line) const;
  std::uint32_t line_count() const { return static_cast<std::uint32_t>(line_starts_.size()); }

 private:
  std::string name_;
  std::string text_;
  std::vector<std::uint32_t> line_starts_;
};

}  // namespace descend
