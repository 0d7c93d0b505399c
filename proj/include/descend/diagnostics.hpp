#pragma once

#include <string>
#include <vector>

#include "descend/source.hpp"

namespace descend {

enum class ErrorCode {
  Conflict,  // E_CONFLICT
  Narrow,    // E_NARROW
  Sync,      // E_SYNC
  Mem,       // E_MEM
  Launch,    // E_LAUNCH
  Move,      // E_MOVE
  Borrow,    // E_BORROW
  Size,      // E_SIZE
  Parse,     // E_PARSE
  Type,      // E_TYPE: ordinary type errors (unknown names, mismatched scalars)
};

const char* code_name(ErrorCode code);

struct Label {
  Span span;
  std::string text;
};

struct Diagnostic {
  ErrorCode code;
  std::string message;
  Label primary;
  std::vector<Label> related;
};

using Diagnostics = std::vector<Diagnostic>;

// Human-readable rendering with source excerpts and caret underlines.
std::string render_text(const Diagnostic& d, const SourceFile& src);
std::string render_text(const Diagnostics& ds, const SourceFile& src);

// One JSON object per line: {"code", "message", "file", "span", "related"}.
std::string render_json(const Diagnostic& d, const SourceFile& src);
std::string render_json(const Diagnostics& ds, const SourceFile& src);

}  // namespace descend
