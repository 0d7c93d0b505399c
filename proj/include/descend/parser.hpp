#pragma once

#include <optional>
#include <string>

#include "descend/ast.hpp"
#include "descend/diagnostics.hpp"
#include "descend/source.hpp"

namespace descend {

struct ParseResult {
  std::optional<Program> program;  // empty iff diags is non-empty
  Diagnostics diags;
};

ParseResult parse(const SourceFile& src);

// Fragment parsers for tools and tests. Each requires the whole input to be
// consumed.
std::optional<PlaceExpr> parse_place(const SourceFile& src, Diagnostics& diags);
std::optional<DataType> parse_type(const SourceFile& src, Diagnostics& diags);
std::optional<Nat> parse_nat(const SourceFile& src, Diagnostics& diags);

// Canonical concrete syntax accepted by `parse`.
std::string pretty_print(const Program& p);
std::string print_place(const PlaceExpr& p);
std::string print_term(const Term& t, int indent = 0);

// Span-free structural dump; two ASTs are equal iff their dumps are equal.
std::string dump_ast(const Program& p);

}  // namespace descend
