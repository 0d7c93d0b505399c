#pragma once

// CUDA C++ emission from the lowered IR.

#include <string>

#include "descend/lower.hpp"
#include "descend/mono.hpp"

namespace descend {

std::string emit_cuda(const LProgram& p);

// monomorphize, lower and emit a checked program
std::string compile_to_cuda(const Program& checked, const MonoOptions& opts = {});

// C spelling of an IR expression; shared with diagnostics of the CLI.
std::string expr_str(const LExpr& e);

}  // namespace descend
