#pragma once

#include <string>

#include "dsol/frontend/ast.hpp"

namespace dsol::frontend {

std::string render_expr(const Expr& e);

/// One-line rendering of a statement. If/While render as their header only
/// ("if (c)"), every other statement renders in full with its semicolon.
std::string render_stmt_line(const Stmt& s);

std::string render_type(const types::SolType& t);
std::string render_function(const FunctionDecl& fn);
std::string render_storage(const StorageDecl& decl);

/// Canonical rendering: storage declarations first, then functions separated by
/// a blank line, four-space indentation, one statement per line.
std::string render_unit(const SourceUnit& unit);

} // namespace dsol::frontend
