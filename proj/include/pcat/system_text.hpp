#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pcat/membrane.hpp"

namespace pcat {

/// Syntax error with a 1-based source position.
struct ParseError : std::runtime_error {
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line;
  std::size_t column;
  std::string message;
};

/// Reads the line-based `@directive` system format. Undeclared symbols and
/// catalysts are rejected here; variant restrictions are left to
/// validate_system.
PSystem parse_system(std::string_view text);

/// Inverse of parse_system up to whitespace and comments (the header is kept).
std::string render_system(const PSystem& sys);

}  // namespace pcat
