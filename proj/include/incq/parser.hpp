#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incq/ast.hpp"

namespace incq {

struct SyntaxError {
    SourcePos pos;
    std::string message;

    std::string to_string() const {
        return std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + message;
    }
};

struct ParseResult {
    std::optional<Script> script;
    std::vector<SyntaxError> errors;

    bool ok() const { return errors.empty() && script.has_value(); }
};

/// Parses incq source text. Parsing is total: either a Script or a list of
/// syntax errors with line/column positions.
ParseResult parse_program(const std::string &source);

} // namespace incq
