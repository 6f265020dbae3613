// Copyright (c) hyra contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hyra/model.hpp"

namespace hyra {

struct SyntaxError : std::runtime_error {
    SyntaxError(int line_, int col_, const std::string& msg)
        : std::runtime_error("syntax error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": " + msg),
          line(line_),
          col(col_) {}
    int line;
    int col;
};

struct SemanticError : std::runtime_error {
    explicit SemanticError(std::vector<Diagnostic> diags_);
    std::vector<Diagnostic> diags;
};

namespace sexpr {

/// Parsed s-expression node with source location, `;` starts a comment.
struct Node {
    bool is_atom = false;
    std::string atom;
    std::vector<Node> children;
    int line = 0;
    int col = 0;

    const std::string& head() const;  // atom of first child (lists only)
};

std::vector<Node> parse(const std::string& text);
}  // namespace sexpr

struct ModelDocument {
    Network network;
    Goal goal;
    int default_k = 1;
    double default_max_delay = 1.0;
    double default_delta = 0.1;
};

/// Parse a `.hna` model document.  Throws SyntaxError on malformed input
/// and SemanticError when the parsed network fails validation.
ModelDocument parse_model(const std::string& text);
ModelDocument parse_model_file(const std::string& path);

std::string serialize_witness(const CompositeRun& run);
CompositeRun parse_witness(const std::string& text);

}  // namespace hyra
