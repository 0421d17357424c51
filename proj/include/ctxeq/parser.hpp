#pragma once

#include "ctxeq/ast.hpp"

namespace ctxeq {

struct ProgramPair {
  ExprPtr left, right;
  std::string left_name = "left";
  std::string right_name = "right";
  TypePtr type;  // common type of both sides
};

// Parses a two-program input: two expressions separated by a line that is
// exactly `|||`. Both sides are type checked jointly and must agree.
// LocIds are drawn from `gen` so they are unique across both sides.
ProgramPair parse_program_pair(const std::string& text, NameGen& gen);

// Parses a single expression (tests and tools).
ExprPtr parse_expr_string(const std::string& text, NameGen& gen);

// Parses just an annotation, with the given location names in scope
// (each bound to a fresh LocId, returned alongside). Test helper.
std::pair<AnnotPtr, std::map<std::string, LocId>> parse_annotation_string(
    const std::string& text, const std::vector<std::string>& locs_in_scope, NameGen& gen);

}  // namespace ctxeq
