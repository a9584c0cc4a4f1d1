// One-node AST differencing and edit application.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "slicefix/syntax.hpp"

namespace slicefix {

enum class EditOp : std::uint8_t { AddNode, DelNode, RepType, RepVal };
inline constexpr int kEditOpCount = 4;

std::string_view op_name(EditOp op);
std::optional<EditOp> op_from_name(std::string_view name);

/// A single edit against the buggy tree. For AddNode `location` is the
/// parent and `position` the child slot the new leaf occupies.
struct GraphEdit {
  EditOp op = EditOp::AddNode;
  int location = 0;
  int position = -1;
  std::optional<std::string> kind_label;
  std::optional<std::string> value_token;

  /// Empty when the fields present are exactly those the op demands.
  std::string check_fields() const;
  friend bool operator==(const GraphEdit &, const GraphEdit &) = default;
};

struct DiffResult {
  GraphEdit edit;
  int buggy_line = 1;
  int fixed_line = 1;
};

enum class DiffStatus { OneNode, NoDifference, NotOneNode };

struct DiffOutcome {
  DiffStatus status = DiffStatus::NotOneNode;
  std::optional<DiffResult> result; // set iff status == OneNode
};

DiffOutcome ast_diff(const SyntaxTree &buggy, const SyntaxTree &fixed);
bool is_one_node(const SyntaxTree &buggy, const SyntaxTree &fixed);

/// Throws std::invalid_argument on a bad location or an op/field mismatch.
/// The result carries no tokens or source lines.
SyntaxTree apply_edit(const SyntaxTree &tree, const GraphEdit &edit);

/// Checks `edit` against `tree` without applying it; empty when valid.
std::string edit_problem(const SyntaxTree &tree, const GraphEdit &edit);

} // namespace slicefix
