#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "effsec/goal.hpp"
#include "effsec/model.hpp"

namespace effsec {

/// A named-goal wrapper: the textual format binds goals to a document.
using GoalSpec = Goal;

struct ModelDocument {
  TransitionNetwork network;
  std::map<std::string, GoalSpec> goals;
  /// Structural findings from validate_network; parsing still succeeds.
  ValidationReport warnings;
};

bool structurally_equal(const ModelDocument& a, const ModelDocument& b);

struct ParseError {
  int line = 0;
  int column = 0;
  std::string message;
  std::vector<std::string> expected;
};

struct ParseResult {
  std::optional<ModelDocument> document;
  std::optional<ParseError> error;

  bool ok() const { return document.has_value(); }
};

/// Parses the textual network format. Total: every input yields either a
/// document or a positioned error, never an exception. Undeclared references,
/// duplicate transition keys and malformed goals are parse-time errors;
/// structural invariant breaches (e.g. availability-awareness) come back as
/// warnings on the document.
ParseResult parse_model(const std::string& text);

/// Canonical text: every block sorted, so that parse(serialize(d)) is
/// structurally equal to d and serialization is a fixpoint.
std::string serialize_model(const ModelDocument& doc);

}  // namespace effsec
