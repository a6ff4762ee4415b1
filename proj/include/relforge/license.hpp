// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace relforge::license {

// ---------------------------------------------------------------------------
// Expression tree
//
// Grammar (precedence WITH > AND > OR, left-associative):
//   expr      = and-expr *( "OR" and-expr )
//   and-expr  = with-expr *( "AND" with-expr )
//   with-expr = primary [ "WITH" exception-id ]
//   primary   = id ["+"] | "(" expr ")"
//   id        = [A-Za-z0-9.-]+
// ---------------------------------------------------------------------------

struct LicenseExpr;
using ExprPtr = std::shared_ptr<const LicenseExpr>;

struct LicenseExpr {
  enum class Kind { id, with, and_op, or_op };
  Kind kind;
  std::string id;          // Kind::id
  bool or_later = false;   // Kind::id, "+" suffix
  std::string exception;   // Kind::with
  ExprPtr left, right;     // with: left=Id; and/or: both operands

  static ExprPtr make_id(std::string id, bool or_later = false);
  static ExprPtr make_with(ExprPtr id, std::string exception);
  static ExprPtr make_and(ExprPtr l, ExprPtr r);
  static ExprPtr make_or(ExprPtr l, ExprPtr r);
};

bool equal(const LicenseExpr& a, const LicenseExpr& b);

/// Minimal-parenthesis canonical rendering.
std::string to_string(const LicenseExpr& expr);

ExprPtr parse_license_expr(const std::string& text);

/// All license ids (with or-later suffix stripped into the flag) appearing
/// in the expression, in left-to-right order, de-duplicated.
std::vector<std::string> component_ids(const LicenseExpr& expr);
std::vector<std::string> exception_ids(const LicenseExpr& expr);

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct LicenseRecord {
  std::string id;
  std::string name;
  std::string text;  // placeholders as <<field>>
  std::string header_line;
  bool osi_approved = false;
  bool fsf_libre = false;
  bool deprecated = false;
};

/// Case-insensitive lookups, canonical-case storage. Loaded from the bundled
/// SPDX snapshot; user-defined entries can be added after load.
class LicenseRegistry {
 public:
  static LicenseRegistry from_json(const nlohmann::json& doc);
  static LicenseRegistry load_file(const std::string& path);

  void add_license(LicenseRecord record);
  void add_exception(LicenseRecord record);

  const LicenseRecord* find_license(const std::string& id) const;
  const LicenseRecord* find_exception(const std::string& id) const;

 private:
  std::map<std::string, LicenseRecord> licenses_;   // lowercase id -> record
  std::map<std::string, LicenseRecord> exceptions_;
};

struct Finding {
  enum class Severity { error, warning };
  Severity severity;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const;          // no error-severity findings
  bool empty() const { return findings.empty(); }
};

ValidationReport validate_license_expr(const LicenseExpr& expr,
                                       const LicenseRegistry& registry);

/// Substitute every <<field>> placeholder; missing fields are an error
/// naming the placeholder.
std::string customize_license_text(const LicenseRecord& record,
                                   const std::map<std::string, std::string>& fields);

/// Single id -> one LICENSE file; compound expression -> LICENSE stating the
/// expression plus LICENSES/<id>.txt per component.
std::vector<std::pair<std::string, std::string>> generate_license_docs(
    const LicenseExpr& expr, const LicenseRegistry& registry,
    const std::map<std::string, std::string>& fields);

struct CommentStyle {
  std::string line_prefix;  // e.g. "//" or "#"
};

/// Ensure the short-form identifier comment is present and current.
/// Idempotent; a stale identifier line is replaced in place.
std::string annotate_source(const std::string& content,
                            const CommentStyle& style,
                            const LicenseExpr& expr);

}  // namespace relforge::license
