// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relforge/config.hpp"
#include "relforge/vcs.hpp"

namespace relforge::issue {

struct FormField {
  enum class Kind { dropdown, text, textarea, checkboxes };
  std::string key;
  Kind kind = Kind::text;
  std::string label;
  std::vector<std::string> options;  // dropdown/checkboxes
  std::string source;                // "versions" | "api" | ""
  bool required = false;
};

struct FormDefinition {
  std::string id;
  std::string issue_type;
  std::string title_template;
  std::string description;
  std::vector<FormField> fields;

  const FormField* find_field(const std::string& key) const;
};

enum class TicketStatus { triage, rejected, ready, in_progress, review, done };

std::string to_string(TicketStatus s);
TicketStatus ticket_status_from_string(const std::string& s);

struct Ticket {
  std::uint64_t number = 0;
  std::string type_id;
  std::map<std::string, std::string> inputs;
  std::set<std::string> labels;
  std::vector<std::string> assignees;
  TicketStatus status = TicketStatus::triage;
  std::string title;

  std::vector<std::string> affected_versions() const;
  std::vector<std::string> api_endpoints() const;

  nlohmann::json to_json() const;
  static Ticket from_json(const nlohmann::json& doc);
};

struct ProtocolTask {
  std::string text;
  bool done = false;
};

/// Per-ticket development document: URD is generated from the submission,
/// SRD/SDD are free text for maintainers, the task list and activity log are
/// machine-maintained.
struct ProtocolDoc {
  std::string urd;
  std::string srd;
  std::string sdd;
  std::vector<ProtocolTask> tasks;
  std::vector<std::string> activity_log;  // append-only
  std::vector<std::uint64_t> linked_prs;

  std::size_t done_count() const;
  /// Markdown with an HTML-comment-delimited machine section (JSON state).
  std::string render_markdown() const;
  static ProtocolDoc parse_markdown(const std::string& text);
};

struct Command {
  std::string verb;
  std::map<std::string, std::string> arguments;
};

/// Compile one form per configured issue type from `issues.forms`.
std::vector<FormDefinition> compile_forms(const config::ConfigTree& tree);

/// Repopulate `source: versions` dropdowns from final-release tags
/// (descending) and `source: api` dropdowns from the endpoint index.
std::vector<FormDefinition> refresh_form_choices(
    std::vector<FormDefinition> forms, const vcs::RepoState& state,
    const std::vector<std::string>& api_index);

/// Platform issue-form YAML subset for one form.
std::string emit_form_yaml(const FormDefinition& form);

struct Submission {
  std::string form_id;
  std::uint64_t number = 0;
  std::map<std::string, std::string> inputs;

  static Submission from_json(const nlohmann::json& doc);
};

struct ProcessedSubmission {
  Ticket ticket;
  ProtocolDoc protocol;
};

ProcessedSubmission process_submission(const FormDefinition& form,
                                       const Submission& payload,
                                       const config::ConfigTree& tree);

struct TransitionAction {
  std::string id;  // e.g. "close-ticket", "create-branch", "open-draft-pr"
  nlohmann::json params;
};

struct TransitionPlan {
  TicketStatus new_status;
  std::vector<TransitionAction> actions;
};

/// Transition table: triage -> {rejected, ready}; ready -> in-progress;
/// in-progress -> review; review -> {in-progress, done}.
TransitionPlan apply_status_transition(const Ticket& ticket,
                                       const std::string& new_label,
                                       const vcs::RepoState& state,
                                       const config::ConfigTree& tree);

/// Lines starting with "/" parse to a Command; anything else is no command.
std::optional<Command> parse_command_comment(const std::string& text);

/// Change type for an issue type, via the control-center mapping
/// (defaults: breaking->major, feature->minor, bugfix->patch).
version::ChangeType change_type_for(const std::string& type_id,
                                    const config::ConfigTree& tree);

vcs::TicketRef ticket_ref(const Ticket& ticket, const config::ConfigTree& tree);

}  // namespace relforge::issue
