// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relforge/config.hpp"
#include "relforge/vcs.hpp"

namespace relforge::orchestrator {

enum class EventKind {
  issue_opened,
  issue_labeled,
  comment_posted,
  commit_pushed,
  pr_approved,
  merged,
  scheduled,
};

EventKind event_kind_from_string(const std::string& s);
std::string to_string(EventKind k);

struct RepoEvent {
  EventKind kind;
  nlohmann::json payload;
  std::string branch;

  static RepoEvent from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct TaskItem {
  std::string id;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Ordered, deterministic task list emitted in response to one event.
struct ActionPlan {
  std::vector<TaskItem> tasks;
  std::string provenance;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// The closed task vocabulary; every emitted id is a member.
const std::set<std::string>& task_vocabulary();

/// Path classes touched by a changeset.
struct ChangesetSummary {
  std::set<std::string> classes;  // subset of {source, config, docs, tests}
};

/// CI task ids for a changeset, filtered by touched path classes and ordered
/// by the fixed pipeline order. An empty changeset plans only the report.
std::vector<std::string> plan_ci(const ChangesetSummary& changeset,
                                 const config::ConfigTree& tree);

struct MergeResult {
  version::PublicVersion version;
  std::string branch;
};

/// Deployment plan: tag, finalize the changelog, render notes, then one
/// opaque publish task per configured target.
ActionPlan plan_cd(const MergeResult& merge, const config::ConfigTree& tree);

/// Map one repository event to its action plan. Pure: equal inputs give
/// byte-identical plans.
ActionPlan dispatch(const RepoEvent& event, const vcs::RepoState& state,
                    const config::ConfigTree& tree);

}  // namespace relforge::orchestrator
