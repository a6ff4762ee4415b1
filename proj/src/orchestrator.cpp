// SPDX-License-Identifier: Apache-2.0
#include "relforge/orchestrator.hpp"

#include <algorithm>

#include "relforge/issue.hpp"

namespace relforge::orchestrator {

using config::ConfigTree;
using nlohmann::json;

EventKind event_kind_from_string(const std::string& s) {
  if (s == "issue_opened") return EventKind::issue_opened;
  if (s == "issue_labeled") return EventKind::issue_labeled;
  if (s == "comment_posted") return EventKind::comment_posted;
  if (s == "commit_pushed") return EventKind::commit_pushed;
  if (s == "pr_approved") return EventKind::pr_approved;
  if (s == "merged") return EventKind::merged;
  if (s == "scheduled") return EventKind::scheduled;
  throw std::invalid_argument("unknown event kind: " + s);
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::issue_opened: return "issue_opened";
    case EventKind::issue_labeled: return "issue_labeled";
    case EventKind::comment_posted: return "comment_posted";
    case EventKind::commit_pushed: return "commit_pushed";
    case EventKind::pr_approved: return "pr_approved";
    case EventKind::merged: return "merged";
    case EventKind::scheduled: return "scheduled";
  }
  return {};
}

RepoEvent RepoEvent::from_json(const json& doc) {
  RepoEvent e;
  e.kind = event_kind_from_string(doc.at("kind").get<std::string>());
  e.payload = doc.value("payload", json::object());
  e.branch = doc.value("branch", "");
  return e;
}

json RepoEvent::to_json() const {
  return json{{"kind", to_string(kind)}, {"payload", payload},
              {"branch", branch}};
}

json TaskItem::to_json() const {
  return json{{"id", id}, {"params", params}};
}

json ActionPlan::to_json() const {
  json out;
  out["tasks"] = json::array();
  for (const auto& t : tasks) out["tasks"].push_back(t.to_json());
  out["provenance"] = provenance;
  if (!warnings.empty()) out["warnings"] = warnings;
  return out;
}

const std::set<std::string>& task_vocabulary() {
  static const std::set<std::string> vocabulary = {
      // CI pipeline (fixed order).
      "cca", "format", "code-analysis", "data-validation", "refactor",
      "dependency-review", "build", "containerize", "test", "website-build",
      "changelog-update", "draft-update", "progress-track", "report",
      // Issue management.
      "process-submission", "create-branch", "open-draft-pr",
      "changelog-bootstrap", "close-ticket", "protocol-append",
      // Versioning and merging.
      "merge", "version-dev-release", "version-prerelease", "version-finalize",
      "tag", "changelog-finalize", "notes-render", "publish",
      // Scheduled maintenance.
      "dependency-refresh-check", "cleanup", "create-maintenance-pr",
  };
  return vocabulary;
}

namespace {

// Pipeline order and the path classes that trigger each task. build,
// containerize, and draft-update are off unless enabled in the control
// center (their runners live outside this engine either way).
struct CiRule {
  const char* id;
  std::set<std::string> classes;  // empty = only when explicitly enabled
  bool always = false;
};

const std::vector<CiRule>& ci_rules() {
  static const std::vector<CiRule> rules = {
      {"cca", {}, true},
      {"format", {"source", "docs", "tests"}},
      {"code-analysis", {"source", "tests"}},
      {"data-validation", {"source", "config", "tests"}},
      {"refactor", {"source", "tests"}},
      {"dependency-review", {"source"}},
      {"build", {}},
      {"containerize", {}},
      {"test", {"source", "tests"}},
      {"website-build", {"docs"}},
      {"changelog-update", {}, true},
      {"draft-update", {}},
      {"progress-track", {"source", "tests"}},
      {"report", {}, true},
  };
  return rules;
}

bool ci_task_enabled(const std::string& id, const ConfigTree& tree) {
  const config::ConfigNode* enabled = tree.at_path("workflows.ci.enable");
  if (!enabled || !enabled->is_sequence()) return false;
  for (const auto& e : enabled->elements())
    if (e.as_string() == id) return true;
  return false;
}

TaskItem bare(const std::string& id) { return TaskItem{id, json::object()}; }

}  // namespace

std::vector<std::string> plan_ci(const ChangesetSummary& changeset,
                                 const ConfigTree& tree) {
  if (changeset.classes.empty()) return {"report"};
  std::vector<std::string> tasks;
  for (const auto& rule : ci_rules()) {
    bool triggered = rule.always;
    for (const auto& cls : changeset.classes)
      triggered = triggered || rule.classes.count(cls) > 0;
    if (!triggered && rule.classes.empty() && !rule.always)
      triggered = ci_task_enabled(rule.id, tree);
    if (triggered) tasks.push_back(rule.id);
  }
  return tasks;
}

ActionPlan plan_cd(const MergeResult& merge, const ConfigTree& tree) {
  ActionPlan plan;
  plan.provenance = "merge into " + merge.branch;
  plan.tasks.push_back(
      {"tag", {{"tag", vcs::tag_for(merge.version)}, {"branch", merge.branch}}});
  plan.tasks.push_back(bare("changelog-finalize"));
  plan.tasks.push_back(bare("notes-render"));
  const config::ConfigNode* targets = tree.at_path("workflows.cd.publish_targets");
  if (targets && targets->is_sequence() && !targets->elements().empty()) {
    for (const auto& t : targets->elements())
      plan.tasks.push_back({"publish", {{"target", t.as_string()}}});
  } else {
    plan.warnings.push_back("no publish targets configured");
  }
  return plan;
}

namespace {

ChangesetSummary changeset_from_payload(const json& payload) {
  ChangesetSummary cs;
  for (const auto& c : payload.value("classes", json::array()))
    cs.classes.insert(c.get<std::string>());
  // Default: a push with unclassified paths is treated as a source change.
  if (cs.classes.empty() && !payload.contains("classes"))
    cs.classes.insert("source");
  return cs;
}

void dispatch_issue_labeled(const RepoEvent& event, const vcs::RepoState& state,
                            const ConfigTree& tree, ActionPlan& plan) {
  const std::string label = event.payload.at("label").get<std::string>();
  issue::Ticket ticket = issue::Ticket::from_json(event.payload.at("ticket"));
  const auto transition =
      issue::apply_status_transition(ticket, label, state, tree);
  for (const auto& action : transition.actions) {
    plan.tasks.push_back({action.id, action.params});
    if (action.id == "create-branch" && action.params.value("changelog_bootstrap", false))
      plan.tasks.push_back({"changelog-bootstrap",
                            {{"branch", action.params.at("name")},
                             {"issue", ticket.number}}});
  }
}

void dispatch_commit_pushed(const RepoEvent& event, const vcs::RepoState& state,
                            const ConfigTree& tree, ActionPlan& plan) {
  for (const auto& id : plan_ci(changeset_from_payload(event.payload), tree))
    plan.tasks.push_back(bare(id));

  const vcs::BranchKind kind = vcs::classify_branch(event.branch);
  const bool release_related = event.payload.value("release_related", true);
  if (std::holds_alternative<vcs::DevelopmentBranch>(kind) && release_related)
    plan.tasks.push_back({"version-dev-release", {{"branch", event.branch}}});
  (void)state;
}

void dispatch_merged(const RepoEvent& event, const vcs::RepoState& state,
                     const ConfigTree& tree, ActionPlan& plan) {
  const std::string source = event.payload.at("source").get<std::string>();
  const std::string target = event.payload.at("target").get<std::string>();
  if (target == "pre" || target.rfind("pre/", 0) == 0) {
    plan.tasks.push_back({"version-prerelease",
                          {{"source", source},
                           {"phase", event.payload.value("phase", "a")}}});
    return;
  }
  if (event.payload.value("change_type", "") == "major") {
    const auto split =
        vcs::plan_release_branch_split(state, version::ChangeType::major);
    if (split) plan.tasks.push_back({"create-branch", split->to_json()});
  }
  plan.tasks.push_back(
      {"version-finalize", {{"source", source}, {"target", target}}});
  plan.tasks.push_back(bare("changelog-finalize"));
  plan.tasks.push_back(bare("notes-render"));
  const config::ConfigNode* targets =
      tree.at_path("workflows.cd.publish_targets");
  if (targets && targets->is_sequence())
    for (const auto& t : targets->elements())
      plan.tasks.push_back({"publish", {{"target", t.as_string()}}});
}

}  // namespace

ActionPlan dispatch(const RepoEvent& event, const vcs::RepoState& state,
                    const ConfigTree& tree) {
  ActionPlan plan;
  plan.provenance = to_string(event.kind);

  switch (event.kind) {
    case EventKind::issue_opened:
      plan.tasks.push_back({"process-submission", event.payload});
      break;
    case EventKind::issue_labeled:
      dispatch_issue_labeled(event, state, tree, plan);
      break;
    case EventKind::comment_posted: {
      const auto cmd = issue::parse_command_comment(
          event.payload.value("text", ""));
      if (cmd) plan.tasks.push_back({cmd->verb, json(cmd->arguments)});
      break;
    }
    case EventKind::commit_pushed:
      dispatch_commit_pushed(event, state, tree, plan);
      break;
    case EventKind::pr_approved: {
      const std::string source = event.payload.at("source").get<std::string>();
      const std::string target = event.payload.at("target").get<std::string>();
      const auto change = version::change_type_from_string(
          event.payload.value("change_type", "patch"));
      const auto merge = vcs::plan_merge(
          source, target, state, change,
          event.payload.value("issue", std::uint64_t{0}),
          event.payload.value("title", std::string{}),
          event.payload.value("type", std::string{}));
      plan.tasks.push_back({"merge", merge.to_json()});
      break;
    }
    case EventKind::merged:
      dispatch_merged(event, state, tree, plan);
      break;
    case EventKind::scheduled:
      plan.tasks.push_back(bare("dependency-refresh-check"));
      plan.tasks.push_back(bare("cca"));
      plan.tasks.push_back(bare("refactor"));
      plan.tasks.push_back(bare("cleanup"));
      plan.tasks.push_back(bare("create-maintenance-pr"));
      break;
  }

  for (const auto& task : plan.tasks)
    if (!task_vocabulary().count(task.id))
      throw std::logic_error("task id outside the closed vocabulary: " +
                             task.id);
  return plan;
}

}  // namespace relforge::orchestrator
