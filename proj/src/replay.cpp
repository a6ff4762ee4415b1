// SPDX-License-Identifier: Apache-2.0
#include "relforge/replay.hpp"

#include <algorithm>
#include <fstream>

namespace relforge::replay {

using nlohmann::json;
using orchestrator::ActionPlan;
using orchestrator::RepoEvent;
using orchestrator::TaskItem;
using version::PublicVersion;

ReplaySession::ReplaySession(vcs::RepoState initial, config::ConfigTree tree)
    : state_(std::move(initial)), tree_(std::move(tree)) {
  forms_ = issue::refresh_form_choices(issue::compile_forms(tree_), state_, {});
}

ActionPlan ReplaySession::apply(const RepoEvent& event) {
  // Events that act on a ticket carry only its number; the dispatcher needs
  // the full ticket document, so it is attached from the session registry.
  RepoEvent enriched = event;
  if (event.kind == orchestrator::EventKind::issue_labeled &&
      !event.payload.contains("ticket")) {
    const auto number = event.payload.at("number").get<std::uint64_t>();
    auto it = tickets_.find(number);
    if (it == tickets_.end())
      throw std::invalid_argument("event references unknown ticket #" +
                                  std::to_string(number));
    enriched.payload["ticket"] = it->second.to_json();
  }

  ActionPlan plan = orchestrator::dispatch(enriched, state_, tree_);
  for (const auto& task : plan.tasks) apply_task(task, enriched);
  return plan;
}

void ReplaySession::apply_task(const TaskItem& task, const RepoEvent& event) {
  if (task.id == "process-submission") {
    process_submission(task.params);
  } else if (task.id == "create-branch") {
    create_branch(task.params);
  } else if (task.id == "version-dev-release") {
    dev_release(task.params.at("branch").get<std::string>());
  } else if (task.id == "version-prerelease") {
    prerelease(task.params.at("source").get<std::string>(),
               task.params.at("phase").get<std::string>());
  } else if (task.id == "version-finalize") {
    finalize(task.params.at("source").get<std::string>(),
             task.params.at("target").get<std::string>());
  } else if (task.id == "close-ticket") {
    const auto number = task.params.at("number").get<std::uint64_t>();
    if (auto it = tickets_.find(number); it != tickets_.end())
      it->second.status = issue::TicketStatus::rejected;
  }
  // Remaining ids are opaque tasks for external runners; no repository effect.
  (void)event;
}

void ReplaySession::process_submission(const json& payload) {
  const auto submission = issue::Submission::from_json(payload);
  const issue::FormDefinition* form = nullptr;
  for (const auto& f : forms_)
    if (f.id == submission.form_id) form = &f;
  if (!form)
    throw std::invalid_argument("unknown issue form: " + submission.form_id);
  auto processed = issue::process_submission(*form, submission, tree_);
  tickets_[processed.ticket.number] = processed.ticket;
}

void ReplaySession::create_branch(const json& params) {
  const std::string name = params.at("name").get<std::string>();
  const std::string source = params.at("source").get<std::string>();
  if (state_.has_branch(name)) return;  // split plans are idempotent
  vcs::Branch branch;
  branch.name = name;
  branch.kind = vcs::classify_branch(name);
  branch.head = state_.branch(source).head;
  branch.tags = state_.branch(source).tags;  // lineage snapshot
  state_.branches.emplace(name, std::move(branch));
}

void ReplaySession::publish_tag(const std::string& branch_name,
                                const PublicVersion& v) {
  state_.branches.at(branch_name).tags.add(v);
  tags_.push_back(vcs::tag_for(v));
}

void ReplaySession::dev_release(const std::string& branch_name) {
  vcs::Branch& branch = state_.branches.at(branch_name);
  const auto* dev = std::get_if<vcs::DevelopmentBranch>(&branch.kind);
  if (!dev)
    throw std::invalid_argument("dev release on non-development branch: " +
                                branch_name);
  auto ticket = tickets_.find(dev->issue);
  if (ticket == tickets_.end())
    throw std::invalid_argument("no ticket for issue #" +
                                std::to_string(dev->issue));
  const auto change = issue::change_type_for(ticket->second.type_id, tree_);
  // The branch carries its lineage snapshot, so it serves as both the dev
  // history and the view of the target's finals at branch time.
  const PublicVersion v =
      version::next_dev_version(branch.tags, branch.tags, change, dev->issue);
  publish_tag(branch_name, v);
}

void ReplaySession::prerelease(const std::string& source,
                               const std::string& phase_text) {
  vcs::Branch& src = state_.branches.at(source);
  std::uint64_t issue_no = 0;
  if (const auto* dev = std::get_if<vcs::DevelopmentBranch>(&src.kind))
    issue_no = dev->issue;
  else if (const auto* pre = std::get_if<vcs::PrereleaseBranch>(&src.kind))
    issue_no = pre->ver.pre ? pre->ver.pre->number : 0;
  if (issue_no == 0)
    throw std::invalid_argument("prerelease from branch without an issue: " +
                                source);

  const auto phase = version::phase_from_string(phase_text);
  const PublicVersion v =
      version::next_prerelease_version(src.tags, issue_no, phase);

  if (v.post) {
    // Same phase refined: the post-release lands on the existing branch.
    publish_tag(source, v);
    return;
  }
  const std::string name = "pre/" + version::format_version(v);
  vcs::Branch branch;
  branch.name = name;
  branch.kind = vcs::PrereleaseBranch{v};
  branch.head = src.head;
  branch.tags = src.tags;
  state_.branches.emplace(name, std::move(branch));
  publish_tag(name, v);
}

void ReplaySession::finalize(const std::string& source,
                             const std::string& target) {
  vcs::Branch& src = state_.branches.at(source);
  vcs::Branch& tgt = state_.branches.at(target);

  // Candidate: the highest prerelease tag published from the source lineage.
  std::optional<PublicVersion> candidate;
  for (const auto& v : src.tags.versions())
    if (v.pre) candidate = v;
  if (!candidate)
    throw std::invalid_argument("source branch has no prerelease tags: " +
                                source);

  const std::uint64_t issue_no = candidate->pre->number;
  auto ticket = tickets_.find(issue_no);
  if (ticket == tickets_.end())
    throw std::invalid_argument("no ticket for issue #" +
                                std::to_string(issue_no));
  const auto change = issue::change_type_for(ticket->second.type_id, tree_);

  // Backward-incompatible merges preserve the old line first.
  if (change == version::ChangeType::major)
    if (auto split = vcs::plan_release_branch_split(state_, change))
      create_branch(split->to_json());

  const version::ReleaseVersion final_release =
      version::finalize_version(*candidate, tgt.tags, change);
  PublicVersion v;
  v.release = final_release;
  publish_tag(target, v);
  ticket->second.status = issue::TicketStatus::done;

  // Transient branches of this issue are retired after the final merge.
  std::vector<std::string> to_erase;
  for (const auto& [name, b] : state_.branches) {
    if (const auto* dev = std::get_if<vcs::DevelopmentBranch>(&b.kind))
      if (dev->issue == issue_no) to_erase.push_back(name);
    if (const auto* pre = std::get_if<vcs::PrereleaseBranch>(&b.kind))
      if (pre->ver.pre && pre->ver.pre->number == issue_no)
        to_erase.push_back(name);
  }
  for (const auto& name : to_erase) state_.branches.erase(name);
}

json ReplaySession::final_document() const {
  return json{{"state", state_.to_json()}, {"tags", tags_}};
}

std::vector<RepoEvent> load_event_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log: " + path);
  std::vector<RepoEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(RepoEvent::from_json(json::parse(line)));
  }
  return events;
}

}  // namespace relforge::replay
