// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "relforge/issue.hpp"
#include "relforge/orchestrator.hpp"

namespace relforge::replay {

/// Event-log replayer: dispatches each event and applies the resulting plan
/// to an in-memory repository snapshot, recording every tag as it is
/// published. Strictly sequential; replaying the same log from the same
/// initial state reproduces the same final state and tag sequence.
class ReplaySession {
 public:
  ReplaySession(vcs::RepoState initial, config::ConfigTree tree);

  orchestrator::ActionPlan apply(const orchestrator::RepoEvent& event);

  const vcs::RepoState& state() const { return state_; }
  const std::vector<std::string>& tags() const { return tags_; }

  nlohmann::json final_document() const;  // state + tag sequence

 private:
  void apply_task(const orchestrator::TaskItem& task,
                  const orchestrator::RepoEvent& event);
  void process_submission(const nlohmann::json& payload);
  void create_branch(const nlohmann::json& params);
  void dev_release(const std::string& branch);
  void prerelease(const std::string& source, const std::string& phase);
  void finalize(const std::string& source, const std::string& target);
  void publish_tag(const std::string& branch, const version::PublicVersion& v);

  vcs::RepoState state_;
  config::ConfigTree tree_;
  std::vector<issue::FormDefinition> forms_;
  std::map<std::uint64_t, issue::Ticket> tickets_;
  std::vector<std::string> tags_;
};

/// Parse a JSON-lines event log.
std::vector<orchestrator::RepoEvent> load_event_log(const std::string& path);

}  // namespace relforge::replay
