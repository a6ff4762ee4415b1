// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "relforge/version.hpp"

namespace relforge::vcs {

using version::ChangeType;
using version::PublicVersion;
using version::TagHistory;

struct MainBranch {};
struct ReleaseBranch {
  std::uint64_t major = 0;
};
struct DevelopmentBranch {
  std::uint64_t issue = 0;
  std::string target;  // name of the release branch the work targets
};
struct PrereleaseBranch {
  PublicVersion ver;
};

using BranchKind =
    std::variant<MainBranch, ReleaseBranch, DevelopmentBranch, PrereleaseBranch>;

/// Naming scheme: main | release-<major> | dev/<issue>/<target> | pre/<version>.
BranchKind classify_branch(const std::string& name);
std::string branch_kind_name(const BranchKind& kind);

struct Branch {
  std::string name;
  BranchKind kind;
  std::string head;  // commit id
  TagHistory tags;
};

/// Abstract repository snapshot. Consumed as a JSON document; mutation is
/// performed by whatever applies the emitted plans.
struct RepoState {
  std::map<std::string, Branch> branches;
  std::string default_branch = "main";

  const Branch& branch(const std::string& name) const;
  bool has_branch(const std::string& name) const;
  void check_invariants() const;  // exactly one Main

  static RepoState from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct BranchPlan {
  std::string name;
  std::string source;
  std::string initial_commit_message;
  bool changelog_bootstrap = true;
  std::string development_notice;

  nlohmann::json to_json() const;
};

enum class MergeStrategy { squash, merge };
enum class VersionAction { none, finalize, dev_release, prerelease };

std::string to_string(MergeStrategy s);
std::string to_string(VersionAction a);

struct MergePlan {
  std::string source;
  std::string target;
  MergeStrategy strategy = MergeStrategy::squash;
  std::string commit_message;
  VersionAction version_action = VersionAction::none;

  nlohmann::json to_json() const;
};

struct TicketRef {
  std::uint64_t number = 0;
  std::string type_id;
  std::string title;
  std::vector<std::string> affected_versions;  // public version strings
  ChangeType change;
};

/// One development branch per affected release line. The affected version's
/// major selects the branch: the latest line lives on main, earlier majors on
/// release-<major>.
std::vector<BranchPlan> plan_issue_branches(const TicketRef& ticket,
                                            const RepoState& state);

/// A major-level change splits off release-<current major> from main first,
/// preserving the old line. No-op for minor/patch or when the branch exists.
std::optional<BranchPlan> plan_release_branch_split(const RepoState& state,
                                                   ChangeType c);

MergePlan plan_merge(const std::string& source, const std::string& target,
                     const RepoState& state, ChangeType c,
                     std::uint64_t issue = 0, const std::string& title = {},
                     const std::string& type_id = {});

/// "v" + canonical version text; injective because format_version is.
std::string tag_for(const PublicVersion& v);

}  // namespace relforge::vcs
