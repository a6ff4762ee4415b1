// SPDX-License-Identifier: Apache-2.0
#include "relforge/vcs.hpp"

#include <algorithm>
#include <regex>

namespace relforge::vcs {

using nlohmann::json;

BranchKind classify_branch(const std::string& name) {
  static const std::regex release_re(R"(release-(\d+))");
  static const std::regex dev_re(R"(dev/(\d+)/(.+))");
  static const std::regex pre_re(R"(pre/(.+))");

  std::smatch m;
  if (name == "main") return MainBranch{};
  if (std::regex_match(name, m, release_re))
    return ReleaseBranch{std::stoull(m[1])};
  if (std::regex_match(name, m, dev_re))
    return DevelopmentBranch{std::stoull(m[1]), m[2]};
  if (std::regex_match(name, m, pre_re))
    return PrereleaseBranch{version::parse_version(m[1])};
  throw std::invalid_argument("unrecognized branch name: " + name);
}

std::string branch_kind_name(const BranchKind& kind) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MainBranch>) return "main";
        if constexpr (std::is_same_v<T, ReleaseBranch>) return "release";
        if constexpr (std::is_same_v<T, DevelopmentBranch>) return "development";
        if constexpr (std::is_same_v<T, PrereleaseBranch>) return "prerelease";
      },
      kind);
}

const Branch& RepoState::branch(const std::string& name) const {
  auto it = branches.find(name);
  if (it == branches.end())
    throw std::invalid_argument("no such branch: " + name);
  return it->second;
}

bool RepoState::has_branch(const std::string& name) const {
  return branches.count(name) > 0;
}

void RepoState::check_invariants() const {
  std::size_t mains = 0;
  for (const auto& [name, b] : branches)
    if (std::holds_alternative<MainBranch>(b.kind)) ++mains;
  if (mains != 1)
    throw std::invalid_argument("repository must have exactly one main branch");
}

RepoState RepoState::from_json(const json& doc) {
  RepoState state;
  state.default_branch = doc.value("default_branch", "main");
  for (const auto& jb : doc.at("branches")) {
    Branch b;
    b.name = jb.at("name").get<std::string>();
    b.kind = classify_branch(b.name);
    b.head = jb.value("head", "");
    for (const auto& t : jb.value("tags", json::array())) {
      std::string tag = t.get<std::string>();
      if (!tag.empty() && tag[0] == 'v') tag.erase(0, 1);
      b.tags.add(version::parse_version(tag));
    }
    state.branches.emplace(b.name, std::move(b));
  }
  state.check_invariants();
  return state;
}

json RepoState::to_json() const {
  json out;
  out["default_branch"] = default_branch;
  out["branches"] = json::array();
  for (const auto& [name, b] : branches) {
    json jb;
    jb["name"] = name;
    jb["kind"] = branch_kind_name(b.kind);
    jb["head"] = b.head;
    jb["tags"] = json::array();
    for (const auto& v : b.tags.versions()) jb["tags"].push_back(tag_for(v));
    out["branches"].push_back(std::move(jb));
  }
  return out;
}

json BranchPlan::to_json() const {
  return json{{"action", "create-branch"},
              {"name", name},
              {"source", source},
              {"initial_commit_message", initial_commit_message},
              {"changelog_bootstrap", changelog_bootstrap},
              {"development_notice", development_notice}};
}

std::string to_string(MergeStrategy s) {
  return s == MergeStrategy::squash ? "squash" : "merge";
}

std::string to_string(VersionAction a) {
  switch (a) {
    case VersionAction::none: return "none";
    case VersionAction::finalize: return "finalize";
    case VersionAction::dev_release: return "dev-release";
    case VersionAction::prerelease: return "prerelease";
  }
  return {};
}

json MergePlan::to_json() const {
  return json{{"action", "merge"},
              {"source", source},
              {"target", target},
              {"strategy", to_string(strategy)},
              {"commit_message", commit_message},
              {"version_action", to_string(version_action)}};
}

namespace {

std::string initial_message(const TicketRef& t) {
  return t.type_id + ": start work on '" + t.title + "' (#" +
         std::to_string(t.number) + ")\n\nIssue: #" + std::to_string(t.number);
}

}  // namespace

std::vector<BranchPlan> plan_issue_branches(const TicketRef& ticket,
                                            const RepoState& state) {
  if (ticket.affected_versions.empty())
    throw std::invalid_argument("ticket lists no affected versions");

  // The latest release line lives on main; its major comes from main's tags.
  std::uint64_t latest_major = 0;
  if (auto lf = state.branch(state.default_branch).tags.latest_final())
    latest_major = lf->release.major;

  std::vector<BranchPlan> plans;
  std::vector<std::string> seen_targets;
  for (const auto& ver_text : ticket.affected_versions) {
    const auto ver = version::parse_version(ver_text);
    std::string target;
    if (ver.release.major == latest_major) {
      target = state.default_branch;
    } else {
      target = "release-" + std::to_string(ver.release.major);
      if (!state.has_branch(target))
        throw std::invalid_argument("affected version " + ver_text +
                                    " maps to no existing branch (" + target +
                                    ")");
    }
    if (std::find(seen_targets.begin(), seen_targets.end(), target) !=
        seen_targets.end())
      continue;
    seen_targets.push_back(target);

    BranchPlan plan;
    plan.name = "dev/" + std::to_string(ticket.number) + "/" + target;
    plan.source = target;
    plan.initial_commit_message = initial_message(ticket);
    plan.changelog_bootstrap = true;
    plan.development_notice = "Under development for issue #" +
                              std::to_string(ticket.number) + " (" +
                              ticket.title + ")";
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::optional<BranchPlan> plan_release_branch_split(const RepoState& state,
                                                   ChangeType c) {
  if (c != ChangeType::major) return std::nullopt;
  const auto& main = state.branch(state.default_branch);
  const auto latest = main.tags.latest_final();
  if (!latest) return std::nullopt;
  const std::string name = "release-" + std::to_string(latest->release.major);
  if (state.has_branch(name)) return std::nullopt;

  BranchPlan plan;
  plan.name = name;
  plan.source = state.default_branch;
  plan.initial_commit_message =
      "chore: preserve release line " + std::to_string(latest->release.major) +
      ".x as " + name;
  plan.changelog_bootstrap = false;
  return plan;
}

MergePlan plan_merge(const std::string& source, const std::string& target,
                     const RepoState& state, ChangeType c, std::uint64_t issue,
                     const std::string& title, const std::string& type_id) {
  const BranchKind src_kind = state.branch(source).kind;
  const BranchKind tgt_kind = state.branch(target).kind;

  const bool src_ok = std::holds_alternative<DevelopmentBranch>(src_kind) ||
                      std::holds_alternative<PrereleaseBranch>(src_kind);
  if (!src_ok)
    throw std::invalid_argument("merge source must be a development or "
                                "prerelease branch: " + source);
  const bool tgt_release = std::holds_alternative<MainBranch>(tgt_kind) ||
                           std::holds_alternative<ReleaseBranch>(tgt_kind);
  const bool tgt_pre = std::holds_alternative<PrereleaseBranch>(tgt_kind);
  if (!tgt_release && !tgt_pre)
    throw std::invalid_argument("merge target must be a release, main, or "
                                "prerelease branch: " + target);
  if (tgt_pre && !std::holds_alternative<DevelopmentBranch>(src_kind))
    throw std::invalid_argument(
        "only development branches may merge into prerelease branches");

  std::uint64_t issue_no = issue;
  if (issue_no == 0)
    if (const auto* dev = std::get_if<DevelopmentBranch>(&src_kind))
      issue_no = dev->issue;

  MergePlan plan;
  plan.source = source;
  plan.target = target;
  plan.strategy = MergeStrategy::squash;
  plan.version_action = tgt_pre ? VersionAction::prerelease
                                : VersionAction::finalize;
  const std::string type = type_id.empty() ? to_string(c) : type_id;
  const std::string summary = title.empty() ? ("merge " + source) : title;
  plan.commit_message = type + ": " + summary + " (#" +
                        std::to_string(issue_no) + ")\n\nIssue: #" +
                        std::to_string(issue_no);
  return plan;
}

std::string tag_for(const PublicVersion& v) {
  return "v" + version::format_version(v);
}

}  // namespace relforge::vcs
