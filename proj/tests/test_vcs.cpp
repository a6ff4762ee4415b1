// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>

#include "relforge/vcs.hpp"

using namespace relforge::vcs;
using relforge::version::ChangeType;
using relforge::version::parse_version;

#ifndef RELFORGE_FIXTURES_DIR
#define RELFORGE_FIXTURES_DIR "tests/fixtures"
#endif

namespace {

RepoState load_fixture(const std::string& name) {
  std::ifstream in(std::string(RELFORGE_FIXTURES_DIR) + "/" + name);
  REQUIRE(in);
  return RepoState::from_json(nlohmann::json::parse(in));
}

}  // namespace

TEST_CASE("branch names classify by the naming scheme") {
  CHECK(std::holds_alternative<MainBranch>(classify_branch("main")));
  CHECK(std::get<ReleaseBranch>(classify_branch("release-2")).major == 2);
  const auto dev = std::get<DevelopmentBranch>(classify_branch("dev/14/main"));
  CHECK(dev.issue == 14);
  CHECK(dev.target == "main");
  const auto pre = std::get<PrereleaseBranch>(classify_branch("pre/1.1.0a1"));
  CHECK(pre.ver == parse_version("1.1.0a1"));
  CHECK_THROWS(classify_branch("feature/foo"));
  CHECK_THROWS(classify_branch("release-x"));
  CHECK_THROWS(classify_branch("dev/1"));
}

TEST_CASE("repository snapshots round-trip through JSON") {
  const RepoState state = load_fixture("state_two_lines.json");
  CHECK(state.default_branch == "main");
  CHECK(state.branch("main").tags.versions().size() == 3);
  const RepoState again = RepoState::from_json(state.to_json());
  CHECK(again.to_json() == state.to_json());
}

TEST_CASE("a snapshot needs exactly one main branch") {
  nlohmann::json doc{{"default_branch", "release-1"},
                     {"branches",
                      {{{"name", "release-1"}, {"head", "x"},
                        {"tags", nlohmann::json::array()}}}}};
  CHECK_THROWS(RepoState::from_json(doc));
}

TEST_CASE("issue branches map affected versions to release lines") {
  const RepoState state = load_fixture("state_two_lines.json");
  TicketRef ticket;
  ticket.number = 9;
  ticket.type_id = "bug";
  ticket.title = "fix crash";
  ticket.change = ChangeType::patch;

  SUBCASE("latest major goes to the default branch") {
    ticket.affected_versions = {"2.0.0"};
    const auto plans = plan_issue_branches(ticket, state);
    REQUIRE(plans.size() == 1);
    CHECK(plans[0].name == "dev/9/main");
    CHECK(plans[0].source == "main");
    CHECK(plans[0].initial_commit_message ==
          "bug: start work on 'fix crash' (#9)\n\nIssue: #9");
    CHECK(plans[0].changelog_bootstrap);
  }
  SUBCASE("older majors go to their release branch") {
    ticket.affected_versions = {"1.1.0"};
    const auto plans = plan_issue_branches(ticket, state);
    REQUIRE(plans.size() == 1);
    CHECK(plans[0].name == "dev/9/release-1");
    CHECK(plans[0].source == "release-1");
  }
  SUBCASE("one branch per release line, duplicates collapsed") {
    ticket.affected_versions = {"1.0.0", "1.1.0", "2.0.0"};
    const auto plans = plan_issue_branches(ticket, state);
    REQUIRE(plans.size() == 2);
    CHECK(plans[0].name == "dev/9/release-1");
    CHECK(plans[1].name == "dev/9/main");
  }
  SUBCASE("a version with no release branch is an error") {
    ticket.affected_versions = {"0.9.0"};
    CHECK_THROWS(plan_issue_branches(ticket, state));
  }
  SUBCASE("no affected versions is an error") {
    ticket.affected_versions = {};
    CHECK_THROWS(plan_issue_branches(ticket, state));
  }
}

TEST_CASE("a release branch split precedes only major merges") {
  const RepoState state = load_fixture("state0.json");
  CHECK_FALSE(plan_release_branch_split(state, ChangeType::minor).has_value());
  CHECK_FALSE(plan_release_branch_split(state, ChangeType::patch).has_value());
  const auto plan = plan_release_branch_split(state, ChangeType::major);
  REQUIRE(plan.has_value());
  CHECK(plan->name == "release-1");
  CHECK(plan->source == "main");
  CHECK_FALSE(plan->changelog_bootstrap);

  // The split always targets the latest line, and is idempotent once that
  // line's branch exists.
  RepoState two = load_fixture("state_two_lines.json");
  const auto second = plan_release_branch_split(two, ChangeType::major);
  REQUIRE(second.has_value());
  CHECK(second->name == "release-2");
  Branch r2;
  r2.name = "release-2";
  r2.kind = classify_branch(r2.name);
  two.branches.emplace(r2.name, r2);
  CHECK_FALSE(plan_release_branch_split(two, ChangeType::major).has_value());
}

TEST_CASE("merge plans squash and pick the version action by target") {
  RepoState state = load_fixture("state0.json");
  Branch dev;
  dev.name = "dev/3/main";
  dev.kind = classify_branch(dev.name);
  state.branches.emplace(dev.name, dev);
  Branch pre;
  pre.name = "pre/1.1.0a3";
  pre.kind = classify_branch(pre.name);
  state.branches.emplace(pre.name, pre);

  const auto to_main = plan_merge("dev/3/main", "main", state,
                                  ChangeType::minor, 3, "add thing", "feature");
  CHECK(to_main.strategy == MergeStrategy::squash);
  CHECK(to_main.version_action == VersionAction::finalize);
  CHECK(to_main.commit_message ==
        "feature: add thing (#3)\n\nIssue: #3");

  const auto to_pre = plan_merge("dev/3/main", "pre/1.1.0a3", state,
                                 ChangeType::minor);
  CHECK(to_pre.version_action == VersionAction::prerelease);
  CHECK(to_pre.commit_message.find("#3") != std::string::npos);

  CHECK_THROWS(plan_merge("main", "main", state, ChangeType::minor));
  CHECK_THROWS(plan_merge("pre/1.1.0a3", "pre/1.1.0a3", state,
                          ChangeType::minor));
}

TEST_CASE("tags prefix the canonical text with v") {
  CHECK(tag_for(parse_version("1.1.0rc1.post2")) == "v1.1.0rc1.post2");
}
