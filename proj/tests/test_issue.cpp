// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>

#include "relforge/issue.hpp"

using namespace relforge::issue;
using relforge::config::ConfigTree;
using relforge::config::load_tree;
using relforge::config::render_templates;
using relforge::vcs::RepoState;

#ifndef RELFORGE_DATA_DIR
#define RELFORGE_DATA_DIR "data"
#endif
#ifndef RELFORGE_FIXTURES_DIR
#define RELFORGE_FIXTURES_DIR "tests/fixtures"
#endif

namespace {

const ConfigTree& control_tree() {
  static const ConfigTree tree =
      render_templates(load_tree(std::string(RELFORGE_DATA_DIR) + "/control"));
  return tree;
}

RepoState fixture_state(const std::string& name) {
  std::ifstream in(std::string(RELFORGE_FIXTURES_DIR) + "/" + name);
  REQUIRE(in);
  return RepoState::from_json(nlohmann::json::parse(in));
}

Submission fixture_submission(const std::string& name) {
  std::ifstream in(std::string(RELFORGE_FIXTURES_DIR) + "/" + name);
  REQUIRE(in);
  return Submission::from_json(nlohmann::json::parse(in));
}

std::vector<FormDefinition> refreshed_forms() {
  return refresh_form_choices(compile_forms(control_tree()),
                              fixture_state("state_two_lines.json"),
                              {"run", "export"});
}

const FormDefinition& form_by_id(const std::vector<FormDefinition>& forms,
                                 const std::string& id) {
  for (const auto& f : forms)
    if (f.id == id) return f;
  FAIL(("no such form: " + id).c_str());
  std::abort();
}

}  // namespace

TEST_CASE("forms compile from the control center") {
  const auto forms = compile_forms(control_tree());
  REQUIRE(forms.size() == 3);
  CHECK(forms[0].id == "bug-report");
  CHECK(forms[0].issue_type == "bug");
  CHECK(forms[0].find_field("version")->source == "versions");
  CHECK(forms[0].find_field("endpoint")->source == "api");
  CHECK(forms[1].id == "feature-request");
  CHECK(forms[2].id == "breaking-change");
}

TEST_CASE("dynamic choices come from tags and the endpoint index") {
  const auto forms = refreshed_forms();
  const auto& bug = form_by_id(forms, "bug-report");
  CHECK(bug.find_field("version")->options ==
        std::vector<std::string>{"2.0.0", "1.1.0", "1.0.0"});
  CHECK(bug.find_field("endpoint")->options ==
        std::vector<std::string>{"run", "export"});

  // No releases yet: the placeholder keeps the dropdown usable.
  RepoState empty;
  empty.default_branch = "main";
  relforge::vcs::Branch main;
  main.name = "main";
  main.kind = relforge::vcs::MainBranch{};
  empty.branches.emplace("main", main);
  const auto fresh =
      refresh_form_choices(compile_forms(control_tree()), empty, {});
  const auto& fresh_bug = form_by_id(fresh, "bug-report");
  CHECK(fresh_bug.find_field("version")->options ==
        std::vector<std::string>{"unreleased"});
  CHECK_FALSE(fresh_bug.find_field("endpoint")->required);
}

TEST_CASE("form YAML lists each field with its validations") {
  const auto forms = refreshed_forms();
  const std::string yaml = emit_form_yaml(form_by_id(forms, "bug-report"));
  CHECK(yaml.find("name: Bug report") != std::string::npos);
  CHECK(yaml.find("id: version") != std::string::npos);
  CHECK(yaml.find("- \"2.0.0\"") != std::string::npos);
  CHECK(yaml.find("required: true") != std::string::npos);
}

TEST_CASE("a submission becomes a labeled ticket with a protocol") {
  const auto forms = refreshed_forms();
  const auto result =
      process_submission(form_by_id(forms, "bug-report"),
                         fixture_submission("bug_submission.json"),
                         control_tree());

  const Ticket& t = result.ticket;
  CHECK(t.number == 7);
  CHECK(t.type_id == "bug");
  CHECK(t.status == TicketStatus::triage);
  CHECK(t.labels == std::set<std::string>{"type/bug", "version/1.1.0",
                                          "api/run"});
  CHECK(t.assignees == std::vector<std::string>{"alice"});
  CHECK(t.title == "Crash when exporting empty run");

  const std::string md = result.protocol.render_markdown();
  CHECK(md.find("## User Requirements Document (URD)") != std::string::npos);
  CHECK(md.find("## Software Requirements Document (SRD)") != std::string::npos);
  CHECK(md.find("## Software Design Document (SDD)") != std::string::npos);
  CHECK(md.find("- [ ] Confirm and reproduce") != std::string::npos);
  CHECK(result.protocol.tasks.size() == 4);
}

TEST_CASE("submissions are checked against the form contract") {
  const auto forms = refreshed_forms();
  const auto& bug = form_by_id(forms, "bug-report");

  Submission s = fixture_submission("bug_submission.json");
  s.inputs["surprise"] = "x";
  CHECK_THROWS(process_submission(bug, s, control_tree()));

  s = fixture_submission("bug_submission.json");
  s.inputs.erase("title");
  s.inputs.erase("description");
  try {
    process_submission(bug, s, control_tree());
    FAIL("expected missing-field error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("title") != std::string::npos);
    CHECK(msg.find("description") != std::string::npos);
  }

  s = fixture_submission("bug_submission.json");
  s.inputs["version"] = "9.9.9";
  CHECK_THROWS(process_submission(bug, s, control_tree()));
}

TEST_CASE("protocol documents round-trip through markdown") {
  ProtocolDoc doc;
  doc.urd = "needs a widget";
  doc.srd = "shall provide a widget";
  doc.tasks = {{"step one", true}, {"step two", false}};
  doc.activity_log = {"created", "updated"};
  doc.linked_prs = {12};

  const ProtocolDoc back = ProtocolDoc::parse_markdown(doc.render_markdown());
  CHECK(back.urd == doc.urd);
  CHECK(back.srd == doc.srd);
  CHECK(back.tasks.size() == 2);
  CHECK(back.tasks[0].done);
  CHECK_FALSE(back.tasks[1].done);
  CHECK(back.activity_log == doc.activity_log);
  CHECK(back.linked_prs == doc.linked_prs);
  CHECK(back.done_count() == 1);
}

TEST_CASE("status transitions follow the table") {
  const RepoState state = fixture_state("state_two_lines.json");
  Ticket t;
  t.number = 7;
  t.type_id = "bug";
  t.title = "crash";
  t.inputs["version"] = "2.0.0";

  SUBCASE("triage -> rejected closes the ticket") {
    const auto plan = apply_status_transition(t, "rejected", state, control_tree());
    CHECK(plan.new_status == TicketStatus::rejected);
    REQUIRE(plan.actions.size() == 2);
    CHECK(plan.actions[0].id == "close-ticket");
    CHECK(plan.actions[1].id == "protocol-append");
  }
  SUBCASE("triage -> ready creates branches and draft PRs") {
    const auto plan = apply_status_transition(t, "ready", state, control_tree());
    CHECK(plan.new_status == TicketStatus::ready);
    REQUIRE(plan.actions.size() == 2);
    CHECK(plan.actions[0].id == "create-branch");
    CHECK(plan.actions[0].params.at("name") == "dev/7/main");
    CHECK(plan.actions[1].id == "open-draft-pr");
  }
  SUBCASE("illegal jumps are refused") {
    CHECK_THROWS(apply_status_transition(t, "done", state, control_tree()));
    CHECK_THROWS(apply_status_transition(t, "review", state, control_tree()));
    t.status = TicketStatus::done;
    CHECK_THROWS(apply_status_transition(t, "ready", state, control_tree()));
  }
  SUBCASE("review can bounce back or complete") {
    t.status = TicketStatus::review;
    CHECK(apply_status_transition(t, "in-progress", state, control_tree())
              .new_status == TicketStatus::in_progress);
    CHECK(apply_status_transition(t, "done", state, control_tree()).new_status ==
          TicketStatus::done);
  }
}

TEST_CASE("transition safety: every reachable move stays inside the table") {
  const RepoState state = fixture_state("state_two_lines.json");
  Ticket t;
  t.number = 7;
  t.type_id = "bug";
  t.title = "crash";
  t.inputs["version"] = "2.0.0";

  const TicketStatus all[] = {TicketStatus::triage,      TicketStatus::rejected,
                              TicketStatus::ready,       TicketStatus::in_progress,
                              TicketStatus::review,      TicketStatus::done};
  auto allowed = [](TicketStatus from, TicketStatus to) {
    switch (from) {
      case TicketStatus::triage:
        return to == TicketStatus::rejected || to == TicketStatus::ready;
      case TicketStatus::ready:
        return to == TicketStatus::in_progress;
      case TicketStatus::in_progress:
        return to == TicketStatus::review;
      case TicketStatus::review:
        return to == TicketStatus::in_progress || to == TicketStatus::done;
      default:
        return false;
    }
  };
  for (TicketStatus from : all)
    for (TicketStatus to : all) {
      t.status = from;
      if (allowed(from, to)) {
        CHECK(apply_status_transition(t, to_string(to), state, control_tree())
                  .new_status == to);
      } else {
        CHECK_THROWS(
            apply_status_transition(t, to_string(to), state, control_tree()));
      }
    }
}

TEST_CASE("comment commands parse the sigil syntax") {
  const auto cmd = parse_command_comment("/test version=1.1.0a2 env=ubuntu");
  REQUIRE(cmd.has_value());
  CHECK(cmd->verb == "test");
  CHECK(cmd->arguments.at("version") == "1.1.0a2");
  CHECK(cmd->arguments.at("env") == "ubuntu");

  CHECK_FALSE(parse_command_comment("just a comment").has_value());
  CHECK_FALSE(parse_command_comment("/unknown thing=1").has_value());
  CHECK(parse_command_comment("prose first\n/test env=mac").has_value());
  CHECK_THROWS(parse_command_comment("/test version"));
  CHECK_THROWS(parse_command_comment("/test version=not.a.version"));
}

TEST_CASE("change types come from the control center mapping") {
  CHECK(change_type_for("bug", control_tree()) ==
        relforge::version::ChangeType::patch);
  CHECK(change_type_for("feature", control_tree()) ==
        relforge::version::ChangeType::minor);
  CHECK(change_type_for("breaking", control_tree()) ==
        relforge::version::ChangeType::major);
  CHECK_THROWS(change_type_for("mystery", control_tree()));
}
