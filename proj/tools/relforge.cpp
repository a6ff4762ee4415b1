// SPDX-License-Identifier: Apache-2.0
//
// relforge — deterministic release-automation engine.
//
// Subcommands mirror the engine modules: sync/validate for the control
// center, version for the SemVer calculus, issue for ticket processing,
// changelog for the ledger, license for SPDX handling, and dispatch for
// event-to-plan mapping (optionally replaying a recorded event log).

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relforge/config.hpp"
#include "relforge/issue.hpp"
#include "relforge/ledger.hpp"
#include "relforge/license.hpp"
#include "relforge/orchestrator.hpp"
#include "relforge/replay.hpp"
#include "relforge/vcs.hpp"
#include "relforge/version.hpp"

#ifndef RELFORGE_DATA_DIR
#define RELFORGE_DATA_DIR "data"
#endif

namespace {

using nlohmann::json;
namespace rf = relforge;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

rf::vcs::RepoState load_state(const std::string& path) {
  return rf::vcs::RepoState::from_json(read_json_file(path));
}

struct GlobalOptions {
  std::string control_dir = std::string(RELFORGE_DATA_DIR) + "/control";
  std::string schema_dir = std::string(RELFORGE_DATA_DIR) + "/schemas";
  std::string registry_path =
      std::string(RELFORGE_DATA_DIR) + "/spdx_licenses.json";
  bool json_output = false;
};

rf::config::ConfigTree load_resolved_tree(const GlobalOptions& opts) {
  auto tree = rf::config::load_tree(opts.control_dir);
  rf::config::FileFetcher fetcher;
  tree = rf::config::resolve_inheritance(
      tree, &fetcher, nullptr,
      static_cast<std::int64_t>(std::time(nullptr)));
  return rf::config::render_templates(tree);
}

int run_validate(const GlobalOptions& opts) {
  const auto tree = load_resolved_tree(opts);
  const auto schemas = rf::config::load_schemas(opts.schema_dir);
  const auto report = rf::config::validate(tree, schemas);
  if (opts.json_output) {
    json out = json::array();
    for (const auto& f : report.findings)
      out.push_back({{"severity",
                      f.severity == rf::config::ValidationFinding::Severity::error
                          ? "error"
                          : "warning"},
                     {"path", f.path},
                     {"message", f.message},
                     {"origin", f.origin.file + ":" + std::to_string(f.origin.line)}});
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& f : report.findings)
      std::cout << (f.severity == rf::config::ValidationFinding::Severity::error
                        ? "error"
                        : "warning")
                << ": " << f.path << ": " << f.message << " (" << f.origin.file
                << ":" << f.origin.line << ")\n";
    if (report.empty()) std::cout << "configuration valid\n";
  }
  return report.ok() ? 0 : 1;
}

int run_sync(const GlobalOptions& opts, const std::string& workspace,
             const std::string& state_path) {
  auto tree = load_resolved_tree(opts);
  std::optional<rf::vcs::RepoState> state;
  if (!state_path.empty()) state = load_state(state_path);
  tree = rf::config::augment(tree, {}, state ? &*state : nullptr);
  const auto schemas = rf::config::load_schemas(opts.schema_dir);
  const auto report = rf::config::validate(tree, schemas);
  if (!report.ok()) {
    std::cerr << "control center invalid; run `relforge validate`\n";
    return 1;
  }
  const auto sync = rf::config::synchronize(
      tree, rf::config::default_generators(), workspace);
  std::cout << sync.to_json().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relforge — deterministic release-automation engine"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--control", opts.control_dir, "Control-center directory");
  app.add_option("--schemas", opts.schema_dir, "Schema directory");
  app.add_option("--registry", opts.registry_path, "SPDX registry snapshot");
  app.add_flag("--json", opts.json_output, "Machine-readable output");

  // --- sync / validate -----------------------------------------------------
  auto* sync_cmd = app.add_subcommand("sync", "Propagate the control center");
  std::string workspace = ".";
  std::string state_path;
  sync_cmd->add_option("--workspace", workspace, "Output workspace");
  sync_cmd->add_option("--state", state_path, "Repository snapshot JSON");

  auto* validate_cmd =
      app.add_subcommand("validate", "Validate the control center");

  // --- version -------------------------------------------------------------
  auto* version_cmd = app.add_subcommand("version", "Version calculus");
  version_cmd->require_subcommand(1);

  auto* vparse = version_cmd->add_subcommand("parse", "Parse an identifier");
  std::string version_text;
  vparse->add_option("text", version_text)->required();

  auto* vnext = version_cmd->add_subcommand("next", "Next developmental version");
  std::uint64_t issue_number = 0;
  std::string change_text = "minor";
  std::string branch_name;
  vnext->add_option("--state", state_path, "Repository snapshot")->required();
  vnext->add_option("--issue", issue_number)->required();
  vnext->add_option("--type", change_text, "major|minor|patch");
  vnext->add_option("--branch", branch_name, "Development branch name");

  auto* vfinal = version_cmd->add_subcommand("finalize", "Redetermine final");
  std::string candidate_text;
  vfinal->add_option("--state", state_path, "Repository snapshot")->required();
  vfinal->add_option("--candidate", candidate_text)->required();
  vfinal->add_option("--type", change_text, "major|minor|patch");
  std::string target_branch = "main";
  vfinal->add_option("--target", target_branch, "Target branch");

  // --- issue ---------------------------------------------------------------
  auto* issue_cmd = app.add_subcommand("issue", "Issue management");
  issue_cmd->require_subcommand(1);

  auto* iforms = issue_cmd->add_subcommand("compile-forms", "Emit issue forms");
  std::string api_csv;
  iforms->add_option("--state", state_path, "Repository snapshot");
  iforms->add_option("--api", api_csv, "Comma-separated endpoint names");

  auto* iprocess = issue_cmd->add_subcommand("process", "Process a submission");
  std::string payload_path;
  iprocess->add_option("--payload", payload_path, "Submission JSON")->required();
  iprocess->add_option("--state", state_path, "Repository snapshot");

  auto* itransition =
      issue_cmd->add_subcommand("transition", "Apply a status label");
  std::string ticket_path, label;
  itransition->add_option("--ticket", ticket_path, "Ticket JSON")->required();
  itransition->add_option("--label", label)->required();
  itransition->add_option("--state", state_path, "Repository snapshot")
      ->required();

  // --- changelog -----------------------------------------------------------
  auto* changelog_cmd = app.add_subcommand("changelog", "Changelog ledger");
  changelog_cmd->require_subcommand(1);

  auto* cappend = changelog_cmd->add_subcommand("append", "Append an entry");
  std::string ledger_path = "changelog.json", entry_path;
  cappend->add_option("--ledger", ledger_path);
  cappend->add_option("--entry", entry_path, "Entry JSON")->required();

  auto* crender = changelog_cmd->add_subcommand("render", "Render notes");
  std::string slice_version;
  crender->add_option("--ledger", ledger_path);
  crender->add_option("--version", slice_version,
                      "Restrict to one version's entries");

  // --- license -------------------------------------------------------------
  auto* license_cmd = app.add_subcommand("license", "SPDX licensing");
  license_cmd->require_subcommand(1);

  std::string expr_text;
  auto* lparse = license_cmd->add_subcommand("parse", "Parse an expression");
  lparse->add_option("expr", expr_text)->required();
  auto* lvalidate = license_cmd->add_subcommand("validate", "Validate");
  lvalidate->add_option("expr", expr_text)->required();
  auto* lapply = license_cmd->add_subcommand("apply", "Generate license docs");
  lapply->add_option("expr", expr_text)->required();
  lapply->add_option("--workspace", workspace, "Output workspace");

  // --- dispatch ------------------------------------------------------------
  auto* dispatch_cmd = app.add_subcommand("dispatch", "Event to action plan");
  std::string event_path, replay_path;
  dispatch_cmd->add_option("--event", event_path, "Event JSON");
  dispatch_cmd->add_option("--replay", replay_path, "JSON-lines event log");
  dispatch_cmd->add_option("--state", state_path, "Repository snapshot")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate_cmd) return run_validate(opts);
    if (*sync_cmd) return run_sync(opts, workspace, state_path);

    if (*vparse) {
      const auto v = rf::version::parse_version(version_text);
      if (opts.json_output) {
        json out{{"major", v.release.major},
                 {"minor", v.release.minor},
                 {"patch", v.release.patch}};
        if (v.pre)
          out["pre"] = {{"phase", rf::version::to_string(v.pre->phase)},
                        {"number", v.pre->number}};
        if (v.post) out["post"] = *v.post;
        if (v.dev) out["dev"] = *v.dev;
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << rf::version::format_version(v) << "\n";
      }
      return 0;
    }
    if (*vnext) {
      const auto state = load_state(state_path);
      const auto change = rf::version::change_type_from_string(change_text);
      if (branch_name.empty())
        branch_name = "dev/" + std::to_string(issue_number) + "/" +
                      state.default_branch;
      const rf::version::TagHistory& target =
          state.branch(state.default_branch).tags;
      const rf::version::TagHistory& dev =
          state.has_branch(branch_name) ? state.branch(branch_name).tags
                                        : target;
      const auto v =
          rf::version::next_dev_version(dev, target, change, issue_number);
      std::cout << rf::version::format_version(v) << "\n";
      return 0;
    }
    if (*vfinal) {
      const auto state = load_state(state_path);
      const auto change = rf::version::change_type_from_string(change_text);
      const auto candidate = rf::version::parse_version(candidate_text);
      const auto final_release = rf::version::finalize_version(
          candidate, state.branch(target_branch).tags, change);
      rf::version::PublicVersion v;
      v.release = final_release;
      std::cout << rf::version::format_version(v) << "\n";
      return 0;
    }

    if (*iforms || *iprocess || *itransition) {
      const auto tree = load_resolved_tree(opts);
      auto forms = rf::issue::compile_forms(tree);
      if (!state_path.empty()) {
        std::vector<std::string> api;
        std::stringstream ss(api_csv);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) api.push_back(item);
        forms = rf::issue::refresh_form_choices(forms, load_state(state_path),
                                                api);
      }
      if (*iforms) {
        for (const auto& form : forms) {
          std::cout << "# --- " << form.id << " ---\n"
                    << rf::issue::emit_form_yaml(form) << "\n";
        }
        return 0;
      }
      if (*iprocess) {
        const auto submission =
            rf::issue::Submission::from_json(read_json_file(payload_path));
        const rf::issue::FormDefinition* form = nullptr;
        for (const auto& f : forms)
          if (f.id == submission.form_id) form = &f;
        if (!form) throw std::runtime_error("unknown form: " + submission.form_id);
        const auto result = rf::issue::process_submission(*form, submission, tree);
        json out{{"ticket", result.ticket.to_json()},
                 {"protocol", result.protocol.render_markdown()}};
        std::cout << out.dump(2) << "\n";
        return 0;
      }
      const auto ticket = rf::issue::Ticket::from_json(read_json_file(ticket_path));
      const auto plan = rf::issue::apply_status_transition(
          ticket, label, load_state(state_path), tree);
      json out{{"new_status", rf::issue::to_string(plan.new_status)},
               {"actions", json::array()}};
      for (const auto& a : plan.actions)
        out["actions"].push_back({{"id", a.id}, {"params", a.params}});
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*cappend) {
      rf::ledger::Ledger ledger;
      if (std::filesystem::exists(ledger_path))
        ledger = rf::ledger::Ledger::load_file(ledger_path);
      ledger.append(
          rf::ledger::ChangelogEntry::from_json(read_json_file(entry_path)));
      ledger.save_file(ledger_path);
      std::cout << "appended; ledger now has " << ledger.entries().size()
                << " entries\n";
      return 0;
    }
    if (*crender) {
      const auto ledger = rf::ledger::Ledger::load_file(ledger_path);
      std::vector<rf::ledger::ChangelogEntry> slice;
      for (const auto& e : ledger.entries()) {
        if (slice_version.empty() ||
            rf::version::format_version(e.version) == slice_version)
          slice.push_back(e);
      }
      std::cout << rf::ledger::render_release_notes(
          slice, rf::ledger::NotesTemplate::default_template());
      return 0;
    }

    if (*lparse || *lvalidate || *lapply) {
      const auto expr = rf::license::parse_license_expr(expr_text);
      if (*lparse) {
        std::cout << rf::license::to_string(*expr) << "\n";
        return 0;
      }
      const auto registry =
          rf::license::LicenseRegistry::load_file(opts.registry_path);
      const auto report = rf::license::validate_license_expr(*expr, registry);
      for (const auto& f : report.findings)
        std::cout << (f.severity == rf::license::Finding::Severity::error
                          ? "error"
                          : "warning")
                  << ": " << f.message << "\n";
      if (*lvalidate) {
        if (report.empty()) std::cout << "expression valid\n";
        return report.ok() ? 0 : 1;
      }
      if (!report.ok()) return 1;
      const auto tree = load_resolved_tree(opts);
      std::map<std::string, std::string> fields;
      fields["year"] = tree.string_at("license.year").value_or("2026");
      fields["holder"] = tree.string_at("license.holder").value_or("unknown");
      for (const auto& [rel, content] :
           rf::license::generate_license_docs(*expr, registry, fields)) {
        const auto target = std::filesystem::path(workspace) / rel;
        std::filesystem::create_directories(target.parent_path());
        std::ofstream out(target);
        out << content;
        std::cout << "wrote " << target.string() << "\n";
      }
      return 0;
    }

    if (*dispatch_cmd) {
      auto state = load_state(state_path);
      const auto tree = load_resolved_tree(opts);
      if (!replay_path.empty()) {
        rf::replay::ReplaySession session(std::move(state), tree);
        for (const auto& event : rf::replay::load_event_log(replay_path))
          session.apply(event);
        std::cout << session.final_document().dump(2) << "\n";
        return 0;
      }
      if (event_path.empty())
        throw std::runtime_error("dispatch needs --event or --replay");
      const auto event =
          rf::orchestrator::RepoEvent::from_json(read_json_file(event_path));
      const auto plan = rf::orchestrator::dispatch(event, state, tree);
      std::cout << plan.to_json().dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
