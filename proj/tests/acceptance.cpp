// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the process exits nonzero when any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

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
#ifndef RELFORGE_FIXTURES_DIR
#define RELFORGE_FIXTURES_DIR "tests/fixtures"
#endif

namespace rf = relforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

rf::config::ConfigTree control_tree() {
  return rf::config::render_templates(
      rf::config::load_tree(std::string(RELFORGE_DATA_DIR) + "/control"));
}

rf::vcs::RepoState state_fixture(const std::string& name) {
  std::ifstream in(std::string(RELFORGE_FIXTURES_DIR) + "/" + name);
  return rf::vcs::RepoState::from_json(json::parse(in));
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("relforge-accept-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// --- 1: recorded lifecycle replay ------------------------------------------

void criterion_lifecycle_replay(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto events = rf::replay::load_event_log(
      std::string(RELFORGE_FIXTURES_DIR) + "/lifecycle.events");
  rf::replay::ReplaySession session(state_fixture("state0.json"), control_tree());
  for (const auto& event : events) session.apply(event);

  const std::vector<std::string> expected = {
      "v1.1.0a2.dev1", "v1.1.0a2.dev2", "v1.1.0a1.dev1", "v1.1.0",
      "v1.1.0a1.dev2", "v1.1.0a1",      "v1.1.0b1",      "v1.1.0rc1",
      "v1.1.0rc1.post1", "v1.1.0rc1.post2", "v1.2.0"};
  c.require(session.tags() == expected,
            "tag sequence diverged from the recorded lifecycle");
  const auto elapsed = std::chrono::steady_clock::now() - start;
  c.require(elapsed < std::chrono::seconds(1), "replay exceeded 1 second");
}

// --- 2: version bumps vs a reference ---------------------------------------

void criterion_bumps(Check& c) {
  using rf::version::ChangeType;
  std::mt19937 rng(2026);
  std::uniform_int_distribution<std::uint64_t> d(0, 100000);
  for (int i = 0; i < 1000; ++i) {
    const rf::version::ReleaseVersion r{d(rng), d(rng), d(rng)};
    const rf::version::ReleaseVersion major_ref{r.major + 1, 0, 0};
    const rf::version::ReleaseVersion minor_ref{r.major, r.minor + 1, 0};
    const rf::version::ReleaseVersion patch_ref{r.major, r.minor, r.patch + 1};
    c.require(bump(r, ChangeType::major) == major_ref, "major bump mismatch");
    c.require(bump(r, ChangeType::minor) == minor_ref, "minor bump mismatch");
    c.require(bump(r, ChangeType::patch) == patch_ref, "patch bump mismatch");
  }
}

// --- 3: parse/format round-trips and ordering ------------------------------

rf::version::PublicVersion random_version(std::mt19937& rng) {
  std::uniform_int_distribution<std::uint64_t> small(0, 40);
  std::uniform_int_distribution<int> coin(0, 3);
  rf::version::PublicVersion v;
  v.release = {small(rng), small(rng), small(rng)};
  if (coin(rng) != 0) {
    const rf::version::Phase phases[] = {rf::version::Phase::a,
                                         rf::version::Phase::b,
                                         rf::version::Phase::rc};
    v.pre = rf::version::PrereleaseSegment{phases[coin(rng) % 3], small(rng) + 1};
    const int tail = coin(rng);
    if (tail == 1) v.post = small(rng) + 1;
    if (tail == 2) v.dev = small(rng) + 1;
  }
  return v;
}

void criterion_roundtrip_order(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const auto v = random_version(rng);
    c.require(rf::version::parse_version(rf::version::format_version(v)) == v,
              "round-trip mismatch for " + rf::version::format_version(v));
  }
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_version(rng);
    const auto b = random_version(rng);
    const auto x = random_version(rng);
    using rf::version::compare;
    using rf::version::less;
    c.require((compare(a, b) == std::strong_ordering::equal) == (a == b),
              "equality disagrees with compare");
    c.require(!(less(a, b) && less(b, a)), "antisymmetry violated");
    if (!less(b, a) && !less(x, b))
      c.require(!less(x, a), "transitivity violated");
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  c.require(elapsed < std::chrono::seconds(5), "order checks exceeded 5 seconds");
}

// --- 4: release branch split planning --------------------------------------

void criterion_branch_split(Check& c) {
  rf::vcs::RepoState state;
  state.default_branch = "main";
  rf::vcs::Branch main;
  main.name = "main";
  main.kind = rf::vcs::MainBranch{};
  main.head = "h";
  main.tags.add(rf::version::parse_version("1.4.0"));
  state.branches.emplace("main", main);

  const auto split =
      rf::vcs::plan_release_branch_split(state, rf::version::ChangeType::major);
  c.require(split.has_value(), "major change produced no split plan");
  if (split) {
    c.require(split->name == "release-1", "split names " + split->name);
    c.require(split->source == "main", "split sources " + split->source);
  }
  c.require(!rf::vcs::plan_release_branch_split(state,
                                                rf::version::ChangeType::minor)
                 .has_value(),
            "minor change produced a split plan");
}

// --- 5: config pipeline determinism ----------------------------------------

std::map<std::string, std::string> workspace_files(const fs::path& ws) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(ws)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path());
    std::stringstream buf;
    buf << in.rdbuf();
    files[fs::relative(entry.path(), ws).generic_string()] = buf.str();
  }
  return files;
}

void criterion_config_pipeline(Check& c) {
  const auto tree = control_tree();
  const auto schemas =
      rf::config::load_schemas(std::string(RELFORGE_DATA_DIR) + "/schemas");
  c.require(rf::config::validate(tree, schemas).ok(),
            "bundled control center does not validate");

  const auto generators = rf::config::default_generators();
  const fs::path ws = scratch_dir("sync");
  const auto first = rf::config::synchronize(tree, generators, ws.string());
  c.require(!first.created.empty(), "first run generated nothing");
  const auto baseline = workspace_files(ws);

  for (int run = 0; run < 10; ++run) {
    const auto report = rf::config::synchronize(tree, generators, ws.string());
    c.require(report.created.empty() && report.updated.empty(),
              "repeated run rewrote files");
    c.require(workspace_files(ws) == baseline,
              "workspace content drifted between runs");
  }
  fs::remove_all(ws);
}

// --- 6: cache retention semantics ------------------------------------------

void criterion_cache(Check& c) {
  const fs::path dir = scratch_dir("cache");
  rf::config::CacheStore cache((dir / "cache").string());
  cache.put("org://defaults#", "tools:\n  linter: ruff\n", 1000, 60);

  const auto tree = rf::config::ConfigTree(rf::config::parse_yaml(
      "s:\n  $inherit:\n    source: org://defaults\n", "mem.yaml"));

  try {
    const auto out = rf::config::resolve_inheritance(tree, nullptr, &cache, 1030);
    c.require(out.string_at("s.tools.linter") == "ruff",
              "fresh cache did not supply the inherited content");
  } catch (const std::exception& e) {
    c.require(false, std::string("fresh cache resolution failed: ") + e.what());
  }

  try {
    rf::config::resolve_inheritance(tree, nullptr, &cache, 2000);
    c.require(false, "stale cache with no fetcher did not fail");
  } catch (const rf::config::ConfigError& e) {
    c.require(std::string(e.what()).find("no usable cache") != std::string::npos,
              std::string("unexpected stale-cache error: ") + e.what());
  }
  fs::remove_all(dir);
}

// --- 7: SPDX parsing equivalence -------------------------------------------

std::string oracle_parse(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string word;
  while (in >> word) tokens.push_back(word);
  auto precedence = [](const std::string& op) {
    return op == "OR" ? 1 : op == "AND" ? 2 : op == "WITH" ? 3 : 0;
  };
  std::vector<std::string> ops, out;
  auto reduce = [&]() {
    const std::string op = ops.back();
    ops.pop_back();
    const std::string rhs = out.back();
    out.pop_back();
    const std::string lhs = out.back();
    out.pop_back();
    out.push_back("(" + lhs + " " + op + " " + rhs + ")");
  };
  for (const auto& tok : tokens) {
    if (precedence(tok) > 0) {
      while (!ops.empty() && precedence(ops.back()) >= precedence(tok)) reduce();
      ops.push_back(tok);
    } else {
      out.push_back(tok);
    }
  }
  while (!ops.empty()) reduce();
  return out.back();
}

std::string full_parens(const rf::license::LicenseExpr& e) {
  using K = rf::license::LicenseExpr::Kind;
  switch (e.kind) {
    case K::id:
      return e.id + (e.or_later ? "+" : "");
    case K::with:
      return "(" + full_parens(*e.left) + " WITH " + e.exception + ")";
    case K::and_op:
      return "(" + full_parens(*e.left) + " AND " + full_parens(*e.right) + ")";
    case K::or_op:
      return "(" + full_parens(*e.left) + " OR " + full_parens(*e.right) + ")";
  }
  return {};
}

void criterion_spdx(Check& c) {
  const std::string ids[] = {"MIT", "Apache-2.0", "BSD-3-Clause"};
  const std::string ops[] = {"OR", "AND"};
  int cases = 0;
  for (const auto& a : ids)
    for (const auto& b : ids)
      for (const auto& x : ids)
        for (const auto& op1 : ops)
          for (const auto& op2 : ops) {
            const std::string text =
                a + " " + op1 + " " + b + " " + op2 + " " + x;
            c.require(full_parens(*rf::license::parse_license_expr(text)) ==
                          oracle_parse(text),
                      "parser disagrees with oracle on: " + text);
            ++cases;
          }
  c.require(cases == 108, "expected 108 two-operator cases");

  const std::string mixed = "MIT AND Apache-2.0 OR BSD-3-Clause";
  c.require(full_parens(*rf::license::parse_license_expr(mixed)) ==
                "((MIT AND Apache-2.0) OR BSD-3-Clause)",
            "AND does not bind tighter than OR");
  const std::string with_case =
      "GPL-2.0-or-later WITH Classpath-exception-2.0 OR MIT";
  c.require(full_parens(*rf::license::parse_license_expr(with_case)) ==
                oracle_parse(with_case),
            "WITH handling disagrees with oracle");

  const auto registry = rf::license::LicenseRegistry::load_file(
      std::string(RELFORGE_DATA_DIR) + "/spdx_licenses.json");
  const auto report = rf::license::validate_license_expr(
      *rf::license::parse_license_expr("GPL-2.0"), registry);
  bool flagged = false;
  for (const auto& f : report.findings)
    flagged = flagged ||
              (f.severity == rf::license::Finding::Severity::warning &&
               f.message.find("deprecated") != std::string::npos);
  c.require(flagged, "deprecated GPL-2.0 was not flagged");
  c.require(report.ok(), "deprecation must be a warning, not an error");
}

// --- 8: issue intake end to end --------------------------------------------

void criterion_issue_intake(Check& c) {
  const auto tree = control_tree();
  const auto state = state_fixture("state_two_lines.json");
  auto forms = rf::issue::refresh_form_choices(rf::issue::compile_forms(tree),
                                               state, {"run", "export"});
  std::ifstream in(std::string(RELFORGE_FIXTURES_DIR) + "/bug_submission.json");
  const auto submission = rf::issue::Submission::from_json(json::parse(in));
  const rf::issue::FormDefinition* form = nullptr;
  for (const auto& f : forms)
    if (f.id == submission.form_id) form = &f;
  c.require(form != nullptr, "bug-report form missing");
  if (!form) return;

  const auto result = rf::issue::process_submission(*form, submission, tree);
  c.require(result.ticket.labels ==
                std::set<std::string>{"type/bug", "version/1.1.0", "api/run"},
            "ticket labels are wrong");
  const std::string md = result.protocol.render_markdown();
  for (const char* heading : {"## User Requirements Document (URD)",
                              "## Software Requirements Document (SRD)",
                              "## Software Design Document (SDD)"})
    c.require(md.find(heading) != std::string::npos,
              std::string("protocol lacks heading: ") + heading);

  const auto plans = rf::vcs::plan_issue_branches(
      rf::issue::ticket_ref(result.ticket, tree), state);
  c.require(plans.size() == 1, "expected one branch plan per affected line");
  if (!plans.empty())
    c.require(plans[0].name == "dev/7/release-1",
              "branch plan targets " + plans[0].name);
}

// --- 9: ledger ordering and protocol progress ------------------------------

void criterion_ledger(Check& c) {
  std::mt19937 rng(909);
  std::uniform_int_distribution<int> month(1, 12), day(1, 28);
  rf::ledger::Ledger ledger;
  for (int i = 0; i < 1000; ++i) {
    rf::ledger::ChangelogEntry e;
    e.id = "e" + std::to_string(i);
    char date[11];
    std::snprintf(date, sizeof date, "2026-%02d-%02d", month(rng), day(rng));
    e.date = date;
    e.version = rf::version::parse_version("0.1." + std::to_string(i));
    e.commit = "h" + std::to_string(i);
    e.title = "entry";
    ledger.append(e);
  }
  const auto& entries = ledger.entries();
  for (std::size_t i = 1; i < entries.size(); ++i)
    c.require(entries[i - 1].date <= entries[i].date,
              "ledger lost chronological order");

  auto dup = entries.front();
  try {
    ledger.append(dup);
    c.require(false, "duplicate (version, commit) accepted");
  } catch (const std::exception&) {
  }

  rf::issue::ProtocolDoc doc;
  doc.tasks = {{"a", false}, {"b", false}};
  doc = rf::ledger::mark_progress(doc, "msg\n\nTask: 2\n");
  const auto before = doc.done_count();
  doc = rf::ledger::mark_progress(doc, "msg\n\nTask: 7\n");
  c.require(doc.done_count() == before && doc.tasks[1].done,
            "progress marking is not monotone");
}

// --- 10: dispatch determinism and replay stability -------------------------

void criterion_determinism(Check& c) {
  const auto tree = control_tree();
  auto state = state_fixture("state_two_lines.json");
  rf::vcs::Branch dev;
  dev.name = "dev/5/main";
  dev.kind = rf::vcs::classify_branch(dev.name);
  state.branches.emplace(dev.name, dev);

  std::mt19937 rng(321);
  const char* class_pool[] = {"source", "config", "docs", "tests"};
  for (int i = 0; i < 100; ++i) {
    rf::orchestrator::RepoEvent event;
    if (rng() % 2) {
      event.kind = rf::orchestrator::EventKind::commit_pushed;
      event.branch = (rng() % 2) ? "dev/5/main" : "main";
      json cls = json::array();
      for (const char* cl : class_pool)
        if (rng() % 2) cls.push_back(cl);
      event.payload["classes"] = cls;
    } else {
      event.kind = rf::orchestrator::EventKind::scheduled;
    }
    const auto a = rf::orchestrator::dispatch(event, state, tree).to_json().dump();
    const auto b = rf::orchestrator::dispatch(event, state, tree).to_json().dump();
    c.require(a == b, "dispatch produced differing plans for equal inputs");
  }

  const auto events = rf::replay::load_event_log(
      std::string(RELFORGE_FIXTURES_DIR) + "/lifecycle.events");
  rf::replay::ReplaySession s1(state_fixture("state0.json"), tree);
  rf::replay::ReplaySession s2(state_fixture("state0.json"), tree);
  for (const auto& event : events) {
    s1.apply(event);
    s2.apply(event);
  }
  c.require(s1.final_document().dump() == s2.final_document().dump(),
            "replay is not reproducible");
}

}  // namespace

int main() {
  const struct {
    const char* name;
    std::function<void(Check&)> run;
  } criteria[] = {
      {"recorded issue lifecycle replays to the exact tag sequence",
       criterion_lifecycle_replay},
      {"version bumps match the reference for 1000 random inputs",
       criterion_bumps},
      {"10000 round-trips and 1000 ordering triples hold", criterion_roundtrip_order},
      {"major changes split a release branch, minor changes do not",
       criterion_branch_split},
      {"config pipeline is idempotent and byte-identical across 10 runs",
       criterion_config_pipeline},
      {"fresh cache resolves offline, stale cache fails as specified",
       criterion_cache},
      {"license parser matches the oracle on all 108 two-operator cases",
       criterion_spdx},
      {"bug submission yields correct labels, protocol, and branch plans",
       criterion_issue_intake},
      {"ledger stays ordered under 1000 random appends, progress is monotone",
       criterion_ledger},
      {"dispatch and replay are deterministic", criterion_determinism},
  };

  int failures = 0;
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    Check check;
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("unexpected exception: ") + e.what();
    }
    if (check.ok) {
      std::cout << "PASS  " << index << ": " << criterion.name << "\n";
    } else {
      ++failures;
      std::cout << "FAIL  " << index << ": " << criterion.name << " — "
                << check.detail << "\n";
    }
  }
  if (failures) std::cout << failures << " criterion(s) failed\n";
  return failures == 0 ? 0 : 1;
}
