// SPDX-License-Identifier: Apache-2.0
#include "relforge/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace relforge::ledger {

using nlohmann::json;

json ChangelogEntry::to_json() const {
  json out{{"id", id},
           {"issue", issue},
           {"pr", pr},
           {"type", version::to_string(type)},
           {"title", title},
           {"description", description},
           {"contributors", contributors},
           {"version", version::format_version(version)},
           {"commit", commit},
           {"date", date}};
  if (doi) out["doi"] = *doi;
  return out;
}

ChangelogEntry ChangelogEntry::from_json(const json& doc) {
  ChangelogEntry e;
  e.id = doc.at("id").get<std::string>();
  e.issue = doc.value("issue", std::uint64_t{0});
  e.pr = doc.value("pr", std::uint64_t{0});
  e.type = version::change_type_from_string(doc.value("type", "patch"));
  e.title = doc.value("title", "");
  e.description = doc.value("description", "");
  e.contributors = doc.value("contributors", std::vector<std::string>{});
  e.version = version::parse_version(doc.at("version").get<std::string>());
  e.commit = doc.at("commit").get<std::string>();
  e.date = doc.at("date").get<std::string>();
  if (doc.contains("doi")) e.doi = doc["doi"].get<std::string>();
  return e;
}

namespace {

void check_date(const std::string& date) {
  static const std::regex iso_re(R"(\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2})?Z?)?)");
  if (!std::regex_match(date, iso_re))
    throw std::invalid_argument("entry date is not ISO-8601: " + date);
}

}  // namespace

void Ledger::append(ChangelogEntry entry) {
  check_date(entry.date);
  if (entry.commit.empty())
    throw std::invalid_argument("changelog entry without commit id");
  for (const auto& existing : entries_)
    if (existing.version == entry.version && existing.commit == entry.commit)
      throw std::invalid_argument(
          "duplicate changelog entry for (" +
          version::format_version(entry.version) + ", " + entry.commit + ")");
  auto it = std::upper_bound(
      entries_.begin(), entries_.end(), entry,
      [](const ChangelogEntry& a, const ChangelogEntry& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.id < b.id;
      });
  entries_.insert(it, std::move(entry));
}

json Ledger::to_json() const {
  json out;
  out["entries"] = json::array();
  for (const auto& e : entries_) out["entries"].push_back(e.to_json());
  return out;
}

Ledger Ledger::from_json(const json& doc) {
  Ledger ledger;
  for (const auto& e : doc.value("entries", json::array()))
    ledger.append(ChangelogEntry::from_json(e));
  return ledger;
}

Ledger Ledger::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ledger: " + path);
  return from_json(json::parse(in));
}

void Ledger::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ledger: " + path);
  out << to_json().dump(2) << "\n";
}

ChangelogEntry derive_entry(const issue::Ticket& ticket, const PrMetadata& pr,
                            const std::vector<CommitInfo>& commits,
                            const version::PublicVersion& version,
                            const std::string& commit_id,
                            const std::string& date,
                            const std::optional<std::string>& doi) {
  if (commit_id.empty())
    throw std::invalid_argument("derive_entry needs a commit id");
  ChangelogEntry e;
  e.id = "issue-" + std::to_string(ticket.number) + "-pr-" +
         std::to_string(pr.number);
  e.issue = ticket.number;
  e.pr = pr.number;
  e.type = version::ChangeType::patch;
  e.title = ticket.title;
  if (auto it = ticket.inputs.find("description"); it != ticket.inputs.end())
    e.description = it->second;
  std::set<std::string> people(pr.participants.begin(), pr.participants.end());
  for (const auto& c : commits)
    if (!c.author.empty()) people.insert(c.author);
  e.contributors.assign(people.begin(), people.end());
  e.version = version;
  e.commit = commit_id;
  e.date = date;
  e.doi = doi;
  return e;
}

NotesTemplate NotesTemplate::default_template() {
  NotesTemplate t;
  t.header = "# Release ${version} (${date})\n";
  t.entry_line =
      "- ${title} (#${issue}, PR #${pr}, commit ${commit}) — ${contributors}";
  return t;
}

namespace {

std::string render_fields(const std::string& tmpl, const ChangelogEntry& e) {
  static const std::regex marker_re(R"(\$\{([a-z_]+)\})");
  std::string out;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(tmpl.begin(), tmpl.end(), marker_re);
       it != std::sregex_iterator(); ++it) {
    out.append(tmpl, last, static_cast<std::size_t>(it->position()) - last);
    const std::string field = (*it)[1].str();
    if (field == "version") out += version::format_version(e.version);
    else if (field == "date") out += e.date;
    else if (field == "title") out += e.title;
    else if (field == "description") out += e.description;
    else if (field == "issue") out += std::to_string(e.issue);
    else if (field == "pr") out += std::to_string(e.pr);
    else if (field == "commit") out += e.commit;
    else if (field == "doi") out += e.doi.value_or("");
    else if (field == "contributors") {
      for (std::size_t i = 0; i < e.contributors.size(); ++i) {
        if (i) out += ", ";
        out += e.contributors[i];
      }
    } else {
      throw std::invalid_argument("unknown template marker '${" + field + "}'");
    }
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  out.append(tmpl, last, std::string::npos);
  return out;
}

}  // namespace

std::string render_release_notes(const std::vector<ChangelogEntry>& slice,
                                 const NotesTemplate& tmpl) {
  if (slice.empty())
    throw std::invalid_argument("cannot render notes from an empty slice");

  std::ostringstream out;
  out << render_fields(tmpl.header, slice.back()) << "\n";

  const struct {
    version::ChangeType type;
    const char* heading;
  } sections[] = {{version::ChangeType::major, "Breaking changes"},
                  {version::ChangeType::minor, "Features"},
                  {version::ChangeType::patch, "Fixes"}};
  for (const auto& section : sections) {
    std::vector<const ChangelogEntry*> group;
    for (const auto& e : slice)
      if (e.type == section.type) group.push_back(&e);
    if (group.empty()) continue;
    out << "## " << section.heading << "\n\n";
    for (const auto* e : group) out << render_fields(tmpl.entry_line, *e) << "\n";
    out << "\n";
  }
  return out.str();
}

issue::ProtocolDoc mark_progress(issue::ProtocolDoc protocol,
                                 const std::string& commit_message,
                                 std::vector<std::string>* warnings) {
  static const std::regex trailer_re(R"(^Task:\s*(\d+)\s*$)");
  std::istringstream in(commit_message);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, trailer_re)) continue;
    const std::size_t index = std::stoull(m[1]);
    if (index < 1 || index > protocol.tasks.size()) {
      if (warnings)
        warnings->push_back("commit references nonexistent task " + m[1].str() +
                            " (have " + std::to_string(protocol.tasks.size()) +
                            ")");
      continue;
    }
    protocol.tasks[index - 1].done = true;
  }
  return protocol;
}

}  // namespace relforge::ledger
