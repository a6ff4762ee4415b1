// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relforge/issue.hpp"
#include "relforge/version.hpp"

namespace relforge::ledger {

/// One machine-readable record of a change, keyed by (version, commit).
struct ChangelogEntry {
  std::string id;
  std::uint64_t issue = 0;
  std::uint64_t pr = 0;
  version::ChangeType type = version::ChangeType::patch;
  std::string title;
  std::string description;
  std::vector<std::string> contributors;  // de-duplicated, sorted
  version::PublicVersion version;
  std::string commit;
  std::string date;  // ISO-8601 (YYYY-MM-DD)
  std::optional<std::string> doi;

  nlohmann::json to_json() const;
  static ChangelogEntry from_json(const nlohmann::json& doc);
};

/// Chronological record of the project evolution; one ledger per branch,
/// serialized as changelog.json.
class Ledger {
 public:
  /// Keeps chronological order (date, then entry id); duplicate
  /// (version, commit) pairs are rejected.
  void append(ChangelogEntry entry);

  const std::vector<ChangelogEntry>& entries() const { return entries_; }

  nlohmann::json to_json() const;
  static Ledger from_json(const nlohmann::json& doc);
  static Ledger load_file(const std::string& path);
  void save_file(const std::string& path) const;

 private:
  std::vector<ChangelogEntry> entries_;
};

struct PrMetadata {
  std::uint64_t number = 0;
  std::vector<std::string> participants;
};

struct CommitInfo {
  std::string id;
  std::string author;
  std::string message;
};

ChangelogEntry derive_entry(const issue::Ticket& ticket, const PrMetadata& pr,
                            const std::vector<CommitInfo>& commits,
                            const version::PublicVersion& version,
                            const std::string& commit_id,
                            const std::string& date,
                            const std::optional<std::string>& doi = std::nullopt);

struct NotesTemplate {
  // Markers: ${version} ${date} ${title} ${description} ${issue} ${pr}
  // ${commit} ${contributors} ${doi} inside the entry block; the section
  // structure (grouping by change type, major -> minor -> patch) is fixed.
  std::string header;      // rendered once; may use ${version} ${date}
  std::string entry_line;  // rendered per entry
  static NotesTemplate default_template();
};

std::string render_release_notes(const std::vector<ChangelogEntry>& slice,
                                 const NotesTemplate& tmpl);

/// Flip the done flag of every task referenced by a `Task: <index>` trailer
/// (1-based) in the commit message. Unknown indices produce warnings, never
/// changes; done flags never revert.
issue::ProtocolDoc mark_progress(issue::ProtocolDoc protocol,
                                 const std::string& commit_message,
                                 std::vector<std::string>* warnings = nullptr);

}  // namespace relforge::ledger
