// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace relforge::version {

/// Release level communicated by a change, mapped from issue-ticket data.
enum class ChangeType { major, minor, patch };

ChangeType change_type_from_string(const std::string& s);
std::string to_string(ChangeType c);

/// Prerelease phase letters, ordered a < b < rc.
enum class Phase { a, b, rc };

Phase phase_from_string(const std::string& s);
std::string to_string(Phase p);

struct ReleaseVersion {
  std::uint64_t major = 0;
  std::uint64_t minor = 0;
  std::uint64_t patch = 0;

  auto operator<=>(const ReleaseVersion&) const = default;
};

/// Prerelease segment: phase plus the correlated issue ticket number.
struct PrereleaseSegment {
  Phase phase = Phase::a;
  std::uint64_t number = 1;  // >= 1, equals the originating issue ticket

  auto operator<=>(const PrereleaseSegment&) const = default;
};

/// Public version identifier: release triple with optional prerelease,
/// post, and dev segments. post/dev require a prerelease segment and are
/// mutually exclusive.
struct PublicVersion {
  ReleaseVersion release;
  std::optional<PrereleaseSegment> pre;
  std::optional<std::uint64_t> post;
  std::optional<std::uint64_t> dev;

  bool operator==(const PublicVersion&) const = default;
  bool is_final() const { return !pre.has_value(); }
  void check_invariants() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses the canonical grammar
///   version = release [pre] ["." post] ["." dev]
/// Throws ParseError with the failing offset otherwise.
PublicVersion parse_version(const std::string& text);

/// Canonical lowercase rendering; inverse of parse_version.
std::string format_version(const PublicVersion& v);

/// Total order over the identifier subset: release triples lexicographic;
/// any prerelease < the final with the same triple; within one (phase,
/// number): dev k < base < post m.
std::strong_ordering compare(const PublicVersion& a, const PublicVersion& b);

inline bool less(const PublicVersion& a, const PublicVersion& b) {
  return compare(a, b) == std::strong_ordering::less;
}

/// Ordered, duplicate-free set of version tags on one branch lineage.
class TagHistory {
 public:
  TagHistory() = default;
  explicit TagHistory(std::vector<PublicVersion> versions);

  // Inserts keeping compare-order; duplicates rejected.
  void add(const PublicVersion& v);
  bool contains(const PublicVersion& v) const;
  const std::vector<PublicVersion>& versions() const { return versions_; }
  bool empty() const { return versions_.empty(); }

  std::optional<PublicVersion> latest_final() const;

 private:
  std::vector<PublicVersion> versions_;
};

/// Increment exactly one component, zeroing everything to its right.
ReleaseVersion bump(const ReleaseVersion& r, ChangeType c);

/// Next developmental release for an issue's branch: base is the bumped
/// latest final of the target lineage; the prerelease phase is the one the
/// issue already reached (alpha if none); dev counter continues from the
/// highest already tagged for that base+pre.
PublicVersion next_dev_version(const TagHistory& dev_history,
                               const TagHistory& target_history, ChangeType c,
                               std::uint64_t issue);

/// Next prerelease for an issue: advancing the phase emits base+newphase,
/// repeating the current phase emits the next post-release. Phases never
/// regress.
PublicVersion next_prerelease_version(const TagHistory& history,
                                      std::uint64_t issue,
                                      Phase requested_phase);

/// Redetermine the final release triple at merge time against the target
/// lineage's latest final; the candidate's own triple is discarded.
ReleaseVersion finalize_version(const PublicVersion& candidate,
                                const TagHistory& target_history,
                                ChangeType c);

}  // namespace relforge::version
