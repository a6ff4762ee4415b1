// SPDX-License-Identifier: Apache-2.0
#include "relforge/version.hpp"

#include <algorithm>
#include <cctype>

namespace relforge::version {

ChangeType change_type_from_string(const std::string& s) {
  if (s == "major") return ChangeType::major;
  if (s == "minor") return ChangeType::minor;
  if (s == "patch") return ChangeType::patch;
  throw std::invalid_argument("unknown change type: " + s);
}

std::string to_string(ChangeType c) {
  switch (c) {
    case ChangeType::major: return "major";
    case ChangeType::minor: return "minor";
    case ChangeType::patch: return "patch";
  }
  return {};
}

Phase phase_from_string(const std::string& s) {
  if (s == "a") return Phase::a;
  if (s == "b") return Phase::b;
  if (s == "rc") return Phase::rc;
  throw std::invalid_argument("unknown phase: " + s + " (expected a|b|rc)");
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::a: return "a";
    case Phase::b: return "b";
    case Phase::rc: return "rc";
  }
  return {};
}

void PublicVersion::check_invariants() const {
  if ((post || dev) && !pre)
    throw std::invalid_argument("post/dev segments require a prerelease segment");
  if (post && dev)
    throw std::invalid_argument("post and dev segments are mutually exclusive");
  if (pre && pre->number < 1)
    throw std::invalid_argument("prerelease number must be >= 1");
  if ((post && *post < 1) || (dev && *dev < 1))
    throw std::invalid_argument("post/dev counters must be >= 1");
}

ParseError::ParseError(std::string message, std::size_t offset)
    : std::runtime_error(std::move(message) + " at offset " +
                         std::to_string(offset)),
      offset_(offset) {}

namespace {

// int = "0" | nonzero digit *digit
struct Cursor {
  const std::string& text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return done() ? '\0' : text[pos]; }

  std::uint64_t integer(const char* what) {
    if (done() || !std::isdigit(static_cast<unsigned char>(peek())))
      throw ParseError(std::string("expected ") + what, pos);
    std::size_t start = pos;
    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos;
    const std::string digits = text.substr(start, pos - start);
    if (digits.size() > 1 && digits[0] == '0')
      throw ParseError("leading zero in " + std::string(what), start);
    return std::stoull(digits);
  }

  bool eat(char c) {
    if (peek() != c) return false;
    ++pos;
    return true;
  }

  bool eat(const std::string& word) {
    if (text.compare(pos, word.size(), word) != 0) return false;
    pos += word.size();
    return true;
  }
};

}  // namespace

PublicVersion parse_version(const std::string& text) {
  Cursor c{text};
  PublicVersion v;
  v.release.major = c.integer("major number");
  if (!c.eat('.')) throw ParseError("expected '.'", c.pos);
  v.release.minor = c.integer("minor number");
  if (!c.eat('.')) throw ParseError("expected '.'", c.pos);
  v.release.patch = c.integer("patch number");

  std::optional<Phase> phase;
  if (c.eat("rc"))
    phase = Phase::rc;
  else if (c.eat('a'))
    phase = Phase::a;
  else if (c.eat('b'))
    phase = Phase::b;
  if (phase) {
    const std::uint64_t n = c.integer("prerelease number");
    if (n < 1) throw ParseError("prerelease number must be >= 1", c.pos);
    v.pre = PrereleaseSegment{*phase, n};
  }

  if (c.eat(".post")) {
    const std::uint64_t n = c.integer("post number");
    if (n < 1) throw ParseError("post number must be >= 1", c.pos);
    v.post = n;
  }
  if (c.eat(".dev")) {
    const std::uint64_t n = c.integer("dev number");
    if (n < 1) throw ParseError("dev number must be >= 1", c.pos);
    v.dev = n;
  }
  if (!c.done()) throw ParseError("trailing characters", c.pos);
  if ((v.post || v.dev) && !v.pre)
    throw ParseError("post/dev segments require a prerelease segment", c.pos);
  if (v.post && v.dev)
    throw ParseError("post and dev segments are mutually exclusive", c.pos);
  v.check_invariants();
  return v;
}

std::string format_version(const PublicVersion& v) {
  std::string out = std::to_string(v.release.major) + "." +
                    std::to_string(v.release.minor) + "." +
                    std::to_string(v.release.patch);
  if (v.pre) out += to_string(v.pre->phase) + std::to_string(v.pre->number);
  if (v.post) out += ".post" + std::to_string(*v.post);
  if (v.dev) out += ".dev" + std::to_string(*v.dev);
  return out;
}

std::strong_ordering compare(const PublicVersion& a, const PublicVersion& b) {
  if (auto c = a.release <=> b.release; c != 0) return c;
  // A final sorts after every prerelease of the same triple.
  if (a.pre.has_value() != b.pre.has_value())
    return a.pre.has_value() ? std::strong_ordering::less
                             : std::strong_ordering::greater;
  if (!a.pre) return std::strong_ordering::equal;
  if (auto c = *a.pre <=> *b.pre; c != 0) return c;
  // dev k < base < post m within one (phase, number).
  auto rank = [](const PublicVersion& v) { return v.dev ? 0 : (v.post ? 2 : 1); };
  if (auto c = rank(a) <=> rank(b); c != 0) return c;
  const std::uint64_t an = a.dev.value_or(a.post.value_or(0));
  const std::uint64_t bn = b.dev.value_or(b.post.value_or(0));
  return an <=> bn;
}

TagHistory::TagHistory(std::vector<PublicVersion> versions) {
  for (const auto& v : versions) add(v);
}

void TagHistory::add(const PublicVersion& v) {
  if (contains(v))
    throw std::invalid_argument("duplicate version tag: " + format_version(v));
  auto it = std::upper_bound(versions_.begin(), versions_.end(), v, less);
  versions_.insert(it, v);
}

bool TagHistory::contains(const PublicVersion& v) const {
  return std::binary_search(versions_.begin(), versions_.end(), v, less);
}

std::optional<PublicVersion> TagHistory::latest_final() const {
  for (auto it = versions_.rbegin(); it != versions_.rend(); ++it)
    if (it->is_final()) return *it;
  return std::nullopt;
}

ReleaseVersion bump(const ReleaseVersion& r, ChangeType c) {
  switch (c) {
    case ChangeType::major: return {r.major + 1, 0, 0};
    case ChangeType::minor: return {r.major, r.minor + 1, 0};
    case ChangeType::patch: return {r.major, r.minor, r.patch + 1};
  }
  return r;
}

PublicVersion next_dev_version(const TagHistory& dev_history,
                               const TagHistory& target_history, ChangeType c,
                               std::uint64_t issue) {
  const auto base_final = target_history.latest_final();
  if (!base_final)
    throw std::invalid_argument("target history contains no final release");
  const ReleaseVersion base = bump(base_final->release, c);

  // The phase the issue has already reached for this base, alpha if none.
  Phase phase = Phase::a;
  std::uint64_t highest_dev = 0;
  for (const auto& v : dev_history.versions()) {
    if (!v.pre || v.pre->number != issue || v.release != base) continue;
    phase = std::max(phase, v.pre->phase);
  }
  for (const auto& v : dev_history.versions()) {
    if (!v.pre || v.pre->number != issue || v.release != base) continue;
    if (v.pre->phase == phase && v.dev) highest_dev = std::max(highest_dev, *v.dev);
  }

  PublicVersion out;
  out.release = base;
  out.pre = PrereleaseSegment{phase, issue};
  out.dev = highest_dev + 1;
  return out;
}

PublicVersion next_prerelease_version(const TagHistory& history,
                                      std::uint64_t issue,
                                      Phase requested_phase) {
  // Only published (non-dev) prereleases of this issue establish the phase.
  std::optional<Phase> current;
  std::optional<ReleaseVersion> base;
  std::uint64_t highest_post = 0;
  for (const auto& v : history.versions()) {
    if (!v.pre || v.pre->number != issue) continue;
    base = v.release;  // history is sorted; keeps the latest base
    if (v.dev) continue;
    if (!current || v.pre->phase > *current) {
      current = v.pre->phase;
      highest_post = v.post.value_or(0);
    } else if (v.pre->phase == *current) {
      highest_post = std::max(highest_post, v.post.value_or(0));
    }
  }
  if (!base)
    throw std::invalid_argument("no tags for issue " + std::to_string(issue) +
                                " in history");
  if (current && requested_phase < *current)
    throw std::invalid_argument(
        "prerelease phase regression: " + to_string(requested_phase) +
        " after " + to_string(*current));

  PublicVersion out;
  out.release = *base;
  out.pre = PrereleaseSegment{requested_phase, issue};
  if (current && requested_phase == *current) out.post = highest_post + 1;
  return out;
}

ReleaseVersion finalize_version(const PublicVersion& candidate,
                                const TagHistory& target_history,
                                ChangeType c) {
  if (!candidate.pre)
    throw std::invalid_argument("finalize requires a prerelease candidate");
  const auto latest = target_history.latest_final();
  if (!latest)
    throw std::invalid_argument("target history contains no final release");
  return bump(latest->release, c);
}

}  // namespace relforge::version
