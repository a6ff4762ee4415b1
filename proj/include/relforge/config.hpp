// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace relforge::vcs {
struct RepoState;
}

namespace relforge::config {

inline constexpr const char* kGeneratedHeader =
    "# generated by relforge — do not edit";

struct Origin {
  std::string file;
  int line = 0;

  bool operator==(const Origin&) const = default;
  auto operator<=>(const Origin&) const = default;
};

/// One node of the resolved control-center document. Value type; mappings
/// keep declaration order with unique keys.
class ConfigNode {
 public:
  enum class Kind { mapping, sequence, string, integer, floating, boolean, null };

  ConfigNode() : kind_(Kind::null) {}
  static ConfigNode make_mapping(Origin origin = {});
  static ConfigNode make_sequence(Origin origin = {});
  static ConfigNode make_string(std::string v, Origin origin = {});
  static ConfigNode make_integer(std::int64_t v, Origin origin = {});
  static ConfigNode make_float(double v, Origin origin = {});
  static ConfigNode make_bool(bool v, Origin origin = {});
  static ConfigNode make_null(Origin origin = {});

  Kind kind() const { return kind_; }
  const Origin& origin() const { return origin_; }
  void set_origin(Origin o) { origin_ = std::move(o); }

  bool is_mapping() const { return kind_ == Kind::mapping; }
  bool is_sequence() const { return kind_ == Kind::sequence; }
  bool is_scalar() const {
    return kind_ != Kind::mapping && kind_ != Kind::sequence;
  }

  const std::string& as_string() const;
  std::int64_t as_integer() const;
  double as_float() const;
  bool as_bool() const;
  /// Scalar rendered as text (for embedded template substitution).
  std::string scalar_text() const;

  // Mapping access.
  const std::vector<std::pair<std::string, ConfigNode>>& items() const;
  std::vector<std::pair<std::string, ConfigNode>>& items();
  const ConfigNode* find(const std::string& key) const;
  ConfigNode* find(const std::string& key);
  void set(const std::string& key, ConfigNode value);  // insert or replace
  bool erase(const std::string& key);

  // Sequence access.
  const std::vector<ConfigNode>& elements() const;
  std::vector<ConfigNode>& elements();
  void push_back(ConfigNode value);

  nlohmann::json to_json() const;
  static ConfigNode from_json(const nlohmann::json& j, Origin origin = {});

  bool operator==(const ConfigNode& other) const;

 private:
  Kind kind_;
  Origin origin_;
  std::variant<std::monostate, std::string, std::int64_t, double, bool> scalar_;
  std::vector<std::pair<std::string, ConfigNode>> map_;
  std::vector<ConfigNode> seq_;
};

/// The resolved control-center tree. Paths are dotted keys with integer
/// indices for sequence elements, e.g. "team.members.0.name".
class ConfigTree {
 public:
  ConfigTree();
  explicit ConfigTree(ConfigNode root);

  const ConfigNode& root() const { return root_; }
  ConfigNode& root() { return root_; }

  const ConfigNode* at_path(const std::string& path) const;
  ConfigNode* at_path(const std::string& path);
  /// Creates intermediate mappings as needed; fails on kind conflicts.
  void set_path(const std::string& path, ConfigNode value);
  bool has_path(const std::string& path) const { return at_path(path) != nullptr; }

  std::optional<std::string> string_at(const std::string& path) const;

 private:
  ConfigNode root_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse one YAML document into a ConfigNode with per-node origins.
ConfigNode parse_yaml(const std::string& text, const std::string& file);

/// Merge every `*.yaml` in `<root>/.control` (or `root` itself when it is the
/// control directory) into one tree. Duplicate top-level keys across files are
/// an error naming both origins.
ConfigTree load_tree(const std::string& root_directory);

// ---------------------------------------------------------------------------
// Inheritance + caching
// ---------------------------------------------------------------------------

/// Retrieves a remote or local document body; nullopt means unavailable.
class DocumentFetcher {
 public:
  virtual ~DocumentFetcher() = default;
  virtual std::optional<std::string> fetch(const std::string& uri) = 0;
};

class FileFetcher : public DocumentFetcher {
 public:
  std::optional<std::string> fetch(const std::string& uri) override;
};

struct CacheResult {
  enum class Status { hit, stale, miss };
  Status status = Status::miss;
  std::string payload;
  std::string warning;  // set when a corrupt entry was treated as a miss
};

/// Content-addressed cache directory: cache/<sha256(key)>.json holding
/// {key, fetched_at, retention, payload}.
class CacheStore {
 public:
  explicit CacheStore(std::string directory);

  CacheResult lookup(const std::string& key, std::int64_t now) const;
  void put(const std::string& key, const std::string& payload,
           std::int64_t fetched_at, std::int64_t retention);

  static constexpr std::int64_t kDefaultRetention = 86400;

 private:
  std::string entry_path(const std::string& key) const;
  std::string directory_;
};

inline constexpr int kInheritanceDepthLimit = 10;

/// Resolve every `$inherit` directive: fresh cache entries satisfy the fetch,
/// otherwise the fetcher runs and the result is cached. Nested directives in
/// fetched content resolve recursively up to the depth limit; revisiting the
/// same source along one chain is a cycle error.
ConfigTree resolve_inheritance(const ConfigTree& tree, DocumentFetcher* fetcher,
                               CacheStore* cache, std::int64_t now);

// ---------------------------------------------------------------------------
// Templating
// ---------------------------------------------------------------------------

/// Substitution markers are `${{ dotted.path }}`. A marker spanning the whole
/// scalar substitutes the referenced node type-preservingly; embedded markers
/// stringify scalars.
ConfigTree render_templates(const ConfigTree& tree);

std::vector<std::string> extract_template_refs(const std::string& raw);

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct AugmentationProvider {
  std::string name;
  std::vector<std::string> paths;  // paths this provider may fill
  std::function<std::vector<std::pair<std::string, ConfigNode>>(
      const ConfigTree&, const vcs::RepoState*)>
      run;
};

/// Providers fill only absent paths (user values win); writing to an existing
/// path is a contract violation naming the provider.
ConfigTree augment(const ConfigTree& tree,
                   const std::vector<AugmentationProvider>& providers,
                   const vcs::RepoState* state = nullptr);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationFinding {
  enum class Severity { error, warning };
  Severity severity;
  std::string path;
  std::string message;
  Origin origin;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const;
  bool empty() const { return findings.empty(); }
};

struct Schema {
  std::string name;
  std::string target_path;  // empty = root
  nlohmann::json document;  // JSON-Schema subset
};

std::vector<Schema> load_schemas(const std::string& directory);
ValidationReport validate(const ConfigTree& tree,
                          const std::vector<Schema>& schemas);

// ---------------------------------------------------------------------------
// Synchronization
// ---------------------------------------------------------------------------

struct FileGenerator {
  std::string name;
  std::function<std::vector<std::pair<std::string, std::string>>(
      const ConfigTree&)>
      generate;  // (relative path, content) pairs, header added by the engine
};

struct SyncReport {
  std::vector<std::string> created;
  std::vector<std::string> updated;
  std::vector<std::string> unchanged;
  std::vector<std::string> deleted_orphans;

  nlohmann::json to_json() const;
};

SyncReport synchronize(const ConfigTree& tree,
                       const std::vector<FileGenerator>& generators,
                       const std::string& workspace);

/// The generators bundled with the default control center.
std::vector<FileGenerator> default_generators();

}  // namespace relforge::config
