// SPDX-License-Identifier: Apache-2.0
#include "relforge/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "relforge/vcs.hpp"

namespace relforge::config {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Fetching + cache
// ---------------------------------------------------------------------------

std::optional<std::string> FileFetcher::fetch(const std::string& uri) {
  std::string path = uri;
  if (path.rfind("file://", 0) == 0) path = path.substr(7);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string sha256_hex(const std::string& input) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace

CacheStore::CacheStore(std::string directory) : directory_(std::move(directory)) {
  fs::create_directories(directory_);
}

std::string CacheStore::entry_path(const std::string& key) const {
  return (fs::path(directory_) / (sha256_hex(key) + ".json")).string();
}

CacheResult CacheStore::lookup(const std::string& key, std::int64_t now) const {
  CacheResult result;
  const std::string path = entry_path(key);
  std::ifstream in(path);
  if (!in) return result;
  try {
    json doc = json::parse(in);
    if (doc.at("key").get<std::string>() != key)
      throw std::runtime_error("key mismatch");
    const auto fetched_at = doc.at("fetched_at").get<std::int64_t>();
    const auto retention = doc.at("retention").get<std::int64_t>();
    result.payload = doc.at("payload").get<std::string>();
    result.status = (now - fetched_at > retention) ? CacheResult::Status::stale
                                                   : CacheResult::Status::hit;
  } catch (const std::exception& e) {
    result = CacheResult{};
    result.warning = "corrupt cache entry for '" + key + "': " + e.what();
  }
  return result;
}

void CacheStore::put(const std::string& key, const std::string& payload,
                     std::int64_t fetched_at, std::int64_t retention) {
  json doc{{"key", key},
           {"fetched_at", fetched_at},
           {"retention", retention},
           {"payload", payload}};
  std::ofstream out(entry_path(key));
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Inheritance
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kInheritKey = "$inherit";

struct Directive {
  std::string target_path;
  std::string source;
  std::string source_path;
  std::string policy = "deep-merge";
  Origin origin;
};

void collect_directives(const ConfigNode& node, const std::string& path,
                        std::vector<Directive>& out) {
  if (node.is_mapping()) {
    if (const ConfigNode* d = node.find(kInheritKey)) {
      if (!d->is_mapping())
        throw ConfigError("$inherit at '" + path + "' must be a mapping");
      Directive dir;
      dir.target_path = path;
      dir.origin = d->origin();
      const ConfigNode* src = d->find("source");
      if (!src || src->kind() != ConfigNode::Kind::string)
        throw ConfigError("$inherit at '" + path + "' needs a string 'source'");
      dir.source = src->as_string();
      if (const ConfigNode* sp = d->find("path")) dir.source_path = sp->as_string();
      if (const ConfigNode* pol = d->find("policy")) {
        dir.policy = pol->as_string();
        if (dir.policy != "replace" && dir.policy != "deep-merge" &&
            dir.policy != "fill-missing")
          throw ConfigError("$inherit at '" + path + "': unknown merge policy '" +
                            dir.policy + "'");
      }
      out.push_back(std::move(dir));
    }
    for (const auto& [k, v] : node.items()) {
      if (k == kInheritKey) continue;
      collect_directives(v, path.empty() ? k : path + "." + k, out);
    }
  } else if (node.is_sequence()) {
    std::size_t i = 0;
    for (const auto& v : node.elements())
      collect_directives(v, path + "." + std::to_string(i++), out);
  }
}

// merge(base, overlay): overlay wins; mappings merge recursively, sequences
// and scalars are replaced wholesale.
ConfigNode deep_merge(const ConfigNode& base, const ConfigNode& overlay) {
  if (!base.is_mapping() || !overlay.is_mapping()) return overlay;
  ConfigNode out = base;
  for (const auto& [k, v] : overlay.items()) {
    if (const ConfigNode* existing = out.find(k))
      out.set(k, deep_merge(*existing, v));
    else
      out.set(k, v);
  }
  return out;
}

ConfigNode fill_missing(const ConfigNode& base, const ConfigNode& local) {
  if (!base.is_mapping() || !local.is_mapping()) return local;
  ConfigNode out = local;
  for (const auto& [k, v] : base.items())
    if (!out.find(k)) out.set(k, v);
  return out;
}

struct ResolveContext {
  DocumentFetcher* fetcher;
  CacheStore* cache;
  std::int64_t now;
};

std::string fetch_document(ResolveContext& ctx, const Directive& dir) {
  const std::string key = dir.source + "#" + dir.source_path;
  if (ctx.cache) {
    CacheResult cached = ctx.cache->lookup(key, ctx.now);
    if (cached.status == CacheResult::Status::hit) return cached.payload;
  }
  std::optional<std::string> body =
      ctx.fetcher ? ctx.fetcher->fetch(dir.source) : std::nullopt;
  if (!body)
    throw ConfigError("inheritance fetch failed with no usable cache: " +
                      dir.source);
  if (ctx.cache)
    ctx.cache->put(key, *body, ctx.now, CacheStore::kDefaultRetention);
  return *body;
}

ConfigNode resolve_node(ConfigNode node, ResolveContext& ctx,
                        std::vector<std::string>& chain, int depth);

ConfigNode resolve_directives_in(ConfigNode root, ResolveContext& ctx,
                                 std::vector<std::string>& chain, int depth) {
  if (depth > kInheritanceDepthLimit)
    throw ConfigError("inheritance depth limit (" +
                      std::to_string(kInheritanceDepthLimit) + ") exceeded");

  std::vector<Directive> directives;
  collect_directives(root, "", directives);
  if (directives.empty()) return root;

  ConfigTree tree(std::move(root));
  for (const auto& dir : directives) {
    const std::string key = dir.source + "#" + dir.source_path;
    if (std::find(chain.begin(), chain.end(), key) != chain.end())
      throw ConfigError("inheritance cycle detected at " + key);
    chain.push_back(key);

    const std::string body = fetch_document(ctx, dir);
    ConfigNode fetched = parse_yaml(body, dir.source);
    if (!dir.source_path.empty()) {
      ConfigTree fetched_tree(fetched.is_mapping()
                                  ? fetched
                                  : ConfigNode::make_mapping());
      const ConfigNode* sub = fetched_tree.at_path(dir.source_path);
      if (!sub)
        throw ConfigError("inherited document " + dir.source +
                          " has no path '" + dir.source_path + "'");
      fetched = *sub;
    }
    fetched = resolve_directives_in(std::move(fetched), ctx, chain, depth + 1);

    ConfigNode* target = tree.at_path(dir.target_path);
    if (!target)
      throw ConfigError("inheritance target path vanished: " + dir.target_path);
    ConfigNode local = *target;
    local.erase(kInheritKey);

    ConfigNode merged;
    if (dir.policy == "replace")
      merged = fetched;
    else if (dir.policy == "deep-merge")
      merged = deep_merge(fetched, local);
    else
      merged = fill_missing(fetched, local);
    tree.set_path(dir.target_path, std::move(merged));

    chain.pop_back();
  }
  // Fetched content may itself introduce directives at new paths.
  return resolve_directives_in(tree.root(), ctx, chain, depth + 1);
}

}  // namespace

ConfigTree resolve_inheritance(const ConfigTree& tree, DocumentFetcher* fetcher,
                               CacheStore* cache, std::int64_t now) {
  ResolveContext ctx{fetcher, cache, now};
  std::vector<std::string> chain;
  return ConfigTree(resolve_directives_in(tree.root(), ctx, chain, 0));
}

// ---------------------------------------------------------------------------
// Templating
// ---------------------------------------------------------------------------

namespace {

const std::regex kMarkerRe(R"(\$\{\{\s*([A-Za-z0-9_.\-]+)\s*\}\})");

struct TemplateNode {
  std::string path;
  std::string raw;
  Origin origin;
  std::vector<std::string> refs;
};

void collect_templates(const ConfigNode& node, const std::string& path,
                       std::vector<TemplateNode>& out) {
  if (node.is_mapping()) {
    for (const auto& [k, v] : node.items())
      collect_templates(v, path.empty() ? k : path + "." + k, out);
  } else if (node.is_sequence()) {
    std::size_t i = 0;
    for (const auto& v : node.elements())
      collect_templates(v, path + "." + std::to_string(i++), out);
  } else if (node.kind() == ConfigNode::Kind::string) {
    const std::string& raw = node.as_string();
    if (raw.find("${{") == std::string::npos) return;
    TemplateNode t{path, raw, node.origin(), extract_template_refs(raw)};
    out.push_back(std::move(t));
  }
}

bool path_within(const std::string& outer, const std::string& inner) {
  return inner == outer || inner.rfind(outer + ".", 0) == 0;
}

}  // namespace

std::vector<std::string> extract_template_refs(const std::string& raw) {
  std::vector<std::string> refs;
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), kMarkerRe);
       it != std::sregex_iterator(); ++it)
    refs.push_back((*it)[1].str());
  return refs;
}

ConfigTree render_templates(const ConfigTree& tree) {
  std::vector<TemplateNode> templates;
  collect_templates(tree.root(), "", templates);

  ConfigTree out = tree;
  // Dependency edges: template i depends on template j when i references a
  // path containing j's node. Rendered in topological order.
  const std::size_t n = templates.size();
  std::vector<std::vector<std::size_t>> deps(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& ref : templates[i].refs)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && path_within(ref, templates[j].path))
          deps[i].push_back(j);

  std::vector<int> mark(n, 0);  // 0 = unvisited, 1 = visiting, 2 = done
  std::vector<std::size_t> order;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (mark[i] == 2) return;
    if (mark[i] == 1)
      throw ConfigError("cyclic template dependency involving '" +
                        templates[i].path + "'");
    mark[i] = 1;
    for (std::size_t j : deps[i]) visit(j);
    mark[i] = 2;
    order.push_back(i);
  };
  for (std::size_t i = 0; i < n; ++i) visit(i);

  for (std::size_t i : order) {
    const TemplateNode& t = templates[i];
    std::smatch whole;
    const ConfigNode* current = out.at_path(t.path);
    if (!current) continue;
    const std::string raw = current->as_string();
    if (std::regex_match(raw, whole, kMarkerRe)) {
      // Whole-scalar marker: substitute type-preservingly.
      const std::string ref = whole[1].str();
      const ConfigNode* target = out.at_path(ref);
      if (!target)
        throw ConfigError("template at '" + t.path + "' (" + t.origin.file +
                          ":" + std::to_string(t.origin.line) +
                          ") references nonexistent path '" + ref + "'");
      ConfigNode replacement = *target;
      replacement.set_origin(t.origin);
      out.set_path(t.path, std::move(replacement));
      continue;
    }
    std::string rendered;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(raw.begin(), raw.end(), kMarkerRe);
         it != std::sregex_iterator(); ++it) {
      rendered.append(raw, last, static_cast<std::size_t>(it->position()) - last);
      const std::string ref = (*it)[1].str();
      const ConfigNode* target = out.at_path(ref);
      if (!target)
        throw ConfigError("template at '" + t.path + "' (" + t.origin.file +
                          ":" + std::to_string(t.origin.line) +
                          ") references nonexistent path '" + ref + "'");
      if (!target->is_scalar())
        throw ConfigError("template at '" + t.path +
                          "' embeds non-scalar path '" + ref + "'");
      rendered += target->scalar_text();
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    rendered.append(raw, last, std::string::npos);
    out.set_path(t.path, ConfigNode::make_string(rendered, t.origin));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

ConfigTree augment(const ConfigTree& tree,
                   const std::vector<AugmentationProvider>& providers,
                   const vcs::RepoState* state) {
  ConfigTree out = tree;
  for (const auto& provider : providers) {
    for (auto& [path, value] : provider.run(out, state)) {
      if (tree.has_path(path))
        throw ConfigError("augmentation provider '" + provider.name +
                          "' attempted to overwrite existing path '" + path +
                          "'");
      if (!out.has_path(path)) out.set_path(path, std::move(value));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::ok() const {
  return std::none_of(findings.begin(), findings.end(),
                      [](const ValidationFinding& f) {
                        return f.severity == ValidationFinding::Severity::error;
                      });
}

std::vector<Schema> load_schemas(const std::string& directory) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::vector<Schema> schemas;
  for (const auto& file : files) {
    std::ifstream in(file);
    Schema s;
    s.name = file.stem().string();
    s.document = json::parse(in);
    s.target_path = s.document.value("$target", "");
    schemas.push_back(std::move(s));
  }
  return schemas;
}

namespace {

const char* json_type_name(const json& j) {
  if (j.is_object()) return "object";
  if (j.is_array()) return "array";
  if (j.is_string()) return "string";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_boolean()) return "boolean";
  return "null";
}

bool matches_type(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

Origin origin_for(const ConfigTree& tree, const std::string& path) {
  std::string p = path;
  while (true) {
    if (const ConfigNode* n = tree.at_path(p)) return n->origin();
    const auto dot = p.rfind('.');
    if (dot == std::string::npos) return tree.root().origin();
    p.resize(dot);
  }
}

void check_schema(const ConfigTree& tree, const json& value,
                  const json& schema, const std::string& path,
                  std::vector<ValidationFinding>& findings) {
  auto add = [&](const std::string& message) {
    findings.push_back({ValidationFinding::Severity::error, path, message,
                        origin_for(tree, path)});
  };

  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(value, t.get<std::string>());
    } else {
      for (const auto& alt : t)
        ok = ok || matches_type(value, alt.get<std::string>());
    }
    if (!ok) {
      add("expected type " + t.dump() + ", got " + json_type_name(value));
      return;
    }
  }
  if (schema.contains("enum")) {
    bool ok = false;
    std::string allowed;
    for (const auto& alt : schema["enum"]) {
      ok = ok || alt == value;
      if (!allowed.empty()) allowed += "|";
      allowed += alt.is_string() ? alt.get<std::string>() : alt.dump();
    }
    if (!ok) add("value " + value.dump() + " is not one of " + allowed);
  }
  if (schema.contains("pattern") && value.is_string()) {
    const std::regex re(schema["pattern"].get<std::string>());
    if (!std::regex_match(value.get<std::string>(), re))
      add("value " + value.dump() + " does not match pattern " +
          schema["pattern"].get<std::string>());
  }
  if (schema.contains("minimum") && value.is_number()) {
    if (value.get<double>() < schema["minimum"].get<double>())
      add("value " + value.dump() + " below minimum " +
          schema["minimum"].dump());
  }
  if (value.is_object()) {
    for (const auto& req : schema.value("required", json::array())) {
      const std::string key = req.get<std::string>();
      if (!value.contains(key))
        add("missing required key '" + key + "'");
    }
    const json props = schema.value("properties", json::object());
    for (const auto& [key, sub] : value.items()) {
      const std::string child = path.empty() ? key : path + "." + key;
      if (props.contains(key)) {
        check_schema(tree, sub, props[key], child, findings);
      } else if (schema.value("additionalProperties", json(true)) == json(false)) {
        findings.push_back({ValidationFinding::Severity::warning, child,
                            "unknown key '" + key + "'",
                            origin_for(tree, child)});
      }
    }
  }
  if (value.is_array()) {
    if (schema.contains("minItems") &&
        value.size() < schema["minItems"].get<std::size_t>())
      add("array has fewer than " + schema["minItems"].dump() + " items");
    if (schema.contains("items")) {
      std::size_t i = 0;
      for (const auto& item : value)
        check_schema(tree, item, schema["items"],
                     path + "." + std::to_string(i++), findings);
    }
  }
}

}  // namespace

ValidationReport validate(const ConfigTree& tree,
                          const std::vector<Schema>& schemas) {
  ValidationReport report;
  for (const auto& schema : schemas) {
    const ConfigNode* target = tree.at_path(schema.target_path);
    if (!target) {
      if (schema.document.value("$required", true))
        report.findings.push_back(
            {ValidationFinding::Severity::error, schema.target_path,
             "missing required section '" + schema.target_path + "'",
             tree.root().origin()});
      continue;
    }
    check_schema(tree, target->to_json(), schema.document, schema.target_path,
                 report.findings);
  }
  std::stable_sort(report.findings.begin(), report.findings.end(),
                   [](const ValidationFinding& a, const ValidationFinding& b) {
                     return a.origin < b.origin;
                   });
  return report;
}

// ---------------------------------------------------------------------------
// Synchronization
// ---------------------------------------------------------------------------

json SyncReport::to_json() const {
  return json{{"created", created},
              {"updated", updated},
              {"unchanged", unchanged},
              {"deleted_orphans", deleted_orphans}};
}

SyncReport synchronize(const ConfigTree& tree,
                       const std::vector<FileGenerator>& generators,
                       const std::string& workspace) {
  const fs::path ws(workspace);
  fs::create_directories(ws);

  std::map<std::string, std::string> outputs;  // relpath -> content (with header)
  std::map<std::string, std::string> claimed_by;
  for (const auto& gen : generators) {
    for (auto& [rel, content] : gen.generate(tree)) {
      auto it = claimed_by.find(rel);
      if (it != claimed_by.end())
        throw ConfigError("generator collision on '" + rel + "' between '" +
                          it->second + "' and '" + gen.name + "'");
      claimed_by.emplace(rel, gen.name);
      outputs.emplace(rel, std::string(kGeneratedHeader) + "\n" + content);
    }
  }

  SyncReport report;
  for (const auto& [rel, content] : outputs) {
    const fs::path target = ws / rel;
    std::string existing;
    bool exists = false;
    if (std::ifstream in(target); in) {
      std::stringstream buf;
      buf << in.rdbuf();
      existing = buf.str();
      exists = true;
    }
    if (exists && existing == content) {
      report.unchanged.push_back(rel);
      continue;
    }
    fs::create_directories(target.parent_path());
    std::ofstream out(target);
    if (!out) throw ConfigError("workspace not writable: " + target.string());
    out << content;
    (exists ? report.updated : report.created).push_back(rel);
  }

  // Files carrying the generated header but no longer produced are orphans.
  for (const auto& entry : fs::recursive_directory_iterator(ws)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), ws).generic_string();
    if (outputs.count(rel)) continue;
    std::ifstream in(entry.path());
    std::string first_line;
    std::getline(in, first_line);
    if (first_line == kGeneratedHeader) {
      in.close();
      fs::remove(entry.path());
      report.deleted_orphans.push_back(rel);
    }
  }
  std::sort(report.deleted_orphans.begin(), report.deleted_orphans.end());
  return report;
}

}  // namespace relforge::config
