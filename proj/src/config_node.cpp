// SPDX-License-Identifier: Apache-2.0
#include "relforge/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace relforge::config {

namespace fs = std::filesystem;
using nlohmann::json;

ConfigNode ConfigNode::make_mapping(Origin origin) {
  ConfigNode n;
  n.kind_ = Kind::mapping;
  n.origin_ = std::move(origin);
  return n;
}

ConfigNode ConfigNode::make_sequence(Origin origin) {
  ConfigNode n;
  n.kind_ = Kind::sequence;
  n.origin_ = std::move(origin);
  return n;
}

ConfigNode ConfigNode::make_string(std::string v, Origin origin) {
  ConfigNode n;
  n.kind_ = Kind::string;
  n.scalar_ = std::move(v);
  n.origin_ = std::move(origin);
  return n;
}

ConfigNode ConfigNode::make_integer(std::int64_t v, Origin origin) {
  ConfigNode n;
  n.kind_ = Kind::integer;
  n.scalar_ = v;
  n.origin_ = std::move(origin);
  return n;
}

ConfigNode ConfigNode::make_float(double v, Origin origin) {
  ConfigNode n;
  n.kind_ = Kind::floating;
  n.scalar_ = v;
  n.origin_ = std::move(origin);
  return n;
}

ConfigNode ConfigNode::make_bool(bool v, Origin origin) {
  ConfigNode n;
  n.kind_ = Kind::boolean;
  n.scalar_ = v;
  n.origin_ = std::move(origin);
  return n;
}

ConfigNode ConfigNode::make_null(Origin origin) {
  ConfigNode n;
  n.origin_ = std::move(origin);
  return n;
}

const std::string& ConfigNode::as_string() const {
  if (kind_ != Kind::string) throw ConfigError("node is not a string");
  return std::get<std::string>(scalar_);
}

std::int64_t ConfigNode::as_integer() const {
  if (kind_ != Kind::integer) throw ConfigError("node is not an integer");
  return std::get<std::int64_t>(scalar_);
}

double ConfigNode::as_float() const {
  if (kind_ == Kind::integer) return static_cast<double>(as_integer());
  if (kind_ != Kind::floating) throw ConfigError("node is not a float");
  return std::get<double>(scalar_);
}

bool ConfigNode::as_bool() const {
  if (kind_ != Kind::boolean) throw ConfigError("node is not a boolean");
  return std::get<bool>(scalar_);
}

std::string ConfigNode::scalar_text() const {
  switch (kind_) {
    case Kind::string: return as_string();
    case Kind::integer: return std::to_string(as_integer());
    case Kind::floating: {
      std::ostringstream out;
      out << std::get<double>(scalar_);
      return out.str();
    }
    case Kind::boolean: return as_bool() ? "true" : "false";
    case Kind::null: return "null";
    default: throw ConfigError("node has no scalar text");
  }
}

const std::vector<std::pair<std::string, ConfigNode>>& ConfigNode::items() const {
  if (kind_ != Kind::mapping) throw ConfigError("node is not a mapping");
  return map_;
}

std::vector<std::pair<std::string, ConfigNode>>& ConfigNode::items() {
  if (kind_ != Kind::mapping) throw ConfigError("node is not a mapping");
  return map_;
}

const ConfigNode* ConfigNode::find(const std::string& key) const {
  if (kind_ != Kind::mapping) return nullptr;
  for (const auto& [k, v] : map_)
    if (k == key) return &v;
  return nullptr;
}

ConfigNode* ConfigNode::find(const std::string& key) {
  if (kind_ != Kind::mapping) return nullptr;
  for (auto& [k, v] : map_)
    if (k == key) return &v;
  return nullptr;
}

void ConfigNode::set(const std::string& key, ConfigNode value) {
  if (kind_ != Kind::mapping) throw ConfigError("node is not a mapping");
  for (auto& [k, v] : map_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  map_.emplace_back(key, std::move(value));
}

bool ConfigNode::erase(const std::string& key) {
  if (kind_ != Kind::mapping) return false;
  auto it = std::find_if(map_.begin(), map_.end(),
                         [&](const auto& kv) { return kv.first == key; });
  if (it == map_.end()) return false;
  map_.erase(it);
  return true;
}

const std::vector<ConfigNode>& ConfigNode::elements() const {
  if (kind_ != Kind::sequence) throw ConfigError("node is not a sequence");
  return seq_;
}

std::vector<ConfigNode>& ConfigNode::elements() {
  if (kind_ != Kind::sequence) throw ConfigError("node is not a sequence");
  return seq_;
}

void ConfigNode::push_back(ConfigNode value) {
  if (kind_ != Kind::sequence) throw ConfigError("node is not a sequence");
  seq_.push_back(std::move(value));
}

json ConfigNode::to_json() const {
  switch (kind_) {
    case Kind::mapping: {
      json out = json::object();
      for (const auto& [k, v] : map_) out[k] = v.to_json();
      return out;
    }
    case Kind::sequence: {
      json out = json::array();
      for (const auto& v : seq_) out.push_back(v.to_json());
      return out;
    }
    case Kind::string: return as_string();
    case Kind::integer: return as_integer();
    case Kind::floating: return std::get<double>(scalar_);
    case Kind::boolean: return as_bool();
    case Kind::null: return nullptr;
  }
  return nullptr;
}

ConfigNode ConfigNode::from_json(const json& j, Origin origin) {
  if (j.is_object()) {
    ConfigNode n = make_mapping(origin);
    for (const auto& [k, v] : j.items()) n.set(k, from_json(v, origin));
    return n;
  }
  if (j.is_array()) {
    ConfigNode n = make_sequence(origin);
    for (const auto& v : j) n.push_back(from_json(v, origin));
    return n;
  }
  if (j.is_string()) return make_string(j.get<std::string>(), origin);
  if (j.is_number_integer()) return make_integer(j.get<std::int64_t>(), origin);
  if (j.is_number_float()) return make_float(j.get<double>(), origin);
  if (j.is_boolean()) return make_bool(j.get<bool>(), origin);
  return make_null(origin);
}

bool ConfigNode::operator==(const ConfigNode& other) const {
  // Origins are provenance, not identity.
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::mapping: return map_ == other.map_;
    case Kind::sequence: return seq_ == other.seq_;
    default: return scalar_ == other.scalar_;
  }
}

ConfigTree::ConfigTree() : root_(ConfigNode::make_mapping()) {}

ConfigTree::ConfigTree(ConfigNode root) : root_(std::move(root)) {
  if (!root_.is_mapping()) throw ConfigError("tree root must be a mapping");
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

const ConfigNode* ConfigTree::at_path(const std::string& path) const {
  const ConfigNode* node = &root_;
  if (path.empty()) return node;
  for (const auto& part : split_path(path)) {
    if (node->is_mapping()) {
      node = node->find(part);
      if (!node) return nullptr;
    } else if (node->is_sequence() && is_index(part)) {
      const auto idx = std::stoull(part);
      if (idx >= node->elements().size()) return nullptr;
      node = &node->elements()[idx];
    } else {
      return nullptr;
    }
  }
  return node;
}

ConfigNode* ConfigTree::at_path(const std::string& path) {
  return const_cast<ConfigNode*>(
      static_cast<const ConfigTree*>(this)->at_path(path));
}

void ConfigTree::set_path(const std::string& path, ConfigNode value) {
  if (path.empty()) {
    if (!value.is_mapping()) throw ConfigError("tree root must be a mapping");
    root_ = std::move(value);
    return;
  }
  ConfigNode* node = &root_;
  const auto parts = split_path(path);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto& part = parts[i];
    if (node->is_sequence() && is_index(part)) {
      const auto idx = std::stoull(part);
      if (idx >= node->elements().size())
        throw ConfigError("sequence index out of range in path: " + path);
      node = &node->elements()[idx];
      continue;
    }
    if (!node->is_mapping())
      throw ConfigError("path traverses a non-container node: " + path);
    ConfigNode* child = node->find(part);
    if (!child) {
      node->set(part, ConfigNode::make_mapping());
      child = node->find(part);
    }
    node = child;
  }
  const auto& last = parts.back();
  if (node->is_sequence() && is_index(last)) {
    const auto idx = std::stoull(last);
    if (idx >= node->elements().size())
      throw ConfigError("sequence index out of range in path: " + path);
    node->elements()[idx] = std::move(value);
    return;
  }
  if (!node->is_mapping())
    throw ConfigError("path traverses a non-container node: " + path);
  node->set(last, std::move(value));
}

std::optional<std::string> ConfigTree::string_at(const std::string& path) const {
  const ConfigNode* n = at_path(path);
  if (!n || n->kind() != ConfigNode::Kind::string) return std::nullopt;
  return n->as_string();
}

namespace {

ConfigNode convert_yaml(const YAML::Node& node, const std::string& file) {
  Origin origin{file, node.Mark().line + 1};
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      ConfigNode out = ConfigNode::make_mapping(origin);
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (out.find(key))
          throw ConfigError(file + ":" +
                            std::to_string(kv.first.Mark().line + 1) +
                            ": duplicate mapping key '" + key + "'");
        out.set(key, convert_yaml(kv.second, file));
      }
      return out;
    }
    case YAML::NodeType::Sequence: {
      ConfigNode out = ConfigNode::make_sequence(origin);
      for (const auto& item : node) out.push_back(convert_yaml(item, file));
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string& text = node.Scalar();
      const std::string& tag = node.Tag();
      if (tag == "!") return ConfigNode::make_string(text, origin);  // quoted
      if (text == "null" || text == "~" || text.empty())
        return ConfigNode::make_null(origin);
      if (text == "true") return ConfigNode::make_bool(true, origin);
      if (text == "false") return ConfigNode::make_bool(false, origin);
      static const std::regex int_re(R"(-?\d+)");
      static const std::regex float_re(R"(-?(\d+\.\d*|\.\d+)([eE][-+]?\d+)?|-?\d+[eE][-+]?\d+)");
      if (std::regex_match(text, int_re))
        return ConfigNode::make_integer(std::stoll(text), origin);
      if (std::regex_match(text, float_re))
        return ConfigNode::make_float(std::stod(text), origin);
      return ConfigNode::make_string(text, origin);
    }
    default:
      return ConfigNode::make_null(origin);
  }
}

}  // namespace

ConfigNode parse_yaml(const std::string& text, const std::string& file) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(file + ":" + std::to_string(e.mark.line + 1) +
                      ": " + e.msg);
  }
  return convert_yaml(doc, file);
}

ConfigTree load_tree(const std::string& root_directory) {
  fs::path dir(root_directory);
  if (fs::is_directory(dir / ".control")) dir /= ".control";
  if (!fs::is_directory(dir))
    throw ConfigError("control-center directory does not exist: " +
                      root_directory);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() &&
        (entry.path().extension() == ".yaml" ||
         entry.path().extension() == ".yml"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw ConfigError("no control-center documents in " + dir.string());

  ConfigNode root = ConfigNode::make_mapping(Origin{dir.string(), 0});
  std::map<std::string, Origin> key_origins;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    ConfigNode doc = parse_yaml(buf.str(), file.string());
    if (doc.kind() == ConfigNode::Kind::null) continue;  // empty file
    if (!doc.is_mapping())
      throw ConfigError(file.string() + ": document root must be a mapping");
    for (auto& [key, value] : doc.items()) {
      auto it = key_origins.find(key);
      if (it != key_origins.end())
        throw ConfigError("duplicate top-level key '" + key + "' in " +
                          value.origin().file + ":" +
                          std::to_string(value.origin().line) +
                          " (already defined in " + it->second.file + ":" +
                          std::to_string(it->second.line) + ")");
      key_origins.emplace(key, value.origin());
      root.set(key, std::move(value));
    }
  }
  return ConfigTree(std::move(root));
}

}  // namespace relforge::config
