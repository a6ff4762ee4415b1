// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "relforge/config.hpp"
#include "relforge/issue.hpp"

namespace relforge::config {

namespace {

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  if (s.find_first_of(":#{}[]&*!|>'\"%@`,") != std::string::npos) return true;
  return s.front() == ' ' || s.back() == ' ';
}

void emit_yaml(const ConfigNode& node, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (node.kind()) {
    case ConfigNode::Kind::mapping:
      if (node.items().empty()) {
        out << " {}\n";
        return;
      }
      if (indent > 0) out << "\n";
      for (const auto& [k, v] : node.items()) {
        out << pad << k << ":";
        emit_yaml(v, out, indent + 1);
      }
      break;
    case ConfigNode::Kind::sequence:
      if (node.elements().empty()) {
        out << " []\n";
        return;
      }
      if (indent > 0) out << "\n";
      for (const auto& v : node.elements()) {
        if (v.is_scalar()) {
          out << pad << "-";
          emit_yaml(v, out, indent + 1);
        } else {
          // Block item: render the nested node with the dash on its own line.
          std::ostringstream nested;
          emit_yaml(v, nested, indent + 1);
          std::string body = nested.str();
          if (!body.empty() && body[0] == '\n') body.erase(0, 1);
          const std::string inner_pad(static_cast<std::size_t>(indent + 1) * 2, ' ');
          if (body.rfind(inner_pad, 0) == 0)
            body = pad + "- " + body.substr(inner_pad.size());
          out << body;
        }
      }
      break;
    case ConfigNode::Kind::string: {
      const std::string& s = node.as_string();
      if (needs_quotes(s)) {
        std::string escaped;
        for (char c : s) {
          if (c == '"' || c == '\\') escaped += '\\';
          escaped += c;
        }
        out << " \"" << escaped << "\"\n";
      } else {
        out << " " << s << "\n";
      }
      break;
    }
    default:
      out << " " << node.scalar_text() << "\n";
  }
}

std::string dump_yaml(const ConfigNode& node) {
  std::ostringstream out;
  emit_yaml(node, out, 0);
  std::string s = out.str();
  if (!s.empty() && s[0] == '\n') s.erase(0, 1);
  return s;
}

}  // namespace

std::vector<FileGenerator> default_generators() {
  std::vector<FileGenerator> generators;

  generators.push_back(
      {"issue-forms", [](const ConfigTree& tree) {
         std::vector<std::pair<std::string, std::string>> files;
         for (const auto& form : issue::compile_forms(tree))
           files.emplace_back(".github/ISSUE_TEMPLATE/" + form.id + ".yaml",
                              issue::emit_form_yaml(form));
         return files;
       }});

  generators.push_back(
      {"labels", [](const ConfigTree& tree) {
         std::vector<std::pair<std::string, std::string>> files;
         if (const ConfigNode* labels = tree.at_path("issues.labels"))
           files.emplace_back(".github/labels.yaml", dump_yaml(*labels));
         return files;
       }});

  generators.push_back(
      {"project-metadata", [](const ConfigTree& tree) {
         std::vector<std::pair<std::string, std::string>> files;
         if (const ConfigNode* project = tree.at_path("project"))
           files.emplace_back("metadata.yaml", dump_yaml(*project));
         return files;
       }});

  generators.push_back(
      {"citation", [](const ConfigTree& tree) {
         std::vector<std::pair<std::string, std::string>> files;
         std::ostringstream cff;
         cff << "cff-version: 1.2.0\n";
         cff << "message: If you use this software, please cite it as below.\n";
         cff << "title: "
             << tree.string_at("project.title")
                    .value_or(tree.string_at("project.name").value_or("unnamed"))
             << "\n";
         if (auto license = tree.string_at("license.expression"))
           cff << "license: " << *license << "\n";
         if (const ConfigNode* members = tree.at_path("team.members")) {
           cff << "authors:\n";
           for (const auto& m : members->elements()) {
             if (m.is_mapping() && m.find("name"))
               cff << "  - name: " << m.find("name")->as_string() << "\n";
             else if (m.is_scalar())
               cff << "  - name: " << m.scalar_text() << "\n";
           }
         }
         files.emplace_back("CITATION.cff", cff.str());
         return files;
       }});

  return generators;
}

}  // namespace relforge::config
