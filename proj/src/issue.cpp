// SPDX-License-Identifier: Apache-2.0
#include "relforge/issue.hpp"

#include <algorithm>
#include <sstream>

namespace relforge::issue {

using config::ConfigNode;
using config::ConfigTree;
using nlohmann::json;

const FormField* FormDefinition::find_field(const std::string& key) const {
  for (const auto& f : fields)
    if (f.key == key) return &f;
  return nullptr;
}

std::string to_string(TicketStatus s) {
  switch (s) {
    case TicketStatus::triage: return "triage";
    case TicketStatus::rejected: return "rejected";
    case TicketStatus::ready: return "ready";
    case TicketStatus::in_progress: return "in-progress";
    case TicketStatus::review: return "review";
    case TicketStatus::done: return "done";
  }
  return {};
}

TicketStatus ticket_status_from_string(const std::string& s) {
  if (s == "triage") return TicketStatus::triage;
  if (s == "rejected") return TicketStatus::rejected;
  if (s == "ready") return TicketStatus::ready;
  if (s == "in-progress") return TicketStatus::in_progress;
  if (s == "review") return TicketStatus::review;
  if (s == "done") return TicketStatus::done;
  throw std::invalid_argument("unknown ticket status: " + s);
}

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(current);
      current.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      current += c;
    }
  }
  if (!current.empty()) parts.push_back(current);
  return parts;
}

}  // namespace

std::vector<std::string> Ticket::affected_versions() const {
  auto it = inputs.find("version");
  if (it == inputs.end() || it->second.empty()) return {};
  return split_csv(it->second);
}

std::vector<std::string> Ticket::api_endpoints() const {
  auto it = inputs.find("endpoint");
  if (it == inputs.end() || it->second.empty()) return {};
  return split_csv(it->second);
}

json Ticket::to_json() const {
  return json{{"number", number},
              {"type", type_id},
              {"title", title},
              {"inputs", inputs},
              {"labels", labels},
              {"assignees", assignees},
              {"status", to_string(status)}};
}

Ticket Ticket::from_json(const json& doc) {
  Ticket t;
  t.number = doc.at("number").get<std::uint64_t>();
  t.type_id = doc.value("type", "");
  t.title = doc.value("title", "");
  t.inputs = doc.value("inputs", std::map<std::string, std::string>{});
  for (const auto& l : doc.value("labels", json::array()))
    t.labels.insert(l.get<std::string>());
  t.assignees = doc.value("assignees", std::vector<std::string>{});
  t.status = ticket_status_from_string(doc.value("status", "triage"));
  return t;
}

std::size_t ProtocolDoc::done_count() const {
  return static_cast<std::size_t>(
      std::count_if(tasks.begin(), tasks.end(),
                    [](const ProtocolTask& t) { return t.done; }));
}

std::string ProtocolDoc::render_markdown() const {
  std::ostringstream out;
  out << "## User Requirements Document (URD)\n\n" << urd << "\n";
  out << "## Software Requirements Document (SRD)\n\n"
      << (srd.empty() ? "_To be filled in by maintainers._" : srd) << "\n\n";
  out << "## Software Design Document (SDD)\n\n"
      << (sdd.empty() ? "_To be filled in by maintainers._" : sdd) << "\n\n";
  out << "## Tasks\n\n";
  for (const auto& t : tasks)
    out << "- [" << (t.done ? 'x' : ' ') << "] " << t.text << "\n";
  out << "\n## Activity Log\n\n";
  for (const auto& line : activity_log) out << "- " << line << "\n";

  json state;
  state["tasks"] = json::array();
  for (const auto& t : tasks)
    state["tasks"].push_back({{"text", t.text}, {"done", t.done}});
  state["activity_log"] = activity_log;
  state["linked_prs"] = linked_prs;
  state["srd"] = srd;
  state["sdd"] = sdd;
  state["urd"] = urd;
  out << "\n<!-- relforge:state\n" << state.dump(2) << "\n-->\n";
  return out.str();
}

ProtocolDoc ProtocolDoc::parse_markdown(const std::string& text) {
  const std::string open = "<!-- relforge:state\n";
  const auto start = text.find(open);
  if (start == std::string::npos)
    throw std::invalid_argument("protocol document has no machine section");
  const auto end = text.find("\n-->", start);
  const json state =
      json::parse(text.substr(start + open.size(), end - start - open.size()));
  ProtocolDoc doc;
  doc.urd = state.value("urd", "");
  doc.srd = state.value("srd", "");
  doc.sdd = state.value("sdd", "");
  for (const auto& t : state.value("tasks", json::array()))
    doc.tasks.push_back({t.at("text").get<std::string>(),
                         t.value("done", false)});
  doc.activity_log = state.value("activity_log", std::vector<std::string>{});
  doc.linked_prs = state.value("linked_prs", std::vector<std::uint64_t>{});
  return doc;
}

namespace {

FormField::Kind field_kind_from_string(const std::string& s) {
  if (s == "dropdown") return FormField::Kind::dropdown;
  if (s == "text" || s == "input") return FormField::Kind::text;
  if (s == "textarea") return FormField::Kind::textarea;
  if (s == "checkboxes") return FormField::Kind::checkboxes;
  throw std::invalid_argument("unknown form field kind: " + s);
}

std::string field_kind_name(FormField::Kind k) {
  switch (k) {
    case FormField::Kind::dropdown: return "dropdown";
    case FormField::Kind::text: return "input";
    case FormField::Kind::textarea: return "textarea";
    case FormField::Kind::checkboxes: return "checkboxes";
  }
  return {};
}

}  // namespace

std::vector<FormDefinition> compile_forms(const ConfigTree& tree) {
  const ConfigNode* forms_node = tree.at_path("issues.forms");
  if (!forms_node || !forms_node->is_sequence()) return {};

  std::vector<FormDefinition> forms;
  std::set<std::string> seen_ids;
  for (const auto& f : forms_node->elements()) {
    FormDefinition form;
    const ConfigNode* id = f.find("id");
    if (!id) throw config::ConfigError("issue form without id");
    form.id = id->as_string();
    if (!seen_ids.insert(form.id).second)
      throw config::ConfigError("duplicate issue form id: " + form.id);
    form.issue_type = f.find("type") ? f.find("type")->as_string() : form.id;
    if (const ConfigNode* t = f.find("title")) form.title_template = t->as_string();
    if (const ConfigNode* d = f.find("description"))
      form.description = d->as_string();

    const ConfigNode* fields = f.find("fields");
    if (!fields || !fields->is_sequence() || fields->elements().empty())
      throw config::ConfigError("issue form '" + form.id +
                                "' declares no fields");
    std::set<std::string> seen_keys;
    for (const auto& fd : fields->elements()) {
      FormField field;
      field.key = fd.find("key")->as_string();
      if (!seen_keys.insert(field.key).second)
        throw config::ConfigError("duplicate field key '" + field.key +
                                  "' in form " + form.id);
      field.kind = field_kind_from_string(
          fd.find("kind") ? fd.find("kind")->as_string() : "text");
      if (const ConfigNode* l = fd.find("label")) field.label = l->as_string();
      if (const ConfigNode* r = fd.find("required")) field.required = r->as_bool();
      if (const ConfigNode* s = fd.find("source")) field.source = s->as_string();
      if (const ConfigNode* opts = fd.find("options"))
        for (const auto& o : opts->elements())
          field.options.push_back(o.scalar_text());
      if (field.kind == FormField::Kind::dropdown && field.options.empty() &&
          field.source.empty())
        throw config::ConfigError("dropdown field '" + field.key + "' in form " +
                                  form.id + " has no options and no source");
      form.fields.push_back(std::move(field));
    }
    forms.push_back(std::move(form));
  }
  return forms;
}

std::vector<FormDefinition> refresh_form_choices(
    std::vector<FormDefinition> forms, const vcs::RepoState& state,
    const std::vector<std::string>& api_index) {
  // Final-release versions across all branches, descending.
  version::TagHistory finals;
  for (const auto& [name, b] : state.branches)
    for (const auto& v : b.tags.versions())
      if (v.is_final() && !finals.contains(v)) finals.add(v);
  std::vector<std::string> version_options;
  for (auto it = finals.versions().rbegin(); it != finals.versions().rend(); ++it)
    version_options.push_back(version::format_version(*it));
  if (version_options.empty()) version_options.push_back("unreleased");

  for (auto& form : forms) {
    for (auto& field : form.fields) {
      if (field.source == "versions") {
        field.options = version_options;
      } else if (field.source == "api") {
        field.options = api_index;
        if (api_index.empty()) field.required = false;
      }
    }
  }
  return forms;
}

std::string emit_form_yaml(const FormDefinition& form) {
  std::ostringstream out;
  out << "name: " << (form.title_template.empty() ? form.id : form.title_template)
      << "\n";
  out << "description: " << form.description << "\n";
  out << "body:\n";
  for (const auto& field : form.fields) {
    out << "  - type: " << field_kind_name(field.kind) << "\n";
    out << "    id: " << field.key << "\n";
    out << "    attributes:\n";
    out << "      label: " << (field.label.empty() ? field.key : field.label)
        << "\n";
    if (!field.options.empty()) {
      out << "      options:\n";
      for (const auto& o : field.options) out << "        - \"" << o << "\"\n";
    }
    out << "    validations:\n";
    out << "      required: " << (field.required ? "true" : "false") << "\n";
  }
  return out.str();
}

Submission Submission::from_json(const json& doc) {
  Submission s;
  s.form_id = doc.at("form_id").get<std::string>();
  s.number = doc.value("number", std::uint64_t{0});
  s.inputs = doc.value("inputs", std::map<std::string, std::string>{});
  return s;
}

version::ChangeType change_type_for(const std::string& type_id,
                                    const ConfigTree& tree) {
  if (auto mapped = tree.string_at("issues.change_types." + type_id))
    return version::change_type_from_string(*mapped);
  // Defaults from the control center's conventional vocabulary.
  if (type_id == "breaking" || type_id == "breaking-change")
    return version::ChangeType::major;
  if (type_id == "feature" || type_id == "feature-request")
    return version::ChangeType::minor;
  if (type_id == "bug" || type_id == "bugfix" || type_id == "bug-report")
    return version::ChangeType::patch;
  throw std::invalid_argument("no change type mapping for issue type '" +
                              type_id + "'");
}

ProcessedSubmission process_submission(const FormDefinition& form,
                                       const Submission& payload,
                                       const ConfigTree& tree) {
  for (const auto& [key, value] : payload.inputs)
    if (!form.find_field(key))
      throw std::invalid_argument("submission carries unknown field '" + key +
                                  "'");
  std::vector<std::string> missing;
  for (const auto& field : form.fields) {
    auto it = payload.inputs.find(field.key);
    const bool present = it != payload.inputs.end() && !it->second.empty();
    if (field.required && !present) missing.push_back(field.key);
    if (present && field.kind == FormField::Kind::dropdown &&
        !field.options.empty() &&
        std::find(field.options.begin(), field.options.end(), it->second) ==
            field.options.end())
      throw std::invalid_argument("unknown dropdown value '" + it->second +
                                  "' for field '" + field.key + "'");
  }
  if (!missing.empty()) {
    std::string msg = "missing required field(s):";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }

  ProcessedSubmission out;
  Ticket& t = out.ticket;
  t.number = payload.number;
  t.type_id = form.issue_type;
  t.inputs = payload.inputs;
  t.status = TicketStatus::triage;
  if (auto it = payload.inputs.find("title"); it != payload.inputs.end())
    t.title = it->second;
  else
    t.title = form.title_template;

  t.labels.insert("type/" + form.issue_type);
  for (const auto& v : t.affected_versions()) t.labels.insert("version/" + v);
  for (const auto& e : t.api_endpoints()) t.labels.insert("api/" + e);

  // Assignees from the governance mapping, issue type -> member ids.
  if (const ConfigNode* gov =
          tree.at_path("issues.governance." + form.issue_type))
    if (gov->is_sequence())
      for (const auto& m : gov->elements())
        t.assignees.push_back(m.as_string());

  ProtocolDoc& doc = out.protocol;
  std::ostringstream urd;
  urd << "Submitted via form `" << form.id << "` (issue #" << t.number
      << ").\n\n";
  for (const auto& field : form.fields) {
    auto it = payload.inputs.find(field.key);
    if (it == payload.inputs.end()) continue;
    urd << "**" << (field.label.empty() ? field.key : field.label)
        << "**: " << it->second << "\n";
  }
  doc.urd = urd.str();
  if (const ConfigNode* tasks = tree.at_path("issues.protocol.default_tasks"))
    if (tasks->is_sequence())
      for (const auto& task : tasks->elements())
        doc.tasks.push_back({task.as_string(), false});
  doc.activity_log.push_back("ticket #" + std::to_string(t.number) +
                             " created from form " + form.id);
  return out;
}

vcs::TicketRef ticket_ref(const Ticket& ticket, const ConfigTree& tree) {
  vcs::TicketRef ref;
  ref.number = ticket.number;
  ref.type_id = ticket.type_id;
  ref.title = ticket.title;
  ref.affected_versions = ticket.affected_versions();
  ref.change = change_type_for(ticket.type_id, tree);
  return ref;
}

TransitionPlan apply_status_transition(const Ticket& ticket,
                                       const std::string& new_label,
                                       const vcs::RepoState& state,
                                       const ConfigTree& tree) {
  const TicketStatus target = ticket_status_from_string(new_label);
  const TicketStatus from = ticket.status;

  auto allowed = [&]() {
    switch (from) {
      case TicketStatus::triage:
        return target == TicketStatus::rejected || target == TicketStatus::ready;
      case TicketStatus::ready:
        return target == TicketStatus::in_progress;
      case TicketStatus::in_progress:
        return target == TicketStatus::review;
      case TicketStatus::review:
        return target == TicketStatus::in_progress ||
               target == TicketStatus::done;
      default:
        return false;
    }
  };
  if (!allowed())
    throw std::invalid_argument("illegal status transition " +
                                to_string(from) + " -> " + to_string(target));

  TransitionPlan plan;
  plan.new_status = target;
  if (target == TicketStatus::rejected) {
    plan.actions.push_back({"close-ticket", {{"number", ticket.number}}});
    plan.actions.push_back(
        {"protocol-append",
         {{"number", ticket.number},
          {"line", "ticket rejected and closed"}}});
  } else if (target == TicketStatus::ready) {
    const auto branch_plans = vcs::plan_issue_branches(
        ticket_ref(ticket, tree), state);
    for (const auto& bp : branch_plans) {
      plan.actions.push_back({"create-branch", bp.to_json()});
      plan.actions.push_back({"open-draft-pr",
                              {{"source", bp.name}, {"target", bp.source},
                               {"issue", ticket.number}}});
    }
  }
  return plan;
}

std::optional<Command> parse_command_comment(const std::string& text) {
  static const std::set<std::string> registry = {"test"};

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '/') continue;
    std::istringstream words(line.substr(1));
    Command cmd;
    words >> cmd.verb;
    if (!registry.count(cmd.verb)) continue;
    std::string arg;
    while (words >> arg) {
      const auto eq = arg.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("malformed argument '" + arg +
                                    "' for /" + cmd.verb +
                                    " (expected key=value; keys: version, env, "
                                    "cases)");
      cmd.arguments[arg.substr(0, eq)] = arg.substr(eq + 1);
    }
    if (cmd.verb == "test") {
      if (auto it = cmd.arguments.find("version"); it != cmd.arguments.end()) {
        try {
          version::parse_version(it->second);
        } catch (const version::ParseError& e) {
          throw std::invalid_argument(
              std::string("invalid version argument for /test: ") + e.what());
        }
      }
    }
    return cmd;
  }
  return std::nullopt;
}

}  // namespace relforge::issue
