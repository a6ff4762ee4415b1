// SPDX-License-Identifier: Apache-2.0
#include "relforge/license.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace relforge::license {

using nlohmann::json;

ExprPtr LicenseExpr::make_id(std::string id, bool or_later) {
  auto node = std::make_shared<LicenseExpr>();
  node->kind = Kind::id;
  node->id = std::move(id);
  node->or_later = or_later;
  return node;
}

ExprPtr LicenseExpr::make_with(ExprPtr id, std::string exception) {
  if (!id || id->kind != Kind::id)
    throw std::invalid_argument("WITH applies only to a license id");
  auto node = std::make_shared<LicenseExpr>();
  node->kind = Kind::with;
  node->left = std::move(id);
  node->exception = std::move(exception);
  return node;
}

ExprPtr LicenseExpr::make_and(ExprPtr l, ExprPtr r) {
  auto node = std::make_shared<LicenseExpr>();
  node->kind = Kind::and_op;
  node->left = std::move(l);
  node->right = std::move(r);
  return node;
}

ExprPtr LicenseExpr::make_or(ExprPtr l, ExprPtr r) {
  auto node = std::make_shared<LicenseExpr>();
  node->kind = Kind::or_op;
  node->left = std::move(l);
  node->right = std::move(r);
  return node;
}

bool equal(const LicenseExpr& a, const LicenseExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case LicenseExpr::Kind::id:
      return a.id == b.id && a.or_later == b.or_later;
    case LicenseExpr::Kind::with:
      return a.exception == b.exception && equal(*a.left, *b.left);
    case LicenseExpr::Kind::and_op:
    case LicenseExpr::Kind::or_op:
      return equal(*a.left, *b.left) && equal(*a.right, *b.right);
  }
  return false;
}

namespace {

int precedence(LicenseExpr::Kind k) {
  switch (k) {
    case LicenseExpr::Kind::or_op: return 1;
    case LicenseExpr::Kind::and_op: return 2;
    default: return 3;
  }
}

void render(const LicenseExpr& e, std::string& out, int parent_prec) {
  const int prec = precedence(e.kind);
  const bool parens = prec < parent_prec;
  if (parens) out += "(";
  switch (e.kind) {
    case LicenseExpr::Kind::id:
      out += e.id;
      if (e.or_later) out += "+";
      break;
    case LicenseExpr::Kind::with:
      render(*e.left, out, prec);
      out += " WITH " + e.exception;
      break;
    case LicenseExpr::Kind::and_op:
      render(*e.left, out, prec);
      out += " AND ";
      render(*e.right, out, prec + 1);  // left-associative
      break;
    case LicenseExpr::Kind::or_op:
      render(*e.left, out, prec);
      out += " OR ";
      render(*e.right, out, prec + 1);
      break;
  }
  if (parens) out += ")";
}

struct Token {
  enum class Kind { id, plus, with, and_kw, or_kw, lparen, rparen, end };
  Kind kind;
  std::string text;
  std::size_t pos;
};

bool is_id_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      tokens.push_back({Token::Kind::lparen, "(", i++});
    } else if (c == ')') {
      tokens.push_back({Token::Kind::rparen, ")", i++});
    } else if (c == '+') {
      tokens.push_back({Token::Kind::plus, "+", i++});
    } else if (is_id_char(c)) {
      std::size_t start = i;
      while (i < text.size() && is_id_char(text[i])) ++i;
      std::string word = text.substr(start, i - start);
      if (word == "WITH")
        tokens.push_back({Token::Kind::with, word, start});
      else if (word == "AND")
        tokens.push_back({Token::Kind::and_kw, word, start});
      else if (word == "OR")
        tokens.push_back({Token::Kind::or_kw, word, start});
      else
        tokens.push_back({Token::Kind::id, word, start});
    } else {
      throw std::invalid_argument("unknown token '" + std::string(1, c) +
                                  "' at offset " + std::to_string(i));
    }
  }
  tokens.push_back({Token::Kind::end, "", text.size()});
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    expect(Token::Kind::end, "end of expression");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token next() { return tokens_[pos_++]; }

  void expect(Token::Kind kind, const char* what) {
    if (peek().kind != kind)
      throw std::invalid_argument("expected " + std::string(what) +
                                  " at offset " + std::to_string(peek().pos));
    ++pos_;
  }

  ExprPtr expr() {
    ExprPtr left = and_expr();
    while (peek().kind == Token::Kind::or_kw) {
      next();
      left = LicenseExpr::make_or(std::move(left), and_expr());
    }
    return left;
  }

  ExprPtr and_expr() {
    ExprPtr left = with_expr();
    while (peek().kind == Token::Kind::and_kw) {
      next();
      left = LicenseExpr::make_and(std::move(left), with_expr());
    }
    return left;
  }

  ExprPtr with_expr() {
    ExprPtr p = primary();
    if (peek().kind == Token::Kind::with) {
      next();
      if (peek().kind != Token::Kind::id)
        throw std::invalid_argument("expected exception id after WITH at offset " +
                                    std::to_string(peek().pos));
      if (p->kind != LicenseExpr::Kind::id)
        throw std::invalid_argument("WITH applies only to a license id");
      p = LicenseExpr::make_with(std::move(p), next().text);
    }
    return p;
  }

  ExprPtr primary() {
    if (peek().kind == Token::Kind::lparen) {
      next();
      ExprPtr e = expr();
      expect(Token::Kind::rparen, "')'");
      return e;
    }
    if (peek().kind != Token::Kind::id)
      throw std::invalid_argument("expected license id at offset " +
                                  std::to_string(peek().pos));
    std::string id = next().text;
    bool or_later = false;
    if (peek().kind == Token::Kind::plus) {
      next();
      or_later = true;
    }
    return LicenseExpr::make_id(std::move(id), or_later);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void collect(const LicenseExpr& e, std::vector<std::string>& ids,
             std::vector<std::string>& exceptions) {
  switch (e.kind) {
    case LicenseExpr::Kind::id:
      if (std::find(ids.begin(), ids.end(), e.id) == ids.end())
        ids.push_back(e.id);
      break;
    case LicenseExpr::Kind::with:
      collect(*e.left, ids, exceptions);
      if (std::find(exceptions.begin(), exceptions.end(), e.exception) ==
          exceptions.end())
        exceptions.push_back(e.exception);
      break;
    case LicenseExpr::Kind::and_op:
    case LicenseExpr::Kind::or_op:
      collect(*e.left, ids, exceptions);
      collect(*e.right, ids, exceptions);
      break;
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string to_string(const LicenseExpr& expr) {
  std::string out;
  render(expr, out, 0);
  return out;
}

ExprPtr parse_license_expr(const std::string& text) {
  return Parser(tokenize(text)).parse();
}

std::vector<std::string> component_ids(const LicenseExpr& expr) {
  std::vector<std::string> ids, exceptions;
  collect(expr, ids, exceptions);
  return ids;
}

std::vector<std::string> exception_ids(const LicenseExpr& expr) {
  std::vector<std::string> ids, exceptions;
  collect(expr, ids, exceptions);
  return exceptions;
}

LicenseRegistry LicenseRegistry::from_json(const json& doc) {
  LicenseRegistry reg;
  auto read = [](const json& j) {
    LicenseRecord r;
    r.id = j.at("id").get<std::string>();
    r.name = j.value("name", r.id);
    r.text = j.value("text", "");
    r.header_line = j.value("header", "");
    r.osi_approved = j.value("osi_approved", false);
    r.fsf_libre = j.value("fsf_libre", false);
    r.deprecated = j.value("deprecated", false);
    return r;
  };
  for (const auto& j : doc.value("licenses", json::array()))
    reg.add_license(read(j));
  for (const auto& j : doc.value("exceptions", json::array()))
    reg.add_exception(read(j));
  return reg;
}

LicenseRegistry LicenseRegistry::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open license registry: " + path);
  json doc = json::parse(in);
  return from_json(doc);
}

void LicenseRegistry::add_license(LicenseRecord record) {
  const std::string key = lower(record.id);
  if (licenses_.count(key))
    throw std::invalid_argument("duplicate license id: " + record.id);
  licenses_.emplace(key, std::move(record));
}

void LicenseRegistry::add_exception(LicenseRecord record) {
  const std::string key = lower(record.id);
  if (exceptions_.count(key))
    throw std::invalid_argument("duplicate exception id: " + record.id);
  exceptions_.emplace(key, std::move(record));
}

const LicenseRecord* LicenseRegistry::find_license(const std::string& id) const {
  auto it = licenses_.find(lower(id));
  return it == licenses_.end() ? nullptr : &it->second;
}

const LicenseRecord* LicenseRegistry::find_exception(const std::string& id) const {
  auto it = exceptions_.find(lower(id));
  return it == exceptions_.end() ? nullptr : &it->second;
}

bool ValidationReport::ok() const {
  return std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Finding::Severity::error;
  });
}

ValidationReport validate_license_expr(const LicenseExpr& expr,
                                       const LicenseRegistry& registry) {
  ValidationReport report;
  for (const auto& id : component_ids(expr)) {
    const LicenseRecord* rec = registry.find_license(id);
    if (!rec) {
      report.findings.push_back(
          {Finding::Severity::error, id, "unknown license id '" + id + "'"});
    } else if (rec->deprecated) {
      report.findings.push_back({Finding::Severity::warning, id,
                                 "license id '" + id + "' is deprecated"});
    }
  }
  for (const auto& id : exception_ids(expr)) {
    const LicenseRecord* rec = registry.find_exception(id);
    if (!rec) {
      report.findings.push_back(
          {Finding::Severity::error, id, "unknown exception id '" + id + "'"});
    } else if (rec->deprecated) {
      report.findings.push_back({Finding::Severity::warning, id,
                                 "exception id '" + id + "' is deprecated"});
    }
  }
  return report;
}

std::string customize_license_text(
    const LicenseRecord& record,
    const std::map<std::string, std::string>& fields) {
  std::string out;
  const std::string& text = record.text;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t open = text.find("<<", i);
    if (open == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    const std::size_t close = text.find(">>", open + 2);
    if (close == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    out.append(text, i, open - i);
    const std::string field = text.substr(open + 2, close - open - 2);
    auto it = fields.find(field);
    if (it == fields.end())
      throw std::invalid_argument("missing field for placeholder '" + field +
                                  "' in license " + record.id);
    out += it->second;
    i = close + 2;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> generate_license_docs(
    const LicenseExpr& expr, const LicenseRegistry& registry,
    const std::map<std::string, std::string>& fields) {
  const auto report = validate_license_expr(expr, registry);
  if (!report.ok()) {
    std::string msg = "invalid license expression:";
    for (const auto& f : report.findings)
      if (f.severity == Finding::Severity::error) msg += " " + f.message + ";";
    throw std::invalid_argument(msg);
  }

  std::vector<std::pair<std::string, std::string>> files;
  const auto ids = component_ids(expr);
  if (ids.size() == 1 && expr.kind == LicenseExpr::Kind::id) {
    files.emplace_back("LICENSE",
                       customize_license_text(*registry.find_license(ids[0]),
                                              fields));
    return files;
  }

  std::string top = "This project is licensed under the terms of the SPDX "
                    "expression:\n\n    " + to_string(expr) +
                    "\n\nSee the LICENSES directory for the full text of each "
                    "component.\n";
  files.emplace_back("LICENSE", std::move(top));
  for (const auto& id : ids)
    files.emplace_back("LICENSES/" + id + ".txt",
                       customize_license_text(*registry.find_license(id),
                                              fields));
  return files;
}

std::string annotate_source(const std::string& content,
                            const CommentStyle& style,
                            const LicenseExpr& expr) {
  const std::string line =
      style.line_prefix + " SPDX-License-Identifier: " + to_string(expr);
  const std::string marker = "SPDX-License-Identifier:";

  std::vector<std::string> lines;
  std::istringstream in(content);
  std::string l;
  while (std::getline(in, l)) lines.push_back(l);
  const bool trailing_newline = content.empty() || content.back() == '\n';

  for (auto& existing : lines) {
    if (existing.find(marker) != std::string::npos) {
      if (existing == line) return content;
      existing = line;
      std::string out;
      for (const auto& x : lines) out += x + "\n";
      if (!trailing_newline && !out.empty()) out.pop_back();
      return out;
    }
  }

  // Insert as the first comment line, after a shebang when present.
  std::size_t at = 0;
  if (!lines.empty() && lines[0].rfind("#!", 0) == 0) at = 1;
  lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), line);
  std::string out;
  for (const auto& x : lines) out += x + "\n";
  if (!trailing_newline && !out.empty()) out.pop_back();
  return out;
}

}  // namespace relforge::license
