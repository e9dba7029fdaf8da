#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mrules/error.hpp"
#include "mrules/problem.hpp"

namespace mrules {
namespace {

struct Value {
  enum class Kind { kString, kNumber, kList } kind;
  std::string text;
  double number = 0.0;
  std::vector<Value> items;
  std::size_t line = 0;
};

std::optional<double> parse_real(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double sign = 1.0;
  std::string_view body = s;
  if (body.front() == '+' || body.front() == '-') {
    sign = body.front() == '-' ? -1.0 : 1.0;
    body.remove_prefix(1);
  }
  if (body == "inf") return sign * std::numeric_limits<double>::infinity();
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

class Reader {
 public:
  Reader(std::string_view text, std::vector<std::string> sections)
      : text_(text), sections_(std::move(sections)) {}

  // section -> key -> value
  std::map<std::string, std::map<std::string, Value>> read() {
    std::map<std::string, std::map<std::string, Value>> out;
    std::string section;
    for (;;) {
      skip_blank();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        const std::size_t start = pos_;
        while (!eof() && peek() != ']' && peek() != '\n') ++pos_;
        if (eof() || peek() != ']') fail("unterminated section header");
        section = trim(text_.substr(start, pos_ - start));
        if (std::find(sections_.begin(), sections_.end(), section) ==
            sections_.end())
          fail("unknown section [" + section + "]");
        ++pos_;
        end_of_line();
        continue;
      }
      if (section.empty()) fail("key outside of a section");
      const std::size_t key_line = line_;
      const std::size_t start = pos_;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                        peek() == '_'))
        ++pos_;
      std::string key(text_.substr(start, pos_ - start));
      if (key.empty()) fail("expected a key");
      skip_inline_space();
      if (eof() || peek() != '=') fail("expected '=' after '" + key + "'");
      ++pos_;
      skip_inline_space();
      Value v = read_value();
      v.line = key_line;
      end_of_line();
      if (!out[section].emplace(key, std::move(v)).second)
        throw FormatError(key_line, "duplicate key '" + key + "'");
    }
    return out;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(line_, msg);
  }

  static std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.remove_suffix(1);
    return std::string(s);
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r'))
      ++pos_;
  }

  // Whitespace, newlines and comments.
  void skip_blank() {
    while (!eof()) {
      if (peek() == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else if (peek() == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(peek()))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_space();
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("trailing characters after value");
  }

  Value read_value() {
    if (eof()) fail("missing value");
    if (peek() == '"') return read_string();
    if (peek() == '[') {
      ++pos_;
      Value list{Value::Kind::kList, {}, 0.0, {}, line_};
      for (;;) {
        skip_blank();
        if (eof()) fail("unterminated list");
        if (peek() == ']') {
          ++pos_;
          return list;
        }
        list.items.push_back(read_value());
        skip_blank();
        if (eof()) fail("unterminated list");
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in list");
        }
      }
    }
    const std::size_t start = pos_;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '#' &&
           peek() != '\n' && !std::isspace(static_cast<unsigned char>(peek())))
      ++pos_;
    std::string_view token = text_.substr(start, pos_ - start);
    auto number = parse_real(token);
    if (!number) fail("expected a number, string or list, got '" +
                      std::string(token) + "'");
    return Value{Value::Kind::kNumber, std::string(token), *number, {}, line_};
  }

  Value read_string() {
    ++pos_;
    std::string s;
    while (!eof() && peek() != '"') {
      if (peek() == '\n') fail("unterminated string");
      if (peek() == '\\' && pos_ + 1 < text_.size()) ++pos_;
      s += peek();
      ++pos_;
    }
    if (eof()) fail("unterminated string");
    ++pos_;
    return Value{Value::Kind::kString, std::move(s), 0.0, {}, line_};
  }

  std::string_view text_;
  std::vector<std::string> sections_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

const Value* find(const std::map<std::string, Value>& sec,
                  const std::string& key) {
  auto it = sec.find(key);
  return it == sec.end() ? nullptr : &it->second;
}

std::string as_string(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::kString)
    throw FormatError(v.line, "'" + key + "' must be a string");
  return v.text;
}

double as_number(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::kNumber)
    throw FormatError(v.line, "'" + key + "' must be a number");
  return v.number;
}

std::vector<std::string> as_string_list(const Value& v,
                                        const std::string& key) {
  if (v.kind != Value::Kind::kList)
    throw FormatError(v.line, "'" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : v.items) out.push_back(as_string(item, key));
  return out;
}

Vector as_number_list(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::kList)
    throw FormatError(v.line, "'" + key + "' must be a list of numbers");
  Vector out;
  for (const auto& item : v.items) out.push_back(as_number(item, key));
  return out;
}

Interval parse_interval(const std::string& text, std::size_t line) {
  std::string_view s = text;
  auto fail = [&] {
    throw FormatError(line, "domain interval must look like \"(lo, hi)\", got \"" +
                                text + "\"");
  };
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') fail();
  s = s.substr(1, s.size() - 2);
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) fail();
  auto lo = parse_real(s.substr(0, comma));
  auto hi = parse_real(s.substr(comma + 1));
  if (!lo || !hi) fail();
  if (!(*lo < *hi)) throw FormatError(line, "empty domain interval " + text);
  return {*lo, *hi};
}

std::vector<ScalarField> parse_fields(const Value* v, const std::string& key,
                                      const std::vector<std::string>& vars) {
  std::vector<ScalarField> out;
  if (v == nullptr) return out;
  for (const auto& src : as_string_list(*v, key)) {
    try {
      out.push_back(ScalarField::parse(src, vars));
    } catch (const SyntaxError& e) {
      throw FormatError(v->line, "in " + key + " \"" + src + "\": " + e.what());
    }
  }
  return out;
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string string_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote(items[i]);
  }
  return out + "]";
}

std::string field_list(std::span<const ScalarField> fields) {
  std::vector<std::string> src;
  for (const auto& f : fields) src.push_back(f.source());
  return string_list(src);
}

}  // namespace

LoadedProblem parse_problem(std::string_view text) {
  auto sections = Reader(text, {"problem", "candidate"}).read();
  const auto& prob = sections["problem"];
  const auto& cand = sections["candidate"];

  static const std::vector<std::string> kProblemKeys = {
      "kind", "vars", "objective", "ineq", "eq", "domain"};
  static const std::vector<std::string> kCandidateKeys = {"point", "act_tol"};
  for (const auto& [k, v] : prob)
    if (std::find(kProblemKeys.begin(), kProblemKeys.end(), k) ==
        kProblemKeys.end())
      throw FormatError(v.line, "unknown key '" + k + "' in [problem]");
  for (const auto& [k, v] : cand)
    if (std::find(kCandidateKeys.begin(), kCandidateKeys.end(), k) ==
        kCandidateKeys.end())
      throw FormatError(v.line, "unknown key '" + k + "' in [candidate]");

  auto require = [](const std::map<std::string, Value>& sec,
                    const std::string& section, const std::string& key) {
    const Value* v = find(sec, key);
    if (v == nullptr)
      throw FormatError(0, "missing '" + key + "' in [" + section + "]");
    return v;
  };

  const Value* kind_v = require(prob, "problem", "kind");
  const std::string kind = as_string(*kind_v, "kind");
  if (kind != "inequality" && kind != "mixed")
    throw FormatError(kind_v->line,
                      "kind must be \"inequality\" or \"mixed\", got \"" +
                          kind + "\"");

  const Value* vars_v = require(prob, "problem", "vars");
  std::vector<std::string> vars = as_string_list(*vars_v, "vars");
  if (vars.empty()) throw FormatError(vars_v->line, "vars must not be empty");

  const Value* obj_v = require(prob, "problem", "objective");
  const std::string obj_src = as_string(*obj_v, "objective");
  std::optional<ScalarField> objective;
  try {
    objective = ScalarField::parse(obj_src, vars);
  } catch (const SyntaxError& e) {
    throw FormatError(obj_v->line, "in objective: " + std::string(e.what()));
  }

  auto ineq = parse_fields(find(prob, "ineq"), "ineq", vars);
  auto eq = parse_fields(find(prob, "eq"), "eq", vars);
  if (kind == "inequality" && !eq.empty())
    throw FormatError(find(prob, "eq")->line,
                      "an inequality problem cannot have equalities");

  std::vector<Interval> intervals(vars.size());
  if (const Value* d = find(prob, "domain")) {
    if (d->kind == Value::Kind::kString) {
      const Interval iv = parse_interval(d->text, d->line);
      std::fill(intervals.begin(), intervals.end(), iv);
    } else if (d->kind == Value::Kind::kList) {
      if (d->items.size() != vars.size())
        throw DimensionMismatch("domain lists " +
                                std::to_string(d->items.size()) +
                                " intervals for " +
                                std::to_string(vars.size()) + " variables");
      for (std::size_t i = 0; i < vars.size(); ++i)
        intervals[i] = parse_interval(as_string(d->items[i], "domain"), d->line);
    } else {
      throw FormatError(d->line, "domain must be a string or list of strings");
    }
  }

  const Value* point_v = require(cand, "candidate", "point");
  Candidate candidate;
  candidate.point = as_number_list(*point_v, "point");
  if (const Value* t = find(cand, "act_tol")) {
    candidate.activity_tolerance = as_number(*t, "act_tol");
    if (!(candidate.activity_tolerance > 0.0))
      throw FormatError(t->line, "act_tol must be positive");
  }

  DomainBox domain(std::move(intervals));
  Problem problem = [&]() -> Problem {
    if (eq.empty())
      return InequalityProblem{vars, std::move(*objective), std::move(ineq),
                               std::move(domain)};
    return MixedProblem{vars, std::move(*objective), std::move(ineq),
                        std::move(eq), std::move(domain)};
  }();
  validate(view(problem), candidate);
  return {std::move(problem), std::move(candidate)};
}

LoadedProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string format_problem(const Problem& problem, const Candidate& candidate) {
  const ProblemView p = view(problem);
  std::ostringstream out;
  out << "[problem]\n";
  out << "kind = " << (p.mixed ? "\"mixed\"" : "\"inequality\"") << "\n";
  out << "vars = " << string_list(p.variables) << "\n";
  out << "objective = " << quote(p.objective.source()) << "\n";
  out << "ineq = " << field_list(p.inequalities) << "\n";
  if (p.mixed) out << "eq = " << field_list(p.equalities) << "\n";
  std::vector<std::string> intervals;
  for (const auto& iv : p.domain.intervals())
    intervals.push_back("(" + format_real(iv.lower) + ", " +
                        format_real(iv.upper) + ")");
  out << "domain = " << string_list(intervals) << "\n";
  out << "\n[candidate]\n";
  out << "point = [";
  for (std::size_t i = 0; i < candidate.point.size(); ++i) {
    if (i > 0) out << ", ";
    out << format_real(candidate.point[i]);
  }
  out << "]\n";
  out << "act_tol = " << format_real(candidate.activity_tolerance) << "\n";
  return out.str();
}

Expectation parse_expectation(std::string_view text) {
  auto sections = Reader(text, {"expected"}).read();
  const auto& sec = sections["expected"];
  Expectation e;
  for (const auto& [k, v] : sec) {
    if (k == "verdict")
      e.verdict = as_string(v, k);
    else if (k == "lambda")
      e.lambda = as_number_list(v, k);
    else if (k == "mu")
      e.mu = as_number_list(v, k);
    else if (k == "tolerance")
      e.tolerance = as_number(v, k);
    else
      throw FormatError(v.line, "unknown key '" + k + "' in [expected]");
  }
  if (e.verdict.empty()) throw FormatError(1, "missing key 'verdict'");
  if (!(e.tolerance > 0.0)) throw FormatError(1, "tolerance must be positive");
  return e;
}

}  // namespace mrules
