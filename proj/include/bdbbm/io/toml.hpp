// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bdbbm::toml {

/// Subset of TOML: [section] headers, key = value, '#' comments. Values are booleans, integers,
/// floats (including inf and -inf), basic strings and (nested) arrays of these.
struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<bool, std::int64_t, double, std::string, Array> v;

  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<double>(v); }
  bool is_number() const { return is_int() || is_float(); }
  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }
  bool operator==(const Value&) const = default;
};

using Table = std::map<std::string, Value>;
/// Section name ("" for the top level) to table.
using Document = std::map<std::string, Table>;

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what) : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

namespace detail {

class Parser {
 public:
  Parser(const std::string& s, int line) : s_(s), line_(line) {}

  Value value() {
    skip_ws();
    if (at_end()) fail("missing value");
    const char c = s_[i_];
    if (c == '"') return {string()};
    if (c == '[') return {array()};
    if (s_.compare(i_, 4, "true") == 0) {
      i_ += 4;
      return {true};
    }
    if (s_.compare(i_, 5, "false") == 0) {
      i_ += 5;
      return {false};
    }
    return number();
  }

  void expect_end() {
    skip_ws();
    if (!at_end() && s_[i_] != '#') fail("unexpected trailing text '" + s_.substr(i_) + "'");
  }

 private:
  [[noreturn]] void fail(const std::string& m) const { throw ParseError(line_, m); }
  bool at_end() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!at_end() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  std::string string() {
    ++i_;
    std::string out;
    while (!at_end() && s_[i_] != '"') {
      if (s_[i_] == '\\') {
        if (++i_ >= s_.size()) fail("unterminated escape");
        switch (s_[i_]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + s_[i_]);
        }
        ++i_;
      } else {
        out += s_[i_++];
      }
    }
    if (at_end()) fail("unterminated string");
    ++i_;
    return out;
  }

  Array array() {
    ++i_;
    Array out;
    for (;;) {
      skip_ws();
      if (at_end()) fail("unterminated array");
      if (s_[i_] == ']') {
        ++i_;
        return out;
      }
      out.push_back(value());
      skip_ws();
      if (at_end()) fail("unterminated array");
      if (s_[i_] == ',') {
        ++i_;
      } else if (s_[i_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  Value number() {
    const std::size_t start = i_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '+' || s_[i_] == '-' ||
                         s_[i_] == '.' || s_[i_] == '_'))
      ++i_;
    std::string tok = s_.substr(start, i_ - start);
    if (tok.empty()) fail("expected a value");
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean += ch;
    if (clean == "inf" || clean == "+inf") return {std::numeric_limits<double>::infinity()};
    if (clean == "-inf") return {-std::numeric_limits<double>::infinity()};
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    char* end = nullptr;
    if (is_float) {
      const double d = std::strtod(clean.c_str(), &end);
      if (*end != '\0') fail("invalid number '" + tok + "'");
      return {d};
    }
    errno = 0;
    const long long v = std::strtoll(clean.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) fail("invalid integer '" + tok + "'");
    return {static_cast<std::int64_t>(v)};
  }

  const std::string& s_;
  int line_;
  std::size_t i_ = 0;
};

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

}  // namespace detail

inline Document parse(std::istream& is) {
  Document doc;
  doc[""];
  std::string section;
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '[') {
      const auto close = t.find(']');
      if (close == std::string::npos) throw ParseError(ln, "unterminated section header");
      section = detail::trim(t.substr(1, close - 1));
      if (!detail::valid_key(section)) throw ParseError(ln, "invalid section name '" + section + "'");
      const std::string rest = detail::trim(t.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw ParseError(ln, "unexpected text after section header");
      if (doc.count(section) && section != "") throw ParseError(ln, "duplicate section [" + section + "]");
      doc[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(ln, "expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    if (!detail::valid_key(key)) throw ParseError(ln, "invalid key '" + key + "'");
    const std::string rhs = t.substr(eq + 1);
    detail::Parser p(rhs, ln);
    Value v = p.value();
    p.expect_end();
    auto& tab = doc[section];
    if (tab.count(key)) throw ParseError(ln, "duplicate key '" + key + "'");
    tab.emplace(key, std::move(v));
  }
  return doc;
}

inline Document parse_string(const std::string& s) {
  std::istringstream is(s);
  return parse(is);
}

}  // namespace bdbbm::toml
