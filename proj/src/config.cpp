#include "te/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "te/error.hpp"
#include "te/util.hpp"

namespace te {

namespace {

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

// Decodes a scalar: a quoted string with \" \\ \n \t escapes, or a bare token.
std::string parse_value(std::string_view raw, bool bare_words, const std::string& where) {
  raw = trim(raw);
  if (raw.empty()) throw Error(ErrorCode::ConfigError, where + ": missing value");
  if (raw.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < raw.size() && raw[i] != '"'; ++i) {
      if (raw[i] == '\\' && i + 1 < raw.size()) {
        const char e = raw[++i];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += raw[i];
      }
    }
    if (i >= raw.size()) throw Error(ErrorCode::ConfigError, where + ": unterminated string");
    const auto rest = trim(raw.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') throw Error(ErrorCode::ConfigError, where + ": text after string");
    return out;
  }
  const auto hash = raw.find('#');
  const std::string v(trim(raw.substr(0, hash)));
  if (v.empty()) throw Error(ErrorCode::ConfigError, where + ": missing value");
  if (!bare_words) {
    const bool is_bool = v == "true" || v == "false";
    double d = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (!is_bool && (ec != std::errc() || p != v.data() + v.size())) {
      throw Error(ErrorCode::ConfigError, where + ": strings must be quoted");
    }
  }
  return v;
}

}  // namespace

FlatConfig FlatConfig::parse(std::string_view text) {
  FlatConfig cfg;
  std::string section;
  int line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || !valid_key(trim(t.substr(1, t.size() - 2)))) {
        throw Error(ErrorCode::ConfigError, where + ": bad section header");
      }
      section = std::string(trim(t.substr(1, t.size() - 2))) + ".";
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, where + ": expected key = value");
    const std::string key = section + std::string(trim(t.substr(0, eq)));
    if (!valid_key(key)) throw Error(ErrorCode::ConfigError, where + ": bad key");
    if (cfg.has(key)) throw Error(ErrorCode::ConfigError, where + ": duplicate key " + key);
    cfg.values_[key] = parse_value(t.substr(eq + 1), false, where);
  }
  return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void FlatConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, "override needs key=value");
  const std::string key(trim(assignment.substr(0, eq)));
  if (!valid_key(key)) throw Error(ErrorCode::ConfigError, "bad override key '" + key + "'");
  values_[key] = parse_value(assignment.substr(eq + 1), true, "override " + key);
}

std::string FlatConfig::get_string(const std::string& key, std::optional<std::string> fallback) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  if (fallback) return *fallback;
  throw Error(ErrorCode::ConfigError, "missing config key " + key);
}

std::int64_t FlatConfig::get_int(const std::string& key, std::optional<std::int64_t> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::ConfigError, "missing config key " + key);
  }
  std::int64_t v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, key + " must be an integer, got '" + s + "'");
  }
  return v;
}

double FlatConfig::get_double(const std::string& key, std::optional<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::ConfigError, "missing config key " + key);
  }
  double v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, key + " must be a number, got '" + s + "'");
  }
  return v;
}

bool FlatConfig::get_bool(const std::string& key, std::optional<bool> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    if (fallback) return *fallback;
    throw Error(ErrorCode::ConfigError, "missing config key " + key);
  }
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw Error(ErrorCode::ConfigError, key + " must be true or false, got '" + it->second + "'");
}

nlohmann::json FlatConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace te
