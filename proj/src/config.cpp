#include "beals/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace beals {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-') return false;
  return true;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::istringstream in(text);
  std::string line, section;
  int n = 0;
  auto error = [&](const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(n) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++n;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') error("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) error("bad section name '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) error("expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!valid_key(key)) error("bad key '" + key + "'");
    if (value.empty()) error("missing value for '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.entries_.count(full)) error("duplicate key '" + full + "' (first set on line " +
                                      std::to_string(c.entries_.at(full).line) + ")");
    c.entries_[full] = Entry{value, n};
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

const Config::Entry* Config::find(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::where(const std::string& key) const {
  auto it = entries_.find(key);
  return source_ + ":" + (it == entries_.end() ? std::string("?") : std::to_string(it->second.line)) + ": ";
}

void Config::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(where(key) + key + ": " + what);
}

double Config::number(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v;
  if (!parse_double(e->raw, v)) fail(key, "expected a number, got '" + e->raw + "'");
  return v;
}

int Config::integer(const std::string& key, int fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v;
  if (!parse_double(e->raw, v) || v != std::floor(v) || std::abs(v) > 1e9)
    fail(key, "expected an integer, got '" + e->raw + "'");
  return static_cast<int>(v);
}

bool Config::boolean(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->raw == "true") return true;
  if (e->raw == "false") return false;
  fail(key, "expected true or false, got '" + e->raw + "'");
}

std::string Config::string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  const std::string& r = e->raw;
  if (r.front() == '"') {
    if (r.size() < 2 || r.back() != '"') fail(key, "unterminated string");
    return r.substr(1, r.size() - 2);
  }
  if (r.front() == '[') fail(key, "expected a string, got a list");
  return r;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  const std::string& r = e->raw;
  if (r.front() != '[' || r.back() != ']') fail(key, "expected a list like [a, b]");
  std::vector<double> out;
  std::stringstream ss(r.substr(1, r.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    double v;
    if (!parse_double(item, v)) fail(key, "list entry '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

void Config::reject_unused() const {
  for (const auto& [k, e] : entries_)
    if (!e.used) throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + k + "'");
}

std::map<std::string, std::string> Config::entries() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : entries_) out[k] = e.raw;
  return out;
}

}  // namespace beals
