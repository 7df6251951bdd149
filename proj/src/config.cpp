#include "ncdelay/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ncdelay::config {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool valid_key(std::string_view k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& what)
    : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

ConfigMap ConfigMap::parse(std::string_view text) {
  ConfigMap m;
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!name.empty() && !valid_key(name)) throw ConfigError(where, "bad section name '" + std::string(name) + "'");
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where, "expected 'key = value'");
    const auto key_part = trim(line.substr(0, eq));
    if (!valid_key(key_part)) throw ConfigError(where, "bad key '" + std::string(key_part) + "'");
    std::string key = section.empty() ? std::string(key_part) : section + "." + std::string(key_part);
    if (m.entries_.count(key)) {
      throw ConfigError(key, "repeated on line " + std::to_string(lineno) + " (first on line " +
                                 std::to_string(m.entries_[key].line) + ")");
    }
    m.entries_[key] = Entry{std::string(trim(line.substr(eq + 1))), lineno};
  }
  return m;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ConfigMap::set(const std::string& key, std::string value) { entries_[key] = Entry{std::move(value), 0}; }

void ConfigMap::fail(const std::string& key, const std::string& what) const {
  const auto it = entries_.find(key);
  std::string msg = what;
  if (it != entries_.end() && it->second.line != 0) msg += " (line " + std::to_string(it->second.line) + ")";
  throw ConfigError(key, msg);
}

std::optional<std::string> ConfigMap::str(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::optional<double> ConfigMap::real(const std::string& key) const {
  auto s = str(key);
  if (!s) return std::nullopt;
  double v = 0;
  if (!parse_number(*s, v)) fail(key, "expected a number, got '" + *s + "'");
  return v;
}

std::optional<std::uint64_t> ConfigMap::integer(const std::string& key) const {
  auto s = str(key);
  if (!s) return std::nullopt;
  std::uint64_t v = 0;
  if (!parse_number(*s, v)) fail(key, "expected a non-negative integer, got '" + *s + "'");
  return v;
}

std::optional<bool> ConfigMap::boolean(const std::string& key) const {
  auto s = str(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1" || *s == "yes") return true;
  if (*s == "false" || *s == "0" || *s == "no") return false;
  fail(key, "expected true or false, got '" + *s + "'");
}

std::optional<std::vector<double>> ConfigMap::reals(const std::string& key) const {
  auto s = str(key);
  if (!s) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split_list(*s)) {
    double v = 0;
    if (!parse_number(std::string_view(item), v)) fail(key, "expected a list of numbers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::optional<std::vector<std::uint64_t>> ConfigMap::integers(const std::string& key) const {
  auto s = str(key);
  if (!s) return std::nullopt;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(*s)) {
    std::uint64_t v = 0;
    if (!parse_number(std::string_view(item), v)) fail(key, "expected a list of integers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::optional<std::vector<std::string>> ConfigMap::strings(const std::string& key) const {
  auto s = str(key);
  if (!s) return std::nullopt;
  if (s->empty()) return std::vector<std::string>{};
  return split_list(*s);
}

void ConfigMap::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, entry] : entries_) {
    if (!known.count(key)) fail(key, "unknown key");
  }
}

}  // namespace ncdelay::config
