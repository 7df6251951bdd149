#pragma once

// Flat key-value configuration text.
//
//   # comment
//   network.p = 0.9, 0.8
//   [code]            # optional section header, prefixes following keys
//   k = 256
//
// Values are strings until a typed accessor parses them; errors name the
// dotted key and the line it came from.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ncdelay::config {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct Entry {
  std::string value;
  std::size_t line = 0;
};

class ConfigMap {
 public:
  /// Throws ConfigError on a malformed line or a repeated key.
  static ConfigMap parse(std::string_view text);
  /// Throws std::runtime_error naming the path when it cannot be read.
  static ConfigMap load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, std::string value);
  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }

  std::optional<std::string> str(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;
  std::optional<std::uint64_t> integer(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;
  std::optional<std::vector<double>> reals(const std::string& key) const;
  std::optional<std::vector<std::uint64_t>> integers(const std::string& key) const;
  std::optional<std::vector<std::string>> strings(const std::string& key) const;

  /// Throws ConfigError for the first key outside `known`.
  void reject_unknown(const std::set<std::string>& known) const;

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  std::map<std::string, Entry> entries_;
};

}  // namespace ncdelay::config
