#pragma once

#include <map>
#include <string>
#include <vector>

#include "beals/common.hpp"

namespace beals {

struct ConfigError : Error {
  using Error::Error;
};

/// Flat `key = value` text with optional [section] headers and # comments.
/// Values: numbers, true/false, "strings" or bare words, and [a, b, ...] number lists.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming the line of the first key no accessor asked for.
  void reject_unused() const;
  /// Raw text of every entry, keyed by full name.
  std::map<std::string, std::string> entries() const;
  /// "<source>:<line>: " prefix for messages about `key`.
  std::string where(const std::string& key) const;

 private:
  struct Entry {
    std::string raw;
    int line = 0;
    mutable bool used = false;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace beals
