#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfcw {

// Flat key=value configuration with [section] headers.  Entries keep their
// order so that parse -> to_string -> parse is lossless.
struct Config {
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
  };
  std::vector<Entry> entries;

  const std::string* find(const std::string& section,
                          const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  // required lookup; throws std::runtime_error naming the missing key
  std::string require(const std::string& section,
                      const std::string& key) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  static Config parse(const std::string& text);
  static Config load(const std::string& path);  // IoError when unreadable
  std::string to_string() const;
};

// File-system / parse failures distinct from model-domain errors: the CLI
// maps IoError to exit 1 and domain errors to exit 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rfcw
