#include "rfcw/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rfcw {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

const std::string* Config::find(const std::string& section,
                                const std::string& key) const {
  const std::string* hit = nullptr;  // last assignment wins
  for (const auto& e : entries)
    if (e.section == section && e.key == key) hit = &e.value;
  return hit;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad number for " + section + "." + key +
                             ": " + *v);
  }
}

std::int64_t Config::get_int(const std::string& section,
                             const std::string& key,
                             std::int64_t fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + section + "." + key +
                             ": " + *v);
  }
}

std::uint64_t Config::get_u64(const std::string& section,
                              const std::string& key,
                              std::uint64_t fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  try {
    return std::stoull(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("config: bad integer for " + section + "." + key +
                             ": " + *v);
  }
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw std::runtime_error("config: bad boolean for " + section + "." + key +
                           ": " + *v);
}

std::string Config::require(const std::string& section,
                            const std::string& key) const {
  const std::string* v = find(section, key);
  if (!v)
    throw std::runtime_error("config: missing required key " + section + "." +
                             key);
  return *v;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  for (auto& e : entries)
    if (e.section == section && e.key == key) {
      e.value = value;
      return;
    }
  entries.push_back({section, key, value});
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw IoError("config line " + std::to_string(lineno) +
                      ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw IoError("config line " + std::to_string(lineno) +
                    ": expected key=value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw IoError("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries.push_back({section, key, value});
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse(buf.str());
}

std::string Config::to_string() const {
  std::ostringstream os;
  std::string current;
  bool first = true;
  // sections in order of first appearance
  std::vector<std::string> sections;
  for (const auto& e : entries)
    if (std::find(sections.begin(), sections.end(), e.section) ==
        sections.end())
      sections.push_back(e.section);
  for (const auto& sec : sections) {
    if (!sec.empty()) {
      if (!first) os << "\n";
      os << "[" << sec << "]\n";
    }
    first = false;
    for (const auto& e : entries)
      if (e.section == sec) os << e.key << " = " << e.value << "\n";
  }
  return os.str();
}

}  // namespace rfcw
