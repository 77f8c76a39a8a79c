#include "rfcw.h"

#include "rfcw/config.hpp"
#include "rfcw/runner.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

struct rfcw_session {
  rfcw::Config cfg;
  std::string last_error;
};

namespace {

std::string g_open_error;  // rfcw_open failures, queried with s == NULL

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

rfcw_session* rfcw_open(const char* config_text) {
  try {
    rfcw::Config cfg = rfcw::Config::parse(config_text ? config_text : "");
    auto* s = new rfcw_session;
    s->cfg = std::move(cfg);
    return s;
  } catch (const std::exception& e) {
    g_open_error = e.what();
    return nullptr;
  }
}

rfcw_session* rfcw_open_file(const char* path) {
  try {
    rfcw::Config cfg = rfcw::Config::load(path ? path : "");
    auto* s = new rfcw_session;
    s->cfg = std::move(cfg);
    return s;
  } catch (const std::exception& e) {
    g_open_error = e.what();
    return nullptr;
  }
}

void rfcw_close(rfcw_session* s) { delete s; }

int rfcw_set(rfcw_session* s, const char* section, const char* key,
             const char* value) {
  if (!s || !key || !value) return 1;
  s->cfg.set(section ? section : "", key, value);
  return 0;
}

int rfcw_run(rfcw_session* s, const char* command, char** json_out) {
  if (!s || !command) return 1;
  rfcw::RunResult res = rfcw::run_command(command, s->cfg);
  if (res.exit_code != 0) s->last_error = res.json;
  if (json_out) *json_out = dup_string(res.json);
  return res.exit_code;
}

const char* rfcw_last_error(const rfcw_session* s) {
  return s ? s->last_error.c_str() : g_open_error.c_str();
}

void rfcw_free_string(char* p) { std::free(p); }

const char* rfcw_version(void) { return "rfcw 0.1.0"; }

}  // extern "C"
