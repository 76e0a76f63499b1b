#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stage/sim/run_config.hpp"

namespace stage::cli {

// Schema violation: unknown key, malformed value, duplicate key. key_path
// names the offending "section.key"; empty when the whole document is at
// fault (the CLI then reports the file path instead).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_path(std::move(key)) {}
  std::string key_path;
};

// Flat "section.key = value" document over the RunConfig defaults. '#' lines
// and blank lines are skipped; inline comments are not supported. Every key
// may appear at most once. Unknown keys are rejected, not ignored. When
// given, `explicit_keys` receives the keys the document actually set, so
// callers can tell defaults from choices (STAGE_SEED fallback).
sim::RunConfig parse_config_text(const std::string& text,
                                 std::vector<std::string>* explicit_keys = nullptr);

// One "section.key=value" assignment (--set). Later overrides win.
void apply_override(sim::RunConfig& cfg, const std::string& assignment);

// All recognized key paths, sorted. The schema of record for docs and tests.
std::vector<std::string> config_keys();

// Parseable rendering of cfg; parse_config_text(render_config_file(c)) == c.
std::string render_config_file(const sim::RunConfig& cfg);

}  // namespace stage::cli
