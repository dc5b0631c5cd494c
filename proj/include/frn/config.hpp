#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frn/door_env.hpp"
#include "frn/foresight.hpp"
#include "frn/trainer.hpp"

namespace frn {

struct ModelConfig {
  int obs_dim = 7;
  int hidden_dim = 32;
};

struct EvalConfig {
  int episodes_per_mode = 20;
  std::vector<std::uint64_t> seeds = {0};
  std::string variant = "foresight";
};

/// The single JSON configuration every command reads. Unknown keys are
/// rejected; `--set section.key=value` overrides are applied before
/// validation.
struct RunConfig {
  ModelConfig model;
  ForesightConfig foresight;
  TrainConfig training;
  EnvConfig env;
  EvalConfig eval;

  /// Canonical JSON text of the effective config (stable key order).
  std::string canonical_json() const;
  /// SHA-256 hex digest of canonical_json().
  std::string sha256() const;
};

RunConfig default_config();

/// Parses, applies overrides, validates. Throws ConfigError on schema or
/// value problems, IoError if the file cannot be read.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});
RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides = {});

std::string sha256_hex(const std::string& data);

}  // namespace frn
