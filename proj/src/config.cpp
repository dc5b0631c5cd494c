#include "frn/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "frn/errors.hpp"

namespace frn {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const RunConfig& cfg) {
  ordered_json j;
  j["model"] = {{"obs_dim", cfg.model.obs_dim},
                {"hidden_dim", cfg.model.hidden_dim}};
  j["foresight"] = {{"n", cfg.foresight.n},
                    {"horizon", cfg.foresight.horizon},
                    {"sigma_lo", cfg.foresight.sigma_lo},
                    {"sigma_hi", cfg.foresight.sigma_hi},
                    {"interval", cfg.foresight.interval},
                    {"include_unperturbed", cfg.foresight.include_unperturbed}};
  j["training"] = {{"epochs", cfg.training.epochs},
                   {"learning_rate", cfg.training.learning_rate},
                   {"beta1", cfg.training.beta1},
                   {"beta2", cfg.training.beta2},
                   {"adam_eps", cfg.training.adam_eps},
                   {"clip_norm", cfg.training.clip_norm},
                   {"input_noise_std", cfg.training.input_noise_std},
                   {"seed", cfg.training.seed},
                   {"checkpoint_every", cfg.training.checkpoint_every}};
  j["env"] = {{"contact_point", cfg.env.contact_point},
              {"grip_threshold", cfg.env.grip_threshold},
              {"contact_tolerance", cfg.env.contact_tolerance},
              {"max_joint_delta", cfg.env.max_joint_delta},
              {"gain", cfg.env.gain},
              {"success_threshold", cfg.env.success_threshold},
              {"max_steps", cfg.env.max_steps},
              {"sensor_noise_std", cfg.env.sensor_noise_std}};
  j["eval"] = {{"episodes_per_mode", cfg.eval.episodes_per_mode},
               {"seeds", cfg.eval.seeds},
               {"variant", cfg.eval.variant}};
  return j;
}

template <typename T>
void read_key(const json& section, const std::string& section_name,
              const char* key, T& out) {
  if (!section.contains(key)) return;
  try {
    out = section[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value type for " + section_name + "." +
                      key);
  }
}

void reject_unknown(const json& section, const std::string& name,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, _] : section.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) { ok = true; break; }
    }
    if (!ok) throw ConfigError("config: unknown key " + name + "." + key);
  }
}

RunConfig from_json(const json& j) {
  RunConfig cfg;
  reject_unknown(j, "<root>", {"model", "foresight", "training", "env", "eval"});
  if (j.contains("model")) {
    const auto& s = j["model"];
    reject_unknown(s, "model", {"obs_dim", "hidden_dim"});
    read_key(s, "model", "obs_dim", cfg.model.obs_dim);
    read_key(s, "model", "hidden_dim", cfg.model.hidden_dim);
  }
  if (j.contains("foresight")) {
    const auto& s = j["foresight"];
    reject_unknown(s, "foresight",
                   {"n", "horizon", "sigma_lo", "sigma_hi", "interval",
                    "include_unperturbed"});
    read_key(s, "foresight", "n", cfg.foresight.n);
    read_key(s, "foresight", "horizon", cfg.foresight.horizon);
    read_key(s, "foresight", "sigma_lo", cfg.foresight.sigma_lo);
    read_key(s, "foresight", "sigma_hi", cfg.foresight.sigma_hi);
    read_key(s, "foresight", "interval", cfg.foresight.interval);
    read_key(s, "foresight", "include_unperturbed",
             cfg.foresight.include_unperturbed);
  }
  if (j.contains("training")) {
    const auto& s = j["training"];
    reject_unknown(s, "training",
                   {"epochs", "learning_rate", "beta1", "beta2", "adam_eps",
                    "clip_norm", "input_noise_std", "seed",
                    "checkpoint_every"});
    read_key(s, "training", "epochs", cfg.training.epochs);
    read_key(s, "training", "learning_rate", cfg.training.learning_rate);
    read_key(s, "training", "beta1", cfg.training.beta1);
    read_key(s, "training", "beta2", cfg.training.beta2);
    read_key(s, "training", "adam_eps", cfg.training.adam_eps);
    read_key(s, "training", "clip_norm", cfg.training.clip_norm);
    read_key(s, "training", "input_noise_std", cfg.training.input_noise_std);
    read_key(s, "training", "seed", cfg.training.seed);
    read_key(s, "training", "checkpoint_every", cfg.training.checkpoint_every);
  }
  if (j.contains("env")) {
    const auto& s = j["env"];
    reject_unknown(s, "env",
                   {"contact_point", "grip_threshold", "contact_tolerance",
                    "max_joint_delta", "gain", "success_threshold",
                    "max_steps", "sensor_noise_std"});
    read_key(s, "env", "contact_point", cfg.env.contact_point);
    read_key(s, "env", "grip_threshold", cfg.env.grip_threshold);
    read_key(s, "env", "contact_tolerance", cfg.env.contact_tolerance);
    read_key(s, "env", "max_joint_delta", cfg.env.max_joint_delta);
    read_key(s, "env", "gain", cfg.env.gain);
    read_key(s, "env", "success_threshold", cfg.env.success_threshold);
    read_key(s, "env", "max_steps", cfg.env.max_steps);
    read_key(s, "env", "sensor_noise_std", cfg.env.sensor_noise_std);
  }
  if (j.contains("eval")) {
    const auto& s = j["eval"];
    reject_unknown(s, "eval", {"episodes_per_mode", "seeds", "variant"});
    read_key(s, "eval", "episodes_per_mode", cfg.eval.episodes_per_mode);
    read_key(s, "eval", "seeds", cfg.eval.seeds);
    read_key(s, "eval", "variant", cfg.eval.variant);
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (cfg.model.obs_dim < 1 || cfg.model.hidden_dim < 1)
    fail("model dims must be >= 1");
  if (cfg.foresight.n < 1) fail("foresight.n must be >= 1");
  if (cfg.foresight.horizon < 1) fail("foresight.horizon must be >= 1");
  if (cfg.foresight.interval < 1) fail("foresight.interval must be >= 1");
  if (!(cfg.foresight.sigma_lo > 0.0 &&
        cfg.foresight.sigma_lo <= cfg.foresight.sigma_hi))
    fail("foresight sigma bounds must satisfy 0 < sigma_lo <= sigma_hi");
  if (cfg.training.epochs < 1) fail("training.epochs must be >= 1");
  if (cfg.training.learning_rate <= 0.0) fail("training.learning_rate must be > 0");
  if (cfg.training.clip_norm <= 0.0) fail("training.clip_norm must be > 0");
  if (cfg.training.input_noise_std < 0.0) fail("training.input_noise_std must be >= 0");
  if (cfg.env.max_steps < 1) fail("env.max_steps must be >= 1");
  if (cfg.env.sensor_noise_std < 0.0) fail("env.sensor_noise_std must be >= 0");
  if (cfg.eval.episodes_per_mode < 1) fail("eval.episodes_per_mode must be >= 1");
  if (cfg.eval.seeds.empty()) fail("eval.seeds must be non-empty");
  if (cfg.eval.variant != "foresight" && cfg.eval.variant != "conventional" &&
      cfg.eval.variant != "noised" && cfg.eval.variant != "all")
    fail("eval.variant must be foresight|conventional|noised|all");
}

}  // namespace

std::string RunConfig::canonical_json() const { return to_json(*this).dump(); }

std::string RunConfig::sha256() const { return sha256_hex(canonical_json()); }

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("config: override must be section.key=value: " + ov);
    const std::string section = ov.substr(0, dot);
    const std::string key = ov.substr(dot + 1, eq - dot - 1);
    const std::string value = ov.substr(eq + 1);
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // bare strings allowed
    }
    j[section][key] = parsed;
  }

  RunConfig cfg = from_json(j);
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("config file not found: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                  nullptr)) {
    throw std::runtime_error("sha256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace frn
