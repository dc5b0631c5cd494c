#include "frn/trajectory.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace frn {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index d = 0; d < v.size(); ++d) arr.push_back(v[d]);
  return arr;
}

Vec vec_from_json(const json& arr) {
  if (!arr.is_array()) throw std::runtime_error("expected a JSON array");
  Vec v(arr.size());
  for (std::size_t d = 0; d < arr.size(); ++d) v[d] = arr[d].get<double>();
  return v;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  return os;
}

}  // namespace

void save_trajectory_log(const std::vector<EpisodeLog>& episodes,
                         const std::string& path,
                         const std::string& config_sha256) {
  auto os = open_for_write(path);
  json header = {{"type", "header"},
                 {"format_version", 1},
                 {"config_sha256", config_sha256}};
  os << header.dump() << '\n';
  for (const auto& ep : episodes) {
    for (const auto& rec : ep.steps) {
      json j = {{"type", "step"},
                {"episode", ep.episode_id},
                {"variant", ep.variant},
                {"mode", to_string(ep.mode)},
                {"t", rec.t},
                {"obs", vec_to_json(rec.observation)},
                {"pred_mean", vec_to_json(rec.pred_mean)},
                {"pred_var", vec_to_json(rec.pred_var)},
                {"h", vec_to_json(rec.h)},
                {"c", vec_to_json(rec.c)},
                {"d", rec.env_d}};
      if (rec.foresight) {
        j["foresight"] = {
            {"chosen_index", rec.foresight->chosen_index},
            {"candidate_scores", rec.foresight->candidate_scores},
            {"noise_std_used", vec_to_json(rec.foresight->noise_std_used)}};
      }
      os << j.dump() << '\n';
    }
    json end = {{"type", "episode_end"},
                {"episode", ep.episode_id},
                {"success", ep.success}};
    os << end.dump() << '\n';
  }
  if (!os) throw std::runtime_error("trajectory log write failed: " + path);
}

std::vector<EpisodeLog> load_trajectory_log(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("trajectory log not found: " + path);
  std::vector<EpisodeLog> episodes;
  EpisodeLog* cur = nullptr;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") continue;
    const int episode_id = j.at("episode").get<int>();
    if (!cur || cur->episode_id != episode_id) {
      episodes.emplace_back();
      cur = &episodes.back();
      cur->episode_id = episode_id;
    }
    if (type == "episode_end") {
      cur->success = j.at("success").get<bool>();
      continue;
    }
    cur->variant = j.at("variant").get<std::string>();
    cur->mode = door_mode_from_string(j.at("mode").get<std::string>());
    StepRecord rec;
    rec.t = j.at("t").get<int>();
    rec.observation = vec_from_json(j.at("obs"));
    rec.pred_mean = vec_from_json(j.at("pred_mean"));
    rec.pred_var = vec_from_json(j.at("pred_var"));
    rec.h = vec_from_json(j.at("h"));
    rec.c = vec_from_json(j.at("c"));
    rec.env_d = j.at("d").get<double>();
    if (j.contains("foresight")) {
      ForesightRecord fr;
      fr.chosen_index = j["foresight"].at("chosen_index").get<int>();
      fr.candidate_scores =
          j["foresight"].at("candidate_scores").get<std::vector<double>>();
      fr.noise_std_used = vec_from_json(j["foresight"].at("noise_std_used"));
      rec.foresight = std::move(fr);
    }
    cur->steps.push_back(std::move(rec));
  }
  return episodes;
}

void save_demo_set(const std::vector<Demo>& demos,
                   const std::vector<std::uint64_t>& seeds, double jitter_std,
                   const EnvConfig& env, const std::string& dir,
                   const std::string& config_sha256) {
  if (demos.size() != seeds.size())
    throw std::invalid_argument("save_demo_set: one seed per demo required");
  std::filesystem::create_directories(dir);
  json manifest = {{"format_version", 1},
                   {"config_sha256", config_sha256},
                   {"jitter_std", jitter_std},
                   {"env",
                    {{"contact_point", env.contact_point},
                     {"grip_threshold", env.grip_threshold},
                     {"contact_tolerance", env.contact_tolerance},
                     {"max_joint_delta", env.max_joint_delta},
                     {"gain", env.gain},
                     {"success_threshold", env.success_threshold},
                     {"max_steps", env.max_steps},
                     {"sensor_noise_std", env.sensor_noise_std}}},
                   {"demos", json::array()}};
  std::vector<int> mode_counter(3, 0);
  for (std::size_t k = 0; k < demos.size(); ++k) {
    const auto& demo = demos[k];
    const std::string name = "demo_" + to_string(demo.mode) + "_" +
                             std::to_string(mode_counter[static_cast<int>(
                                 demo.mode)]++) +
                             ".jsonl";
    auto os = open_for_write((std::filesystem::path(dir) / name).string());
    for (std::size_t t = 0; t < demo.observations.size(); ++t) {
      json j = {{"t", static_cast<int>(t)},
                {"obs", vec_to_json(demo.observations[t])}};
      os << j.dump() << '\n';
    }
    manifest["demos"].push_back({{"file", name},
                                 {"mode", to_string(demo.mode)},
                                 {"seed", seeds[k]}});
  }
  auto os = open_for_write(
      (std::filesystem::path(dir) / "manifest.json").string());
  os << manifest.dump(2) << '\n';
}

std::vector<Demo> load_demo_set(const std::string& dir) {
  const auto manifest_path = std::filesystem::path(dir) / "manifest.json";
  std::ifstream is(manifest_path);
  if (!is)
    throw std::runtime_error("demo manifest not found: " +
                             manifest_path.string());
  json manifest;
  is >> manifest;
  std::vector<Demo> demos;
  for (const auto& entry : manifest.at("demos")) {
    Demo demo;
    demo.mode = door_mode_from_string(entry.at("mode").get<std::string>());
    const auto file = std::filesystem::path(dir) /
                      entry.at("file").get<std::string>();
    std::ifstream ds(file);
    if (!ds) throw std::runtime_error("demo file not found: " + file.string());
    std::string line;
    while (std::getline(ds, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      demo.observations.push_back(vec_from_json(j.at("obs")));
    }
    if (demo.observations.empty())
      throw std::runtime_error("demo file is empty: " + file.string());
    demos.push_back(std::move(demo));
  }
  return demos;
}

}  // namespace frn
