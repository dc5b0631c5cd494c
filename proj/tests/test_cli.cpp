#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "frn/config.hpp"
#include "frn/errors.hpp"
#include "frn/trajectory.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

int run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

bool same_vec(const frn::Vec& a, const frn::Vec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

fs::path config_file() {
  const auto path = g_work / "config.json";
  if (!fs::exists(path)) {
    std::ofstream(path) << R"({
  "model": {"hidden_dim": 8},
  "training": {"epochs": 5, "seed": 1},
  "foresight": {"n": 4, "horizon": 3},
  "eval": {"episodes_per_mode": 2, "seeds": [0, 1]}
}
)";
  }
  return path;
}

// Shared fixtures, generated on first use so test cases stay order-independent.
fs::path demo_dir() {
  const auto dir = g_work / "demos";
  if (!fs::exists(dir / "manifest.json")) {
    REQUIRE(run("--config " + config_file().string() + " gen-demos --out " +
                dir.string() + " --seed 3") == 0);
  }
  return dir;
}

fs::path checkpoint() {
  const auto ckpt = g_work / "model.json";
  if (!fs::exists(ckpt)) {
    REQUIRE(run("--config " + config_file().string() + " train --demos " +
                demo_dir().string() + " --out " + ckpt.string()) == 0);
  }
  return ckpt;
}

}  // namespace

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(frn::parse_config(R"({"oops": {}})"), frn::ConfigError);
  CHECK_THROWS_AS(frn::parse_config(R"({"model": {"banana": 1}})"),
                  frn::ConfigError);
  CHECK_THROWS_AS(frn::parse_config(R"({"training": {"epochs": 0}})"),
                  frn::ConfigError);
  CHECK_THROWS_AS(frn::parse_config("not json"), frn::ConfigError);

  auto cfg =
      frn::parse_config("{}", {"training.epochs=7", "eval.variant=noised"});
  CHECK(cfg.training.epochs == 7);
  CHECK(cfg.eval.variant == "noised");
  CHECK_THROWS_AS(frn::parse_config("{}", {"training.epochs"}),
                  frn::ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  auto a = frn::parse_config("{}");
  auto b = frn::parse_config("{}");
  CHECK(a.sha256() == b.sha256());
  auto c = frn::parse_config(R"({"model": {"hidden_dim": 16}})");
  CHECK(a.sha256() != c.sha256());
  CHECK(a.sha256().size() == 64);
}

TEST_CASE("gen-demos writes 15 reproducible files") {
  const auto cfg = config_file();
  const auto out1 = demo_dir();
  const auto out2 = g_work / "demos_again";
  REQUIRE(run("--config " + cfg.string() + " gen-demos --out " +
              out2.string() + " --seed 3") == 0);

  int files = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    if (entry.path().extension() == ".jsonl") ++files;
  }
  CHECK(files == 15);
  CHECK(fs::exists(out1 / "manifest.json"));
  CHECK(slurp(out1 / "demo_push_0.jsonl") == slurp(out2 / "demo_push_0.jsonl"));
  CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));

  CHECK(run("--config " + cfg.string() + " gen-demos --out " +
            (g_work / "demos0").string() + " --per-mode 0") == 2);
}

TEST_CASE("train writes a checkpoint and a structured report") {
  const auto cfg = config_file();
  const auto ckpt = checkpoint();
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(g_work / "train_report.json"));
  const auto report =
      nlohmann::json::parse(slurp(g_work / "train_report.json"));
  CHECK(report["format_version"] == 1);
  CHECK(report["epoch_nll"].size() == 5);
  CHECK(report["config_sha256"] == frn::load_config(cfg.string()).sha256());
}

TEST_CASE("conventional runs are byte-identical") {
  const auto cfg = config_file();
  const auto ckpt = checkpoint();
  const auto log1 = g_work / "conv1.jsonl";
  const auto log2 = g_work / "conv2.jsonl";
  REQUIRE(run("--config " + cfg.string() + " run --ckpt " + ckpt.string() +
              " --mode push --variant conventional --episodes 2 --seed 5 "
              "--log " + log1.string()) == 0);
  REQUIRE(run("--config " + cfg.string() + " run --ckpt " + ckpt.string() +
              " --mode push --variant conventional --episodes 2 --seed 5 "
              "--log " + log2.string()) == 0);
  CHECK(slurp(log1) == slurp(log2));
}

TEST_CASE("forced no-op foresight matches the conventional trajectory") {
  const auto cfg = config_file();
  const auto ckpt = checkpoint();
  const auto conv = g_work / "conv.jsonl";
  const auto noop = g_work / "noop.jsonl";
  REQUIRE(run("--config " + cfg.string() + " run --ckpt " + ckpt.string() +
              " --mode pull --variant conventional --episodes 1 --seed 9 "
              "--log " + conv.string()) == 0);
  REQUIRE(run("--config " + cfg.string() +
              " --set foresight.n=1 --set foresight.include_unperturbed=true"
              " run --ckpt " + ckpt.string() +
              " --mode pull --variant foresight --episodes 1 --seed 9 "
              "--log " + noop.string()) == 0);
  const auto a = frn::load_trajectory_log(conv.string());
  const auto b = frn::load_trajectory_log(noop.string());
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  REQUIRE(a[0].steps.size() == b[0].steps.size());
  CHECK(a[0].success == b[0].success);
  for (std::size_t t = 0; t < a[0].steps.size(); ++t) {
    CHECK(same_vec(a[0].steps[t].observation, b[0].steps[t].observation));
    CHECK(same_vec(a[0].steps[t].pred_mean, b[0].steps[t].pred_mean));
    CHECK(same_vec(a[0].steps[t].pred_var, b[0].steps[t].pred_var));
    CHECK(same_vec(a[0].steps[t].h, b[0].steps[t].h));
    CHECK(same_vec(a[0].steps[t].c, b[0].steps[t].c));
  }
}

TEST_CASE("foresight logs honour the argmin postcondition") {
  const auto cfg = config_file();
  const auto ckpt = checkpoint();
  const auto log = g_work / "fore.jsonl";
  REQUIRE(run("--config " + cfg.string() + " run --ckpt " + ckpt.string() +
              " --mode slide --variant foresight --episodes 1 --seed 4 "
              "--log " + log.string()) == 0);
  const auto episodes = frn::load_trajectory_log(log.string());
  REQUIRE(episodes.size() == 1);
  int refined = 0;
  for (const auto& rec : episodes[0].steps) {
    if (!rec.foresight) continue;
    ++refined;
    const auto& scores = rec.foresight->candidate_scores;
    REQUIRE(!scores.empty());
    const double min = *std::min_element(scores.begin(), scores.end());
    CHECK(scores[static_cast<std::size_t>(rec.foresight->chosen_index)] ==
          min);
    CHECK(rec.foresight->noise_std_used.minCoeff() >= 0.05);
    CHECK(rec.foresight->noise_std_used.maxCoeff() <= 0.15);
  }
  CHECK(refined == static_cast<int>(episodes[0].steps.size()));
}

TEST_CASE("eval report shape and determinism") {
  const auto cfg = config_file();
  const auto ckpt = checkpoint();
  const auto rep1 = g_work / "eval1.json";
  const auto rep2 = g_work / "eval2.json";
  REQUIRE(run("--config " + cfg.string() + " eval --ckpt " + ckpt.string() +
              " --report " + rep1.string()) == 0);
  REQUIRE(run("--config " + cfg.string() + " eval --ckpt " + ckpt.string() +
              " --report " + rep2.string()) == 0);
  CHECK(slurp(rep1) == slurp(rep2));

  const auto j = nlohmann::json::parse(slurp(rep1));
  CHECK(j["results"].size() == 3 * 3 * 2);  // variants x modes x seeds
  for (const auto& cell : j["results"]) {
    const double rate = cell["success_rate"].get<double>();
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
    CHECK(cell["episodes"] == 2);
  }
  CHECK(j["modes_solved"].size() == 3 * 2);  // variants x seeds
}

TEST_CASE("analyze produces tagged CSVs from a run log") {
  const auto cfg = config_file();
  const auto ckpt = checkpoint();
  const auto log = g_work / "analyze_me.jsonl";
  REQUIRE(run("--config " + cfg.string() + " run --ckpt " + ckpt.string() +
              " --mode push --variant foresight --episodes 2 --seed 1 "
              "--log " + log.string()) == 0);
  const auto lcsv = g_work / "lyapunov.csv";
  const auto pcsv = g_work / "pca.csv";
  CHECK(run("--config " + cfg.string() + " analyze lyapunov --log " +
            log.string() + " --ckpt " + ckpt.string() + " --out " +
            lcsv.string()) == 0);
  CHECK(run("--config " + cfg.string() + " analyze pca --log " + log.string() +
            " --out " + pcsv.string()) == 0);
  const auto lya = slurp(lcsv);
  CHECK(lya.find("episode,t,lambda,variant") != std::string::npos);
  CHECK(lya.find("config_sha256=") != std::string::npos);
  const auto pca = slurp(pcsv);
  CHECK(pca.find("episode,t,pc1,pc2,variant,mode") != std::string::npos);

  // A checkpoint with the wrong hidden size is a compatibility failure.
  const auto wrong = g_work / "wrong.json";
  REQUIRE(run("--config " + cfg.string() + " --set model.hidden_dim=4 "
              "train --demos " + demo_dir().string() + " --out " +
              wrong.string()) == 0);
  CHECK(run("--config " + cfg.string() + " analyze lyapunov --log " +
            log.string() + " --ckpt " + wrong.string() + " --out " +
            (g_work / "bad.csv").string()) == 5);
}

TEST_CASE("CLI error exit codes") {
  const auto cfg = config_file();
  CHECK(run("--config " + (g_work / "missing.json").string() +
            " gen-demos --out " + (g_work / "x").string()) == 3);

  const auto bad = g_work / "bad_config.json";
  std::ofstream(bad) << R"({"mystery": 1})";
  CHECK(run("--config " + bad.string() + " gen-demos --out " +
            (g_work / "y").string()) == 2);

  const auto badckpt = g_work / "bad_ckpt.json";
  std::ofstream(badckpt) << R"({"format_version": 9})";
  CHECK(run("--config " + cfg.string() + " run --ckpt " + badckpt.string() +
            " --mode push --log " + (g_work / "z.jsonl").string()) == 5);

  CHECK(run("--config " + cfg.string() + " run --ckpt " +
            (g_work / "absent.json").string() + " --mode push --log " +
            (g_work / "z2.jsonl").string()) == 3);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_cli <path-to-frn-binary> [doctest args]\n";
    return 1;
  }
  g_cli = argv[1];
  g_work = fs::temp_directory_path() / "frn_cli_test";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  doctest::Context context;
  context.applyCommandLine(argc - 1, argv + 1);
  return context.run();
}
