// Integration tests that spawn the actual CLI binary.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kBin = GAPFAIR_CLI_BIN;
const std::string kSource = GAPFAIR_SOURCE_DIR;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = kBin + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.output += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gapfair_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_sample_jsonl(const fs::path& dir) {
  const fs::path path = dir / "sample.jsonl";
  std::ofstream out(path);
  const char* classes[2] = {"surgeon", "nurse"};
  const char* groups[2] = {"male", "female"};
  for (int i = 0; i < 160; ++i) {
    const int c = i % 2, g = (i / 2) % 2;
    out << R"({"text":"word)" << c << " filler tok" << i % 5 << R"(","class":")" << classes[c]
        << R"(","group":")" << groups[g] << "\"}\n";
  }
  return path;
}

}  // namespace

TEST_CASE("prepare writes splits and a manifest, deterministically") {
  const fs::path dir = fresh_dir("prepare");
  const fs::path input = write_sample_jsonl(dir);
  const std::string out1 = (dir / "out1").string();
  const std::string out2 = (dir / "out2").string();

  const RunResult r1 = run_cli("prepare --input " + input.string() +
                               " --split 0.8,0.1,0.1 --seed 7 --out-dir " + out1);
  CHECK(r1.exit_code == 0);
  for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "manifest.json"}) {
    CHECK(fs::exists(fs::path(out1) / f));
  }
  const auto manifest = nlohmann::json::parse(file_bytes(fs::path(out1) / "manifest.json"));
  CHECK(manifest["split"]["seed"] == 7);
  CHECK(manifest["sizes"]["train"] == 128);

  const RunResult r2 = run_cli("prepare --input " + input.string() +
                               " --split 0.8,0.1,0.1 --seed 7 --out-dir " + out2);
  CHECK(r2.exit_code == 0);
  for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "manifest.json"}) {
    CHECK(file_bytes(fs::path(out1) / f) == file_bytes(fs::path(out2) / f));
  }
}

TEST_CASE("prepare exit codes") {
  const fs::path dir = fresh_dir("prepare_err");
  SUBCASE("missing input file is a data error") {
    const RunResult r = run_cli("prepare --input /nonexistent.jsonl --out-dir " + dir.string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("cannot open") != std::string::npos);
  }
  SUBCASE("bad usage") {
    const RunResult r = run_cli("prepare");  // --input required
    CHECK(r.exit_code == 1);
  }
  SUBCASE("bad split string") {
    const fs::path input = write_sample_jsonl(dir);
    const RunResult r =
        run_cli("prepare --input " + input.string() + " --split nope --out-dir " + dir.string());
    CHECK(r.exit_code == 1);
  }
}

TEST_CASE("replay prints the satisfaction summary and writes json") {
  const fs::path dir = fresh_dir("replay");
  const RunResult r = run_cli("replay --fixture " + kSource +
                              "/data/fixtures/inlp.csv --out-dir " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("worsened GAP        4/28") != std::string::npos);
  CHECK(r.output.find("15.67 -> 11.95") != std::string::npos);
  const auto replay = nlohmann::json::parse(file_bytes(dir / "inlp_replay.json"));
  CHECK(replay["worsened_gap_count"] == 4);
  CHECK(replay["advanced_count"] == 6);
  CHECK(replay["verdict_diff"].empty());

  SUBCASE("empty fixture is a data error") {
    const fs::path empty = dir / "empty.csv";
    std::ofstream(empty) << "";
    const RunResult bad = run_cli("replay --fixture " + empty.string());
    CHECK(bad.exit_code == 2);
  }
}

TEST_CASE("run executes a synthetic experiment end to end") {
  const fs::path dir = fresh_dir("run");
  const fs::path config = dir / "exp.toml";
  std::ofstream(config) << R"([data]
source = "synthetic"

[synthetic]
classes = 3
groups = 2
n = 900
bias = 0.4
cell_rates = "3,1, 1,3, 2,2"
seed = 11

[pipeline]
name = "inlp"
stages = "inlp"
min_df = 1

[train]
epochs = 10

[inlp]
max_iters = 6
guard_epochs = 8
)";
  const RunResult r =
      run_cli("run --config " + config.string() + " --seeds 1,2 --out-dir " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("accuracy") != std::string::npos);

  // outputs land under <out-dir>/<run-id>/<method>.*
  fs::path run_dir;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) run_dir = entry.path();
  }
  REQUIRE(!run_dir.empty());
  for (const char* f : {"inlp.json", "inlp.csv", "inlp.md", "inlp.svg", "aggregates.json",
                        "manifest.json"}) {
    CHECK(fs::exists(run_dir / f));
  }

  SUBCASE("a rerun reproduces the outputs byte for byte") {
    const std::string before = file_bytes(run_dir / "inlp.json");
    const RunResult again =
        run_cli("run --config " + config.string() + " --seeds 1,2 --out-dir " + dir.string());
    CHECK(again.exit_code == 0);
    CHECK(file_bytes(run_dir / "inlp.json") == before);
    CHECK(file_bytes(run_dir / "manifest.json") != "");
  }
  SUBCASE("report re-renders a saved comparison") {
    const fs::path rdir = dir / "rerender";
    const RunResult rep = run_cli("report --input " + (run_dir / "inlp.json").string() +
                                  " --formats md,svg,csv --method inlp --out-dir " +
                                  rdir.string());
    CHECK(rep.exit_code == 0);
    CHECK(fs::exists(rdir / "inlp.md"));
    CHECK(fs::exists(rdir / "inlp.svg"));
    CHECK(fs::exists(rdir / "inlp.csv"));
  }
}

TEST_CASE("run rejects configs with unknown stages, naming the stage") {
  const fs::path dir = fresh_dir("run_err");
  const fs::path config = dir / "bad.toml";
  std::ofstream(config) << "[synthetic]\nn = 100\n[pipeline]\nstages = \"warp\"\n";
  const RunResult r =
      run_cli("run --config " + config.string() + " --seeds 1,2 --out-dir " + dir.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("warp") != std::string::npos);
}

TEST_CASE("diverged training exits with the numerical-failure code") {
  const fs::path dir = fresh_dir("run_diverge");
  const fs::path config = dir / "diverge.toml";
  std::ofstream(config) << R"([synthetic]
classes = 2
groups = 2
n = 200
seed = 1

[pipeline]
min_df = 1

[train]
learning_rate = 1e308
l2_penalty = 0
epochs = 5
)";
  const RunResult r =
      run_cli("run --config " + config.string() + " --seeds 1,2 --out-dir " + dir.string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("diverged") != std::string::npos);
}

TEST_CASE("unknown subcommands and flags exit with usage errors") {
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("replay").exit_code == 1);  // missing --fixture
}
