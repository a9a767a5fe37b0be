#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgu/cli.hpp"
#include "sgu/serialization.hpp"

namespace sgu {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sgu_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "run.toml").string();
    put(config_,
        "seed = 5\n"
        "[synth]\nn = 150\nblocks = 5\np_in_pos = 0.3\np_in_neg = 0.01\np_out_pos = 0.01\np_out_neg = 0.1\n"
        "[clustering]\nk = 5\n"
        "[model]\nembed_dim = 8\nepochs = 30\n"
        "[bench]\ndeletion_fraction = 0.02\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub = "o") const { return (dir_ / sub).string(); }

  void pipeline(const std::string& o) {
    ASSERT_EQ(run({"partition", "--config", config_, "--out", o}).code, 0);
    ASSERT_EQ(run({"train", "--config", config_, "--out", o}).code, 0);
  }

  fs::path dir_;
  std::string config_;
};

TEST_F(Cli, SynthWritesGraph) {
  const Result r = run({"synth", "--config", config_, "--out", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "o" / "graph.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "o" / "blocks.csv"));
}

TEST_F(Cli, PartitionShardCountAndDeterminism) {
  ASSERT_EQ(run({"partition", "--config", config_, "--out", out("a")}).code, 0);
  ASSERT_EQ(run({"partition", "--config", config_, "--out", out("b")}).code, 0);
  const Json p = read_json_file(dir_ / "a" / "partition.json");
  EXPECT_EQ(p["k"], 5);
  std::set<int> shards;
  for (const auto& [node, s] : p["assignment"].items()) shards.insert(s.get<int>());
  EXPECT_EQ(shards.size(), 5u);
  for (const char* f : {"partition.json", "groups.json", "diagnostics.json", "train.csv", "test.csv", "graph_info.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const Json t = read_json_file(dir_ / "a" / "partition_timing.json");
  EXPECT_TRUE(t.contains("stage_a_extraction_seconds"));
  EXPECT_TRUE(t.contains("stage_b_clustering_seconds"));

  ASSERT_EQ(run({"partition", "--config", config_, "--out", out("r"), "--partitioner", "random", "--k", "3"}).code, 0);
  const Json pr = read_json_file(dir_ / "r" / "partition.json");
  EXPECT_EQ(pr["k"], 3);
  EXPECT_EQ(read_json_file(dir_ / "r" / "groups.json").size(), 0u);
}

TEST_F(Cli, TrainSingleShardAndErrors) {
  const std::string o = out();
  ASSERT_EQ(run({"partition", "--config", config_, "--out", o, "--k", "1"}).code, 0);
  ASSERT_EQ(run({"train", "--config", config_, "--out", o}).code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "o" / "checkpoint" / "shards")) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);

  EXPECT_EQ(run({"train", "--out", o, "--partition", (dir_ / "missing.json").string()}).code, cli::kIoError);
  // Training edge outside the partition's node range.
  put(dir_ / "bad.csv", "0,100000,+1\n");
  EXPECT_EQ(run({"train", "--out", o, "--train", (dir_ / "bad.csv").string()}).code, cli::kValidationError);
}

TEST_F(Cli, UnlearnIsolationAndIdempotence) {
  const std::string o = out();
  pipeline(o);
  const fs::path ckpt = dir_ / "o" / "checkpoint";
  auto snapshot = [&] {
    std::map<std::string, std::string> m;
    for (const auto& e : fs::recursive_directory_iterator(ckpt)) {
      if (e.is_regular_file()) m[fs::relative(e.path(), ckpt).string()] = slurp(e.path());
    }
    return m;
  };
  const auto before = snapshot();
  put(dir_ / "empty.jsonl", "");
  ASSERT_EQ(run({"unlearn", "--out", o, "--requests", (dir_ / "empty.jsonl").string()}).code, 0);
  EXPECT_EQ(snapshot(), before);

  fs::path owner;
  Json edge;
  for (int s = 0; s < 5 && edge.is_null(); ++s) {
    owner = fs::path("shards") / ("shard_000" + std::to_string(s) + ".json");
    const Json shard = read_json_file(ckpt / owner);
    if (!shard["train_edges"].empty()) edge = shard["train_edges"][0];
  }
  ASSERT_FALSE(edge.is_null());
  put(dir_ / "one.jsonl", "{\"op\":\"remove-edge\",\"u\":" + edge[0].dump() + ",\"v\":" + edge[1].dump() + "}\n");
  ASSERT_EQ(run({"unlearn", "--out", o, "--requests", (dir_ / "one.jsonl").string()}).code, 0);
  const auto after = snapshot();
  std::vector<std::string> changed;
  for (const auto& [k, v] : after) {
    if (before.at(k) != v) changed.push_back(k);
  }
  EXPECT_EQ(changed, std::vector<std::string>{owner.string()});

  const Result again = run({"unlearn", "--out", o, "--requests", (dir_ / "one.jsonl").string()});
  ASSERT_EQ(again.code, 0);
  EXPECT_NE(again.out.find("notice"), std::string::npos);
  EXPECT_EQ(snapshot(), after);

  put(dir_ / "missing.jsonl", "{\"op\":\"remove-node\",\"u\":99999}\n");
  EXPECT_EQ(run({"unlearn", "--out", o, "--requests", (dir_ / "missing.jsonl").string()}).code, cli::kValidationError);
  put(dir_ / "garbled.jsonl", "{\"op\":\n");
  EXPECT_EQ(run({"unlearn", "--out", o, "--requests", (dir_ / "garbled.jsonl").string()}).code, cli::kIoError);
}

TEST_F(Cli, EvalPerfectToy) {
  // All-positive graph: every test label and every prediction is positive.
  std::string csv;
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j) {
      if ((i * 7 + j * 3) % 4 == 0) csv += std::to_string(i) + "," + std::to_string(j) + ",1\n";
    }
  put(dir_ / "pos.csv", csv);
  const std::string o = out();
  ASSERT_EQ(run({"partition", "--input", (dir_ / "pos.csv").string(), "--format", "signed", "--k", "2", "--out", o}).code, 0);
  ASSERT_EQ(run({"train", "--out", o}).code, 0);
  const Result r = run({"eval", "--out", o});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = read_json_file(dir_ / "o" / "report.json");
  EXPECT_EQ(rep["runs"][0]["macro_f1"], 1.0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "node_map.csv"));
}

TEST_F(Cli, EvalCompareAndRepeats) {
  const std::string o = out();
  pipeline(o);
  const Result cmp = run({"eval", "--out", o, "--compare", "scratch"});
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  EXPECT_NE(cmp.out.find("ensemble"), std::string::npos);
  EXPECT_NE(cmp.out.find("scratch"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "o" / "report.json").find("identical to checkpoint: yes"), std::string::npos);

  const Result rep = run({"eval", "--config", config_, "--out", out("rep"), "--repeats", "3"});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("±"), std::string::npos);
  EXPECT_EQ(read_json_file(dir_ / "rep" / "report.json")["runs"].size(), 3u);
}

TEST_F(Cli, BenchRowsAndDeterminism) {
  const Result a = run({"bench", "--config", config_, "--out", out("a")});
  ASSERT_EQ(a.code, 0) << a.err;
  for (const char* row : {"scratch", "random", "sgu", "stage_a_s", "stage_b_s"}) {
    EXPECT_NE(a.out.find(row), std::string::npos) << row;
  }
  ASSERT_EQ(run({"bench", "--config", config_, "--out", out("b")}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "bench.json"), slurp(dir_ / "b" / "bench.json"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({"partition", "--no-such-flag"}).code, cli::kConfigError);
  EXPECT_EQ(run({}).code, cli::kConfigError);
  EXPECT_EQ(run({"partition", "--help"}).code, cli::kOk);
  EXPECT_EQ(run({"partition", "--partitioner", "metis", "--out", out()}).code, cli::kConfigError);
  EXPECT_EQ(run({"partition", "--alpha", "2", "--out", out()}).code, cli::kConfigError);
  put(dir_ / "bad.toml", "colour = blue\n");
  EXPECT_EQ(run({"partition", "--config", (dir_ / "bad.toml").string()}).code, cli::kConfigError);
  EXPECT_EQ(run({"partition", "--config", (dir_ / "nope.toml").string()}).code, cli::kIoError);
  EXPECT_EQ(run({"partition", "--input", (dir_ / "nope.csv").string(), "--out", out()}).code, cli::kIoError);
  put(dir_ / "zero.csv", "1,2,0\n");
  EXPECT_EQ(run({"partition", "--input", (dir_ / "zero.csv").string(), "--out", out()}).code, cli::kIoError);
  EXPECT_EQ(run({"unlearn", "--out", out()}).code, cli::kConfigError);
}

TEST_F(Cli, FlagsOverrideConfig) {
  ASSERT_EQ(run({"partition", "--config", config_, "--k", "4", "--out", out()}).code, 0);
  const Json info = read_json_file(dir_ / "o" / "graph_info.json");
  EXPECT_EQ(info["config"]["clustering"]["k"], 4);
  EXPECT_EQ(info["config"]["seed"], 5);
}

TEST_F(Cli, BinaryExitCode) {
  const std::string cmd = std::string(SGU_CLI_PATH) + " train --out " + out() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), cli::kIoError);
}

}  // namespace
}  // namespace sgu
