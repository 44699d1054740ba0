#include <gtest/gtest.h>
#include <httplib.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "sstem/aggregation.hpp"
#include "sstem/tabular.hpp"
#include "synthetic.hpp"

using namespace sstem;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sstem");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int closed_port() { return synth::free_port(); }

// Scores CSV from the six published component rows.
void write_component_inputs(const fs::path& scores, const fs::path& human, std::size_t n = 6) {
  std::vector<ScoreRow> rows;
  std::vector<HumanScore> targets;
  const auto comp = synth::load_component_scores();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({{comp[i].model, comp[i].semantic, comp[i].object, comp[i].temporal, 16}, comp[i].model, 1});
    targets.push_back({comp[i].model, comp[i].final_score, 0});
  }
  write_file_atomic(scores, write_scores_csv(rows));
  write_file_atomic(human, write_human_csv(targets));
}

}  // namespace

TEST(CliScore, TwoVideoMockRunIsDeterministic) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 2, 6).string();
  auto r1 = run_cli({"score", "--manifest", manifest, "--seed", "7", "--out", (tmp / "s1.csv").string()});
  ASSERT_EQ(r1.code, 0) << r1.err;
  auto r2 = run_cli({"score", "--manifest", manifest, "--seed", "7", "--workers", "3", "--out",
                     (tmp / "s2.csv").string()});
  ASSERT_EQ(r2.code, 0) << r2.err;
  const auto a = read_file(tmp / "s1.csv");
  EXPECT_EQ(a, read_file(tmp / "s2.csv"));
  const auto rows = parse_scores_csv(a);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].scores.video_id, "vid0");
  EXPECT_EQ(rows[1].model_name, "model1");
  const auto echo = json::parse(read_file(tmp / "s1.csv.config.json"));
  EXPECT_EQ(echo.at("seed"), 7);
  EXPECT_EQ(echo.at("dataset_id"), "synthetic");

  run_cli({"score", "--manifest", manifest, "--seed", "8", "--out", (tmp / "s3.csv").string()});
  EXPECT_NE(read_file(tmp / "s3.csv"), a);
}

TEST(CliScore, FlagsOverrideConfigFile) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 2, 8).string();
  write_file_atomic(tmp / "cfg.json", R"({"seed": 3, "stride": 4, "cache_dir": ")" + (tmp / "cache").string() + "\"}");
  auto r = run_cli({"score", "--manifest", manifest, "--backends", (tmp / "cfg.json").string(), "--out",
                    (tmp / "a.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto echo = json::parse(read_file(tmp / "a.csv.config.json"));
  EXPECT_EQ(echo.at("stride"), 4);
  EXPECT_EQ(echo.at("seed"), 3);
  EXPECT_EQ(echo.at("cache"), true);
  EXPECT_FALSE(fs::is_empty(tmp / "cache"));
  EXPECT_EQ(parse_scores_csv(read_file(tmp / "a.csv"))[0].scores.n_frames, 2);

  r = run_cli({"score", "--manifest", manifest, "--backends", (tmp / "cfg.json").string(), "--stride", "2",
               "--seed", "5", "--no-cache", "--out", (tmp / "b.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  echo = json::parse(read_file(tmp / "b.csv.config.json"));
  EXPECT_EQ(echo.at("stride"), 2);
  EXPECT_EQ(echo.at("seed"), 5);
  EXPECT_EQ(echo.at("cache"), false);
}

TEST(CliScore, CachedRunMatchesUncached) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 3, 5).string();
  const auto cache = (tmp / "cache").string();
  ASSERT_EQ(run_cli({"score", "--manifest", manifest, "--out", (tmp / "a.csv").string()}).code, 0);
  ASSERT_EQ(run_cli({"score", "--manifest", manifest, "--cache-dir", cache, "--out", (tmp / "b.csv").string()}).code, 0);
  ASSERT_EQ(run_cli({"score", "--manifest", manifest, "--cache-dir", cache, "--out", (tmp / "c.csv").string()}).code, 0);
  EXPECT_EQ(read_file(tmp / "a.csv"), read_file(tmp / "b.csv"));
  EXPECT_EQ(read_file(tmp / "a.csv"), read_file(tmp / "c.csv"));
}

TEST(CliScore, ExitCodes) {
  synth::TempDir tmp;
  EXPECT_EQ(run_cli({"score", "--manifest", (tmp / "nope.json").string(), "--out", (tmp / "o.csv").string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"score"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);

  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 2, 4).string();
  EXPECT_EQ(run_cli({"score", "--manifest", manifest, "--stride", "0", "--out", (tmp / "o.csv").string()}).code,
            cli::kExitUsage);

  write_file_atomic(tmp / "down.json", R"({"frame_embedder": {"type": "endpoint", "url": "http://127.0.0.1:)" +
                                           std::to_string(closed_port()) + R"(", "retries": 0}})");
  auto r = run_cli({"score", "--manifest", manifest, "--backends", (tmp / "down.json").string(), "--out",
                    (tmp / "o.csv").string()});
  EXPECT_EQ(r.code, cli::kExitBackend) << r.err;
  EXPECT_NE(r.err.find("BACKEND_UNAVAILABLE"), std::string::npos);

  // One video without decodable media: the other is still written.
  fs::remove_all(tmp / "data" / "vid1" / "edited");
  r = run_cli({"score", "--manifest", manifest, "--out", (tmp / "partial.csv").string()});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("vid1"), std::string::npos);
  EXPECT_EQ(parse_scores_csv(read_file(tmp / "partial.csv")).size(), 1u);
}

TEST(CliFit, ComponentTableReconstructsPublishedWeights) {
  synth::TempDir tmp;
  write_component_inputs(tmp / "scores.csv", tmp / "human.csv");
  auto r = run_cli({"fit", "--scores", (tmp / "scores.csv").string(), "--human", (tmp / "human.csv").string(),
                    "--method", "ols", "--temporal-form", "direct", "--out", (tmp / "w.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fit = parse_fit_result(read_file(tmp / "w.json"));
  EXPECT_NEAR(fit.weights.w1, 0.361, 0.02);
  EXPECT_NEAR(fit.weights.w2, 0.138, 0.02);
  EXPECT_NEAR(fit.weights.w3, 0.501, 0.02);
  EXPECT_NE(r.out.find("validation loss"), std::string::npos);
}

TEST(CliFit, SplitExactDataAndErrors) {
  synth::TempDir tmp;
  std::vector<ScoreRow> rows;
  std::vector<HumanScore> human;
  json split = json::object(), videos = json::array();
  for (int i = 0; i < 10; ++i) {
    const std::string id = "v" + std::to_string(i);
    const StageScores s{id, 0.1 * i + 0.03, std::fmod(0.37 * i, 1.0), 1.0 - 0.05 * i * i / 10, 4};
    rows.push_back({s, "m", 1});
    human.push_back({id, aggregate(s, {0.25, 0.25, 0.5}), 1});
    split[id] = i < 7 ? "optimization" : "validation";
    videos.push_back({{"video_id", id}, {"original_path", "o"}, {"edited_path", "e"}, {"edit_prompt", "p"},
                      {"model_name", "m"}});
  }
  write_file_atomic(tmp / "s.csv", write_scores_csv(rows));
  write_file_atomic(tmp / "h.csv", write_human_csv(human));
  write_file_atomic(tmp / "m.json", json{{"dataset_id", "d"}, {"videos", videos}, {"split", split}}.dump());
  auto r = run_cli({"fit", "--scores", (tmp / "s.csv").string(), "--human", (tmp / "h.csv").string(), "--manifest",
                    (tmp / "m.json").string(), "--method", "simplex", "--out", (tmp / "w.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(read_file(tmp / "w.json"));
  EXPECT_EQ(doc.at("n_samples"), 7);
  EXPECT_EQ(doc.at("n_validation"), 3);
  EXPECT_LT(doc.at("loss").get<double>(), 1e-20);
  EXPECT_LT(doc.at("validation_loss").get<double>(), 1e-20);

  write_component_inputs(tmp / "s2.csv", tmp / "h2.csv", 2);
  r = run_cli({"fit", "--scores", (tmp / "s2.csv").string(), "--human", (tmp / "h2.csv").string(), "--out",
               (tmp / "w2.json").string()});
  EXPECT_EQ(r.code, cli::kExitFit);
  EXPECT_FALSE(fs::exists(tmp / "w2.json"));
  r = run_cli({"fit", "--scores", (tmp / "s.csv").string(), "--human", (tmp / "h.csv").string(), "--method", "lasso",
               "--out", (tmp / "w3.json").string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
}

TEST(CliCorrelate, PublishedTablesAndErrors) {
  synth::TempDir tmp;
  auto r = run_cli({"correlate", "--metrics", synth::data_path("quality_metrics.csv").string(), "--human",
                    synth::data_path("human_scores.csv").string(), "--out", (tmp / "corr.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = parse_csv(read_file(tmp / "corr.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"metric", "pearson", "spearman", "kendall"}));
  ASSERT_EQ(t.rows.size(), 11u);
  for (const auto& row : t.rows) {
    if (row[0] == "Final Score" || row[0] == "Temporal Consistency") {
      EXPECT_EQ(parse_double(row[2]), 1.0);
      EXPECT_EQ(parse_double(row[3]), 1.0);
    }
    if (row[0] == "FF-alpha") EXPECT_NEAR(parse_double(row[2]), -0.8, 1e-12);
  }

  write_file_atomic(tmp / "m.csv", "model,perfect\nA,1\nB,2\nC,3\n");
  write_file_atomic(tmp / "h.csv", "video_id,mean_normalized\nA,0.1\nB,0.2\nC,0.3\n");
  r = run_cli({"correlate", "--metrics", (tmp / "m.csv").string(), "--human", (tmp / "h.csv").string(), "--out",
               (tmp / "c.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto perfect = parse_csv(read_file(tmp / "c.csv"));
  EXPECT_NEAR(parse_double(perfect.rows[0][1]), 1.0, 1e-15);
  EXPECT_EQ(parse_double(perfect.rows[0][2]), 1.0);
  EXPECT_EQ(parse_double(perfect.rows[0][3]), 1.0);

  write_file_atomic(tmp / "bad.csv", "model,perfect\nA,1\nB,2\nD,3\n");
  r = run_cli({"correlate", "--metrics", (tmp / "bad.csv").string(), "--human", (tmp / "h.csv").string(), "--out",
               (tmp / "c2.csv").string()});
  EXPECT_EQ(r.code, cli::kExitAlignment);
}

TEST(CliReport, MockPipelineProducesStableReports) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 4, 5).string();
  ASSERT_EQ(run_cli({"score", "--manifest", manifest, "--seed", "1", "--out", (tmp / "s.csv").string()}).code, 0);
  auto r = run_cli({"report", "--scores", (tmp / "s.csv").string(), "--generated-at", "2026-01-01T00:00:00Z",
                    "--out", (tmp / "r1").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"report.md", "report.json", "report.csv"}) EXPECT_TRUE(fs::exists(tmp / "r1" / f));
  const auto md = read_file(tmp / "r1" / "report.md");
  EXPECT_NE(md.find("Correlation section absent"), std::string::npos);
  EXPECT_NE(md.find("synthetic"), std::string::npos);
  ASSERT_EQ(run_cli({"report", "--scores", (tmp / "s.csv").string(), "--generated-at", "2026-01-01T00:00:00Z",
                     "--out", (tmp / "r2").string()})
                .code,
            0);
  EXPECT_EQ(md, read_file(tmp / "r2" / "report.md"));

  write_file_atomic(tmp / "h.csv", "video_id,mean_normalized\nvid0,0.4\nvid1,0.6\nvid2,0.5\nvid3,0.7\n");
  r = run_cli({"report", "--scores", (tmp / "s.csv").string(), "--human", (tmp / "h.csv").string(), "--out",
               (tmp / "r3").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(tmp / "r3" / "report.md").find("Correlation section absent"), std::string::npos);
}

TEST(CliValidate, ReportsViolations) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 2, 2).string();
  EXPECT_EQ(run_cli({"validate", "--manifest", manifest}).code, 0);
  write_file_atomic(tmp / "bad.json", R"({"dataset_id": "", "videos": [], "split": {}})");
  EXPECT_EQ(run_cli({"validate", "--manifest", (tmp / "bad.json").string()}).code, cli::kExitUsage);
}

TEST(CliServe, OccupiedPortExitsSix) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 1, 2).string();
  httplib::Server holder;
  holder.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const int port = holder.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  auto r = run_cli({"serve", "--manifest", manifest, "--store-dir", (tmp / "store").string(), "--port",
                    std::to_string(port)});
  EXPECT_EQ(r.code, cli::kExitBind);
}

TEST(CliServe, ServesUntilSignalledThenExitsCleanly) {
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 2, 2).string();
  const int port = closed_port();
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    const std::string port_s = std::to_string(port), store = (tmp / "store").string();
    execl(SSTEM_CLI_PATH, SSTEM_CLI_PATH, "serve", "--manifest", manifest.c_str(), "--store-dir", store.c_str(),
          "--port", port_s.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  // Kills the child if an assertion returns early.
  struct Reaper {
    pid_t pid;
    bool done = false;
    ~Reaper() {
      if (!done) {
        kill(pid, SIGKILL);
        waitpid(pid, nullptr, 0);
      }
    }
  } reaper{pid};
  httplib::Client client("127.0.0.1", port);
  httplib::Result health;
  for (int i = 0; i < 200 && !(health = client.Get("/api/health")); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ASSERT_TRUE(health);
  auto res = client.Post("/api/ratings",
                         R"({"rater_id":"r","video_id":"vid0","semantic":5,"spatial":6,"temporal":7})",
                         "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  reaper.done = true;
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  const auto log = read_file(tmp / "store" / "ratings.jsonl");
  EXPECT_NE(log.find("\"vid0\""), std::string::npos);
}
