#include "cli.hpp"

#include <CLI11.hpp>
#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <thread>

#include "sstem/aggregation.hpp"
#include "sstem/backend_config.hpp"
#include "sstem/error.hpp"
#include "sstem/ingestion.hpp"
#include "sstem/model.hpp"
#include "sstem/rating.hpp"
#include "sstem/rating_server.hpp"
#include "sstem/reporting.hpp"
#include "sstem/stages.hpp"
#include "sstem/stats.hpp"
#include "sstem/tabular.hpp"

namespace sstem::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidManifest:
    case ErrorCode::kParseError:
    case ErrorCode::kUnknownFormat:
    case ErrorCode::kUnsplitVideo:
    case ErrorCode::kIoError: return kExitUsage;
    case ErrorCode::kBackendUnavailable: return kExitBackend;
    case ErrorCode::kRankDeficient:
    case ErrorCode::kTooFewSamples: return kExitFit;
    case ErrorCode::kAlignmentError: return kExitAlignment;
    default: return kExitFailure;
  }
}

// Reference weights used by `report` when no weights file is given.
constexpr WeightVector kReferenceWeights{0.361, 0.138, 0.501, 0.0, TemporalForm::kDirect};

std::string config_sidecar(const fs::path& out) { return out.string() + ".config.json"; }

DatasetManifest load_valid_manifest(const fs::path& path) {
  auto manifest = load_manifest(path);
  const auto violations = validate_manifest(manifest);
  if (!violations.empty()) {
    std::string msg = path.string() + ":";
    for (const auto& v : violations) {
      msg += " [" + v.field + (v.video_id.empty() ? "" : " " + v.video_id) + "] " + v.message + ";";
    }
    throw Error(ErrorCode::kInvalidManifest, msg);
  }
  return manifest;
}

// --- score ---------------------------------------------------------------

struct ScoreArgs {
  std::string manifest;
  std::string backends;
  std::optional<int> stride;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cache_dir;
  bool no_cache = false;
  std::string out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  const auto manifest = load_valid_manifest(a.manifest);

  // Precedence: flags, then the config file, then defaults.
  json file_cfg = json::object();
  BackendConfig backend_cfg;
  if (!a.backends.empty()) {
    const auto text = read_file(a.backends);
    backend_cfg = parse_backend_config(text);
    file_cfg = json::parse(text);
  }
  int stride = a.stride.value_or(file_cfg.value("stride", 1));
  int workers = a.workers.value_or(file_cfg.value("workers", 1));
  if (a.seed) backend_cfg.seed = *a.seed;
  std::optional<std::string> cache_dir = a.cache_dir;
  if (!cache_dir && file_cfg.contains("cache_dir")) cache_dir = file_cfg.at("cache_dir").get<std::string>();
  const bool no_cache = a.no_cache || file_cfg.value("no_cache", false);
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "--stride must be >= 1");
  if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "--workers must be >= 1");

  ScoringConfig scoring;
  scoring.stride = stride;
  scoring.manifest_dir = fs::path(a.manifest).parent_path();
  if (cache_dir && !no_cache) scoring.cache = std::make_shared<const FrameCache>(*cache_dir);

  const auto& videos = manifest.videos;
  std::vector<std::optional<ScoreRow>> results(videos.size());
  std::vector<std::optional<Error>> failures(videos.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr setup_failure;
  std::mutex setup_mu;

  auto worker = [&] {
    BackendSet backends;
    try {
      backends = make_backends(backend_cfg);
    } catch (...) {
      std::lock_guard lock(setup_mu);
      if (!setup_failure) setup_failure = std::current_exception();
      return;
    }
    for (std::size_t i = next.fetch_add(1); i < videos.size(); i = next.fetch_add(1)) {
      try {
        auto scores = score_video(videos[i], scoring, backends);
        results[i] = ScoreRow{std::move(scores), videos[i].model_name, stride};
      } catch (const Error& e) {
        failures[i] = e;
      }
    }
  };
  const int n_threads = std::min<int>(workers, std::max<int>(1, static_cast<int>(videos.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (setup_failure) std::rethrow_exception(setup_failure);

  std::vector<ScoreRow> rows;
  bool backend_down = false;
  std::size_t n_failed = 0;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (results[i]) rows.push_back(*results[i]);
    if (failures[i]) {
      ++n_failed;
      backend_down = backend_down || failures[i]->code() == ErrorCode::kBackendUnavailable;
      err << "video " << videos[i].video_id << ": " << failures[i]->what() << "\n";
    }
  }

  json echo = {{"command", "score"},
               {"dataset_id", manifest.dataset_id},
               {"stride", stride},
               {"workers", workers},
               {"seed", backend_cfg.seed},
               {"cache", scoring.cache != nullptr},
               {"backends", json::parse(describe_backend_config(backend_cfg))}};
  write_file_atomic(a.out, write_scores_csv(rows));
  write_file_atomic(config_sidecar(a.out), echo.dump(2) + "\n");

  out << "scored " << rows.size() << "/" << videos.size() << " videos -> " << a.out << "\n";
  if (n_failed == 0) return kExitOk;
  err << n_failed << " video(s) failed; partial results written to " << a.out << "\n";
  return backend_down ? kExitBackend : kExitFailure;
}

// --- fit -----------------------------------------------------------------

struct FitArgs {
  std::string scores;
  std::string human;
  std::string manifest;
  std::string method = "ols";
  std::string temporal_form = "direct";
  std::string out;
};

std::vector<FitRow> join_rows(const std::vector<ScoreRow>& scores, const std::vector<HumanScore>& human,
                              std::ostream& err) {
  std::map<std::string, double> by_id;
  for (const auto& h : human) {
    if (!by_id.emplace(h.video_id, h.mean_normalized).second) {
      throw Error(ErrorCode::kAlignmentError, "duplicate human score for '" + h.video_id + "'");
    }
  }
  std::vector<FitRow> rows;
  std::set<std::string> seen;
  for (const auto& s : scores) {
    if (!seen.insert(s.scores.video_id).second) {
      throw Error(ErrorCode::kAlignmentError, "duplicate scores for '" + s.scores.video_id + "'");
    }
    auto it = by_id.find(s.scores.video_id);
    if (it == by_id.end()) {
      err << "note: no human score for " << s.scores.video_id << "; skipped\n";
      continue;
    }
    rows.push_back({s.scores, it->second});
  }
  return rows;
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto method = parse_fit_method(a.method);
  if (!method) throw Error(ErrorCode::kInvalidArgument, "unknown --method '" + a.method + "'");
  const auto form = parse_temporal_form(a.temporal_form);
  if (!form) throw Error(ErrorCode::kInvalidArgument, "unknown --temporal-form '" + a.temporal_form + "'");

  const auto rows = join_rows(parse_scores_csv(read_file(a.scores)), parse_human_csv(read_file(a.human)), err);

  std::vector<FitRow> train = rows;
  std::vector<FitRow> validation;
  if (!a.manifest.empty()) {
    auto split = split_rows(load_valid_manifest(a.manifest), rows);
    train = std::move(split.optimization);
    validation = std::move(split.validation);
  }
  const auto fit = fit_weights(train, *method, *form);

  json doc = json::parse(serialize_fit_result(fit));
  std::optional<double> validation_loss;
  if (!validation.empty()) validation_loss = evaluate_loss(validation, fit.weights);
  doc["validation_loss"] = validation_loss ? json(*validation_loss) : json(nullptr);
  doc["n_validation"] = validation.size();
  doc["config"] = {{"command", "fit"},
                   {"method", std::string(to_string(*method))},
                   {"temporal_form", std::string(to_string(*form))},
                   {"split", a.manifest.empty() ? "all rows" : "manifest"}};
  write_file_atomic(a.out, doc.dump(2) + "\n");

  out << "weights: w1=" << format_fixed(fit.weights.w1, 6) << " w2=" << format_fixed(fit.weights.w2, 6)
      << " w3=" << format_fixed(fit.weights.w3, 6);
  if (*method == FitMethod::kOlsIntercept) out << " b=" << format_fixed(fit.weights.intercept, 6);
  out << "\noptimization loss: " << format_double(fit.loss) << " (" << train.size() << " rows)\n";
  if (validation_loss) {
    out << "validation loss: " << format_double(*validation_loss) << " (" << validation.size() << " rows)\n";
  } else {
    out << "validation loss: n/a (no validation rows)\n";
  }
  return kExitOk;
}

// --- correlate -----------------------------------------------------------

struct CorrelateArgs {
  std::string metrics;
  std::string human;
  std::string out;
};

int cmd_correlate(const CorrelateArgs& a, std::ostream& out, std::ostream&) {
  const auto table = parse_csv(read_file(a.metrics));
  if (table.header.size() < 2) {
    throw Error(ErrorCode::kParseError, a.metrics + ": need a label column and at least one metric column");
  }
  stats::LabeledValues human;
  for (const auto& h : parse_human_csv(read_file(a.human))) {
    human.labels.push_back(h.video_id);
    human.values.push_back(h.mean_normalized);
  }
  std::vector<stats::NamedMetric> metrics;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    stats::NamedMetric m{table.header[c], {}};
    for (const auto& row : table.rows) {
      m.values.labels.push_back(row[0]);
      m.values.values.push_back(parse_double(row[c]));
    }
    metrics.push_back(std::move(m));
  }
  const auto result = stats::correlation_table(human, metrics);

  CsvTable csv{{"metric", "pearson", "spearman", "kendall"}, {}};
  for (const auto& r : result.rows) {
    csv.rows.push_back({r.metric, format_double(r.pearson), format_double(r.spearman), format_double(r.kendall)});
    out << r.metric << "  " << format_fixed(r.pearson, 3) << "  " << format_fixed(r.spearman, 3) << "  "
        << format_fixed(r.kendall, 3) << "\n";
  }
  write_file_atomic(a.out, write_csv(csv));
  return kExitOk;
}

// --- report --------------------------------------------------------------

struct ReportArgs {
  std::string scores;
  std::string weights;
  std::string human;
  std::string manifest;
  std::string generated_at;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream&) {
  const auto rows = parse_scores_csv(read_file(a.scores));

  WeightVector weights = kReferenceWeights;
  std::string fit_method = "reference";
  if (!a.weights.empty()) {
    const auto fit = parse_fit_result(read_file(a.weights));
    weights = fit.weights;
    fit_method = std::string(to_string(fit.method));
  }
  std::vector<HumanScore> human;
  if (!a.human.empty()) human = parse_human_csv(read_file(a.human));

  ReportConfig config;
  config.fit_method = fit_method;
  config.stride = rows.empty() ? 1 : rows.front().stride;
  std::string dataset_id = "unknown";
  const fs::path sidecar = config_sidecar(a.scores);
  if (fs::exists(sidecar)) {
    try {
      const auto echo = json::parse(read_file(sidecar));
      config.backends = echo.at("backends").dump();
      config.seed = echo.at("seed").get<std::uint64_t>();
      config.stride = echo.at("stride").get<int>();
      dataset_id = echo.at("dataset_id").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, sidecar.string() + ": " + e.what());
    }
  }
  if (!a.manifest.empty()) dataset_id = load_valid_manifest(a.manifest).dataset_id;

  const auto report = build_report(dataset_id, rows, weights, human, config,
                                   a.generated_at.empty() ? rating::utc_now() : a.generated_at);
  const fs::path dir = a.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "cannot create output directory " + a.out);
  write_file_atomic(dir / "report.md", render(report, ReportFormat::kMarkdown));
  write_file_atomic(dir / "report.json", render(report, ReportFormat::kStructured));
  write_file_atomic(dir / "report.csv", render(report, ReportFormat::kTabular));
  out << "report for " << report.models.size() << " model(s) -> " << dir.string() << "\n";
  if (!report.correlation) out << "correlation: " << report.correlation_note << "\n";
  return kExitOk;
}

// --- serve ---------------------------------------------------------------

struct ServeArgs {
  std::string manifest;
  std::string store_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui_dir;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  const auto manifest = load_valid_manifest(a.manifest);
  rating::RatingStore store(a.store_dir);
  rating::RatingService service(manifest, store);

  rating::ServerOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.media_root = fs::path(a.manifest).parent_path();
  opts.ui_dir = a.ui_dir;
  rating::RatingServer server(service, opts);
  if (!server.bind()) {
    err << "cannot bind " << a.host << ":" << a.port << "\n";
    return kExitBind;
  }

  // Handle SIGINT/SIGTERM synchronously on this thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::thread loop([&] { server.run(); });
  out << "serving " << manifest.dataset_id << " on http://" << a.host << ":" << server.port() << "\n" << std::flush;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  loop.join();
  store.flush();
  out << "stopped; ratings in " << store.log_path().string() << "\n";
  return kExitOk;
}

// --- validate ------------------------------------------------------------

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto manifest = load_manifest(path);
  const auto violations = validate_manifest(manifest);
  for (const auto& v : violations) {
    err << v.field << (v.video_id.empty() ? "" : " (" + v.video_id + ")") << ": " << v.message << "\n";
  }
  if (!violations.empty()) return kExitUsage;
  std::size_t opt = 0, val = 0;
  for (const auto& [id, role] : manifest.split) (role == SplitRole::kOptimization ? opt : val)++;
  out << manifest.dataset_id << ": " << manifest.videos.size() << " videos, " << opt << " optimization, " << val
      << " validation\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Video edit evaluation: scoring, weight fitting, correlation, reports and rating service"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Score every edited video in a manifest");
  sc->add_option("--manifest", score.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  sc->add_option("--backends", score.backends, "Backend config file (JSON)")->check(CLI::ExistingFile);
  sc->add_option("--stride", score.stride, "Keep every k-th frame");
  sc->add_option("--workers", score.workers, "Parallel workers");
  sc->add_option("--seed", score.seed, "Seed for mock backends");
  sc->add_option("--cache-dir", score.cache_dir, "Inference cache directory");
  sc->add_flag("--no-cache", score.no_cache, "Disable the inference cache");
  sc->add_option("--out", score.out, "Scores file (CSV)")->required();

  FitArgs fit;
  auto* fc = app.add_subcommand("fit", "Fit aggregation weights against human scores");
  fc->add_option("--scores", fit.scores, "Scores file (CSV)")->required()->check(CLI::ExistingFile);
  fc->add_option("--human", fit.human, "Human scores file (CSV)")->required()->check(CLI::ExistingFile);
  fc->add_option("--manifest", fit.manifest, "Manifest whose split selects optimization rows")
      ->check(CLI::ExistingFile);
  fc->add_option("--method", fit.method, "ols | ols-intercept | simplex");
  fc->add_option("--temporal-form", fit.temporal_form, "direct | penalty");
  fc->add_option("--out", fit.out, "Weights file (JSON)")->required();

  CorrelateArgs corr;
  auto* cc = app.add_subcommand("correlate", "Correlate metric columns with human scores");
  cc->add_option("--metrics", corr.metrics, "Metrics file (CSV; first column is the label)")
      ->required()
      ->check(CLI::ExistingFile);
  cc->add_option("--human", corr.human, "Human scores file (CSV)")->required()->check(CLI::ExistingFile);
  cc->add_option("--out", corr.out, "Correlation table (CSV)")->required();

  ReportArgs rep;
  auto* rc = app.add_subcommand("report", "Render per-model summaries and correlations");
  rc->add_option("--scores", rep.scores, "Scores file (CSV)")->required()->check(CLI::ExistingFile);
  rc->add_option("--weights", rep.weights, "Weights file from `fit`")->check(CLI::ExistingFile);
  rc->add_option("--human", rep.human, "Human scores file (CSV)")->check(CLI::ExistingFile);
  rc->add_option("--manifest", rep.manifest, "Manifest (for the dataset id)")->check(CLI::ExistingFile);
  rc->add_option("--generated-at", rep.generated_at, "Timestamp to stamp instead of the current time");
  rc->add_option("--out", rep.out, "Output directory")->required();

  ServeArgs serve;
  auto* vc = app.add_subcommand("serve", "Run the human rating service");
  vc->add_option("--manifest", serve.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  vc->add_option("--store-dir", serve.store_dir, "Rating log directory")->required();
  vc->add_option("--host", serve.host, "Bind address");
  vc->add_option("--port", serve.port, "Port (0 picks a free one)");
  vc->add_option("--ui-dir", serve.ui_dir, "Static UI bundle served at /")->check(CLI::ExistingDirectory);

  std::string validate_path;
  auto* xc = app.add_subcommand("validate", "Check a manifest");
  xc->add_option("--manifest", validate_path, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*sc) return cmd_score(score, out, err);
    if (*fc) return cmd_fit(fit, out, err);
    if (*cc) return cmd_correlate(corr, out, err);
    if (*rc) return cmd_report(rep, out, err);
    if (*vc) return cmd_serve(serve, out, err);
    if (*xc) return cmd_validate(validate_path, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sstem::cli
