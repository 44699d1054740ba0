// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sstem/aggregation.hpp"
#include "sstem/error.hpp"
#include "sstem/mock_backends.hpp"
#include "sstem/rating.hpp"
#include "sstem/stages.hpp"
#include "sstem/stats.hpp"
#include "sstem/tabular.hpp"
#include "synthetic.hpp"

using namespace sstem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

// --- 1. weight reconstruction -------------------------------------------

std::array<double, 3> solve3(const std::array<std::array<double, 3>, 3>& a, const std::array<double, 3>& b) {
  auto det = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det(a);
  std::array<double, 3> x{};
  for (int k = 0; k < 3; ++k) {
    auto m = a;
    for (int i = 0; i < 3; ++i) m[i][k] = b[i];
    x[k] = det(m) / d;
  }
  return x;
}

Outcome weight_reconstruction() {
  Outcome o;
  const auto comp = synth::load_component_scores();
  std::vector<FitRow> rows;
  for (const auto& r : comp) rows.push_back({{r.model, r.semantic, r.object, r.temporal, 1}, r.final_score});
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> b{};
  for (int i = 0; i < 3; ++i) {
    a[i] = {comp[i].semantic, comp[i].object, comp[i].temporal};
    b[i] = comp[i].final_score;
  }
  const auto oracle = solve3(a, b);
  const auto fit = fit_weights(rows, FitMethod::kOls, TemporalForm::kDirect);
  const double w[3] = {fit.weights.w1, fit.weights.w2, fit.weights.w3};
  for (int k = 0; k < 3; ++k) {
    o.check(std::abs(w[k] - oracle[k]) <= 0.02,
            "w" + std::to_string(k + 1) + "=" + fmt(w[k]) + " vs oracle " + fmt(oracle[k]));
  }
  double max_err = 0.0;
  for (const auto& r : rows) max_err = std::max(max_err, std::abs(aggregate(r.scores, fit.weights) - r.human));
  o.check(max_err <= 1e-3, "max reconstruction error " + fmt(max_err, 8));
  o.notes.insert(o.notes.begin(), "w=(" + fmt(w[0], 4) + ", " + fmt(w[1], 4) + ", " + fmt(w[2], 4) +
                                      ") oracle=(" + fmt(oracle[0], 4) + ", " + fmt(oracle[1], 4) + ", " +
                                      fmt(oracle[2], 4) + ") max_err=" + fmt(max_err, 7));
  return o;
}

// --- 2/3. published correlations ----------------------------------------

CorrelationTable published_metric_correlations() {
  const auto metrics = parse_csv(read_file(synth::data_path("quality_metrics.csv")));
  stats::LabeledValues human;
  for (const auto& h : parse_human_csv(read_file(synth::data_path("human_scores.csv")))) {
    human.labels.push_back(h.video_id);
    human.values.push_back(h.mean_normalized);
  }
  std::vector<stats::NamedMetric> named;
  for (std::size_t c = 1; c < metrics.header.size(); ++c) {
    stats::NamedMetric m{metrics.header[c], {}};
    for (const auto& row : metrics.rows) {
      m.values.labels.push_back(row[0]);
      m.values.values.push_back(parse_double(row[c]));
    }
    named.push_back(std::move(m));
  }
  return stats::correlation_table(human, named);
}

Outcome rank_correlations() {
  struct Published {
    const char* metric;
    double spearman;
    double kendall;
  };
  const Published rows[] = {{"Imaging Quality", 0.800, 0.666},       {"FF-alpha", -0.800, -0.666},
                            {"Success Rate", 0.800, 0.666},          {"Subject Consistency", 0.800, 0.666},
                            {"Aesthetic Quality", 0.946, 0.912},     {"Temporal Consistency", 1.000, 1.000},
                            {"Object Detection", 0.800, 0.666},      {"Final Score", 1.000, 1.000}};
  Outcome o;
  const auto table = published_metric_correlations();
  for (const auto& p : rows) {
    const auto* r = table.find(p.metric);
    if (r == nullptr) {
      o.check(false, std::string(p.metric) + " missing");
      continue;
    }
    o.check(std::abs(r->spearman - p.spearman) <= 0.002,
            std::string(p.metric) + " spearman " + fmt(r->spearman, 4) + " vs " + fmt(p.spearman, 3));
    o.check(std::abs(r->kendall - p.kendall) <= 0.002,
            std::string(p.metric) + " kendall " + fmt(r->kendall, 4) + " vs " + fmt(p.kendall, 3));
  }
  return o;
}

Outcome pearson_spot_checks() {
  struct Published {
    const char* metric;
    double pearson;
    double tol;
  };
  const Published rows[] = {{"Temporal Consistency", 0.927, 0.015},
                            {"Object Detection", 0.835, 0.015},
                            {"Subject Consistency", 0.827, 0.01},
                            {"Aesthetic Quality", 0.837, 0.01},
                            {"Imaging Quality", 0.951, 0.01}};
  Outcome o;
  const auto table = published_metric_correlations();
  for (const auto& p : rows) {
    const auto* r = table.find(p.metric);
    o.check(r != nullptr && std::abs(r->pearson - p.pearson) <= p.tol,
            std::string(p.metric) + " pearson " + (r ? fmt(r->pearson, 4) : "?") + " vs " + fmt(p.pearson, 3));
  }
  return o;
}

// --- 4. stats oracles ----------------------------------------------------

Outcome stats_oracles() {
  Outcome o;
  std::size_t n_perms = 0;
  for (int n = 2; n <= 6; ++n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 0.25 + 0.9 * i;
    do {
      ++n_perms;
      std::vector<double> y(n);
      long d2 = 0, c = 0, d = 0;
      for (int i = 0; i < n; ++i) {
        y[i] = 10.0 - std::sqrt(1.0 + perm[i]);  // reverses the permutation's order
        const long di = (n - 1 - perm[i]) - i;
        d2 += di * di;
      }
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double s = (x[i] - x[j]) * (y[i] - y[j]);
          c += s > 0;
          d += s < 0;
        }
      }
      const long denom = static_cast<long>(n) * (n * n - 1);
      const double closed = static_cast<double>(denom - 6 * d2) / static_cast<double>(denom);
      const double brute = static_cast<double>(c - d) / static_cast<double>(n * (n - 1) / 2);
      const double rho = stats::spearman(x, y);
      const double tau = stats::kendall_tau_b(x, y);
      if (rho != closed) o.check(false, "spearman n=" + std::to_string(n) + " " + fmt(rho, 17) + " vs " + fmt(closed, 17));
      if (tau != brute) o.check(false, "kendall n=" + std::to_string(n) + " " + fmt(tau, 17) + " vs " + fmt(brute, 17));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + t % 30;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * x[i] + g(rng);
    }
    const double r = stats::pearson(x, y);
    worst = std::max(worst, std::abs(stats::r_squared(x, y) - r * r));
  }
  o.check(worst <= 1e-12, "r_squared vs pearson^2 max diff " + std::to_string(worst));
  o.notes.insert(o.notes.begin(), std::to_string(n_perms) + " permutations, r2 max diff " + std::to_string(worst));
  return o;
}

// --- 5. stage score properties ------------------------------------------

Outcome stage_properties() {
  Outcome o;
  MockFrameEmbedder fe(3);
  const auto still = synth::noise_image(12, 9, 5);
  const double temporal = temporal_score(synth::make_sequence("still", std::vector<RgbImage>(8, still)), fe);
  o.check(temporal == 1.0, "identical frames temporal " + fmt(temporal, 17));

  const std::string prompt = "turn the silver jeep into a red car";
  std::vector<RgbImage> frames;
  std::map<std::string, std::string> captions;
  for (int i = 0; i < 4; ++i) {
    frames.push_back(synth::noise_image(12, 9, 100 + i));
    captions[hash_image(frames.back())] = prompt;
  }
  MockCaptioner cap(captions);
  MockTextEmbedder text(0);
  const double semantic = semantic_score(synth::make_sequence("cap", frames), prompt, cap, text);
  o.check(semantic == 1.0, "caption-equals-prompt semantic " + fmt(semantic, 17));

  std::map<std::string, std::vector<Detection>> dets;
  const double conf[] = {0.8, 0.6, 0.7};
  for (int i = 0; i < 3; ++i) dets[hash_image(frames[i])] = {Detection{"", conf[i], {}}};
  MockDetector det(0, false, dets);
  MockObjectExtractor ext;
  const double object =
      object_score(synth::make_sequence("obj", {frames[0], frames[1], frames[2]}), prompt, ext, det);
  o.check(object == 0.7, "object score " + fmt(object, 17));

  std::mt19937_64 rng(1000);
  const char* prompts[] = {"turn the cat into a tiger", "make the sky purple", "replace the car with a horse"};
  int out_of_range = 0;
  for (int v = 0; v < 1000; ++v) {
    BackendSet b;
    const auto seed = rng() % 7;
    b.captioner = std::make_unique<MockCaptioner>();
    b.text_embedder = std::make_unique<MockTextEmbedder>(seed);
    b.object_extractor = std::make_unique<MockObjectExtractor>();
    b.detector = std::make_unique<MockDetector>(seed, true);
    b.frame_embedder = std::make_unique<MockFrameEmbedder>(seed);
    std::vector<RgbImage> imgs;
    const int n = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) imgs.push_back(synth::noise_image(6, 5, rng()));
    const auto s = score_frames(synth::make_sequence("r", imgs), prompts[v % 3], b);
    for (double x : {s.s_similarity, s.s_object, s.s_temporal}) out_of_range += (x < 0.0 || x > 1.0);
  }
  o.check(out_of_range == 0, std::to_string(out_of_range) + " scores outside [0, 1] over 1000 videos");
  return o;
}

// --- 6. exact recovery ---------------------------------------------------

Outcome exact_recovery() {
  Outcome o;
  const WeightVector truth{0.361, 0.138, 0.501, 0.0, TemporalForm::kDirect};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FitRow> rows;
  for (int i = 0; i < 40; ++i) {
    StageScores s{"v" + std::to_string(i), u(rng), u(rng), u(rng), 8};
    rows.push_back({s, aggregate(s, truth)});
  }
  const auto fit = fit_weights(rows, FitMethod::kOls, TemporalForm::kDirect);
  const double err = std::max({std::abs(fit.weights.w1 - truth.w1), std::abs(fit.weights.w2 - truth.w2),
                               std::abs(fit.weights.w3 - truth.w3)});
  o.check(err <= 1e-9, "weight error " + std::to_string(err));
  o.check(fit.loss <= 1e-18, "loss " + std::to_string(fit.loss));

  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const WeightVector w{u(rng) - 0.5, u(rng), u(rng) * 2, 0.0, t % 2 ? TemporalForm::kDirect : TemporalForm::kPenalty};
    long double sum = 0;
    for (auto& r : rows) {
      const long double term = w.temporal_form == TemporalForm::kDirect ? r.scores.s_temporal : 1.0L - r.scores.s_temporal;
      const long double d = w.w1 * static_cast<long double>(r.scores.s_similarity) +
                            w.w2 * static_cast<long double>(r.scores.s_object) + w.w3 * term - (r.human + 0.1);
      sum += d * d;
    }
    auto shifted = rows;
    for (auto& r : shifted) r.human += 0.1;
    worst = std::max(worst, std::abs(evaluate_loss(shifted, w) - static_cast<double>(sum / rows.size())));
  }
  o.check(worst <= 1e-12, "loss oracle max diff " + std::to_string(worst));
  o.notes.insert(o.notes.begin(), "weight err " + std::to_string(err) + ", loss " + std::to_string(fit.loss) +
                                      ", loss oracle diff " + std::to_string(worst));
  return o;
}

// --- 7. end-to-end determinism ------------------------------------------

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome end_to_end_determinism() {
  Outcome o;
  synth::TempDir tmp;
  const auto manifest = synth::write_synthetic_dataset(tmp / "data", 4, 6);
  write_file_atomic(tmp / "human.csv", "video_id,mean_normalized\nvid0,0.41\nvid1,0.55\nvid2,0.47\nvid3,0.62\n");
  const std::string cli = SSTEM_CLI_PATH;
  for (const char* run : {"run1", "run2"}) {
    const auto dir = tmp / run;
    fs::create_directories(dir);
    const std::string quiet = " >/dev/null 2>" + q(dir / "stderr.txt");
    const int a = synth::run_command(q(cli) + " score --manifest " + q(manifest) + " --seed 11 --workers 2 --out " +
                                       q(dir / "scores.csv") + quiet);
    const int b = synth::run_command(q(cli) + " fit --scores " + q(dir / "scores.csv") + " --human " +
                                       q(tmp / "human.csv") + " --method simplex --out " + q(dir / "weights.json") +
                                       quiet);
    const int c = synth::run_command(q(cli) + " report --scores " + q(dir / "scores.csv") + " --weights " +
                                       q(dir / "weights.json") + " --human " + q(tmp / "human.csv") + " --out " +
                                       q(dir / "report") + quiet);
    o.check(a == 0 && b == 0 && c == 0, std::string(run) + " exit codes " + std::to_string(a) + "/" +
                                            std::to_string(b) + "/" + std::to_string(c));
  }
  if (!o.pass) return o;

  auto strip_generated_at = [](const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
      if (line.find("generated_at") == std::string::npos && line.find("Generated") == std::string::npos) {
        out += line + "\n";
      }
    }
    return out;
  };
  for (const char* f : {"scores.csv", "scores.csv.config.json", "weights.json"}) {
    o.check(read_file(tmp / "run1" / f) == read_file(tmp / "run2" / f), std::string(f) + " differs");
  }
  for (const char* f : {"report.md", "report.json", "report.csv"}) {
    o.check(strip_generated_at(read_file(tmp / "run1" / "report" / f)) ==
                strip_generated_at(read_file(tmp / "run2" / "report" / f)),
            std::string(f) + " differs");
  }
  o.check(parse_scores_csv(read_file(tmp / "run1" / "scores.csv")).size() == 4, "expected 4 scored videos");
  return o;
}

// --- 8. rating aggregation ----------------------------------------------

Outcome rating_aggregation() {
  Outcome o;
  synth::TempDir tmp;
  DatasetManifest m;
  m.dataset_id = "ratings";
  for (int i = 0; i < 5; ++i) {
    const auto id = "v" + std::to_string(i);
    m.videos.push_back({id, id + "/o", id + "/e", "make the car red", "model"});
    m.split[id] = SplitRole::kOptimization;
  }
  rating::RatingStore store(tmp.path());
  rating::RatingService svc(m, store, [] { return std::string("2026-01-01T00:00:00Z"); });

  svc.submit_rating("alice", "v0", {4, 4, 4});
  svc.submit_rating("bob", "v0", {5, 5, 5});
  auto agg = svc.aggregates();
  o.check(agg.size() == 1 && agg[0].mean_normalized == 0.45 && agg[0].n_raters == 2,
          "two raters at 0.4 and 0.5 gave " + (agg.empty() ? std::string("nothing") : fmt(agg[0].mean_normalized, 17)));

  svc.submit_rating("bob", "v0", {6, 6, 6});
  agg = svc.aggregates();
  o.check(agg.size() == 1 && agg[0].n_raters == 2 && agg[0].mean_normalized == 0.5,
          "resubmission did not replace the earlier rating");

  const int axes[][3] = {{3, 8, 9}, {7, 7, 2}, {10, 9, 9}, {1, 4, 6}};
  for (int i = 1; i < 5; ++i) {
    for (int r = 0; r < 3; ++r) {
      svc.submit_rating("rater" + std::to_string(r), m.videos[i].video_id,
                        {axes[(i + r) % 4][0], axes[(i + r) % 4][1], axes[(i + r) % 4][2]});
    }
  }
  const auto direct = svc.human_scores();
  const auto exported = parse_human_csv(svc.export_human_scores());
  bool same = exported.size() == direct.size();
  for (std::size_t i = 0; same && i < direct.size(); ++i) {
    same = exported[i].video_id == direct[i].video_id &&
           std::abs(exported[i].mean_normalized - direct[i].mean_normalized) <= 1e-12;
  }
  o.check(same, "exported human scores differ from service aggregates");

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoreRow> scores;
  for (const auto& v : m.videos) scores.push_back({{v.video_id, u(rng), u(rng), u(rng), 4}, "model", 1});
  auto rows_from = [&](const std::vector<HumanScore>& human) {
    std::vector<FitRow> rows;
    for (const auto& s : scores) {
      for (const auto& h : human) {
        if (h.video_id == s.scores.video_id) rows.push_back({s.scores, h.mean_normalized});
      }
    }
    return rows;
  };
  write_file_atomic(tmp / "human.csv", svc.export_human_scores());
  const auto via_file = rows_from(parse_human_csv(read_file(tmp / "human.csv")));
  const auto via_memory = rows_from(direct);
  const auto fa = fit_weights(via_file, FitMethod::kOls, TemporalForm::kDirect);
  const auto fb = fit_weights(via_memory, FitMethod::kOls, TemporalForm::kDirect);
  const double diff = std::max({std::abs(fa.weights.w1 - fb.weights.w1), std::abs(fa.weights.w2 - fb.weights.w2),
                                std::abs(fa.weights.w3 - fb.weights.w3), std::abs(fa.loss - fb.loss)});
  o.check(via_file.size() == 5 && diff <= 1e-12, "export -> fit round trip diff " + std::to_string(diff));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"AC1", "weight reconstruction from published component scores", weight_reconstruction},
      {"AC2", "rank correlations against published values", rank_correlations},
      {"AC3", "Pearson spot checks against published values", pearson_spot_checks},
      {"AC4", "stats oracle suite", stats_oracles},
      {"AC5", "stage score properties", stage_properties},
      {"AC6", "exact weight recovery and loss oracle", exact_recovery},
      {"AC7", "end-to-end CLI determinism", end_to_end_determinism},
      {"AC8", "rating aggregation and export round trip", rating_aggregation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s %s  %s%s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, detail.empty() ? "" : "  -- ",
                detail.c_str());
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
