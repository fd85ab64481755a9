#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specsense/eval/froc.hpp"
#include "specsense/eval/roc.hpp"
#include "specsense/eval/table.hpp"
#include "specsense/eval/threshold.hpp"
#include "specsense/eval/timing.hpp"
#include "specsense/nn/train.hpp"
#include "specsense/pipeline.hpp"
#include "specsense/plot.hpp"
#include "specsense/stats/density.hpp"
#include "specsense/stats/occupancy.hpp"
#include "specsense/stats/survey.hpp"
#include "specsense/stats/tables.hpp"
#include "specsense/synth.hpp"

namespace specsense::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;
  std::string dataset, model, detector, features = "full", out, split, scores, calibration, table, kind;
  std::optional<double> threshold_fpr, threshold_tpr, threshold;
  std::size_t bootstrap = 0;
  std::size_t n = 64;
  double multi_fraction = 0.2;
  std::optional<double> oobe_lo, oobe_hi, oobe_rate;
  std::size_t test_size = 500;
  std::string plan = "set-a";
  std::size_t train_channels = 4285;
  std::size_t epochs = 1000;
  std::string optimizer = "sgd";
  double lr = 1e-4;
  double dropout = 0.5;
  std::size_t knn_k = 9;
  double svm_c = 1.0;
  std::string kernel = "linear";
  std::size_t hidden = 64;
  std::size_t draws = 20;
  std::size_t reps = 100000;
  double alpha = 0.05;
  double gray_lo = -90.0, gray_hi = -50.0;
  std::size_t case_index = 0;
};

inline std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string mhz_tag(double hz) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f", hz / 1e6);
  return buf;
}

inline void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required option ") + flag);
}

inline void write_table_file(const fs::path& p, const eval::NumericTable& t) {
  auto os = eval::open_out(p);
  eval::write_table(os, t);
  if (!os) throw Error(Errc::IoFailure, "cannot write " + p.string());
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_synth(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  synth::SceneDistribution dist;
  if (o.oobe_lo) dist.oobe_power_lo_dbm = *o.oobe_lo;
  if (o.oobe_hi) dist.oobe_power_hi_dbm = *o.oobe_hi;
  if (o.oobe_rate) dist.oobe_streak_rate_per_min = *o.oobe_rate;
  const auto sum = synth::generate_dataset(o.out, o.n, dist, o.seed, o.multi_fraction);
  out << "wrote " << sum.cases << " spectrograms (" << sum.positive_channels << " present, " << sum.negative_channels
      << " absent channels) to " << o.out << '\n';
  return kExitOk;
}

inline int cmd_split(const Options& o, std::ostream& out) {
  require(o.dataset, "--dataset");
  require(o.out, "--out");
  const auto ds = synth::Dataset::open(o.dataset);
  const auto labels = ds.labels();
  synth::StrataPlan plan;
  if (o.plan == "set-a") plan = synth::StrataPlan::table_set_a();
  else if (o.plan == "set-b") plan = synth::StrataPlan::table_set_b();
  else throw UsageError("--plan must be set-a or set-b");
  const std::size_t total = std::min(o.test_size, labels.size());
  plan.multi_quota = static_cast<std::size_t>(
      std::lround(static_cast<double>(plan.multi_quota) * static_cast<double>(total) / static_cast<double>(plan.total)));
  plan.total = total;
  plan.best_effort = true;
  const auto split = synth::stratified_split(labels, plan, o.seed);
  pipeline::SplitFile sf;
  sf.seed = o.seed;
  sf.test = split.test;
  sf.train = synth::balanced_channel_sample(labels, split.train_pool, o.train_channels, mix_seed(o.seed, 1));
  pipeline::write_split(o.out, sf);
  out << "test spectrograms " << sf.test.size() << ", training channels " << sf.train.size() << '\n';
  return kExitOk;
}

inline pipeline::TrainOptions train_options(const Options& o) {
  pipeline::TrainOptions t;
  t.features = io::parse_feature_mode(o.features);
  t.seed = o.seed;
  t.nn.epochs = o.epochs;
  t.nn.optimizer = nn::parse_optimizer(o.optimizer);
  t.nn.learning_rate = o.lr;
  t.nn.dropout_p = o.dropout;
  t.knn_k = o.knn_k;
  t.svm.C = o.svm_c;
  t.svm_kernel.kind = io::parse_kernel(o.kernel);
  t.lstm_hidden = o.hidden;
  return t;
}

inline int cmd_train(const Options& o, std::ostream& out) {
  require(o.dataset, "--dataset");
  require(o.split, "--split");
  require(o.detector, "--detector");
  require(o.model, "--model");
  const auto kind = pipeline::parse_detector(o.detector);
  if (!pipeline::needs_training(kind)) throw UsageError(o.detector + " has no trainable parameters");
  const auto ds = synth::Dataset::open(o.dataset);
  const auto sf = pipeline::read_split(o.split);
  const auto slices = pipeline::load_channels(ds, sf.train);
  std::vector<int> labels;
  for (const auto& r : sf.train) labels.push_back(r.label ? 1 : 0);
  const auto sm = pipeline::train_detector(kind, slices, labels, train_options(o));
  io::save_model(o.model, sm);
  out << "trained " << o.detector << " on " << slices.size() << " channels -> " << o.model << '\n';
  return kExitOk;
}

inline pipeline::Scorer scorer_for(const Options& o) {
  if (!o.model.empty()) return pipeline::make_scorer(io::load_model(o.model));
  require(o.detector, "--detector or --model");
  const auto kind = pipeline::parse_detector(o.detector);
  if (pipeline::needs_training(kind)) throw UsageError(o.detector + " needs --model");
  return pipeline::make_scorer(kind);
}

inline std::vector<std::size_t> case_list(const synth::Dataset& ds, const Options& o) {
  if (!o.split.empty()) return pipeline::read_split(o.split).test;
  std::vector<std::size_t> all(ds.entries().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

inline int cmd_score(const Options& o, std::ostream& out) {
  require(o.dataset, "--dataset");
  require(o.out, "--out");
  const auto ds = synth::Dataset::open(o.dataset);
  const auto scored = pipeline::score_cases(ds, case_list(ds, o), scorer_for(o));
  eval::write_scores(fs::path(o.out), scored);
  out << "scored " << scored.size() << " channels -> " << o.out << '\n';
  return kExitOk;
}

inline int cmd_eval_roc(const Options& o, std::ostream& out) {
  require(o.scores, "--scores");
  const auto scored = eval::read_scores(fs::path(o.scores));
  const auto s = eval::split_scores(scored);
  const auto roc = eval::roc_curve(s);
  eval::AucInterval ci{eval::roc_auc(s), NAN, NAN, NAN};
  if (s.pos.size() >= 2 && s.neg.size() >= 2) ci = eval::delong_ci(s, o.alpha);
  out << "AUC " << fmt3(ci.auc);
  if (std::isfinite(ci.lo)) out << " (" << fmt3(100 * (1 - o.alpha)) << "% CI " << fmt3(ci.lo) << "-" << fmt3(ci.hi) << ")";
  out << '\n';
  if (!o.out.empty()) {
    auto os = eval::open_out(fs::path(o.out) / "roc.tsv");
    eval::write_curve(os, "roc", roc.points);
    eval::NumericTable t;
    t.kind = "roc-summary";
    t.columns = {"auc", "lo", "hi", "se", "n_pos", "n_neg"};
    t.rows.push_back({ci.auc, ci.lo, ci.hi, ci.se, double(s.pos.size()), double(s.neg.size())});
    write_table_file(fs::path(o.out) / "roc-summary.tsv", t);
  }
  return kExitOk;
}

inline int cmd_eval_froc(const Options& o, std::ostream& out) {
  require(o.scores, "--scores");
  const auto scored = eval::read_scores(fs::path(o.scores));
  const auto curve = eval::froc_curve(scored);
  const double auc = eval::froc_auc_normalized(curve);
  out << "normalised FROC-AUC " << fmt3(auc);
  eval::BootstrapInterval bi{auc, NAN, NAN, {}};
  if (o.bootstrap > 0) {
    std::map<std::string, std::size_t> strata;
    if (!o.dataset.empty())
      for (const auto& lc : synth::Dataset::open(o.dataset).labels()) strata[lc.id] = synth::stratum_of(lc);
    else
      for (const auto& s : scored) strata[s.spectrogram_id] = 0;
    bi = eval::bootstrap_froc_ci(scored, strata, o.bootstrap, o.alpha, o.seed);
    out << " (bootstrap " << fmt3(100 * (1 - o.alpha)) << "% CI " << fmt3(bi.lo) << "-" << fmt3(bi.hi) << ")";
  }
  out << '\n';
  if (!o.out.empty()) {
    auto os = eval::open_out(fs::path(o.out) / "froc.tsv");
    eval::write_curve(os, "froc", curve.points);
    eval::NumericTable t;
    t.kind = "froc-summary";
    t.columns = {"auc", "lo", "hi", "replicates", "n_spectrograms", "n_present", "n_absent"};
    t.rows.push_back({auc, bi.lo, bi.hi, double(bi.replicates.size()), double(curve.n_spectrograms), double(curve.n_present),
                      double(curve.n_absent)});
    write_table_file(fs::path(o.out) / "froc-summary.tsv", t);
  }
  return kExitOk;
}

/// Survey over a dataset in capture order with a thresholded or oracle decider.
inline stats::SurveyResult run_survey(const Options& o, std::optional<eval::RateKind> default_policy,
                                      std::ostream& out) {
  require(o.dataset, "--dataset");
  const auto ds = synth::Dataset::open(o.dataset);
  std::vector<std::size_t> order(ds.entries().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.entries()[a].label.capture_index < ds.entries()[b].label.capture_index;
  });
  auto capture_at = [&](std::size_t i) {
    const auto& e = ds.entries()[order[i]];
    const Spectrogram sg = ds.load(order[i]);
    stats::SurveyCapture cap;
    cap.index = e.label.capture_index;
    for (double c : e.label.channel_centers) cap.channels.push_back(extract_channel(sg, c, e.label.id));
    cap.truth = e.label.channel_labels;
    return cap;
  };
  if (o.detector == "oracle") return stats::apply_classifier_survey(order.size(), capture_at, stats::OracleDecider{});

  const auto score = scorer_for(o);
  double threshold = 0.0;
  if (o.threshold) {
    threshold = *o.threshold;
  } else {
    std::optional<eval::RateTarget> target;
    if (o.threshold_fpr) target = eval::RateTarget{eval::RateKind::Fpr, *o.threshold_fpr};
    if (o.threshold_tpr) target = eval::RateTarget{eval::RateKind::Tpr, *o.threshold_tpr};
    if (!target) {
      if (!default_policy) throw UsageError("need --threshold, --threshold-fpr or --threshold-tpr");
      target = eval::RateTarget{*default_policy, *default_policy == eval::RateKind::Fpr ? 0.01 : 0.98};
    }
    require(o.calibration, "--calibration");
    const auto choice = eval::threshold_for_rate(eval::read_scores(fs::path(o.calibration)), *target);
    threshold = choice.threshold;
    out << "threshold " << choice.threshold << " (calibration FPR " << fmt3(choice.fpr) << ", TPR "
        << fmt3(choice.tpr) << ")\n";
  }
  return stats::apply_classifier_survey(order.size(), capture_at, stats::threshold_decider(score, threshold));
}

inline int cmd_survey_occupancy(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto res = run_survey(o, eval::RateKind::Fpr, out);
  eval::NumericTable summary;
  summary.kind = "occupancy";
  summary.columns = {"channel_mhz", "ratio", "lo", "hi", "n", "occupied_overflow", "vacant_overflow"};
  for (const auto& tl : res.timelines) {
    const auto iv = stats::occupancy_intervals(tl);
    const auto r = stats::occupancy_ratio(tl, o.alpha);
    summary.rows.push_back({tl.channel_center / 1e6, r.ratio, r.lo, r.hi, double(r.n), double(iv.occupied.overflow),
                            double(iv.vacant.overflow)});
    const std::string tag = mhz_tag(tl.channel_center);
    write_table_file(fs::path(o.out) / "hist" / (tag + "-occupied.tsv"),
                     stats::histogram_table(iv.occupied, "occupied-runs"));
    write_table_file(fs::path(o.out) / "hist" / (tag + "-vacant.tsv"), stats::histogram_table(iv.vacant, "vacant-runs"));
    out << tag << " MHz occupancy " << fmt3(r.ratio) << " [" << fmt3(r.lo) << ", " << fmt3(r.hi) << "]\n";
  }
  write_table_file(fs::path(o.out) / "occupancy.tsv", summary);
  return kExitOk;
}

inline int cmd_survey_ccdf(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto res = run_survey(o, eval::RateKind::Tpr, out);
  for (std::size_t k = 0; k < res.timelines.size(); ++k) {
    if (res.absent_power[k].empty()) continue;
    const auto band = stats::empirical_ccdf_with_dkw(res.absent_power[k], o.alpha);
    write_table_file(fs::path(o.out) / "ccdf" / (mhz_tag(res.timelines[k].channel_center) + ".tsv"),
                     stats::ccdf_table(band));
  }
  const auto pooled = res.pooled_absent_power();
  if (pooled.empty()) throw Error(Errc::InvalidArgument, "every channel was declared present");
  const auto band = stats::empirical_ccdf_with_dkw(pooled, o.alpha);
  write_table_file(fs::path(o.out) / "ccdf" / "all.tsv", stats::ccdf_table(band));
  out << "absent-channel samples " << pooled.size() << ", DKW eps " << band.eps << '\n';
  if (res.true_present > 0)
    out << "present channels excluded " << res.true_present_excluded << " of " << res.true_present << '\n';
  return kExitOk;
}

inline int cmd_gradcheck(const Options& o, std::ostream& out) {
  const std::string det = o.detector.empty() ? "cnn3" : o.detector;
  if (det != "cnn3" && det != "lstm") throw UsageError("gradcheck supports cnn3 and lstm");
  double worst = 0.0;
  for (std::size_t d = 0; d < o.draws; ++d) {
    std::mt19937_64 rng(mix_seed(o.seed, d));
    std::normal_distribution<double> g(0.0, 1.0);
    nn::GradCheckResult r;
    if (det == "cnn3") {
      const auto net = nn::init_cnn3(mix_seed(o.seed, 100 + d));
      Matrix<double> x(nn::Cnn3::kInH, nn::Cnn3::kInW);
      for (double& v : x.data()) v = g(rng);
      r = nn::grad_check(net, x, static_cast<int>(d % 2));
    } else {
      const auto net = nn::init_lstm(mix_seed(o.seed, 100 + d), o.hidden);
      Matrix<double> x(kChannelRows, kChannelCols);
      for (double& v : x.data()) v = g(rng);
      r = nn::grad_check(net, x, static_cast<int>(d % 2));
    }
    worst = std::max(worst, r.max_rel_error);
    out << "draw " << d << " max_rel_error " << r.max_rel_error << " checked " << r.n_checked << " kink_skipped "
        << r.n_kink_skipped << '\n';
  }
  out << "worst " << worst << (worst < 1e-3 ? " PASS" : " FAIL") << '\n';
  return worst < 1e-3 ? kExitOk : kExitDomain;
}

inline int cmd_bench(const Options& o, std::ostream& out) {
  synth::SceneSpec spec;
  synth::Spn43Emitter e;
  e.center_freq = 3600e6;
  e.peak_dbm = spec.noise_floor_dbm + 12.0;
  spec.spn43.push_back(e);
  const auto [sg, lc] = synth::generate_scene(spec, o.seed);
  const ChannelSlice ch = extract_channel(sg, 3600e6, lc.id);
  const auto score = scorer_for(o);
  const double ms = eval::time_detector([&](const ChannelSlice& c) { return score(c); }, ch, o.reps);
  out << (o.model.empty() ? o.detector : o.model) << " mean " << ms << " ms/sample over " << o.reps << " reps\n";
  return kExitOk;
}

inline int cmd_plot(const Options& o, std::ostream& out) {
  require(o.kind, "--kind");
  require(o.out, "--out");
  const auto kind = plot::parse_plot_kind(o.kind);
  eval::NumericTable t;
  if (kind == plot::PlotKind::SpectrogramImage && o.table.empty()) {
    require(o.dataset, "--dataset or --table");
    t = plot::spectrogram_table(synth::Dataset::open(o.dataset).load(o.case_index).values);
  } else {
    require(o.table, "--table");
    auto is = eval::open_in(o.table);
    t = eval::read_table(is);
  }
  const auto files = plot::emit_plot(t, kind, o.out, {o.gray_lo, o.gray_hi});
  out << "wrote " << files.svg.string() << " and " << files.table.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Options o;
  if (const char* env = std::getenv("SPECSENSE_SEED")) o.seed = std::strtoull(env, nullptr, 10);

  CLI::App app{"specsense: SPN-43 detection in 3.5 GHz spectrograms"};
  app.require_subcommand(1);
  auto seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "random seed (default $SPECSENSE_SEED or 0)"); };
  auto detector = [&](CLI::App* c) {
    c->add_option("--detector", o.detector, "ed, si-ed, knn, svm, gmm, cnn3, lstm");
    c->add_option("--model", o.model, "trained model file");
  };
  auto threshold = [&](CLI::App* c) {
    auto* f = c->add_option("--threshold-fpr", o.threshold_fpr, "threshold at this calibration FPR");
    auto* t = c->add_option("--threshold-tpr", o.threshold_tpr, "threshold at this calibration TPR");
    auto* v = c->add_option("--threshold", o.threshold, "explicit score threshold");
    f->excludes(t)->excludes(v);
    t->excludes(v);
    c->add_option("--calibration", o.calibration, "labelled scores file used to pick the threshold");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled dataset");
  seed(synth);
  synth->add_option("--out", o.out, "output directory");
  synth->add_option("--n", o.n, "number of spectrograms");
  synth->add_option("--multi-fraction", o.multi_fraction, "fraction of SPN-43 scenes with two carriers");
  synth->add_option("--oobe-lo", o.oobe_lo, "OOBE streak power lower bound, dBm");
  synth->add_option("--oobe-hi", o.oobe_hi, "OOBE streak power upper bound, dBm");
  synth->add_option("--oobe-rate", o.oobe_rate, "OOBE streaks per minute");

  auto* split = app.add_subcommand("split", "stratified test split and balanced training channels");
  seed(split);
  split->add_option("--dataset", o.dataset, "dataset directory");
  split->add_option("--out", o.out, "split file");
  split->add_option("--test-size", o.test_size, "test spectrograms");
  split->add_option("--plan", o.plan, "stratum proportions: set-a or set-b");
  split->add_option("--train-channels", o.train_channels, "training channels");

  auto* train = app.add_subcommand("train", "train a detector");
  seed(train);
  detector(train);
  train->add_option("--dataset", o.dataset, "dataset directory");
  train->add_option("--split", o.split, "split file");
  train->add_option("--features", o.features, "full, timeagg or center2");
  train->add_option("--epochs", o.epochs, "network epochs");
  train->add_option("--optimizer", o.optimizer, "sgd, adagrad or adam");
  train->add_option("--lr", o.lr, "learning rate");
  train->add_option("--dropout", o.dropout, "dropout probability");
  train->add_option("--k", o.knn_k, "KNN neighbours");
  train->add_option("--C", o.svm_c, "SVM box constraint");
  train->add_option("--kernel", o.kernel, "SVM kernel: linear, rbf, poly, sigmoid");
  train->add_option("--hidden", o.hidden, "LSTM hidden size");

  auto* score = app.add_subcommand("score", "score every channel of the test spectrograms");
  seed(score);
  detector(score);
  score->add_option("--dataset", o.dataset, "dataset directory");
  score->add_option("--split", o.split, "split file (default: all spectrograms)");
  score->add_option("--out", o.out, "scores file");

  auto* roc = app.add_subcommand("eval-roc", "ROC curve, AUC and DeLong interval");
  roc->add_option("--scores", o.scores, "scores file");
  roc->add_option("--out", o.out, "output directory");
  roc->add_option("--alpha", o.alpha, "1 - confidence level");

  auto* froc = app.add_subcommand("eval-froc", "FROC curve and normalised area with bootstrap interval");
  seed(froc);
  froc->add_option("--scores", o.scores, "scores file");
  froc->add_option("--dataset", o.dataset, "dataset whose strata guide the bootstrap");
  froc->add_option("--bootstrap", o.bootstrap, "bootstrap replicates (0: none)");
  froc->add_option("--out", o.out, "output directory");
  froc->add_option("--alpha", o.alpha, "1 - confidence level");

  auto* occ = app.add_subcommand("survey-occupancy", "occupancy run lengths and ratios per channel");
  detector(occ);
  threshold(occ);
  occ->add_option("--dataset", o.dataset, "survey dataset");
  occ->add_option("--out", o.out, "output directory");
  occ->add_option("--alpha", o.alpha, "1 - confidence level");

  auto* ccdf = app.add_subcommand("survey-ccdf", "power-density CCDF of SPN-43-absent channels");
  detector(ccdf);
  threshold(ccdf);
  ccdf->add_option("--dataset", o.dataset, "survey dataset");
  ccdf->add_option("--out", o.out, "output directory");
  ccdf->add_option("--alpha", o.alpha, "1 - confidence level");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of network gradients");
  seed(gc);
  gc->add_option("--detector", o.detector, "cnn3 or lstm");
  gc->add_option("--draws", o.draws, "random draws");
  gc->add_option("--hidden", o.hidden, "LSTM hidden size");

  auto* bench = app.add_subcommand("bench", "mean single-channel inference time");
  seed(bench);
  detector(bench);
  bench->add_option("--reps", o.reps, "timed repetitions");

  auto* pl = app.add_subcommand("plot", "render a result table as SVG");
  pl->add_option("--table", o.table, "input table");
  pl->add_option("--kind", o.kind, "roc, froc, hist, ccdf, spectrogram-image");
  pl->add_option("--out", o.out, "output path stem");
  pl->add_option("--dataset", o.dataset, "dataset for spectrogram-image");
  pl->add_option("--case", o.case_index, "spectrogram index for spectrogram-image");
  pl->add_option("--gray-lo", o.gray_lo, "black level, dBm");
  pl->add_option("--gray-hi", o.gray_hi, "white level, dBm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    if (split->parsed()) return cmd_split(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (roc->parsed()) return cmd_eval_roc(o, out);
    if (froc->parsed()) return cmd_eval_froc(o, out);
    if (occ->parsed()) return cmd_survey_occupancy(o, out);
    if (ccdf->parsed()) return cmd_survey_ccdf(o, out);
    if (gc->parsed()) return cmd_gradcheck(o, out);
    if (bench->parsed()) return cmd_bench(o, out);
    if (pl->parsed()) return cmd_plot(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace specsense::cli
