#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specsense/common.hpp"
#include "specsense/detect.hpp"
#include "specsense/eval/roc.hpp"
#include "specsense/ml/gmm.hpp"
#include "specsense/ml/knn.hpp"
#include "specsense/ml/svm.hpp"
#include "specsense/model_io.hpp"
#include "specsense/nn/train.hpp"
#include "specsense/spectrogram.hpp"
#include "specsense/synth.hpp"

namespace specsense::pipeline {

enum class DetectorKind { Ed, SiEd, Knn, Svm, Gmm, Cnn3, Lstm };

inline DetectorKind parse_detector(const std::string& s) {
  static const std::map<std::string, DetectorKind> names = {
      {"ed", DetectorKind::Ed},   {"si-ed", DetectorKind::SiEd}, {"knn", DetectorKind::Knn},  {"svm", DetectorKind::Svm},
      {"gmm", DetectorKind::Gmm}, {"cnn3", DetectorKind::Cnn3},  {"lstm", DetectorKind::Lstm}};
  const auto it = names.find(s);
  if (it == names.end()) throw Error(Errc::InvalidArgument, "unknown detector: " + s);
  return it->second;
}

inline const char* to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::Ed: return "ed";
    case DetectorKind::SiEd: return "si-ed";
    case DetectorKind::Knn: return "knn";
    case DetectorKind::Svm: return "svm";
    case DetectorKind::Gmm: return "gmm";
    case DetectorKind::Cnn3: return "cnn3";
    case DetectorKind::Lstm: return "lstm";
  }
  return "?";
}

inline bool needs_training(DetectorKind k) { return k != DetectorKind::Ed && k != DetectorKind::SiEd; }
inline bool uses_features(DetectorKind k) {
  return k == DetectorKind::Knn || k == DetectorKind::Svm || k == DetectorKind::Gmm;
}

struct TrainOptions {
  FeatureMode features = FeatureMode::Full6164;
  std::uint64_t seed = 0;
  nn::TrainConfig nn;
  std::size_t knn_k = 9;
  ml::Kernel svm_kernel;
  ml::SvmOptions svm;
  ml::GmmOptions gmm;
  std::size_t lstm_hidden = 64;
  bool lstm_residual = true;
};

inline Matrix<double> feature_matrix(std::span<const ChannelSlice> slices, FeatureMode mode) {
  Matrix<double> m(slices.size(), feature_length(mode));
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const FeatureVector fv = preprocess_channel(slices[i], mode);
    std::copy(fv.values.begin(), fv.values.end(), m.row(i).begin());
  }
  return m;
}

inline io::StoredModel train_detector(DetectorKind kind, std::span<const ChannelSlice> slices,
                                      const std::vector<int>& labels, const TrainOptions& opt) {
  io::StoredModel sm;
  sm.detector = to_string(kind);
  sm.features = opt.features;
  nn::TrainConfig cfg = opt.nn;
  cfg.seed = opt.seed;
  switch (kind) {
    case DetectorKind::Knn: sm.model = ml::knn_fit(feature_matrix(slices, opt.features), labels, opt.knn_k); break;
    case DetectorKind::Svm:
      sm.model = ml::svm_fit(feature_matrix(slices, opt.features), labels, opt.svm_kernel, opt.svm);
      break;
    case DetectorKind::Gmm: sm.model = ml::gmm_fit(feature_matrix(slices, opt.features), labels, opt.seed, opt.gmm); break;
    case DetectorKind::Cnn3: sm.model = nn::train_cnn3(slices, labels, cfg).net; break;
    case DetectorKind::Lstm: sm.model = nn::train_lstm(slices, labels, cfg, opt.lstm_hidden, opt.lstm_residual).net; break;
    default: throw Error(Errc::InvalidArgument, std::string(to_string(kind)) + " has no trainable parameters");
  }
  return sm;
}

using Scorer = std::function<double(const ChannelSlice&)>;

/// Ranking score for an untrained detector (ed, si-ed).
inline Scorer make_scorer(DetectorKind kind) {
  if (kind == DetectorKind::Ed) return [](const ChannelSlice& ch) { return detect::energy_detect_score(ch); };
  if (kind == DetectorKind::SiEd) return [](const ChannelSlice& ch) { return detect::si_energy_detect_score(ch); };
  throw Error(Errc::InvalidArgument, std::string(to_string(kind)) + " needs a trained model");
}

/// Ranking score for a trained model. Networks score by their logit, which
/// orders channels exactly as the output probability but does not saturate.
inline Scorer make_scorer(const io::StoredModel& sm) {
  const FeatureMode mode = sm.features;
  return std::visit(
      [mode](const auto& m) -> Scorer {
        using M = std::decay_t<decltype(m)>;
        auto model = std::make_shared<const M>(m);
        if constexpr (std::is_same_v<M, ml::KnnModel>) {
          return [model, mode](const ChannelSlice& ch) { return ml::knn_score(*model, preprocess_channel(ch, mode).values); };
        } else if constexpr (std::is_same_v<M, ml::SvmModel>) {
          return [model, mode](const ChannelSlice& ch) { return ml::svm_score(*model, preprocess_channel(ch, mode).values); };
        } else if constexpr (std::is_same_v<M, ml::GmmModel>) {
          return [model, mode](const ChannelSlice& ch) { return ml::gmm_score(*model, preprocess_channel(ch, mode).values); };
        } else {
          auto ws = std::make_shared<typename M::Workspace>();
          return [model, ws](const ChannelSlice& ch) { return model->forward(M::prepare(ch), *ws); };
        }
      },
      sm.model);
}

// ---------------------------------------------------------------------------
// Split files: which cases form the test set and which channels train.

struct SplitFile {
  std::uint64_t seed = 0;
  std::vector<std::size_t> test;          // case indices
  std::vector<synth::ChannelRef> train;   // training channels
};

inline void write_split(const std::filesystem::path& p, const SplitFile& s) {
  nlohmann::json j;
  j["format"] = "specsense-split";
  j["version"] = 1;
  j["seed"] = s.seed;
  j["test"] = s.test;
  j["train"] = nlohmann::json::array();
  for (const auto& r : s.train) j["train"].push_back({r.case_index, r.channel_index, r.label ? 1 : 0});
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error(Errc::IoFailure, "cannot write " + p.string());
  os << j.dump(1) << '\n';
}

inline SplitFile read_split(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw Error(Errc::IoFailure, "cannot read " + p.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::FormatError, std::string("split parse: ") + e.what());
  }
  if (j.value("format", "") != "specsense-split" || j.value("version", 0) != 1)
    throw Error(Errc::FormatError, "not a version-1 split file");
  SplitFile s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
  for (const auto& r : j.at("train"))
    s.train.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>(), r.at(2).get<int>() != 0});
  return s;
}

/// Loads the referenced channels, reading each spectrogram once.
inline std::vector<ChannelSlice> load_channels(const synth::Dataset& ds, const std::vector<synth::ChannelRef>& refs) {
  std::map<std::size_t, std::vector<std::size_t>> by_case;
  for (std::size_t k = 0; k < refs.size(); ++k) by_case[refs[k].case_index].push_back(k);
  std::vector<ChannelSlice> out(refs.size());
  for (const auto& [ci, ks] : by_case) {
    const Spectrogram sg = ds.load(ci);
    const auto& lc = ds.entries().at(ci).label;
    for (std::size_t k : ks) out[k] = extract_channel(sg, lc.channel_centers.at(refs[k].channel_index), lc.id);
  }
  return out;
}

/// Scores every channel of the listed cases, in case order then channel order.
inline std::vector<eval::ScoredChannel> score_cases(const synth::Dataset& ds, const std::vector<std::size_t>& cases,
                                                    const Scorer& score) {
  std::vector<eval::ScoredChannel> out;
  for (std::size_t ci : cases) {
    const Spectrogram sg = ds.load(ci);
    const auto& lc = ds.entries().at(ci).label;
    for (std::size_t k = 0; k < lc.channel_centers.size(); ++k) {
      const ChannelSlice ch = extract_channel(sg, lc.channel_centers[k], lc.id);
      out.push_back({lc.id, lc.channel_centers[k], score(ch), lc.channel_labels[k]});
    }
  }
  return out;
}

}  // namespace specsense::pipeline
