#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/ml/gmm.hpp"
#include "specsense/ml/knn.hpp"
#include "specsense/ml/svm.hpp"
#include "specsense/nn/cnn3.hpp"
#include "specsense/nn/lstm.hpp"
#include "specsense/spectrogram.hpp"

namespace specsense::io {

// Binary layout (all integers and doubles little-endian):
//   "SPSMODEL" u32 version u32 n_entries
//   per entry: u32 name_len, name, u8 dtype (0 = f64, 1 = text), u32 rank, u64 dims[rank], payload
// Text entries are rank 1 with one byte per element.

inline constexpr char kMagic[8] = {'S', 'P', 'S', 'M', 'O', 'D', 'E', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

struct Entry {
  std::vector<std::uint64_t> shape;
  std::vector<double> values;
  std::string text;
  bool is_text = false;
};

class TensorArchive {
 public:
  void put(const std::string& name, std::vector<std::uint64_t> shape, std::vector<double> values) {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    if (n != values.size()) throw Error(Errc::ShapeMismatch, "tensor " + name + " size differs from its shape");
    entries_[name] = Entry{std::move(shape), std::move(values), {}, false};
  }
  void put(const std::string& name, const std::vector<double>& values) { put(name, {values.size()}, values); }
  void put_scalar(const std::string& name, double v) { put(name, {}, {v}); }
  void put_text(const std::string& name, std::string s) {
    entries_[name] = Entry{{s.size()}, {}, std::move(s), true};
  }

  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  const Entry& get(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(Errc::FormatError, "model file lacks entry " + name);
    return it->second;
  }
  const std::vector<double>& values(const std::string& name) const {
    const Entry& e = get(name);
    if (e.is_text) throw Error(Errc::FormatError, name + " is not numeric");
    return e.values;
  }
  double scalar(const std::string& name) const {
    const auto& v = values(name);
    if (v.size() != 1) throw Error(Errc::FormatError, name + " is not a scalar");
    return v[0];
  }
  const std::string& text(const std::string& name) const {
    const Entry& e = get(name);
    if (!e.is_text) throw Error(Errc::FormatError, name + " is not text");
    return e.text;
  }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kModelVersion);
    put_u32(out, static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [name, e] : entries_) {
      put_u32(out, static_cast<std::uint32_t>(name.size()));
      out.insert(out.end(), name.begin(), name.end());
      out.push_back(e.is_text ? 1 : 0);
      put_u32(out, static_cast<std::uint32_t>(e.shape.size()));
      for (auto d : e.shape) put_u64(out, d);
      if (e.is_text) out.insert(out.end(), e.text.begin(), e.text.end());
      else
        for (double v : e.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
  }

  static TensorArchive deserialize(const std::vector<std::uint8_t>& in) {
    Reader r{in, 0};
    for (char c : kMagic)
      if (r.u8() != static_cast<std::uint8_t>(c)) throw Error(Errc::FormatError, "not a specsense model file");
    if (r.u32() != kModelVersion) throw Error(Errc::FormatError, "unsupported model file version");
    TensorArchive a;
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t len = r.u32();
      std::string name = r.bytes(len);
      const std::uint8_t dtype = r.u8();
      if (dtype > 1) throw Error(Errc::FormatError, "unknown entry type");
      Entry e;
      e.is_text = dtype == 1;
      const std::uint32_t rank = r.u32();
      std::uint64_t count = 1;
      for (std::uint32_t k = 0; k < rank; ++k) {
        e.shape.push_back(r.u64());
        count *= e.shape.back();
      }
      if (count > in.size()) throw Error(Errc::FormatError, "entry larger than file");
      if (e.is_text) {
        e.text = r.bytes(count);
      } else {
        e.values.resize(count);
        for (auto& v : e.values) v = std::bit_cast<double>(r.u64());
      }
      a.entries_[std::move(name)] = std::move(e);
    }
    if (r.pos != in.size()) throw Error(Errc::FormatError, "trailing bytes in model file");
    return a;
  }

  void save(const std::filesystem::path& p) const {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    const auto bytes = serialize();
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw Error(Errc::IoFailure, "cannot write " + p.string());
  }

  static TensorArchive load(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw Error(Errc::IoFailure, "cannot read " + p.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
  }

 private:
  static void put_u32(std::vector<std::uint8_t>& o, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  static void put_u64(std::vector<std::uint8_t>& o, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  struct Reader {
    const std::vector<std::uint8_t>& b;
    std::size_t pos;
    void need(std::uint64_t n) const {
      if (n > b.size() - pos) throw Error(Errc::FormatError, "truncated model file");
    }
    std::uint8_t u8() {
      need(1);
      return b[pos++];
    }
    std::uint64_t uint(int width) {
      need(static_cast<std::uint64_t>(width));
      std::uint64_t v = 0;
      for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(b[pos++]) << (8 * i);
      return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::uint64_t u64() { return uint(8); }
    std::string bytes(std::uint64_t n) {
      need(n);
      std::string s(b.begin() + static_cast<long>(pos), b.begin() + static_cast<long>(pos + n));
      pos += n;
      return s;
    }
  };

  std::map<std::string, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Detector models

using AnyModel = std::variant<ml::KnnModel, ml::SvmModel, ml::GmmModel, nn::Cnn3, nn::Lstm>;

struct StoredModel {
  std::string detector;  // knn, svm, gmm, cnn3, lstm
  FeatureMode features = FeatureMode::Full6164;
  AnyModel model;
};

inline const char* feature_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::Full6164: return "full";
    case FeatureMode::TimeAgg134: return "timeagg";
    case FeatureMode::CenterBins268: return "center2";
  }
  return "?";
}

inline FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "full") return FeatureMode::Full6164;
  if (s == "timeagg") return FeatureMode::TimeAgg134;
  if (s == "center2") return FeatureMode::CenterBins268;
  throw Error(Errc::InvalidArgument, "unknown feature mode: " + s);
}

namespace detail {

inline std::vector<double> flatten(const Matrix<double>& m) { return {m.data().begin(), m.data().end()}; }

inline Matrix<double> unflatten(const Entry& e) {
  if (e.shape.size() != 2) throw Error(Errc::FormatError, "expected a matrix");
  Matrix<double> m(e.shape[0], e.shape[1]);
  std::copy(e.values.begin(), e.values.end(), m.data().begin());
  return m;
}

inline void put_params(TensorArchive& a, const nn::ParamSet& p, const nn::InputNorm& norm) {
  for (const auto& s : p.slots()) {
    std::vector<std::uint64_t> shape(s.shape.begin(), s.shape.end());
    const auto v = p.view(s.name);
    a.put("param." + s.name, shape, {v.begin(), v.end()});
  }
  a.put_scalar("norm.shift", norm.shift);
  a.put_scalar("norm.scale", norm.scale);
}

inline void get_params(const TensorArchive& a, nn::ParamSet& p, nn::InputNorm& norm) {
  for (const auto& s : p.slots()) {
    const Entry& e = a.get("param." + s.name);
    if (std::vector<std::size_t>(e.shape.begin(), e.shape.end()) != s.shape)
      throw Error(Errc::ShapeMismatch, "parameter " + s.name + " has the wrong shape");
    std::copy(e.values.begin(), e.values.end(), p.view(s.name).begin());
  }
  norm.shift = a.scalar("norm.shift");
  norm.scale = a.scalar("norm.scale");
}

}  // namespace detail

inline TensorArchive to_archive(const StoredModel& sm) {
  TensorArchive a;
  a.put_text("detector", sm.detector);
  a.put_text("features", feature_name(sm.features));
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ml::KnnModel>) {
          a.put("knn.features", {m.features.rows(), m.features.cols()}, detail::flatten(m.features));
          a.put("knn.labels", std::vector<double>(m.labels.begin(), m.labels.end()));
          a.put_scalar("knn.k", static_cast<double>(m.k));
        } else if constexpr (std::is_same_v<M, ml::SvmModel>) {
          a.put_text("svm.kernel", ml::to_string(m.kernel.kind));
          a.put_scalar("svm.gamma", m.kernel.gamma);
          a.put_scalar("svm.degree", m.kernel.degree);
          a.put_scalar("svm.coef0", m.kernel.coef0);
          a.put_scalar("svm.C", m.C);
          a.put_scalar("svm.primal", m.primal ? 1.0 : 0.0);
          a.put("svm.weights", m.weights);
          a.put_scalar("svm.bias", m.bias);
          a.put("svm.support_vectors", {m.support_vectors.rows(), m.support_vectors.cols()},
                detail::flatten(m.support_vectors));
          a.put("svm.dual_coef", m.dual_coef);
          a.put_scalar("svm.rho", m.rho);
        } else if constexpr (std::is_same_v<M, ml::GmmModel>) {
          for (std::size_t k = 0; k < 2; ++k) {
            const std::string p = "gmm." + std::to_string(k) + ".";
            a.put_scalar(p + "weight", m.components[k].weight);
            a.put(p + "mean", m.components[k].mean);
            a.put(p + "var", m.components[k].var);
          }
          a.put_scalar("gmm.positive_component", static_cast<double>(m.positive_component));
        } else if constexpr (std::is_same_v<M, nn::Cnn3>) {
          detail::put_params(a, m.params, m.norm);
        } else {
          a.put_scalar("lstm.hidden", static_cast<double>(m.hidden));
          a.put_scalar("lstm.residual", m.residual ? 1.0 : 0.0);
          detail::put_params(a, m.params, m.norm);
        }
      },
      sm.model);
  return a;
}

inline ml::KernelKind parse_kernel(const std::string& s) {
  if (s == "linear") return ml::KernelKind::Linear;
  if (s == "rbf") return ml::KernelKind::Rbf;
  if (s == "poly") return ml::KernelKind::Poly;
  if (s == "sigmoid") return ml::KernelKind::Sigmoid;
  throw Error(Errc::FormatError, "unknown kernel: " + s);
}

inline StoredModel from_archive(const TensorArchive& a) {
  StoredModel sm;
  sm.detector = a.text("detector");
  sm.features = parse_feature_mode(a.text("features"));
  if (sm.detector == "knn") {
    ml::KnnModel m;
    m.features = detail::unflatten(a.get("knn.features"));
    for (double l : a.values("knn.labels")) m.labels.push_back(static_cast<int>(l));
    m.k = static_cast<std::size_t>(a.scalar("knn.k"));
    sm.model = std::move(m);
  } else if (sm.detector == "svm") {
    ml::SvmModel m;
    m.kernel.kind = parse_kernel(a.text("svm.kernel"));
    m.kernel.gamma = a.scalar("svm.gamma");
    m.kernel.degree = static_cast<int>(a.scalar("svm.degree"));
    m.kernel.coef0 = a.scalar("svm.coef0");
    m.C = a.scalar("svm.C");
    m.primal = a.scalar("svm.primal") != 0.0;
    m.weights = a.values("svm.weights");
    m.bias = a.scalar("svm.bias");
    m.support_vectors = detail::unflatten(a.get("svm.support_vectors"));
    m.dual_coef = a.values("svm.dual_coef");
    m.rho = a.scalar("svm.rho");
    sm.model = std::move(m);
  } else if (sm.detector == "gmm") {
    ml::GmmModel m;
    for (std::size_t k = 0; k < 2; ++k) {
      const std::string p = "gmm." + std::to_string(k) + ".";
      m.components[k].weight = a.scalar(p + "weight");
      m.components[k].mean = a.values(p + "mean");
      m.components[k].var = a.values(p + "var");
    }
    m.positive_component = static_cast<std::size_t>(a.scalar("gmm.positive_component"));
    sm.model = std::move(m);
  } else if (sm.detector == "cnn3") {
    nn::Cnn3 net;
    detail::get_params(a, net.params, net.norm);
    sm.model = std::move(net);
  } else if (sm.detector == "lstm") {
    nn::Lstm net(static_cast<std::size_t>(a.scalar("lstm.hidden")), a.scalar("lstm.residual") != 0.0);
    detail::get_params(a, net.params, net.norm);
    sm.model = std::move(net);
  } else {
    throw Error(Errc::FormatError, "unknown detector in model file: " + sm.detector);
  }
  return sm;
}

inline void save_model(const std::filesystem::path& p, const StoredModel& sm) { to_archive(sm).save(p); }
inline StoredModel load_model(const std::filesystem::path& p) { return from_archive(TensorArchive::load(p)); }

}  // namespace specsense::io
