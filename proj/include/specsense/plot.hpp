#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/eval/table.hpp"

namespace specsense::plot {

enum class PlotKind { Roc, Froc, Hist, Ccdf, SpectrogramImage };

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "roc") return PlotKind::Roc;
  if (s == "froc") return PlotKind::Froc;
  if (s == "hist") return PlotKind::Hist;
  if (s == "ccdf") return PlotKind::Ccdf;
  if (s == "spectrogram-image") return PlotKind::SpectrogramImage;
  throw Error(Errc::InvalidArgument, "unknown plot kind: " + s);
}

inline const char* to_string(PlotKind k) {
  switch (k) {
    case PlotKind::Roc: return "roc";
    case PlotKind::Froc: return "froc";
    case PlotKind::Hist: return "hist";
    case PlotKind::Ccdf: return "ccdf";
    case PlotKind::SpectrogramImage: return "spectrogram-image";
  }
  return "?";
}

struct GrayWindow {
  double lo_dbm = -90.0;
  double hi_dbm = -50.0;
};

/// Clamp to the window, then map linearly: lo -> 0 (black), hi -> 255 (white).
inline std::uint8_t gray_level(double dbm, const GrayWindow& w = {}) {
  if (!(w.hi_dbm > w.lo_dbm)) throw Error(Errc::InvalidArgument, "gray window needs hi > lo");
  const double t = (std::clamp(dbm, w.lo_dbm, w.hi_dbm) - w.lo_dbm) / (w.hi_dbm - w.lo_dbm);
  return static_cast<std::uint8_t>(std::lround(255.0 * t));
}

inline Matrix<std::uint8_t> grayscale_image(const Matrix<double>& dbm, const GrayWindow& w = {}) {
  Matrix<std::uint8_t> img(dbm.rows(), dbm.cols(), 0);
  for (std::size_t r = 0; r < dbm.rows(); ++r)
    for (std::size_t c = 0; c < dbm.cols(); ++c) img(r, c) = gray_level(dbm(r, c), w);
  return img;
}

/// A spectrogram as a table: one row per time bin, one column per frequency bin.
inline eval::NumericTable spectrogram_table(const Matrix<double>& dbm) {
  eval::NumericTable t;
  t.kind = "spectrogram";
  for (std::size_t c = 0; c < dbm.cols(); ++c) t.columns.push_back("f" + std::to_string(c));
  for (std::size_t r = 0; r < dbm.rows(); ++r) {
    std::vector<double> row(dbm.cols());
    for (std::size_t c = 0; c < dbm.cols(); ++c) row[c] = dbm(r, c);
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace detail {

inline constexpr double kW = 480.0, kH = 400.0, kMargin = 50.0;

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin); }
  double py(double y) const { return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin); }
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::size_t column(const eval::NumericTable& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw Error(Errc::FormatError, "table lacks column " + name);
  return static_cast<std::size_t>(it - t.columns.begin());
}

inline void open_svg(std::ostringstream& os, double w, double h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
}

inline void axes(std::ostringstream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  os << "<g class=\"axes\" data-xmin=\"" << f.x0 << "\" data-xmax=\"" << f.x1 << "\" data-ymin=\"" << f.y0
     << "\" data-ymax=\"" << f.y1 << "\" stroke=\"black\">\n";
  os << "<line x1=\"" << num(f.px(f.x0)) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\"" << num(f.px(f.x1))
     << "\" y2=\"" << num(f.py(f.y0)) << "\"/>\n";
  os << "<line x1=\"" << num(f.px(f.x0)) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\"" << num(f.px(f.x0))
     << "\" y2=\"" << num(f.py(f.y1)) << "\"/>\n</g>\n";
  os << "<text x=\"" << num(kW / 2) << "\" y=\"" << num(kH - 12) << "\" text-anchor=\"middle\">" << xlabel
     << "</text>\n";
  os << "<text x=\"14\" y=\"" << num(kH / 2) << "\" transform=\"rotate(-90 14 " << num(kH / 2)
     << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (double v : {f.x0, f.x1})
    os << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(f.py(f.y0) + 16) << "\" text-anchor=\"middle\">" << v
       << "</text>\n";
  for (double v : {f.y0, f.y1})
    os << "<text x=\"" << num(f.px(f.x0) - 6) << "\" y=\"" << num(f.py(v) + 4) << "\" text-anchor=\"end\">" << v
       << "</text>\n";
}

inline void polyline(std::ostringstream& os, const Frame& f, const std::vector<double>& xs,
                     const std::vector<double>& ys, const std::string& cls, const std::string& style) {
  os << "<polyline class=\"" << cls << "\" fill=\"none\" " << style << " points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << num(f.px(xs[i])) << ',' << num(f.py(ys[i]));
  os << "\"/>\n";
}

inline std::vector<double> col_values(const eval::NumericTable& t, std::size_t c) {
  std::vector<double> v;
  for (const auto& r : t.rows) v.push_back(r[c]);
  return v;
}

inline std::pair<double, double> finite_range(const std::vector<double>& v) {
  double lo = INFINITY, hi = -INFINITY;
  for (double x : v)
    if (std::isfinite(x)) lo = std::min(lo, x), hi = std::max(hi, x);
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi == lo) hi = lo + 1.0;
  return {lo, hi};
}

}  // namespace detail

inline std::string render_svg(const eval::NumericTable& t, PlotKind kind, const GrayWindow& win = {}) {
  using namespace detail;
  std::ostringstream os;
  if (kind == PlotKind::SpectrogramImage) {
    const std::size_t rows = t.rows.size(), cols = t.columns.size();
    open_svg(os, static_cast<double>(cols), static_cast<double>(rows));
    os << "<g class=\"image\" data-lo-dbm=\"" << win.lo_dbm << "\" data-hi-dbm=\"" << win.hi_dbm
       << "\" shape-rendering=\"crispEdges\">\n";
    // Horizontal runs of equal grey become one rectangle.
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols;) {
        const std::uint8_t g = gray_level(t.rows[r][c], win);
        std::size_t e = c + 1;
        while (e < cols && gray_level(t.rows[r][e], win) == g) ++e;
        os << "<rect x=\"" << c << "\" y=\"" << r << "\" width=\"" << (e - c) << "\" height=\"1\" fill=\"rgb("
           << int(g) << ',' << int(g) << ',' << int(g) << ")\"/>\n";
        c = e;
      }
    }
    os << "</g>\n</svg>\n";
    return os.str();
  }

  open_svg(os, kW, kH);
  Frame f;
  switch (kind) {
    case PlotKind::Roc: {
      const auto xs = col_values(t, column(t, "x")), ys = col_values(t, column(t, "y"));
      axes(os, f, "false-positive rate", "true-positive rate");
      polyline(os, f, xs, ys, "curve", "stroke=\"black\"");
      break;
    }
    case PlotKind::Froc: {
      const bool envelope = t.kind == "froc-envelope";
      const auto xs = col_values(t, column(t, "x"));
      f.x1 = std::max(1e-12, finite_range(xs).second);
      axes(os, f, "false positives per spectrogram", "detection fraction");
      if (envelope) {
        polyline(os, f, xs, col_values(t, column(t, "lo")), "lower", "stroke=\"gray\"");
        polyline(os, f, xs, col_values(t, column(t, "hi")), "upper", "stroke=\"gray\"");
      } else {
        polyline(os, f, xs, col_values(t, column(t, "y")), "curve", "stroke=\"black\"");
      }
      break;
    }
    case PlotKind::Ccdf: {
      const auto xs = col_values(t, column(t, "x"));
      std::tie(f.x0, f.x1) = finite_range(xs);
      axes(os, f, "power density (dBm/MHz)", "CCDF");
      polyline(os, f, xs, col_values(t, column(t, "ccdf")), "curve", "stroke=\"black\"");
      polyline(os, f, xs, col_values(t, column(t, "lower")), "lower", "stroke=\"black\" stroke-dasharray=\"4 3\"");
      polyline(os, f, xs, col_values(t, column(t, "upper")), "upper", "stroke=\"black\" stroke-dasharray=\"4 3\"");
      break;
    }
    case PlotKind::Hist: {
      const auto lo = col_values(t, column(t, "bin_lo")), hi = col_values(t, column(t, "bin_hi"));
      const auto n = col_values(t, column(t, "count"));
      f.x0 = lo.empty() ? 0.0 : *std::min_element(lo.begin(), lo.end());
      f.x1 = hi.empty() ? 1.0 : *std::max_element(hi.begin(), hi.end());
      f.y1 = std::max(1.0, n.empty() ? 1.0 : *std::max_element(n.begin(), n.end()));
      axes(os, f, "duration (min)", "count");
      for (std::size_t i = 0; i < n.size(); ++i)
        os << "<rect class=\"bar\" x=\"" << num(f.px(lo[i])) << "\" y=\"" << num(f.py(n[i])) << "\" width=\""
           << num(f.px(hi[i]) - f.px(lo[i])) << "\" height=\"" << num(f.py(0) - f.py(n[i]))
           << "\" fill=\"gray\" stroke=\"black\"/>\n";
      break;
    }
    case PlotKind::SpectrogramImage: break;
  }
  os << "</svg>\n";
  return os.str();
}

struct PlotFiles {
  std::filesystem::path svg;
  std::filesystem::path table;
};

/// Writes `<stem>.svg` and the source table `<stem>.tsv`.
inline PlotFiles emit_plot(const eval::NumericTable& t, PlotKind kind, const std::filesystem::path& stem,
                           const GrayWindow& win = {}) {
  PlotFiles files{stem, stem};
  files.svg += ".svg";
  files.table += ".tsv";
  const std::string svg = render_svg(t, kind, win);
  {
    auto os = eval::open_out(files.svg);
    os << svg;
    if (!os) throw Error(Errc::IoFailure, "cannot write " + files.svg.string());
  }
  auto os = eval::open_out(files.table);
  eval::write_table(os, t);
  if (!os) throw Error(Errc::IoFailure, "cannot write " + files.table.string());
  return files;
}

}  // namespace specsense::plot
