#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/eval/froc.hpp"
#include "specsense/eval/roc.hpp"

namespace specsense::eval {

// Plain-text tables. Every file opens with "# <format> <version> [kind]", then a
// "# column ..." line, then whitespace-separated rows. Doubles are written with
// 17 significant digits so tables round-trip exactly.

inline constexpr int kTableVersion = 1;

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw Error(Errc::FormatError, "not a number: " + tok);
  return v;
}

struct TableHeader {
  std::string format;
  int version = 0;
  std::string kind;
};

inline TableHeader parse_header(const std::string& line) {
  std::istringstream is(line);
  std::string hash;
  TableHeader h;
  if (!(is >> hash >> h.format >> h.version) || hash != "#")
    throw Error(Errc::FormatError, "missing table header line");
  is >> h.kind;
  return h;
}

inline std::vector<std::vector<std::string>> read_rows(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (!toks.empty()) rows.push_back(std::move(toks));
  }
  return rows;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw Error(Errc::IoFailure, "cannot write " + p.string());
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw Error(Errc::IoFailure, "cannot read " + p.string());
  return is;
}

// Scored-channel interchange: spectrogram id, channel centre in MHz, score, label (1 present).

inline void write_scores(std::ostream& os, const std::vector<ScoredChannel>& scored) {
  os << "# specsense-scores " << kTableVersion << "\n# spectrogram_id channel_mhz score label\n";
  for (const auto& s : scored)
    os << s.spectrogram_id << ' ' << fmt_double(s.channel_center / 1e6) << ' ' << fmt_double(s.score) << ' '
       << (s.present ? 1 : 0) << '\n';
}

inline void write_scores(const std::filesystem::path& p, const std::vector<ScoredChannel>& scored) {
  auto os = open_out(p);
  write_scores(os, scored);
}

inline std::vector<ScoredChannel> read_scores(std::istream& is) {
  std::string first;
  if (!std::getline(is, first)) throw Error(Errc::FormatError, "empty scores file");
  const TableHeader h = parse_header(first);
  if (h.format != "specsense-scores" || h.version != kTableVersion)
    throw Error(Errc::FormatError, "not a version-1 scores file");
  std::vector<ScoredChannel> out;
  for (const auto& row : read_rows(is)) {
    if (row.size() != 4) throw Error(Errc::FormatError, "scores rows need 4 columns");
    ScoredChannel s;
    s.spectrogram_id = row[0];
    s.channel_center = parse_double(row[1]) * 1e6;
    s.score = parse_double(row[2]);
    if (row[3] != "0" && row[3] != "1") throw Error(Errc::FormatError, "label must be 0 or 1");
    s.present = row[3] == "1";
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<ScoredChannel> read_scores(const std::filesystem::path& p) {
  auto is = open_in(p);
  return read_scores(is);
}

// Curves: kind is "roc" or "froc"; rows are threshold, x, y.

inline void write_curve(std::ostream& os, const std::string& kind, const std::vector<CurvePoint>& pts) {
  os << "# specsense-curve " << kTableVersion << ' ' << kind << "\n# threshold x y\n";
  for (const auto& p : pts) os << fmt_double(p.threshold) << ' ' << fmt_double(p.x) << ' ' << fmt_double(p.y) << '\n';
}

struct CurveTable {
  std::string kind;
  std::vector<CurvePoint> points;
};

inline CurveTable read_curve(std::istream& is) {
  std::string first;
  if (!std::getline(is, first)) throw Error(Errc::FormatError, "empty curve file");
  const TableHeader h = parse_header(first);
  if (h.format != "specsense-curve" || h.version != kTableVersion)
    throw Error(Errc::FormatError, "not a version-1 curve file");
  CurveTable t{h.kind, {}};
  for (const auto& row : read_rows(is)) {
    if (row.size() != 3) throw Error(Errc::FormatError, "curve rows need 3 columns");
    t.points.push_back({parse_double(row[0]), parse_double(row[1]), parse_double(row[2])});
  }
  return t;
}

/// Generic numeric table with named columns (histograms, CCDF bands, envelopes).
struct NumericTable {
  std::string format = "specsense-table";
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_table(std::ostream& os, const NumericTable& t) {
  os << "# " << t.format << ' ' << kTableVersion << ' ' << t.kind << "\n#";
  for (const auto& c : t.columns) os << ' ' << c;
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << fmt_double(r[i]);
    os << '\n';
  }
}

inline NumericTable read_table(std::istream& is) {
  std::string first, second;
  if (!std::getline(is, first) || !std::getline(is, second)) throw Error(Errc::FormatError, "truncated table");
  const TableHeader h = parse_header(first);
  if (h.version != kTableVersion) throw Error(Errc::FormatError, "unsupported table version");
  NumericTable t;
  t.format = h.format;
  t.kind = h.kind;
  std::istringstream cs(second.substr(1));
  for (std::string c; cs >> c;) t.columns.push_back(c);
  for (const auto& row : read_rows(is)) {
    if (row.size() != t.columns.size()) throw Error(Errc::FormatError, "row width differs from header");
    std::vector<double> r;
    for (const auto& tok : row) r.push_back(parse_double(tok));
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline NumericTable envelope_table(const FrocEnvelope& e) {
  NumericTable t;
  t.kind = "froc-envelope";
  t.columns = {"x", "lo", "hi"};
  for (std::size_t i = 0; i < e.x.size(); ++i) t.rows.push_back({e.x[i], e.lo[i], e.hi[i]});
  return t;
}

}  // namespace specsense::eval
