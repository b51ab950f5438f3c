#include "wsoleval/report.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "wsoleval/error.hpp"
#include "wsoleval/io.hpp"

namespace wsoleval {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 48.0;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header() {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
     << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
     << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  return os.str();
}

}  // namespace

std::string svg_epoch_curves(std::span<const RunManifest> runs, std::span<const Criterion> criteria,
                             Split split) {
  int max_epoch = 1;
  for (const auto& run : runs) {
    for (const auto& r : run.series(split)) max_epoch = std::max(max_epoch, r.epoch);
  }
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  std::ostringstream os;
  os << header();
  os << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 16 << "\" font-size=\"14\">" << to_string(split)
     << " criteria per epoch</text>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" font-size=\"12\">epoch (0.."
     << max_epoch << ")</text>\n";
  std::size_t color = 0;
  for (const auto& criterion : criteria) {
    const char* stroke = kPalette[color++ % kPalette.size()];
    for (const auto& run : runs) {
      std::string points;
      for (const auto& r : run.series(split)) {
        double v;
        try {
          v = criterion_value(r, criterion);
        } catch (const Error&) {
          continue;
        }
        const double x = kMargin + plot_w * r.epoch / max_epoch;
        const double y = kHeight - kMargin - plot_h * std::clamp(v, 0.0, 1.0);
        points += format_double(x) + "," + format_double(y) + " ";
      }
      if (points.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"" << points
         << "\"><title>" << escape(run.run_id + " " + criterion.label()) << "</title></polyline>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_histogram(const EpochDiffHistogram& hist, const std::string& title) {
  std::ostringstream os;
  os << header();
  os << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 16 << "\" font-size=\"14\">" << escape(title)
     << " (mode " << hist.mode << ", mean " << format_double(hist.mean) << ")</text>\n";
  if (hist.counts.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  const int lo = hist.counts.begin()->first;
  const int hi = hist.counts.rbegin()->first;
  std::size_t peak = 0;
  for (const auto& [d, n] : hist.counts) peak = std::max(peak, n);
  const double slots = static_cast<double>(hi - lo + 1);
  const double bar_w = (kWidth - 2 * kMargin) / slots;
  const double plot_h = kHeight - 2 * kMargin;
  for (const auto& [d, n] : hist.counts) {
    const double h = plot_h * static_cast<double>(n) / static_cast<double>(peak);
    const double x = kMargin + bar_w * (d - lo);
    os << "<rect x=\"" << format_double(x + 1) << "\" y=\"" << format_double(kHeight - kMargin - h)
       << "\" width=\"" << format_double(std::max(1.0, bar_w - 2)) << "\" height=\"" << format_double(h)
       << "\" fill=\"#1f77b4\"><title>" << d << ": " << n << "</title></rect>\n";
    os << "<text x=\"" << format_double(x + bar_w / 2) << "\" y=\"" << kHeight - kMargin + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << d << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace wsoleval
