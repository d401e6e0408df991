#include "vitalnet/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

#include "vitalnet/error.hpp"

namespace vitalnet::plot {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;  // room for the legend
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

constexpr std::array<const char*, 4> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

using Table = std::vector<std::vector<std::string>>;

Table read_table(Kind kind, std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header(kind)) {
    throw ValidationError("plot: input header must be '" + std::string(expected_header(kind)) + "', got '" + line + "'");
  }
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
  Table rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != columns) throw ParseError(line_no, "plot: expected " + std::to_string(columns) + " fields");
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw ValidationError("plot: input has no data rows");
  return rows;
}

double field(const Table& rows, std::size_t r, std::size_t c) {
  const auto& s = rows[r][c];
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(r + 2, "plot: non-numeric value '" + s + "'");
  }
  return v;
}

struct Range {
  double lo, hi;
};

Range padded(double lo, double hi) {
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

class Canvas {
 public:
  Canvas(std::string title, std::string x_label, std::string y_label, Range x, Range y)
      : x_(x), y_(y) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n"
         << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n"
         << "<text x=\"" << num(kLeft + plot_width() / 2) << "\" y=\"30\" text-anchor=\"middle\" "
         << "font-family=\"sans-serif\" font-size=\"18\">" << title << "</text>\n";
    axes(x_label, y_label);
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_width(); }
  double py(double y) const { return kTop + (y_.hi - y) / (y_.hi - y_.lo) * plot_height(); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color, const std::string& series) {
    out_ << "<polyline data-series=\"" << series << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out_ << (i ? " " : "") << num(px(pts[i].first)) << ',' << num(py(pts[i].second));
    }
    out_ << "\"/>\n";
    for (const auto& [x, y] : pts) marker(x, y, color, series, 4.0);
  }

  void marker(double x, double y, const char* color, const std::string& series, double radius) {
    out_ << "<circle data-series=\"" << series << "\" cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\""
         << num(radius) << "\" fill=\"" << color << "\"/>\n";
  }

  void rect(double x0, double y0, double x1, double y1, const char* color) {
    out_ << "<rect x=\"" << num(std::min(px(x0), px(x1))) << "\" y=\"" << num(std::min(py(y0), py(y1)))
         << "\" width=\"" << num(std::fabs(px(x1) - px(x0))) << "\" height=\"" << num(std::fabs(py(y1) - py(y0)))
         << "\" fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
  }

  void line(double x0, double y0, double x1, double y1, const char* color) {
    out_ << "<line x1=\"" << num(px(x0)) << "\" y1=\"" << num(py(y0)) << "\" x2=\"" << num(px(x1)) << "\" y2=\""
         << num(py(y1)) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, const char*>>& entries) {
    double y = kTop + 10.0;
    for (const auto& [name, color] : entries) {
      const double x = kWidth - kRight + 20.0;
      out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"14\" height=\"14\" fill=\"" << color
           << "\"/>\n"
           << "<text x=\"" << num(x + 20.0) << "\" y=\"" << num(y + 12.0)
           << "\" font-family=\"sans-serif\" font-size=\"14\">" << name << "</text>\n";
      y += 24.0;
    }
  }

  void x_tick_label(double x, const std::string& text) {
    out_ << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + plot_height() + 20.0)
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << text << "</text>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  static double plot_width() { return kWidth - kLeft - kRight; }
  static double plot_height() { return kHeight - kTop - kBottom; }

  void axes(const std::string& x_label, const std::string& y_label) {
    const double x0 = kLeft, y0 = kTop + plot_height();
    out_ << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0 + plot_width()) << "\" y2=\""
         << num(y0) << "\" stroke=\"black\"/>\n"
         << "<line x1=\"" << num(x0) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y0)
         << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double yv = y_.lo + (y_.hi - y_.lo) * k / 4.0;
      out_ << "<text x=\"" << num(x0 - 8.0) << "\" y=\"" << num(py(yv) + 4.0)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << num(yv) << "</text>\n";
    }
    out_ << "<text x=\"" << num(kLeft + plot_width() / 2) << "\" y=\"" << num(kHeight - 20.0)
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << x_label << "</text>\n"
         << "<text x=\"20\" y=\"" << num(kTop + plot_height() / 2) << "\" text-anchor=\"middle\" "
         << "font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 20 " << num(kTop + plot_height() / 2)
         << ")\">" << y_label << "</text>\n";
  }

  Range x_, y_;
  std::ostringstream out_;
};

void numeric_x_ticks(Canvas& canvas, Range data) {
  for (int k = 0; k <= 4; ++k) {
    const double x = data.lo + (data.hi - data.lo) * k / 4.0;
    canvas.x_tick_label(x, num(x));
  }
}

std::string render_lines(const Table& rows, const std::string& title, const std::string& x_label,
                         const std::vector<std::pair<std::size_t, std::string>>& series) {
  double x_lo = field(rows, 0, 0), x_hi = x_lo, y_hi = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x_lo = std::min(x_lo, field(rows, r, 0));
    x_hi = std::max(x_hi, field(rows, r, 0));
    for (const auto& [col, name] : series) y_hi = std::max(y_hi, field(rows, r, col));
  }
  Canvas canvas(title, x_label, "value", padded(x_lo, x_hi), {0.0, y_hi > 1.0 ? y_hi * 1.05 : 1.0});
  if (rows.size() <= 15) {
    for (const auto& row : rows) canvas.x_tick_label(std::stod(row[0]), row[0]);
  } else {
    numeric_x_ticks(canvas, {x_lo, x_hi});
  }
  std::vector<std::pair<std::string, const char*>> legend;
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t r = 0; r < rows.size(); ++r) pts.emplace_back(field(rows, r, 0), field(rows, r, series[s].first));
    canvas.polyline(pts, kPalette[s], series[s].second);
    legend.emplace_back(series[s].second, kPalette[s]);
  }
  canvas.legend(legend);
  return canvas.finish();
}

std::string render_embedding(const Table& rows) {
  double x_lo = field(rows, 0, 3), x_hi = x_lo, y_lo = field(rows, 0, 4), y_hi = y_lo;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x_lo = std::min(x_lo, field(rows, r, 3));
    x_hi = std::max(x_hi, field(rows, r, 3));
    y_lo = std::min(y_lo, field(rows, r, 4));
    y_hi = std::max(y_hi, field(rows, r, 4));
  }
  Canvas canvas("t-SNE of dense-layer features", "y1", "y2", padded(x_lo, x_hi), padded(y_lo, y_hi));
  numeric_x_ticks(canvas, {x_lo, x_hi});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const bool positive = rows[r][2] == "1";
    canvas.marker(field(rows, r, 3), field(rows, r, 4), kPalette[positive ? 1 : 0], positive ? "label-1" : "label-0",
                  3.5);
  }
  canvas.legend({{"label 0", kPalette[0]}, {"label 1", kPalette[1]}});
  return canvas.finish();
}

std::string render_boxplot(const Table& rows) {
  double lo = field(rows, 0, 4), hi = field(rows, 0, 5);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 1; c <= 5; ++c) {
      lo = std::min(lo, field(rows, r, c));
      hi = std::max(hi, field(rows, r, c));
    }
  }
  const auto n = static_cast<double>(rows.size());
  Canvas canvas("Resting HR by test result", "label", "bpm", {0.0, n}, padded(lo, hi));
  std::vector<std::pair<std::string, const char*>> legend;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double center = static_cast<double>(r) + 0.5;
    const char* color = kPalette[r % kPalette.size()];
    const double q1 = field(rows, r, 1), median = field(rows, r, 2), q3 = field(rows, r, 3);
    const double w_lo = field(rows, r, 4), w_hi = field(rows, r, 5);
    canvas.line(center, w_lo, center, q1, color);
    canvas.line(center, q3, center, w_hi, color);
    canvas.line(center - 0.1, w_lo, center + 0.1, w_lo, color);
    canvas.line(center - 0.1, w_hi, center + 0.1, w_hi, color);
    canvas.rect(center - 0.25, q1, center + 0.25, q3, color);
    canvas.line(center - 0.25, median, center + 0.25, median, "black");
    canvas.x_tick_label(center, rows[r][0]);
    legend.emplace_back("label " + rows[r][0], color);
  }
  canvas.legend(legend);
  return canvas.finish();
}

}  // namespace

Kind kind_from_string(std::string_view name) {
  if (name == "sweep") return Kind::sweep;
  if (name == "history") return Kind::history;
  if (name == "embedding") return Kind::embedding;
  if (name == "boxplot") return Kind::boxplot;
  throw ValidationError("plot kind must be one of sweep, history, embedding, boxplot");
}

std::string_view expected_header(Kind kind) {
  switch (kind) {
    case Kind::sweep: return "days,n_windows,accuracy,auc";
    case Kind::history: return "epoch,loss,accuracy";
    case Kind::embedding: return "window_index,patient_id,label,y1,y2";
    case Kind::boxplot: return "label,q1,median,q3,whisker_lo,whisker_hi";
  }
  return "";
}

std::string render(Kind kind, std::istream& csv) {
  const Table rows = read_table(kind, csv);
  switch (kind) {
    case Kind::sweep:
      return render_lines(rows, "Test performance by included days", "days", {{2, "accuracy"}, {3, "auc"}});
    case Kind::history:
      return render_lines(rows, "Training history", "epoch", {{1, "loss"}, {2, "accuracy"}});
    case Kind::embedding: return render_embedding(rows);
    case Kind::boxplot: return render_boxplot(rows);
  }
  return {};
}

void render_file(Kind kind, const std::filesystem::path& input, const std::filesystem::path& output) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + input.string());
  const std::string svg = render(kind, in);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + output.string());
  out << svg;
}

}  // namespace vitalnet::plot
