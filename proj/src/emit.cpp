#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ovm/errors.hpp"
#include "ovm/harness.hpp"

namespace ovm {

EmitFormats parse_formats(const std::string& list) {
  EmitFormats f{false, false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "csv") f.csv = true;
    else if (item == "json") f.json = true;
    else if (item == "svg") f.svg = true;
    else throw Error(ErrorCode::ConfigError, "unknown format '" + item + "'");
  }
  if (!f.csv && !f.json && !f.svg) throw Error(ErrorCode::ConfigError, "no output format selected");
  return f;
}

namespace {

std::string g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << content;
  if (!out.flush()) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  written.push_back(path.string());
}

}  // namespace

std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + g17(row[i]);
    out += '\n';
  }
  return out;
}

// Log-log line plot; non-positive values are dropped.
std::string render_svg(const Figure& f) {
  constexpr double W = 640, H = 440, L = 80, R = 20, T = 40, B = 60;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : f.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) {
        xmin = std::min(xmin, std::log10(s.x[i]));
        xmax = std::max(xmax, std::log10(s.x[i]));
        ymin = std::min(ymin, std::log10(s.y[i]));
        ymax = std::max(ymax, std::log10(s.y[i]));
      }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  auto px = [&](double x) { return L + (std::log10(x) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (std::log10(y) - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape_xml(f.title)
    << "</text>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << escape_xml(f.x_label) << " (log)</text>\n"
    << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << H / 2 << ")\">" << escape_xml(f.y_label) << " (log)</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + k * (xmax - xmin) / 4, yv = ymin + k * (ymax - ymin) / 4;
    char bx[32], by[32];
    std::snprintf(bx, sizeof bx, "%.3g", std::pow(10.0, xv));
    std::snprintf(by, sizeof by, "%.3g", std::pow(10.0, yv));
    o << "<text x=\"" << px(std::pow(10.0, xv)) << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << bx << "</text>\n"
      << "<text x=\"" << L - 6 << "\" y=\"" << py(std::pow(10.0, yv)) + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << by << "</text>\n";
  }
  for (std::size_t s = 0; s < f.series.size(); ++s) {
    const auto& ser = f.series[s];
    const char* colour = colours[s % 4];
    std::ostringstream pts;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i)
      if (ser.x[i] > 0 && ser.y[i] > 0) pts << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n"
      << "<text x=\"" << L + 10 << "\" y=\"" << T + 18 + 16 * s << "\" font-size=\"12\" fill=\"" << colour << "\">"
      << escape_xml(ser.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::string> emit(const ReportBundle& b, const std::string& dir, const EmitFormats& formats) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  std::vector<std::string> written;
  if (formats.csv)
    for (const auto& t : b.tables) write_file(fs::path(dir) / (t.name + ".csv"), render_csv(t), written);
  if (formats.json) {
    const auto full = bundle_to_json(b);
    nlohmann::json summary = {{"experiment", full["experiment"]},
                              {"config_hash", b.config_hash},
                              {"code_version", b.code_version},
                              {"all_pass", b.all_pass()},
                              {"verdicts", full["verdicts"]},
                              {"config", full["config"]}};
    write_file(fs::path(dir) / "summary.json", summary.dump(2) + "\n", written);
    write_file(fs::path(dir) / "bundle.json", full.dump(2) + "\n", written);
  }
  if (formats.svg)
    for (const auto& f : b.figures) write_file(fs::path(dir) / (f.name + ".svg"), render_svg(f), written);
  return written;
}

}  // namespace ovm
