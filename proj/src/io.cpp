// SPDX-License-Identifier: Apache-2.0
#include "msfbm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "msfbm/errors.hpp"

namespace msfbm {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

OutputSink::OutputSink(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void OutputSink::write_csv(const std::string& name, const CsvTable& table) {
  std::ofstream out(dir_ / name);
  if (!out) throw ConfigError("cannot open output file " + (dir_ / name).string());
  out << table.header << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << format_double(row[i]);
    }
    out << "\n";
  }
  files_.push_back(name);
}

void OutputSink::write_text(const std::string& name, const std::string& content) {
  std::ofstream out(dir_ / name);
  if (!out) throw ConfigError("cannot open output file " + (dir_ / name).string());
  out << content;
  files_.push_back(name);
}

void OutputSink::write_manifest(const std::string& command,
                                std::uint64_t config_hash, std::uint64_t seed) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["version"] = kVersion;
  j["files"] = files_;
  std::ofstream out(dir_ / "manifest.json");
  out << j.dump(2) << "\n";
}

std::uint64_t fnv1a_hash(std::span<const char> bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

struct PlotFrame {
  double x0 = 80, y0 = 40, w = 520, h = 380;  // plot area in a 640x480 canvas
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void svg_header(std::string& s, const std::string& title) {
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
       "font-family=\"sans-serif\">" + title + "</text>\n";
}

void svg_axes(std::string& s, const PlotFrame& f) {
  s += "<rect x=\"" + std::to_string(f.x0) + "\" y=\"" + std::to_string(f.y0) +
       "\" width=\"" + std::to_string(f.w) + "\" height=\"" + std::to_string(f.h) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = f.xmin + (f.xmax - f.xmin) * i / 4.0;
    const double fy = f.ymin + (f.ymax - f.ymin) * i / 4.0;
    char buf[64];
    snprintf(buf, sizeof(buf), "%.3g", fx);
    s += "<text x=\"" + std::to_string(f.px(fx)) + "\" y=\"" +
         std::to_string(f.y0 + f.h + 18) +
         "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" +
         buf + "</text>\n";
    snprintf(buf, sizeof(buf), "%.3g", fy);
    s += "<text x=\"" + std::to_string(f.x0 - 8) + "\" y=\"" +
         std::to_string(f.py(fy) + 4) +
         "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" +
         buf + "</text>\n";
  }
}

}  // namespace

void write_loglog_svg(OutputSink& sink, const std::string& name,
                      std::span<const double> xs, std::span<const double> ys,
                      double slope, double intercept, const std::string& title) {
  if (xs.empty() || xs.size() != ys.size())
    throw ConfigError("write_loglog_svg: bad data");
  PlotFrame f;
  f.xmin = std::log(*std::min_element(xs.begin(), xs.end()));
  f.xmax = std::log(*std::max_element(xs.begin(), xs.end()));
  f.ymin = std::log(*std::min_element(ys.begin(), ys.end()));
  f.ymax = std::log(*std::max_element(ys.begin(), ys.end()));
  const double padx = 0.05 * (f.xmax - f.xmin + 1e-12);
  const double pady = 0.05 * (f.ymax - f.ymin + 1e-12);
  f.xmin -= padx; f.xmax += padx; f.ymin -= pady; f.ymax += pady;

  std::string s;
  svg_header(s, title);
  svg_axes(s, f);
  // fitted line
  s += "<line x1=\"" + std::to_string(f.px(f.xmin)) + "\" y1=\"" +
       std::to_string(f.py(intercept + slope * f.xmin)) + "\" x2=\"" +
       std::to_string(f.px(f.xmax)) + "\" y2=\"" +
       std::to_string(f.py(intercept + slope * f.xmax)) +
       "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += "<circle cx=\"" + std::to_string(f.px(std::log(xs[i]))) + "\" cy=\"" +
         std::to_string(f.py(std::log(ys[i]))) +
         "\" r=\"4\" fill=\"#1f77b4\"/>\n";
  }
  char buf[64];
  snprintf(buf, sizeof(buf), "slope = %.4f", slope);
  s += "<text x=\"96\" y=\"56\" font-size=\"13\" font-family=\"sans-serif\">";
  s += buf;
  s += "</text>\n</svg>\n";
  sink.write_text(name, s);
}

void write_cdf_overlay_svg(OutputSink& sink, const std::string& name,
                           std::span<const double> sample_a,
                           std::span<const double> sample_b,
                           const std::string& title) {
  if (sample_a.empty() || sample_b.empty())
    throw ConfigError("write_cdf_overlay_svg: empty sample");
  std::vector<double> a(sample_a.begin(), sample_a.end());
  std::vector<double> b(sample_b.begin(), sample_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  PlotFrame f;
  f.xmin = std::min(a.front(), b.front());
  f.xmax = std::max(a.back(), b.back());
  f.ymin = 0.0;
  f.ymax = 1.0;

  std::string s;
  svg_header(s, title);
  svg_axes(s, f);
  const char* colors[2] = {"#1f77b4", "#d62728"};
  const std::vector<double>* samples[2] = {&a, &b};
  for (int which = 0; which < 2; ++which) {
    const auto& v = *samples[which];
    std::string pts;
    const std::size_t stride = std::max<std::size_t>(1, v.size() / 512);
    for (std::size_t i = 0; i < v.size(); i += stride) {
      const double fy = static_cast<double>(i + 1) / v.size();
      pts += std::to_string(f.px(v[i])) + "," + std::to_string(f.py(fy)) + " ";
    }
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"";
    s += colors[which];
    s += "\" stroke-width=\"1.5\"/>\n";
  }
  s += "</svg>\n";
  sink.write_text(name, s);
}

}  // namespace msfbm
