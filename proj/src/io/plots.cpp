// SPDX-License-Identifier: Apache-2.0
#include "qbc/io/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "qbc/errors.hpp"

namespace qbc::io {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 45.0;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(lo < hi)) {
    const double d = lo == 0.0 ? 1.0 : std::fabs(lo) * 0.1;
    return {lo - d, hi + d};
  }
  return {lo, hi};
}

void render_panel(std::string& out, const Panel& p, double y0, double width,
                  double height) {
  const double pw = width - kLeft - kRight;
  const double ph = height - kTop - kBottom;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  double min_positive = INFINITY;
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      if (s.y[i] > 0.0) min_positive = std::min(min_positive, s.y[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0, ylo = 0.0, yhi = 1.0;
  const bool log_y = p.log_y && std::isfinite(min_positive);
  auto ty = [&](double v) {
    return log_y ? std::log10(std::max(v, min_positive)) : v;
  };
  const Range xr = padded(xlo, xhi);
  const Range yr = log_y ? padded(std::floor(ty(min_positive)),
                                  std::ceil(ty(std::max(yhi, min_positive))))
                         : padded(ylo, yhi);
  auto sx = [&](double v) {
    return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * pw;
  };
  auto sy = [&](double v) {
    return y0 + kTop + ph - (ty(v) - yr.lo) / (yr.hi - yr.lo) * ph;
  };

  out += "<g class=\"panel\">\n";
  out += "<text x=\"" + fmt("%.1f", kLeft + pw / 2) + "\" y=\"" +
         fmt("%.1f", y0 + 18) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + escape(p.title) +
         "</text>\n";
  out += "<rect x=\"" + fmt("%.1f", kLeft) + "\" y=\"" + fmt("%.1f", y0 + kTop) +
         "\" width=\"" + fmt("%.1f", pw) + "\" height=\"" + fmt("%.1f", ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  // Ticks: five on x, decades (or five) on y.
  for (int i = 0; i <= 4; ++i) {
    const double v = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double px = sx(v);
    out += "<line x1=\"" + fmt("%.1f", px) + "\" y1=\"" +
           fmt("%.1f", y0 + kTop + ph) + "\" x2=\"" + fmt("%.1f", px) +
           "\" y2=\"" + fmt("%.1f", y0 + kTop + ph + 4) +
           "\" stroke=\"#444\"/>\n";
    out += "<text x=\"" + fmt("%.1f", px) + "\" y=\"" +
           fmt("%.1f", y0 + kTop + ph + 16) +
           "\" text-anchor=\"middle\" font-size=\"10\">" + fmt("%.4g", v) +
           "</text>\n";
  }
  std::vector<double> yticks;
  if (log_y) {
    for (double d = yr.lo; d <= yr.hi + 1e-9; d += 1.0) yticks.push_back(d);
  } else {
    for (int i = 0; i <= 4; ++i)
      yticks.push_back(yr.lo + (yr.hi - yr.lo) * i / 4.0);
  }
  for (double t : yticks) {
    const double py = y0 + kTop + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph;
    out += "<line x1=\"" + fmt("%.1f", kLeft - 4) + "\" y1=\"" +
           fmt("%.1f", py) + "\" x2=\"" + fmt("%.1f", kLeft) + "\" y2=\"" +
           fmt("%.1f", py) + "\" stroke=\"#444\"/>\n";
    const std::string label = log_y ? "1e" + fmt("%.0f", t) : fmt("%.3g", t);
    out += "<text x=\"" + fmt("%.1f", kLeft - 6) + "\" y=\"" +
           fmt("%.1f", py + 3) + "\" text-anchor=\"end\" font-size=\"10\">" +
           label + "</text>\n";
  }
  out += "<text x=\"" + fmt("%.1f", kLeft + pw / 2) + "\" y=\"" +
         fmt("%.1f", y0 + height - 8) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + escape(p.x_label) +
         "</text>\n";
  out += "<text x=\"14\" y=\"" + fmt("%.1f", y0 + kTop + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 " +
         fmt("%.1f", y0 + kTop + ph / 2) + ")\">" + escape(p.y_label) +
         (log_y ? " (log)" : "") + "</text>\n";

  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const Series& s = p.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string d;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen_down = false;
        continue;
      }
      d += (pen_down ? "L" : "M") + fmt("%.2f", sx(s.x[i])) + "," +
           fmt("%.2f", sy(s.y[i])) + " ";
      pen_down = true;
    }
    if (!d.empty()) d.pop_back();
    out += "<path class=\"series\" data-label=\"" + escape(s.label) +
           "\" d=\"" + d + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
    const double ly = y0 + kTop + 12 + 16.0 * static_cast<double>(k);
    const double lx = width - kRight + 10;
    out += "<line x1=\"" + fmt("%.1f", lx) + "\" y1=\"" + fmt("%.1f", ly) +
           "\" x2=\"" + fmt("%.1f", lx + 20) + "\" y2=\"" + fmt("%.1f", ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
    out += "<text class=\"legend\" x=\"" + fmt("%.1f", lx + 25) + "\" y=\"" +
           fmt("%.1f", ly + 4) + "\" font-size=\"10\">" + escape(s.label) +
           "</text>\n";
  }
  out += "</g>\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write '" + path.string() + "'");
  f << text;
}

}  // namespace

std::string render_svg(std::span<const Panel> panels, double width,
                       double panel_height) {
  const double height = panel_height * static_cast<double>(panels.size());
  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
      fmt("%.0f", width) + "\" height=\"" + fmt("%.0f", height) +
      "\" viewBox=\"0 0 " + fmt("%.0f", width) + " " + fmt("%.0f", height) +
      "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" "
      "fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    render_panel(out, panels[i], panel_height * static_cast<double>(i), width,
                 panel_height);
  out += "</svg>\n";
  return out;
}

PlotResult emit_plots(std::span<const MetricsRow> metrics,
                      std::span<const orchestrator::Instance> dataset,
                      std::span<const SpectrumOverlay> overlays,
                      const std::filesystem::path& outdir) {
  PlotResult result;
  if (metrics.empty()) {
    result.warnings.push_back("no metrics rows; plots skipped");
    return result;
  }
  std::filesystem::create_directories(outdir);

  std::map<std::size_t, std::pair<Series, Series>> per_model;
  for (const auto& r : metrics) {
    auto& [train, val] = per_model[r.model];
    train.x.push_back(static_cast<double>(r.epoch));
    train.y.push_back(r.train_mse);
    val.x.push_back(static_cast<double>(r.epoch));
    val.y.push_back(r.val_mse);
  }
  Panel loss{"Loss per model", "epoch", "MSE", true, {}};
  for (auto& [m, pair] : per_model) {
    pair.first.label = "model " + std::to_string(m) + " train";
    pair.first.dashed = true;
    pair.second.label = "model " + std::to_string(m) + " val";
    loss.series.push_back(pair.first);
    loss.series.push_back(pair.second);
  }
  write_file(outdir / "loss.svg", render_svg(std::span(&loss, 1)));
  result.files.push_back(outdir / "loss.svg");

  // Dataset size and epsilon once per epoch (from the model 0 rows).
  Series size{"dataset size", {}, {}, false};
  Series eps{"epsilon", {}, {}, false};
  std::size_t last_epoch = SIZE_MAX;
  for (const auto& r : metrics) {
    if (r.epoch == last_epoch) continue;
    last_epoch = r.epoch;
    size.x.push_back(static_cast<double>(r.epoch));
    size.y.push_back(static_cast<double>(r.dataset_size));
    eps.x.push_back(static_cast<double>(r.epoch));
    eps.y.push_back(r.epsilon);
  }
  std::vector<Panel> growth{
      Panel{"Dataset size", "epoch", "instances", false, {size}},
      Panel{"Exploration probability", "epoch", "epsilon", false, {eps}}};
  if (!dataset.empty()) {
    Series unc{"uncertainty at acquisition", {}, {}, false};
    for (const auto& in : dataset) {
      if (in.mode == orchestrator::SelectionMode::seed) continue;
      unc.x.push_back(static_cast<double>(in.id));
      unc.y.push_back(in.uncertainty);
    }
    if (!unc.x.empty())
      growth.push_back(
          Panel{"Disagreement of acquired instances", "instance id",
                "disagreement", true, {unc}});
  }
  write_file(outdir / "dataset.svg", render_svg(growth));
  result.files.push_back(outdir / "dataset.svg");

  if (overlays.empty()) {
    result.warnings.push_back("no prediction overlays; spectra.svg skipped");
    return result;
  }
  std::vector<Panel> spectra;
  for (const auto& o : overlays) {
    Series truth{"true", {}, o.truth, false};
    Series pred{"predicted", {}, o.prediction, true};
    const std::size_t len = o.truth.size();
    for (std::size_t j = 0; j < len; ++j) {
      const double x =
          len > 1 ? static_cast<double>(j) / static_cast<double>(len - 1) : 0.0;
      truth.x.push_back(x);
    }
    pred.x = truth.x;
    spectra.push_back(Panel{o.label, "x", "y", false, {truth, pred}});
  }
  write_file(outdir / "spectra.svg", render_svg(spectra, 720.0, 240.0));
  result.files.push_back(outdir / "spectra.svg");
  return result;
}

}  // namespace qbc::io
