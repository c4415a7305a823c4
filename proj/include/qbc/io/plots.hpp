// SPDX-License-Identifier: Apache-2.0
#pragma once

// Self-contained SVG line charts. Output depends only on the inputs, so equal
// inputs give byte-identical files.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qbc/io/metrics.hpp"
#include "qbc/orchestrator/dataset.hpp"

namespace qbc::io {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

/// Panels stacked vertically. Each series is one <path class="series">
/// element carrying its label in data-label, plus a legend entry.
std::string render_svg(std::span<const Panel> panels, double width = 720.0,
                       double panel_height = 300.0);

struct SpectrumOverlay {
  std::string label;
  std::vector<double> truth;
  std::vector<double> prediction;
};

struct PlotResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// loss.svg (train and validation MSE per model, log ordinate), spectra.svg
/// (prediction against truth for each overlay) and dataset.svg (dataset size
/// and epsilon per epoch). Empty metrics write nothing and return a warning.
PlotResult emit_plots(std::span<const MetricsRow> metrics,
                      std::span<const orchestrator::Instance> dataset,
                      std::span<const SpectrumOverlay> overlays,
                      const std::filesystem::path& outdir);

}  // namespace qbc::io
