// Copyright 2026 The apdsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace apd::svg {

/// One set of axes. Coordinates are data units; the panel maps them onto
/// its pixel box when the figure is rendered.
class Panel {
 public:
  Panel(std::string title, std::string x_label, std::string y_label);

  void set_x_range(double lo, double hi);
  void set_y_range(double lo, double hi);
  void line(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
            double width = 1.5, const std::string& label = "");
  void error_bars(const std::vector<double>& x, const std::vector<double>& y,
                  const std::vector<double>& err, const std::string& color);
  void markers(const std::vector<double>& x, const std::vector<double>& y,
               const std::string& color, const std::string& label = "");
  /// Histogram drawn as steps over bin edges.
  void steps(const std::vector<double>& edges, const std::vector<double>& values,
             const std::string& color, const std::string& label = "");
  /// values[i][j] is the cell between x_edges[i..i+1] and y_edges[j..j+1];
  /// colour intensity is log-scaled.
  void heatmap(const std::vector<double>& x_edges, const std::vector<double>& y_edges,
               const std::vector<std::vector<double>>& values);
  void hline(double y, const std::string& color);
  void note(const std::string& text);

  std::string render(double left, double top, double width, double height) const;

 private:
  std::string title_, x_label_, y_label_;
  double x_lo_ = 0, x_hi_ = 1, y_lo_ = 0, y_hi_ = 1;
  bool x_set_ = false, y_set_ = false;
  std::vector<std::string> notes_;
  struct Item {
    enum Kind { kLine, kMarkers, kSteps, kErrors, kHeat, kHline } kind;
    std::vector<double> x, y, e;
    std::vector<std::vector<double>> grid;
    std::string color, label;
    double width = 1.5;
  };
  std::vector<Item> items_;
  void grow(const std::vector<double>& x, const std::vector<double>& y);
};

/// Panels laid out on a grid, written as a standalone SVG document.
void write_figure(const std::filesystem::path& path, const std::vector<Panel>& panels,
                  int columns = 1, double panel_width = 520, double panel_height = 340);

}  // namespace apd::svg
