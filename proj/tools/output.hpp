#pragma once

#include <string>
#include <vector>

namespace escape::cli {

// Writes to a sibling temporary file, then renames over path.
void write_atomic(const std::string& path, const std::string& content);

// 17 significant digits, scientific: enough for a lossless double round trip.
std::string format_double(double v);

// Header line plus one row per index; all columns must have equal length.
std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

struct PlotCurve {
  std::string file;
  std::string title;
  int y_column = 2;
};

// gnuplot script plotting every curve on log-log axes.
std::string gnuplot_script(const std::string& title, const std::string& ylabel,
                           const std::vector<PlotCurve>& curves, bool log_y = true);

}  // namespace escape::cli
