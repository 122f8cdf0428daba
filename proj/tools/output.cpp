#include "output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace escape::cli {

void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("csv: header and column count differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("csv: ragged columns");
  std::string s;
  for (std::size_t j = 0; j < header.size(); ++j) s += (j ? "," : "") + header[j];
  s += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) s += ',';
      s += format_double(columns[j][i]);
    }
    s += '\n';
  }
  return s;
}

std::string gnuplot_script(const std::string& title, const std::string& ylabel, const std::vector<PlotCurve>& curves,
                           bool log_y) {
  std::string s;
  s += "# gnuplot script; run with: gnuplot -persist plot.gp\n";
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set title '" + title + "'\n";
  s += "set xlabel 't'\nset ylabel '" + ylabel + "'\n";
  s += log_y ? "set logscale xy\n" : "set logscale x\n";
  s += "set format y '%g'\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    s += i == 0 ? "plot " : ", \\\n     ";
    s += "'" + curves[i].file + "' using 1:" + std::to_string(curves[i].y_column) + " with linespoints title '" +
         curves[i].title + "'";
  }
  s += '\n';
  return s;
}

}  // namespace escape::cli
