#pragma once

// CSV export. Every number is written with %.17g so files round-trip exactly
// and identical runs give byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>

#include "pdebs/errors.hpp"
#include "pdebs/kernels.hpp"
#include "pdebs/sim/grids.hpp"

namespace pdebs::sim {

/// Line-buffered CSV writer with a fixed header.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, std::string_view header) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw ConfigError("cannot open output file " + path.string());
    out_ << header << '\n';
  }

  template <class... Ts>
  void row(Ts... v) {
    bool first = true;
    ((write_cell(static_cast<double>(v), first)), ...);
    out_ << '\n';
  }

  void flush() { out_.flush(); }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
  void write_cell(double v, bool& first) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) out_ << ',';
    out_ << buf;
    first = false;
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_norms(const std::filesystem::path& path, const NormSeries& s) {
  CsvWriter w(path, "t,l2,h1");
  const bool h1 = s.has_h1();
  for (std::size_t i = 0; i < s.size(); ++i) w.row(s.t[i], s.l2[i], h1 ? s.h1[i] : -1.0);
}

/// Row-major over the interior nodes (x fastest).
inline void write_snapshot(const std::filesystem::path& path, const Field2D& f) {
  CsvWriter w(path, "x,y,u");
  for (int j = 0; j < f.grid.ny; ++j)
    for (int i = 0; i < f.grid.nx; ++i) w.row(f.grid.x(i), f.grid.y(j), f.values(i, j));
}

inline void write_snapshot(const std::filesystem::path& path, const PolarField& f) {
  CsvWriter w(path, "r,theta,u");
  for (int j = 0; j < f.grid.nr; ++j)
    for (int l = 0; l < f.grid.ntheta; ++l) w.row(f.grid.r(j), f.grid.theta(l), f.values(j, l));
}

inline void write_kernel_table(const std::filesystem::path& path, const kernels::KernelTable& t) {
  CsvWriter w(path, "xi,value");
  for (std::size_t i = 0; i < t.size(); ++i) w.row(t.abscissae[i], t.values[i]);
}

}  // namespace pdebs::sim
