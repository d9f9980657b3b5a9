#ifndef DAMC_SVG_HPP
#define DAMC_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace damc {

// Minimal CSV reader for the files this tool writes: no quoting, first row
// is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("csv: missing column '" + name + "'");
  }
};

inline CsvTable read_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("csv: cannot open " + file);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

namespace svg_detail {

struct Writer {
  std::ostringstream out;
  double width, height;
  Writer(double w, double h) : width(w), height(h) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0) {
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"" << fill << "\" fill-opacity=\"" << opacity << "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke = "black",
            double sw = 1.0) {
    out << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
        << "\" stroke=\"" << stroke << "\" stroke-width=\"" << sw << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "start", double rotate = 0.0) {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
        << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
    if (rotate != 0.0)
      out << " transform=\"rotate(" << rotate << " " << x << " " << y << ")\"";
    out << ">" << s << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke = "#1f77b4", double sw = 1.5) {
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << sw
        << "\" points=\"";
    for (const auto& [x, y] : pts) out << x << "," << y << " ";
    out << "\"/>\n";
  }
  void save(const std::string& file) {
    out << "</svg>\n";
    std::ofstream f(file);
    f << out.str();
  }
};

// Base colors per transition group, shaded darker for larger K.
inline std::string group_color(const std::string& transition, const std::string& path_kind,
                               double shade) {
  // shade in (0, 1]: larger = darker.
  auto mix = [&](int r, int g, int b) {
    const double f = 0.35 + 0.65 * shade;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(255 - (255 - r) * f),
                  static_cast<int>(255 - (255 - g) * f), static_cast<int>(255 - (255 - b) * f));
    return std::string(buf);
  };
  if (path_kind == "tempering") return mix(214, 39, 40);       // red family
  if (transition == "none" || transition == "-") return mix(31, 119, 180);  // blue
  if (transition == "stoch1") return mix(23, 190, 207);        // cyan
  if (transition == "stoch2") return mix(44, 160, 44);         // green
  if (transition == "det-hessian") return mix(227, 119, 194);  // pink
  if (transition == "det-hutchinson") return mix(188, 156, 18);  // yellow
  return mix(127, 127, 127);
}

}  // namespace svg_detail

// Grouped bar chart from a metrics CSV: one panel per target, groups keyed
// by (path, sampler, transition), one bar per K with darker shades for
// larger K, bar height = median of the metric over seeds.
inline void plot_metrics_csv(const std::string& csv_file, const std::string& out_file,
                             const std::string& metric = "sw2") {
  const CsvTable t = read_csv(csv_file);
  const int c_target = t.col("target"), c_path = t.col("path"), c_sampler = t.col("sampler"),
            c_trans = t.col("transition"), c_K = t.col("K"), c_metric = t.col(metric);

  // target -> group key -> K -> metric values over seeds
  std::map<std::string, std::map<std::string, std::map<int, std::vector<double>>>> data;
  for (const auto& row : t.rows) {
    const std::string group = row[c_path] + " " + row[c_sampler] + " " + row[c_trans];
    data[row[c_target]][group][std::stoi(row[c_K])].push_back(std::stod(row[c_metric]));
  }

  const double panel_w = 860, panel_h = 240, margin_l = 70, margin_b = 80, margin_t = 26;
  const int n_panels = std::max<std::size_t>(1, data.size());
  svg_detail::Writer w(margin_l + panel_w + 20,
                       margin_t + n_panels * (panel_h + margin_b));

  int panel = 0;
  for (const auto& [target, groups] : data) {
    const double top = margin_t + panel * (panel_h + margin_b);
    const double bottom = top + panel_h;
    // Collect medians and the value range.
    double vmin = 1e300, vmax = -1e300;
    std::map<std::string, std::map<int, double>> med;
    for (const auto& [g, ks] : groups)
      for (const auto& [K, vals] : ks) {
        std::vector<double> v = vals;
        std::sort(v.begin(), v.end());
        const double m = v.size() % 2 == 1 ? v[v.size() / 2]
                                           : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        med[g][K] = m;
        if (m > 0) vmin = std::min(vmin, m);
        vmax = std::max(vmax, m);
      }
    const bool log_scale = vmin < 1e299 && vmin > 0.0 && vmax / vmin > 10.0;
    if (vmin > vmax) {
      vmin = 0.0;
      vmax = 1.0;
    }
    if (log_scale) {
      vmin = std::pow(10.0, std::floor(std::log10(vmin)));
      vmax = std::pow(10.0, std::ceil(std::log10(vmax)));
    } else {
      vmin = 0.0;
      vmax = vmax <= 0.0 ? 1.0 : vmax * 1.05;
    }
    auto y_of = [&](double v) {
      if (log_scale)
        return bottom - panel_h * (std::log10(std::max(v, vmin)) - std::log10(vmin)) /
                            (std::log10(vmax) - std::log10(vmin));
      return bottom - panel_h * (v - vmin) / (vmax - vmin);
    };

    // Axes and ticks.
    w.line(margin_l, top, margin_l, bottom);
    w.line(margin_l, bottom, margin_l + panel_w, bottom);
    w.text(margin_l, top - 8, target + "  (" + metric + (log_scale ? ", log scale)" : ")"),
           12, "start");
    if (log_scale) {
      for (double e = std::log10(vmin); e <= std::log10(vmax) + 1e-9; e += 1.0) {
        const double y = y_of(std::pow(10.0, e));
        w.line(margin_l - 4, y, margin_l, y);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "1e%d", static_cast<int>(e));
        w.text(margin_l - 8, y + 4, buf, 10, "end");
      }
    } else {
      for (int i = 0; i <= 4; ++i) {
        const double v = vmin + (vmax - vmin) * i / 4;
        const double y = y_of(v);
        w.line(margin_l - 4, y, margin_l, y);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2g", v);
        w.text(margin_l - 8, y + 4, buf, 10, "end");
      }
    }

    // Bars.
    const int n_groups = static_cast<int>(groups.size());
    const double group_w = panel_w / std::max(1, n_groups);
    int gi = 0;
    for (const auto& [g, ks] : groups) {
      const double gx = margin_l + gi * group_w;
      const int n_bars = static_cast<int>(ks.size());
      const double bar_w = 0.8 * group_w / std::max(1, n_bars);
      std::vector<int> Ks;
      for (const auto& [K, _] : ks) Ks.push_back(K);
      std::sort(Ks.begin(), Ks.end());
      const std::string path_kind = g.substr(0, g.find(' '));
      std::string trans = g.substr(g.rfind(' ') + 1);
      for (int bi = 0; bi < n_bars; ++bi) {
        const double shade = n_bars == 1 ? 1.0 : (bi + 1.0) / n_bars;
        const double v = med[g][Ks[bi]];
        const double y = y_of(std::max(v, log_scale ? vmin : 0.0));
        w.rect(gx + 0.1 * group_w + bi * bar_w, y, bar_w * 0.92, bottom - y,
               svg_detail::group_color(trans, path_kind, shade));
      }
      w.text(gx + 0.5 * group_w, bottom + 12, g, 10, "middle", 0.0);
      ++gi;
    }
    ++panel;
  }
  if (data.empty()) {
    w.line(margin_l, margin_t, margin_l, margin_t + panel_h);
    w.line(margin_l, margin_t + panel_h, margin_l + panel_w, margin_t + panel_h);
    w.text(margin_l + panel_w / 2, margin_t + panel_h / 2, "no rows", 12, "middle");
  }
  w.save(out_file);
}

// Heatmap of per-level densities (path_density CSV) with level index on the
// vertical axis.
inline void plot_path_density_csv(const std::string& csv_file, const std::string& out_file) {
  const CsvTable t = read_csv(csv_file);
  const int c_level = t.col("level"), c_x = t.col("x"), c_d = t.col("density");
  int K = 0;
  std::vector<double> xs;
  std::map<int, std::vector<double>> levels;
  for (const auto& row : t.rows) {
    const int k = std::stoi(row[c_level]);
    K = std::max(K, k);
    levels[k].push_back(std::stod(row[c_d]));
    if (k == 0) xs.push_back(std::stod(row[c_x]));
  }
  const double margin = 50, cell_h_max = 8.0;
  const double width = 760, height = std::min(560.0, cell_h_max * (K + 1)) + 2 * margin;
  const double plot_h = height - 2 * margin, plot_w = width - 2 * margin;
  svg_detail::Writer w(width, height);
  const double cw = plot_w / std::max<std::size_t>(1, xs.size());
  const double ch = plot_h / (K + 1);
  for (const auto& [k, dens] : levels) {
    const double dmax = *std::max_element(dens.begin(), dens.end());
    for (std::size_t i = 0; i < dens.size(); ++i) {
      const double v = dmax > 0 ? dens[i] / dmax : 0.0;
      if (v < 0.005) continue;
      char color[16];
      const int c = static_cast<int>(255 * (1.0 - v));
      std::snprintf(color, sizeof(color), "#%02x%02xff", c, c);
      // Level 0 (target) at the bottom.
      w.rect(margin + i * cw, margin + (K - k) * ch, cw + 0.5, ch + 0.5, color);
    }
  }
  w.line(margin, margin, margin, margin + plot_h);
  w.line(margin, margin + plot_h, margin + plot_w, margin + plot_h);
  w.text(margin, margin - 8, "per-level density (level 0 = target at bottom)", 12);
  w.save(out_file);
}

// Strongest-mode mass profile (mode_mass CSV) across levels.
inline void plot_mode_mass_csv(const std::string& csv_file, const std::string& out_file) {
  const CsvTable t = read_csv(csv_file);
  const int c_level = t.col("level"), c_m = t.col("mass");
  std::vector<std::pair<int, double>> pts;
  for (const auto& row : t.rows)
    pts.emplace_back(std::stoi(row[c_level]), std::stod(row[c_m]));
  std::sort(pts.begin(), pts.end());
  const double margin = 50, width = 760, height = 300;
  const double plot_w = width - 2 * margin, plot_h = height - 2 * margin;
  svg_detail::Writer w(width, height);
  w.line(margin, margin, margin, margin + plot_h);
  w.line(margin, margin + plot_h, margin + plot_w, margin + plot_h);
  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double y = margin + plot_h * (1.0 - v);
    w.line(margin - 4, y, margin, y);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    w.text(margin - 8, y + 4, buf, 10, "end");
  }
  std::vector<std::pair<double, double>> line;
  for (const auto& [k, m] : pts)
    line.emplace_back(margin + plot_w * k / std::max<std::size_t>(1, pts.size() - 1),
                      margin + plot_h * (1.0 - m));
  w.polyline(line);
  w.text(margin, margin - 8, "strongest-mode mass per level (level 0 = target)", 12);
  w.save(out_file);
}

}  // namespace damc

#endif
