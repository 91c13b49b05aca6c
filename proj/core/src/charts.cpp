#include "vnslab/charts.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace vnslab::io {

namespace {
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
}

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<double>& t,
                     const std::vector<std::pair<std::string, std::vector<double>>>& series,
                     bool log_y) {
  const double W = 720, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);

  double tmin = t.empty() ? 0.0 : t.front();
  double tmax = t.empty() ? 1.0 : t.back();
  if (tmax <= tmin) tmax = tmin + 1.0;
  double ymin = 1e300, ymax = -1e300;
  for (const auto& [name, ys] : series)
    for (double y : ys) {
      double v = log_y ? (y > 0 ? std::log10(y) : 0.0) : y;
      if (log_y && y <= 0) continue;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (ymax == ymin) ymax = ymin + 1;

  auto X = [&](double x) { return ml + (x - tmin) / (tmax - tmin) * (W - ml - mr); };
  auto Y = [&](double y) {
    double v = log_y ? (y > 0 ? std::log10(y) : ymin) : y;
    return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-family='sans-serif'"
      << " font-size='16'>" << title << (log_y ? " (log scale)" : "") << "</text>\n";
  out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='"
      << H - mb << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  for (int g = 0; g <= 4; ++g) {
    double yy = mt + g * (H - mt - mb) / 4.0;
    double val = ymax - g * (ymax - ymin) / 4.0;
    out << "<line x1='" << ml << "' y1='" << yy << "' x2='" << W - mr << "' y2='" << yy
        << "' stroke='#dddddd'/>\n";
    out << "<text x='" << ml - 6 << "' y='" << yy + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
        << (log_y ? "1e" : "") << (log_y ? std::to_string((int)std::round(val))
                                         : std::to_string(val).substr(0, 8))
        << "</text>\n";
    double xx = ml + g * (W - ml - mr) / 4.0;
    double tv = tmin + g * (tmax - tmin) / 4.0;
    out << "<text x='" << xx << "' y='" << H - mb + 18
        << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
        << std::to_string(tv).substr(0, 6) << "</text>\n";
  }
  int ci = 0;
  double ly = mt + 8;
  for (const auto& [name, ys] : series) {
    const char* color = kColors[ci % 5];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < t.size() && i < ys.size(); ++i) {
      if (log_y && ys[i] <= 0) continue;
      out << X(t[i]) << "," << Y(ys[i]) << " ";
    }
    out << "'/>\n";
    out << "<text x='" << W - mr - 8 << "' y='" << ly
        << "' text-anchor='end' font-family='sans-serif' font-size='12' fill='" << color
        << "'>" << name << "</text>\n";
    ly += 16;
    ++ci;
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

void write_run_charts(const std::vector<diag::DiagnosticsRecord>& records,
                      const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<double> t, E, D, Emod, drift, mass;
  for (const auto& r : records) {
    t.push_back(r.t);
    E.push_back(r.E);
    D.push_back(r.D);
    Emod.push_back(r.Emod);
    mass.push_back(r.mass - 1.0);
  }
  if (!records.empty()) {
    Vec m0 = add(records.front().mean_u, records.front().mean_j, 3);
    for (const auto& r : records) {
      Vec m = add(r.mean_u, r.mean_j, 3);
      drift.push_back(norm2(sub(m, m0, 3), 3));
    }
  }
  write_svg_chart(dir + "/energy.svg", "kinetic energy and dissipation", t,
                  {{"E", E}, {"D", D}}, false);
  write_svg_chart(dir + "/modulated_energy.svg", "modulated energy", t, {{"Emod", Emod}},
                  true);
  write_svg_chart(dir + "/conservation.svg", "conservation drifts", t,
                  {{"|<u+j>-<u0+j0>|", drift}, {"mass-1", mass}}, false);
}

}  // namespace vnslab::io
