#pragma once

#include <string>
#include <vector>

#include "vnslab/diagnostics.hpp"

namespace vnslab::io {

/// Minimal self-contained SVG line chart.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::vector<double>& t,
                     const std::vector<std::pair<std::string, std::vector<double>>>& series,
                     bool log_y);

/// Standard chart set for a run: energies, dissipation, log modulated
/// energy, conservation drifts.
void write_run_charts(const std::vector<diag::DiagnosticsRecord>& records,
                      const std::string& dir);

}  // namespace vnslab::io
