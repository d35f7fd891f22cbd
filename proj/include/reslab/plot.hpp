#pragma once

#include "reslab/harness.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace reslab {

enum class PlotKind { kLine, kHeatmap, kScatter };

const char* to_string(PlotKind kind);
PlotKind parse_plot_kind(std::string_view text);

/// SVG text for a score table; all rows must share one experiment id.
///  - line: AP against intensity, one series per model/sigma (exp2: against
///    sigma, one series per anomaly kind)
///  - heatmap: AP over intensity x sigma
///  - scatter: one point per series, mean healthy-reconstruction error against
///    the series' mean AP
/// Statistics are taken from the rows as they are. Throws kEmptyInput for an
/// empty table and kInvalidArgument when the rows lack what the plot needs.
std::string render_plot(const std::vector<ScoreRow>& rows, PlotKind kind);

}  // namespace reslab
