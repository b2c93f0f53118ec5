#pragma once

#include <string>
#include <vector>

#include "genlab/sweep.hpp"

namespace genlab {

enum class PlotKind {
  DivergenceVsWidth,   // per-critic payoffs against log2(width)
  GapVsWidth,          // generator gap and discriminator train/test gap
  FrechetVsDivergence  // scatter of the two metric families
};

PlotKind plot_kind_from_string(const std::string& name);  // throws ConfigError
std::string plot_kind_name(PlotKind kind);

// Deterministic standalone SVG: same rows produce identical bytes.  Failed
// rows are skipped; throws ContractError when nothing is plottable.
void write_svg_plot(const std::vector<SweepRow>& rows, PlotKind kind,
                    const std::string& path);

}  // namespace genlab
