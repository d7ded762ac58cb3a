#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmsim/episode_log.hpp"
#include "mmsim/metrics.hpp"

namespace mmsim {

struct PlotOutput {
  std::vector<std::filesystem::path> files;
  std::string notice;  ///< set when nothing was drawn
};

/// SVG charts with fixed file names:
///   pnl_curves.svg, inventory_paths.svg, metrics_bar.svg   always
///   omega_trajectory.svg                                   a hybrid agent is present
///   quote_distance.svg                                     a metric pair is present
/// Time series are averaged over episodes. No episodes: no files and a notice.
PlotOutput emit_plots(const MetricReport& report, const std::vector<EpisodeLog>& logs,
                      const std::filesystem::path& out_dir);

}  // namespace mmsim
