#ifndef ACFS_FIGURES_HPP
#define ACFS_FIGURES_HPP

#include <string>
#include <vector>

#include "acfs/bench.hpp"

namespace acfs {

// One boxplot panel per (dgp, lambda): oracle J by method, log-scale y axis.
// Returns the emitted file paths.
std::vector<std::string> emit_figures(const std::string& results_path, const std::string& out_dir);

// One panel per swept parameter: median dots with inter-quartile bars.
std::vector<std::string> emit_sensitivity_figures(const std::vector<SensitivityPoint>& points,
                                                  const std::string& out_dir);

struct BoxStats {
    double median, q25, q75, lo_whisker, hi_whisker;
    std::vector<double> outliers;
};

// Whiskers at the most extreme samples within 1.5 IQR of the box.
BoxStats box_stats(const std::vector<double>& values);

} // namespace acfs

#endif
