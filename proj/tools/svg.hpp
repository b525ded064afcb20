#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lsldg::cli {

/// Self-contained SVG line chart with error bars; categorical x axis.
/// Presentation only: nothing downstream reads these files back.
void write_curve_svg(const std::filesystem::path& path,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label,
                     const std::vector<std::string>& x_ticks,
                     const std::vector<double>& means,
                     const std::vector<double>& errors);

}  // namespace lsldg::cli
