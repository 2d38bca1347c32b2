#pragma once

#include <string>
#include <vector>

namespace coldoc {

/// Renders a score matrix as a static SVG heatmap with a fixed diverging
/// ramp: -1 deep blue, 0 white, +1 deep red. Cell values are printed when
/// the matrix is small enough to stay readable.
std::string svg_heatmap(const std::vector<std::vector<double>>& matrix,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title);

}  // namespace coldoc
