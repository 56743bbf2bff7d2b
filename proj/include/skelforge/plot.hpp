#pragma once

#include <string>
#include <vector>

#include "skelforge/image_io.hpp"

namespace skelforge {

struct Series {
    std::string name;
    std::vector<double> values;
    std::uint8_t r = 0, g = 0, b = 0;
};

/// Line chart of each series over its index, y range [0, 1]. Plain raster,
/// no text: series are told apart by color.
RgbImage render_curves(const std::vector<Series>& series, int width = 480, int height = 320);

}  // namespace skelforge
