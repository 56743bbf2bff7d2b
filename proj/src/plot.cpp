#include "skelforge/plot.hpp"

#include <algorithm>
#include <cmath>

namespace skelforge {

namespace {

void put(RgbImage& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    std::uint8_t* p = &img.pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
}

void line(RgbImage& img, int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put(img, x0, y0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

}  // namespace

RgbImage render_curves(const std::vector<Series>& series, int width, int height) {
    RgbImage img;
    img.width = std::max(width, 64);
    img.height = std::max(height, 64);
    img.pixels.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3, 255);
    const int left = 32;
    const int right = img.width - 16;
    const int top = 16;
    const int bottom = img.height - 32;
    // Gridlines at every 0.1, then the frame.
    for (int i = 0; i <= 10; ++i) {
        const int y = bottom - (bottom - top) * i / 10;
        line(img, left, y, right, y, 230, 230, 230);
    }
    line(img, left, top, left, bottom, 0, 0, 0);
    line(img, left, bottom, right, bottom, 0, 0, 0);
    std::size_t longest = 0;
    for (const Series& s : series) longest = std::max(longest, s.values.size());
    const double span = longest > 1 ? static_cast<double>(longest - 1) : 1.0;
    for (const Series& s : series) {
        int px = -1;
        int py = -1;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            const double v = std::clamp(s.values[i], 0.0, 1.0);
            const int x = left + static_cast<int>(std::lround(static_cast<double>(right - left) * static_cast<double>(i) / span));
            const int y = bottom - static_cast<int>(std::lround(static_cast<double>(bottom - top) * v));
            if (px >= 0) line(img, px, py, x, y, s.r, s.g, s.b);
            for (int d = -2; d <= 2; ++d) {
                put(img, x + d, y, s.r, s.g, s.b);
                put(img, x, y + d, s.r, s.g, s.b);
            }
            px = x;
            py = y;
        }
    }
    return img;
}

}  // namespace skelforge
