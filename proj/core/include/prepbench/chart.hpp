#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace prepbench::chart {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Color kBlack{0, 0, 0};
inline constexpr Color kWhite{255, 255, 255};
inline constexpr Color kRed{214, 39, 40};
inline constexpr Color kGrey{180, 180, 180};

/// Engine color palette (stable order).
const std::vector<Color>& palette();

/// Minimal draw surface with two backends: SVG (vector text output,
/// byte-stable) and PNG (software raster over libpng with a 5x7 font).
class Surface {
public:
  virtual ~Surface() = default;
  virtual void rect(double x, double y, double w, double h, Color fill, bool outline = false) = 0;
  virtual void line(double x1, double y1, double x2, double y2, Color color,
                    double width = 1.0) = 0;
  virtual void circle(double cx, double cy, double r, Color color) = 0;
  /// anchor: -1 left, 0 center, 1 right. Font size in pixels.
  virtual void text(double x, double y, const std::string& s, double size, int anchor,
                    Color color = kBlack) = 0;
  virtual void save(const std::filesystem::path& path) = 0;
  double width() const { return width_; }
  double height() const { return height_; }

protected:
  Surface(double w, double h) : width_(w), height_(h) {}
  double width_, height_;
};

std::unique_ptr<Surface> make_surface(const std::string& format, double width, double height);

/// Log-scale y axis mapping with decade ticks; draws the frame, ticks and a
/// horizontal baseline rule at y = 1 when `baseline_rule` is set.
struct Frame {
  double x0, y0, x1, y1;  // plot box, y grows downward
  double ymin, ymax;
  bool log_scale = false;

  double map_y(double v) const;
  void draw_axes(Surface& s, bool baseline_rule) const;
};

}  // namespace prepbench::chart
