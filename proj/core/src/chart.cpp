#include "prepbench/chart.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "prepbench/errors.hpp"

namespace prepbench::chart {

const std::vector<Color>& palette() {
  static const std::vector<Color> colors = {
      {31, 119, 180}, {255, 127, 14}, {44, 160, 44},  {148, 103, 189},
      {140, 86, 75},  {227, 119, 194}, {127, 127, 127}, {188, 189, 34},
  };
  return colors;
}

namespace {

std::string hex(Color c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class SvgSurface final : public Surface {
public:
  SvgSurface(double w, double h) : Surface(w, h) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
          << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    body_ << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  }

  void rect(double x, double y, double w, double h, Color fill, bool outline) override {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
          << "\" height=\"" << num(h) << "\" fill=\"" << hex(fill) << "\"";
    if (outline) body_ << " stroke=\"#000000\" stroke-width=\"0.5\"";
    body_ << "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, Color color, double width) override {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << hex(color) << "\" stroke-width=\""
          << num(width) << "\"/>\n";
  }

  void circle(double cx, double cy, double r, Color color) override {
    body_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
          << "\" fill=\"" << hex(color) << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size, int anchor,
            Color color) override {
    const char* a = anchor < 0 ? "start" : (anchor == 0 ? "middle" : "end");
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
          << "\" font-family=\"sans-serif\" text-anchor=\"" << a << "\" fill=\"" << hex(color)
          << "\">" << xml_escape(s) << "</text>\n";
  }

  void save(const std::filesystem::path& path) override {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IOError("cannot write " + path.string());
    out << body_.str() << "</svg>\n";
  }

private:
  std::ostringstream body_;
};

// 5x7 bitmap glyphs for the printable ASCII range needed by chart labels.
const std::uint8_t* glyph_rows(char c);

class PngSurface final : public Surface {
public:
  PngSurface(double w, double h)
      : Surface(w, h),
        iw_(static_cast<int>(std::lround(w))),
        ih_(static_cast<int>(std::lround(h))),
        pixels_(static_cast<std::size_t>(iw_) * ih_ * 3, 255) {}

  void rect(double x, double y, double w, double h, Color fill, bool outline) override {
    const int x0 = clampx(std::lround(x)), x1 = clampx(std::lround(x + w));
    const int y0 = clampy(std::lround(y)), y1 = clampy(std::lround(y + h));
    for (int yy = y0; yy < y1; ++yy)
      for (int xx = x0; xx < x1; ++xx) put(xx, yy, fill);
    if (outline) {
      line(x, y, x + w, y, kBlack, 1);
      line(x, y + h, x + w, y + h, kBlack, 1);
      line(x, y, x, y + h, kBlack, 1);
      line(x + w, y, x + w, y + h, kBlack, 1);
    }
  }

  void line(double x1, double y1, double x2, double y2, Color color, double width) override {
    const int n = static_cast<int>(std::max(std::abs(x2 - x1), std::abs(y2 - y1))) + 1;
    const int half = std::max(0, static_cast<int>(std::lround(width / 2.0)) - 0);
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const int x = static_cast<int>(std::lround(x1 + t * (x2 - x1)));
      const int y = static_cast<int>(std::lround(y1 + t * (y2 - y1)));
      for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx)
          if (in_bounds(x + dx, y + dy)) put(x + dx, y + dy, color);
    }
  }

  void circle(double cx, double cy, double r, Color color) override {
    const int x0 = static_cast<int>(std::floor(cx - r)), x1 = static_cast<int>(std::ceil(cx + r));
    const int y0 = static_cast<int>(std::floor(cy - r)), y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (in_bounds(x, y) && (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
          put(x, y, color);
  }

  void text(double x, double y, const std::string& s, double size, int anchor,
            Color color) override {
    const int scale = std::max(1, static_cast<int>(std::lround(size / 7.0)));
    const int cw = 6 * scale;
    const int total = static_cast<int>(s.size()) * cw;
    int px = static_cast<int>(std::lround(x));
    if (anchor == 0) px -= total / 2;
    if (anchor > 0) px -= total;
    const int py = static_cast<int>(std::lround(y)) - 7 * scale;  // baseline-ish
    for (const char c : s) {
      const std::uint8_t* rows = glyph_rows(c);
      for (int gy = 0; gy < 7; ++gy)
        for (int gx = 0; gx < 5; ++gx)
          if (rows[gy] & (1 << (4 - gx)))
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx)
                if (in_bounds(px + gx * scale + sx, py + gy * scale + sy))
                  put(px + gx * scale + sx, py + gy * scale + sy, color);
      px += cw;
    }
  }

  void save(const std::filesystem::path& path) override {
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IOError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      std::fclose(fp);
      throw IOError("png encode failed for " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(iw_), static_cast<png_uint_32>(ih_), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < ih_; ++y)
      png_write_row(png, const_cast<png_bytep>(&pixels_[static_cast<std::size_t>(y) * iw_ * 3]));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
  }

private:
  bool in_bounds(int x, int y) const { return x >= 0 && x < iw_ && y >= 0 && y < ih_; }
  int clampx(long v) const { return static_cast<int>(std::clamp<long>(v, 0, iw_)); }
  int clampy(long v) const { return static_cast<int>(std::clamp<long>(v, 0, ih_)); }
  void put(int x, int y, Color c) {
    const std::size_t i = (static_cast<std::size_t>(y) * iw_ + x) * 3;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  int iw_, ih_;
  std::vector<std::uint8_t> pixels_;
};

// Font data: 5 bits per row, 7 rows. Covers digits, upper/lower letters and
// the punctuation chart labels use; unknown glyphs render as a box.
struct Glyph {
  char c;
  std::uint8_t rows[7];
};

constexpr Glyph kGlyphs[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'.', {0, 0, 0, 0, 0, 0x0C, 0x0C}},
    {',', {0, 0, 0, 0, 0x0C, 0x04, 0x08}},
    {'-', {0, 0, 0, 0x1F, 0, 0, 0}},
    {'+', {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0}},
    {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'=', {0, 0, 0x1F, 0, 0x1F, 0, 0}},
    {'#', {0x0A, 0x0A, 0x1F, 0x0A, 0x1F, 0x0A, 0x0A}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'x', {0, 0, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'a', {0, 0, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'b', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E}},
    {'c', {0, 0, 0x0E, 0x10, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F}},
    {'e', {0, 0, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
    {'g', {0, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'h', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'i', {0x04, 0, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'j', {0x02, 0, 0x06, 0x02, 0x02, 0x12, 0x0C}},
    {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0, 0, 0x1A, 0x15, 0x15, 0x15, 0x15}},
    {'n', {0, 0, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'o', {0, 0, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'p', {0, 0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10}},
    {'q', {0, 0x0D, 0x13, 0x13, 0x0F, 0x01, 0x01}},
    {'r', {0, 0, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0, 0, 0x0F, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0, 0, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'v', {0, 0, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'w', {0, 0, 0x11, 0x11, 0x15, 0x15, 0x0A}},
    {'y', {0, 0x11, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'z', {0, 0, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
};

const std::uint8_t* glyph_rows(char c) {
  for (const auto& g : kGlyphs)
    if (g.c == c) return g.rows;
  static const std::uint8_t box[7] = {0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F};
  return box;
}

}  // namespace

std::unique_ptr<Surface> make_surface(const std::string& format, double width, double height) {
  if (format == "svg") return std::make_unique<SvgSurface>(width, height);
  if (format == "png") return std::make_unique<PngSurface>(width, height);
  throw InvalidArgument("unsupported figure format '" + format + "'");
}

double Frame::map_y(double v) const {
  double t;
  if (log_scale) {
    const double lo = std::log10(ymin), hi = std::log10(ymax);
    t = (std::log10(std::max(v, 1e-12)) - lo) / (hi - lo);
  } else {
    t = (v - ymin) / (ymax - ymin);
  }
  return y1 - t * (y1 - y0);
}

void Frame::draw_axes(Surface& s, bool baseline_rule) const {
  s.line(x0, y0, x0, y1, kBlack, 1);
  s.line(x0, y1, x1, y1, kBlack, 1);
  if (log_scale) {
    const int dlo = static_cast<int>(std::floor(std::log10(ymin)));
    const int dhi = static_cast<int>(std::ceil(std::log10(ymax)));
    for (int d = dlo; d <= dhi; ++d) {
      const double v = std::pow(10.0, d);
      if (v < ymin || v > ymax) continue;
      const double y = map_y(v);
      s.line(x0 - 4, y, x0, y, kBlack, 1);
      s.line(x0, y, x1, y, kGrey, 0.5);
      char label[32];
      std::snprintf(label, sizeof label, d >= 0 ? "%.0f" : "%g", v);
      s.text(x0 - 6, y + 3, label, 10, 1);
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double v = ymin + (ymax - ymin) * i / 4.0;
      const double y = map_y(v);
      s.line(x0 - 4, y, x0, y, kBlack, 1);
      char label[32];
      std::snprintf(label, sizeof label, "%.3g", v);
      s.text(x0 - 6, y + 3, label, 10, 1);
    }
  }
  if (baseline_rule && 1.0 >= ymin && 1.0 <= ymax) {
    const double y = map_y(1.0);
    s.line(x0, y, x1, y, kRed, 1.5);  // the baseline at speedup 1
  }
}

}  // namespace prepbench::chart
