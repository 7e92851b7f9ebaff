#ifndef DONUT_SSN_RENDER_HPP
#define DONUT_SSN_RENDER_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "donut_ssn/model.hpp"

namespace donut {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Parses "#rrggbb" (either case).
inline Rgb parse_hex_color(std::string_view hex) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("bad color \"" + std::string(hex) + "\"");
  };
  if (hex.size() != 7 || hex[0] != '#')
    throw Error("bad color \"" + std::string(hex) + "\"");
  auto byte = [&](std::size_t i) {
    return static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1]));
  };
  return {byte(1), byte(3), byte(5)};
}

inline std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

/// Relative luminance on the sRGB-encoded channels (Rec. 709 weights).
inline double luminance(Rgb c) {
  return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
}

struct RingBand {
  double inner = 0.0;
  double outer = 0.0;
};

/// Geometry and colors of the rendered donut. Ring radii are fractions of the
/// maximum radius; the three bands run near (innermost) to far.
struct DonutStyle {
  int size = 512;
  double hole_radius_frac = 0.20;
  RingBand near_ring{0.20, 0.45};
  RingBand medium_ring{0.45, 0.70};
  RingBand far_ring{0.70, 0.95};
  std::string zero_fill = "#ffffff";
  std::string zero_stroke = "#cccccc";
  std::string ramp_low = "#c6dbef";
  std::string ramp_high = "#08306b";
  double label_font_size = 14.0;

  const RingBand& ring(DistanceBucket b) const {
    switch (b) {
      case DistanceBucket::Near: return near_ring;
      case DistanceBucket::Medium: return medium_ring;
      case DistanceBucket::Far: return far_ring;
    }
    return far_ring;
  }

  bool valid() const {
    return size > 0 && label_font_size > 0.0 && 0.0 < hole_radius_frac &&
           hole_radius_frac == near_ring.inner &&
           near_ring.inner < near_ring.outer &&
           near_ring.outer == medium_ring.inner &&
           medium_ring.inner < medium_ring.outer &&
           medium_ring.outer == far_ring.inner &&
           far_ring.inner < far_ring.outer && far_ring.outer <= 1.0;
  }
};

/// Wedge fill for `count` on a linear ramp scaled to `max_count`. Zero maps
/// to the style's zero fill; max_count maps to ramp_high.
inline std::string color_for(std::uint64_t count, std::uint64_t max_count,
                             const DonutStyle& style = {}) {
  if (count == 0 || max_count == 0) return style.zero_fill;
  if (count > max_count) throw Error("count exceeds max_count");
  const double t = static_cast<double>(count) / static_cast<double>(max_count);
  const Rgb lo = parse_hex_color(style.ramp_low);
  const Rgb hi = parse_hex_color(style.ramp_high);
  auto mix = [t](std::uint8_t a, std::uint8_t b) {
    const double v = a + (static_cast<double>(b) - a) * t;
    return static_cast<std::uint8_t>(std::floor(v + 0.5));
  };
  return to_hex({mix(lo.r, hi.r), mix(lo.g, hi.g), mix(lo.b, hi.b)});
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
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

}  // namespace detail

/// Renders the 8 x 3 wedge donut as a standalone SVG 1.1 document. Data-space
/// angles are measured counter-clockwise from East and drawn with North up.
/// Output depends only on the inputs.
inline std::string render_donut(const DonutAggregate& agg,
                                const DonutStyle& style = {}) {
  using detail::fixed6;
  if (!style.valid()) throw Error("invalid donut style");

  const double half = style.size / 2.0;
  const double cx = half;
  const double cy = half;
  // Leave a margin outside the far ring for the compass labels.
  const double max_radius = half - style.label_font_size;
  const double label_radius = (style.far_ring.outer * max_radius + half) / 2.0;
  const std::uint64_t max_count = agg.max_cell();

  auto px = [&](double r, double deg) {
    return fixed6(cx + r * std::cos(deg * std::numbers::pi / 180.0));
  };
  auto py = [&](double r, double deg) {
    return fixed6(cy - r * std::sin(deg * std::numbers::pi / 180.0));
  };

  const std::string size = std::to_string(style.size);
  std::string out;
  out.reserve(8192);
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         size + "\" height=\"" + size + "\" viewBox=\"0 0 " + size + " " +
         size + "\">\n";
  out += "<g id=\"wedges\" stroke-width=\"1\">\n";

  for (Direction d : kCanonicalDirections) {
    const double mid = 45.0 * static_cast<int>(d);
    const double a0 = mid - 22.5;
    const double a1 = mid + 22.5;
    for (DistanceBucket b : kBuckets) {
      const RingBand& band = style.ring(b);
      const double r_in = band.inner * max_radius;
      const double r_out = band.outer * max_radius;
      const std::uint64_t count = agg.at(d, b);
      const std::string fill = color_for(count, max_count, style);
      const std::string stroke =
          count == 0 ? style.zero_stroke : style.zero_fill;
      const std::string ri = fixed6(r_in);
      const std::string ro = fixed6(r_out);

      // Outer arc runs counter-clockwise on screen (sweep 0) from a0 to a1,
      // inner arc returns clockwise (sweep 1).
      out += "<path d=\"M " + px(r_out, a0) + " " + py(r_out, a0) + " A " +
             ro + " " + ro + " 0 0 0 " + px(r_out, a1) + " " + py(r_out, a1) +
             " L " + px(r_in, a1) + " " + py(r_in, a1) + " A " + ri + " " +
             ri + " 0 0 1 " + px(r_in, a0) + " " + py(r_in, a0) + " Z\"";
      out += " fill=\"" + fill + "\" stroke=\"" + stroke + "\"";
      out += " data-direction=\"" + std::string(to_string(d)) +
             "\" data-bucket=\"" + std::string(to_string(b)) +
             "\" data-count=\"" + std::to_string(count) + "\"/>\n";
    }
  }
  out += "</g>\n";

  const std::string font = fixed6(style.label_font_size);
  out += "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" + font +
         "\" fill=\"#333333\" text-anchor=\"middle\" "
         "dominant-baseline=\"central\">\n";
  for (Direction d : kCanonicalDirections) {
    const double mid = 45.0 * static_cast<int>(d);
    out += "<text x=\"" + px(label_radius, mid) + "\" y=\"" +
           py(label_radius, mid) + "\">" +
           detail::xml_escape(to_string(d)) + "</text>\n";
  }
  out += "</g>\n";

  out += "<text id=\"node-count\" x=\"" + fixed6(cx) + "\" y=\"" + fixed6(cy) +
         "\" font-family=\"sans-serif\" font-size=\"" +
         fixed6(style.label_font_size * 2.0) +
         "\" font-weight=\"bold\" fill=\"#08306b\" text-anchor=\"middle\" "
         "dominant-baseline=\"central\">" +
         std::to_string(agg.node_count) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace donut

#endif  // DONUT_SSN_RENDER_HPP
