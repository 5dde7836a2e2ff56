#include "auctionvi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "auctionvi/errors.hpp"

namespace auctionvi {
namespace {

constexpr double kCanvas = 640.0;
constexpr double kMargin = 60.0;

struct Mapper {
  double lo1, hi1, lo2, hi2;
  double x(double b1) const {
    return kMargin + (b1 - lo1) / (hi1 - lo1) * (kCanvas - 2 * kMargin);
  }
  double y(double b2) const {
    return kCanvas - kMargin -
           (b2 - lo2) / (hi2 - lo2) * (kCanvas - 2 * kMargin);
  }
};

void arrow(std::ostringstream& os, double x0, double y0, double x1, double y1) {
  const double dx = x1 - x0, dy = y1 - y0;
  const double len = std::hypot(dx, dy);
  if (len < 1e-9) {
    os << "<circle cx='" << x0 << "' cy='" << y0
       << "' r='0.8' fill='#456'/>\n";
    return;
  }
  const double ux = dx / len, uy = dy / len;
  const double hx = x1 - 3.0 * ux, hy = y1 - 3.0 * uy;
  os << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x1 << "' y2='"
     << y1 << "' stroke='#456' stroke-width='1'/>\n";
  os << "<polygon points='" << x1 << "," << y1 << " " << (hx - 1.5 * uy) << ","
     << (hy + 1.5 * ux) << " " << (hx + 1.5 * uy) << "," << (hy - 1.5 * ux)
     << "' fill='#456'/>\n";
}

}  // namespace

std::string render_flow_svg(const FlowField& field,
                            const ViolationMap* violations,
                            const std::vector<Trajectory>& streamlines,
                            double star_b1, double star_b2,
                            const std::string& title,
                            std::span<const std::string> config_lines) {
  if (field.b1.empty() || field.b2.empty()) {
    throw PreconditionError("empty flow field");
  }
  Mapper map{field.b1.front(), field.b1.back(), field.b2.front(),
             field.b2.back()};

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kCanvas
     << "' height='" << kCanvas << "' viewBox='0 0 " << kCanvas << " "
     << kCanvas << "'>\n";
  if (!config_lines.empty()) {
    os << "<desc>";
    for (const auto& l : config_lines) os << l << "; ";
    os << "</desc>\n";
  }
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << kCanvas / 2 << "' y='28' text-anchor='middle' "
     << "font-family='sans-serif' font-size='16'>" << title << "</text>\n";

  // violation overlay first so arrows stay visible
  if (violations != nullptr && violations->b1.size() > 1) {
    const double cw = (map.x(violations->b1[1]) - map.x(violations->b1[0]));
    const double ch = (map.y(violations->b2[0]) - map.y(violations->b2[1]));
    for (size_t i = 0; i < violations->b1.size(); ++i) {
      for (size_t j = 0; j < violations->b2.size(); ++j) {
        if (!violations->violated[violations->index(i, j)]) continue;
        const double cx = map.x(violations->b1[i]);
        const double cy = map.y(violations->b2[j]);
        os << "<rect x='" << cx - cw / 2 << "' y='" << cy - ch / 2
           << "' width='" << cw << "' height='" << ch
           << "' fill='red' fill-opacity='0.30'/>\n";
      }
    }
  }

  // axes
  os << "<line x1='" << kMargin << "' y1='" << kCanvas - kMargin << "' x2='"
     << kCanvas - kMargin << "' y2='" << kCanvas - kMargin
     << "' stroke='black'/>\n";
  os << "<line x1='" << kMargin << "' y1='" << kCanvas - kMargin << "' x2='"
     << kMargin << "' y2='" << kMargin << "' stroke='black'/>\n";
  for (double t = 0.0; t <= 1.0001; t += 0.25) {
    const double b1 = field.b1.front() + t * (field.b1.back() - field.b1.front());
    const double b2 = field.b2.front() + t * (field.b2.back() - field.b2.front());
    os << "<text x='" << map.x(b1) << "' y='" << kCanvas - kMargin + 18
       << "' text-anchor='middle' font-family='sans-serif' font-size='11'>"
       << b1 << "</text>\n";
    os << "<text x='" << kMargin - 10 << "' y='" << map.y(b2) + 4
       << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << b2
       << "</text>\n";
  }
  os << "<text x='" << kCanvas / 2 << "' y='" << kCanvas - 14
     << "' text-anchor='middle' font-family='sans-serif' font-size='13'>"
     << "slope b1</text>\n";
  os << "<text x='16' y='" << kCanvas / 2
     << "' text-anchor='middle' font-family='sans-serif' font-size='13' "
     << "transform='rotate(-90 16 " << kCanvas / 2 << ")'>slope b2</text>\n";

  // arrows: subsample to at most 26 per axis, length by norm with a clamp
  double max_norm = 0.0;
  for (size_t k = 0; k < field.g1.size(); ++k) {
    if (!field.feasible[k]) continue;
    max_norm = std::max(max_norm, std::hypot(field.g1[k], field.g2[k]));
  }
  const size_t stride1 = std::max<size_t>(1, field.b1.size() / 26);
  const size_t stride2 = std::max<size_t>(1, field.b2.size() / 26);
  const double max_len =
      0.9 * (kCanvas - 2 * kMargin) / 26.0;  // keep arrows inside cells
  for (size_t i = 0; i < field.b1.size(); i += stride1) {
    for (size_t j = 0; j < field.b2.size(); j += stride2) {
      const size_t k = field.index(i, j);
      if (!field.feasible[k]) continue;
      const double gn = std::hypot(field.g1[k], field.g2[k]);
      if (max_norm <= 0) continue;
      const double len = max_len * std::min(1.0, gn / max_norm);
      if (gn < 1e-15) continue;
      const double x0 = map.x(field.b1[i]);
      const double y0 = map.y(field.b2[j]);
      arrow(os, x0, y0, x0 + len * field.g1[k] / gn,
            y0 - len * field.g2[k] / gn);
    }
  }

  // streamlines
  for (const auto& tr : streamlines) {
    if (tr.states.empty()) continue;
    os << "<polyline fill='none' stroke='#2a7' stroke-width='1.3' points='";
    for (const auto& s : tr.states) {
      os << map.x(s[0]) << "," << map.y(s[1]) << " ";
    }
    os << "'/>\n";
  }

  // star at the equilibrium
  {
    const double cx = map.x(star_b1), cy = map.y(star_b2);
    os << "<path d='";
    for (int p = 0; p < 10; ++p) {
      const double r = (p % 2 == 0) ? 10.0 : 4.0;
      const double a = -M_PI / 2 + p * M_PI / 5;
      os << (p == 0 ? "M" : "L") << cx + r * std::cos(a) << " "
         << cy + r * std::sin(a) << " ";
    }
    os << "Z' fill='gold' stroke='black' stroke-width='1'/>\n";
  }

  os << "</svg>\n";
  return os.str();
}

void write_flow_svg(const std::string& path, const FlowField& field,
                    const ViolationMap* violations,
                    const std::vector<Trajectory>& streamlines,
                    double star_b1, double star_b2, const std::string& title,
                    std::span<const std::string> config_lines) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << render_flow_svg(field, violations, streamlines, star_b1, star_b2,
                         title, config_lines);
}

}  // namespace auctionvi
