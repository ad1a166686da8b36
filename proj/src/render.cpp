#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "wvf/harness.hpp"

namespace wvf {

namespace {

constexpr int kCell = 24;
constexpr int kTileCell = 3;
constexpr const char* kWall = "#404040";
constexpr const char* kEmpty = "#e8e8e8";

struct Rgb {
  double r, g, b;
};

constexpr Rgb kLow{59, 76, 192};
constexpr Rgb kMid{247, 247, 247};
constexpr Rgb kHigh{180, 4, 38};

struct Scale {
  double lo = 0.0;
  double hi = 0.0;

  double position(double v) const {
    return hi > lo ? (v - lo) / (hi - lo) : 0.5;
  }
};

template <typename Range>
Scale scale_of(const Range& values) {
  Scale s;
  bool any = false;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (!any) {
      s.lo = s.hi = v;
      any = true;
    }
    s.lo = std::min(s.lo, v);
    s.hi = std::max(s.hi, v);
  }
  return s;
}

void header(std::ostream& out, int width, int height) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
}

void rect(std::ostream& out, int x, int y, int size, const std::string& fill,
          const std::string& extra = "") {
  out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << size
      << "\" height=\"" << size << "\" fill=\"" << fill << '"' << extra
      << "/>\n";
}

}  // namespace

std::string diverging_colour(double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
  const Rgb& a = t < 0.5 ? kLow : kMid;
  const Rgb& b = t < 0.5 ? kMid : kHigh;
  const double u = t < 0.5 ? t / 0.5 : (t - 0.5) / 0.5;
  auto channel = [u](double x, double y) {
    return static_cast<int>(std::lround(x + (y - x) * u));
  };
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", channel(a.r, b.r),
                channel(a.g, b.g), channel(a.b, b.b));
  return buf;
}

void render_heatmap(std::ostream& out, const GridWorld& grid,
                    std::span<const double> state_values) {
  if (state_values.size() != static_cast<std::size_t>(grid.state_count())) {
    throw DomainError("heatmap needs one value per free cell: got " +
                      std::to_string(state_values.size()) + ", expected " +
                      std::to_string(grid.state_count()));
  }
  const GridLayout& layout = grid.layout();
  const Scale scale = scale_of(state_values);
  header(out, layout.width * kCell, layout.height * kCell);
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      const auto s = grid.state_of({x, y});
      if (!s) {
        rect(out, x * kCell, y * kCell, kCell, kWall);
        continue;
      }
      const double t = scale.position(state_values[*s]);
      rect(out, x * kCell, y * kCell, kCell, diverging_colour(t),
           " data-state=\"" + std::to_string(*s) + "\" data-t=\"" +
               format_double(t) + "\"");
    }
  }
  out << "</svg>\n";
}

void render_goal_tiled(std::ostream& out, const GridWorld& grid,
                       const WVFTable& table) {
  if (table.state_count() != grid.state_count()) {
    throw DomainError("table does not match the grid");
  }
  const GridLayout& layout = grid.layout();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(table.state_count()) *
                 table.goal_count());
  for (int gi = 0; gi < table.goal_count(); ++gi) {
    for (StateId s = 0; s < table.state_count(); ++s) {
      values.push_back(table.value(s, gi));
    }
  }
  const Scale scale = scale_of(values);
  const int tile_w = layout.width * kTileCell;
  const int tile_h = layout.height * kTileCell;
  header(out, layout.width * tile_w, layout.height * tile_h);
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      const auto g = grid.state_of({x, y});
      const auto gi = g ? table.goal_index(*g) : std::nullopt;
      const int ox = x * tile_w;
      const int oy = y * tile_h;
      if (!gi) {
        out << "<rect x=\"" << ox << "\" y=\"" << oy << "\" width=\"" << tile_w
            << "\" height=\"" << tile_h << "\" fill=\""
            << (g ? kEmpty : kWall) << "\"/>\n";
        continue;
      }
      out << "<g data-goal=\"" << *g << "\">\n";
      for (int cy = 0; cy < layout.height; ++cy) {
        for (int cx = 0; cx < layout.width; ++cx) {
          const auto s = grid.state_of({cx, cy});
          const std::string fill =
              s ? diverging_colour(scale.position(
                      values[static_cast<std::size_t>(*gi) *
                                 table.state_count() +
                             *s]))
                : kWall;
          rect(out, ox + cx * kTileCell, oy + cy * kTileCell, kTileCell, fill);
        }
      }
      out << "</g>\n";
    }
  }
  out << "</svg>\n";
}

void render_transitions(std::ostream& out, const GridWorld& grid,
                        const InferredModel& model,
                        std::span<const StateId> probes) {
  const GridLayout& layout = grid.layout();
  const WorldSpec& truth = *grid.world();
  header(out, layout.width * kCell, layout.height * kCell);
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      rect(out, x * kCell, y * kCell, kCell,
           layout.is_wall({x, y}) ? kWall : kEmpty);
    }
  }
  auto centre = [](int v) { return v * kCell + kCell / 2; };
  for (StateId s : probes) {
    const Cell from = grid.cell_of(s);
    for (ActionId a = 0; a < model.action_count(); ++a) {
      if (model.entry(s, a) != InferredModel::Entry::Inferred) continue;
      const StateId next = model.successor(s, a);
      const Cell to = grid.cell_of(next);
      const bool correct = truth.transition(s, a).next == next;
      const char* colour = correct ? "#000000" : "#d62728";
      out << "<line x1=\"" << centre(from.x) << "\" y1=\"" << centre(from.y)
          << "\" x2=\"" << centre(to.x) << "\" y2=\"" << centre(to.y)
          << "\" stroke=\"" << colour << "\" stroke-width=\"2\" data-state=\""
          << s << "\" data-action=\"" << a << "\" data-successor=\"" << next
          << "\" data-correct=\"" << correct << "\"/>\n";
      out << "<circle cx=\"" << centre(to.x) << "\" cy=\"" << centre(to.y)
          << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace wvf
