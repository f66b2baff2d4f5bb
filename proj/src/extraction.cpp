#include "flcs/lcs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace flcs {

std::string_view to_string(ExtractionMode mode) { return mode == ExtractionMode::level_set ? "level_set" : "ridge"; }

ExtractionMode extraction_mode_from_string(std::string_view name) {
  if (name == "level_set") return ExtractionMode::level_set;
  if (name == "ridge") return ExtractionMode::ridge;
  throw Error(ErrorCode::invalid_argument, "unknown extraction mode '" + std::string(name) + "'");
}

std::size_t RidgeSet::point_count() const {
  std::size_t n = 0;
  for (const auto& p : polylines) n += p.points.size();
  return n;
}

double line_angle(double ax, double ay, double bx, double by) {
  const double na = std::hypot(ax, ay);
  const double nb = std::hypot(bx, by);
  if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double c = std::min(1.0, std::abs(ax * bx + ay * by) / (na * nb));
  return std::acos(c);
}

double lambda1_quantile(const FieldGrid& field, double q) {
  std::vector<double> values;
  values.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field.valid[i]) values.push_back(field.lambda1[i]);
  }
  if (values.empty()) throw Error(ErrorCode::empty_field, "field has no valid samples");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Planar view of a 2-dimensional field with derivative helpers.
class PlanarField {
 public:
  explicit PlanarField(const FieldGrid& f)
      : f_(f), n0_(f.resolution[0]), n1_(f.resolution[1]), h0_(f.spacing(0)), h1_(f.spacing(1)) {}

  int n0() const { return n0_; }
  int n1() const { return n1_; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n1_ + j; }
  bool valid(int i, int j) const { return f_.valid[idx(i, j)] != 0; }
  double value(int i, int j) const { return f_.lambda1[idx(i, j)]; }
  double x(int i) const { return grid_coordinate(f_.window, 0, n0_, i); }
  double y(int j) const { return grid_coordinate(f_.window, 1, n1_, j); }
  double h0() const { return h0_; }
  double h1() const { return h1_; }
  const FieldGrid& field() const { return f_; }

  std::optional<int> along0(int i) const { return wrap(i, n0_, f_.window.periodic[0]); }
  std::optional<int> along1(int j) const { return wrap(j, n1_, f_.window.periodic[1]); }

  // Central differences, one-sided where a neighbour is missing.
  std::array<double, 2> gradient(int i, int j) const {
    return {derivative(i, j, true), derivative(i, j, false)};
  }

  // Hessian entries (xx, xy, yy); nullopt where the 3x3 stencil is incomplete.
  std::optional<std::array<double, 3>> hessian(int i, int j) const {
    const auto im = along0(i - 1), ip = along0(i + 1), jm = along1(j - 1), jp = along1(j + 1);
    if (!im || !ip || !jm || !jp) return std::nullopt;
    for (int a : {*im, i, *ip}) {
      for (int b : {*jm, j, *jp}) {
        if (!valid(a, b)) return std::nullopt;
      }
    }
    const double c = value(i, j);
    const double xx = (value(*ip, j) - 2.0 * c + value(*im, j)) / (h0_ * h0_);
    const double yy = (value(i, *jp) - 2.0 * c + value(i, *jm)) / (h1_ * h1_);
    const double xy =
        (value(*ip, *jp) - value(*ip, *jm) - value(*im, *jp) + value(*im, *jm)) / (4.0 * h0_ * h1_);
    return std::array<double, 3>{xx, xy, yy};
  }

  std::array<double, 2> xi(int i, int j) const {
    const std::size_t k = idx(i, j);
    const double a = f_.xi1[0][k], b = f_.xi1[1][k];
    const double n = std::hypot(a, b);
    return {a / n, b / n};
  }

 private:
  static std::optional<int> wrap(int i, int n, bool periodic) {
    if (i >= 0 && i < n) return i;
    if (periodic) return (i % n + n) % n;
    return std::nullopt;
  }

  double derivative(int i, int j, bool axis0) const {
    const auto m = axis0 ? along0(i - 1) : along1(j - 1);
    const auto p = axis0 ? along0(i + 1) : along1(j + 1);
    const double h = axis0 ? h0_ : h1_;
    auto at = [&](int k) { return axis0 ? value(k, j) : value(i, k); };
    auto ok = [&](const std::optional<int>& k) { return k && (axis0 ? valid(*k, j) : valid(i, *k)); };
    const int self = axis0 ? i : j;
    if (ok(m) && ok(p)) return (at(*p) - at(*m)) / (2.0 * h);
    if (ok(p)) return (at(*p) - at(self)) / h;
    if (ok(m)) return (at(self) - at(*m)) / h;
    return 0.0;
  }

  const FieldGrid& f_;
  int n0_, n1_;
  double h0_, h1_;
};

// Edge ids: 2*node for the edge towards +axis0, 2*node+1 towards +axis1.
using EdgeId = std::size_t;

struct Segment {
  EdgeId a;
  EdgeId b;
};

std::vector<Polyline> chain_segments(const std::vector<Segment>& segments,
                                     const std::unordered_map<EdgeId, RidgePoint>& points) {
  std::unordered_map<EdgeId, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].a].push_back(s);
    incident[segments[s].b].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> lines;

  auto walk = [&](std::size_t start, EdgeId from) {
    Polyline line;
    line.points.push_back(points.at(from));
    EdgeId cur_edge = from;
    std::size_t cur = start;
    for (;;) {
      used[cur] = true;
      const EdgeId other = segments[cur].a == cur_edge ? segments[cur].b : segments[cur].a;
      line.points.push_back(points.at(other));
      if (other == from) {
        line.closed = true;
        break;
      }
      std::optional<std::size_t> next;
      for (std::size_t s : incident[other]) {
        if (!used[s]) {
          next = s;
          break;
        }
      }
      if (!next) break;
      cur_edge = other;
      cur = *next;
    }
    lines.push_back(std::move(line));
  };

  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    if (incident[segments[s].a].size() == 1) {
      walk(s, segments[s].a);
    } else if (incident[segments[s].b].size() == 1) {
      walk(s, segments[s].b);
    }
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) walk(s, segments[s].a);
  }
  return lines;
}

// Cell corners c0=(i,j) c1=(i+1,j) c2=(i+1,j+1) c3=(i,j+1); edges e0=c0c1 e1=c1c2 e2=c3c2 e3=c0c3.
std::array<EdgeId, 4> cell_edges(const PlanarField& g, int i, int j) {
  return {2 * g.idx(i, j), 2 * g.idx(i + 1, j) + 1, 2 * g.idx(i, j + 1), 2 * g.idx(i, j) + 1};
}

void check_planar(const FieldGrid& field) {
  if (field.dim() != 2) {
    throw Error(ErrorCode::unsupported_dimension,
                "ridge extraction is implemented for 2-dimensional fields only; export the raw field instead");
  }
}

RidgePoint blend(const PlanarField& g, int ia, int ja, int ib, int jb, double t) {
  RidgePoint p;
  p.x = g.x(ia) + t * (g.x(ib) - g.x(ia));
  p.y = g.y(ja) + t * (g.y(jb) - g.y(ja));
  p.lambda1 = (1.0 - t) * g.value(ia, ja) + t * g.value(ib, jb);
  const FieldGrid& f = g.field();
  p.gap = (1.0 - t) * f.gap[g.idx(ia, ja)] + t * f.gap[g.idx(ib, jb)];
  auto xa = g.xi(ia, ja);
  auto xb = g.xi(ib, jb);
  if (xa[0] * xb[0] + xa[1] * xb[1] < 0.0) xb = {-xb[0], -xb[1]};
  double xx = (1.0 - t) * xa[0] + t * xb[0];
  double xy = (1.0 - t) * xa[1] + t * xb[1];
  const double n = std::hypot(xx, xy);
  if (n > 0.0) {
    xx /= n;
    xy /= n;
  }
  p.xi_x = xx;
  p.xi_y = xy;
  return p;
}

void finish_normal(RidgePoint& p, double nx, double ny) {
  const double n = std::hypot(nx, ny);
  if (n > 0.0) {
    p.nx = nx / n;
    p.ny = ny / n;
    p.angle = line_angle(p.nx, p.ny, p.xi_x, p.xi_y);
  } else {
    p.nx = p.ny = 0.0;
    p.angle = kNaN;
  }
}

// Pairs the four crossing edges of a cell for the shorter total segment length.
void pair_four(const std::array<EdgeId, 4>& e, const std::unordered_map<EdgeId, RidgePoint>& pts,
               std::vector<Segment>& out) {
  auto len = [&](EdgeId a, EdgeId b) {
    const RidgePoint& p = pts.at(a);
    const RidgePoint& q = pts.at(b);
    return std::hypot(p.x - q.x, p.y - q.y);
  };
  if (len(e[0], e[1]) + len(e[2], e[3]) <= len(e[3], e[0]) + len(e[1], e[2])) {
    out.push_back({e[0], e[1]});
    out.push_back({e[2], e[3]});
  } else {
    out.push_back({e[3], e[0]});
    out.push_back({e[1], e[2]});
  }
}

}  // namespace

RidgeSet extract_level_set(const FieldGrid& field, double quantile) {
  check_planar(field);
  if (!(quantile > 0.0 && quantile < 1.0)) throw Error(ErrorCode::invalid_argument, "quantile out of (0,1)");
  const double level = lambda1_quantile(field, quantile);
  const PlanarField g(field);

  std::unordered_map<EdgeId, RidgePoint> points;
  auto crossing = [&](int ia, int ja, int ib, int jb, EdgeId id) {
    if (!g.valid(ia, ja) || !g.valid(ib, jb)) return;
    const double va = g.value(ia, ja), vb = g.value(ib, jb);
    if ((va > level) == (vb > level)) return;
    const double t = (level - va) / (vb - va);
    RidgePoint p = blend(g, ia, ja, ib, jb, t);
    const auto ga = g.gradient(ia, ja);
    const auto gb = g.gradient(ib, jb);
    finish_normal(p, (1.0 - t) * ga[0] + t * gb[0], (1.0 - t) * ga[1] + t * gb[1]);
    points.emplace(id, p);
  };
  for (int i = 0; i < g.n0(); ++i) {
    for (int j = 0; j < g.n1(); ++j) {
      if (i + 1 < g.n0()) crossing(i, j, i + 1, j, 2 * g.idx(i, j));
      if (j + 1 < g.n1()) crossing(i, j, i, j + 1, 2 * g.idx(i, j) + 1);
    }
  }

  std::vector<Segment> segments;
  for (int i = 0; i + 1 < g.n0(); ++i) {
    for (int j = 0; j + 1 < g.n1(); ++j) {
      if (!g.valid(i, j) || !g.valid(i + 1, j) || !g.valid(i + 1, j + 1) || !g.valid(i, j + 1)) continue;
      const auto e = cell_edges(g, i, j);
      std::array<EdgeId, 4> hit{};
      int count = 0;
      for (EdgeId id : e) {
        if (points.contains(id)) hit[count++] = id;
      }
      if (count == 2) {
        segments.push_back({hit[0], hit[1]});
      } else if (count == 4) {
        // Saddle cell: the centre value decides which corners are joined.
        const double centre =
            0.25 * (g.value(i, j) + g.value(i + 1, j) + g.value(i + 1, j + 1) + g.value(i, j + 1));
        if ((centre > level) == (g.value(i, j) > level)) {
          segments.push_back({e[0], e[1]});
          segments.push_back({e[2], e[3]});
        } else {
          segments.push_back({e[3], e[0]});
          segments.push_back({e[1], e[2]});
        }
      }
    }
  }

  RidgeSet out;
  out.mode = ExtractionMode::level_set;
  out.level = level;
  out.polylines = chain_segments(segments, points);
  return out;
}

namespace {

struct RidgeNode {
  bool usable = false;
  double hx = 0.0, hy = 0.0;  // minor Hessian eigenvector
  double mu = 0.0;            // minor Hessian eigenvalue
  double s = 0.0;             // gradient . h
  bool concave = false;
};

RidgeNode ridge_node(const PlanarField& g, int i, int j) {
  RidgeNode n;
  if (!g.valid(i, j)) return n;
  const auto h = g.hessian(i, j);
  if (!h) return n;
  const double a = (*h)[0], b = (*h)[1], c = (*h)[2];
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  n.mu = mean - rad;
  // Reject nodes where the concave direction is lost in roundoff; the minor eigenvector flips there.
  n.concave = n.mu < 0.0 && -n.mu > 1e-3 * std::max(0.0, mean + rad);
  double vx, vy;
  if (b == 0.0) {
    vx = a <= c ? 1.0 : 0.0;
    vy = a <= c ? 0.0 : 1.0;
  } else {
    const double ux = b, uy = n.mu - a;
    const double wx = n.mu - c, wy = b;
    if (std::hypot(ux, uy) >= std::hypot(wx, wy)) {
      vx = ux;
      vy = uy;
    } else {
      vx = wx;
      vy = wy;
    }
  }
  const double norm = std::hypot(vx, vy);
  n.hx = vx / norm;
  n.hy = vy / norm;
  const auto grad = g.gradient(i, j);
  n.s = grad[0] * n.hx + grad[1] * n.hy;
  n.usable = true;
  return n;
}

}  // namespace

RidgeSet extract_ridges(const FieldGrid& field, double min_gap, double min_value) {
  check_planar(field);
  if (field.resolution[0] < 16 || field.resolution[1] < 16) {
    throw Error(ErrorCode::invalid_argument, "ridge extraction needs resolution >= 16 per axis");
  }
  const PlanarField g(field);
  std::vector<RidgeNode> nodes(field.size());
  for (int i = 0; i < g.n0(); ++i) {
    for (int j = 0; j < g.n1(); ++j) nodes[g.idx(i, j)] = ridge_node(g, i, j);
  }

  std::unordered_map<EdgeId, RidgePoint> points;
  auto crossing = [&](int ia, int ja, int ib, int jb, EdgeId id) {
    const RidgeNode& na = nodes[g.idx(ia, ja)];
    RidgeNode nb = nodes[g.idx(ib, jb)];
    if (!na.usable || !nb.usable || !na.concave || !nb.concave) return;
    if (na.hx * nb.hx + na.hy * nb.hy < 0.0) {
      nb.hx = -nb.hx;
      nb.hy = -nb.hy;
      nb.s = -nb.s;
    }
    if ((na.s >= 0.0) == (nb.s >= 0.0)) return;
    const double t = na.s / (na.s - nb.s);
    const double mu = (1.0 - t) * na.mu + t * nb.mu;
    if (!(mu < 0.0)) return;
    RidgePoint p = blend(g, ia, ja, ib, jb, t);
    if (p.lambda1 < min_value || p.gap < min_gap) return;
    finish_normal(p, (1.0 - t) * na.hx + t * nb.hx, (1.0 - t) * na.hy + t * nb.hy);
    points.emplace(id, p);
  };
  for (int i = 0; i < g.n0(); ++i) {
    for (int j = 0; j < g.n1(); ++j) {
      if (i + 1 < g.n0()) crossing(i, j, i + 1, j, 2 * g.idx(i, j));
      if (j + 1 < g.n1()) crossing(i, j, i, j + 1, 2 * g.idx(i, j) + 1);
    }
  }

  std::vector<Segment> segments;
  for (int i = 0; i + 1 < g.n0(); ++i) {
    for (int j = 0; j + 1 < g.n1(); ++j) {
      const auto e = cell_edges(g, i, j);
      std::array<EdgeId, 4> hit{};
      int count = 0;
      for (EdgeId id : e) {
        if (points.contains(id)) hit[count++] = id;
      }
      if (count == 2) {
        segments.push_back({hit[0], hit[1]});
      } else if (count == 4) {
        pair_four(e, points, segments);
      }
    }
  }

  RidgeSet out;
  out.mode = ExtractionMode::ridge;
  out.polylines = chain_segments(segments, points);
  // Isolated crossings (cells with a single hit) never make it into a segment and are dropped.
  return out;
}

RidgeSet extract_ridges(const FieldGrid& field, const ExtractionSettings& settings) {
  double floor = settings.min_value;
  if (settings.min_value_quantile > 0.0) floor = std::max(floor, lambda1_quantile(field, settings.min_value_quantile));
  return extract_ridges(field, settings.min_gap, floor);
}

namespace {

double wrapped(double d, const ChartDomain& window, int axis) {
  if (!window.periodic[axis]) return d;
  const double ext = window.extent(axis);
  return d - ext * std::round(d / ext);
}

double point_segment(double px, double py, const RidgePoint& a, const RidgePoint& b, const ChartDomain& w) {
  // Segments never cross a seam, so only the query point is shifted to the image nearest the midpoint.
  const double abx = b.x - a.x, aby = b.y - a.y;
  const double apx = wrapped(px - a.x - 0.5 * abx, w, 0) + 0.5 * abx;
  const double apy = wrapped(py - a.y - 0.5 * aby, w, 1) + 0.5 * aby;
  const double len2 = abx * abx + aby * aby;
  double t = len2 > 0.0 ? (apx * abx + apy * aby) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(apx - t * abx, apy - t * aby);
}

}  // namespace

double distance_to_ridges(double x, double y, const RidgeSet& ridges, const ChartDomain& window) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : ridges.polylines) {
    const auto& pts = line.points;
    if (pts.size() == 1) {
      best = std::min(best, point_segment(x, y, pts[0], pts[0], window));
      continue;
    }
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      best = std::min(best, point_segment(x, y, pts[k], pts[k + 1], window));
    }
  }
  return best;
}

double directed_hausdorff(const RidgeSet& from, const RidgeSet& to, const ChartDomain& window) {
  double worst = 0.0;
  for (const auto& line : from.polylines) {
    for (const auto& p : line.points) worst = std::max(worst, distance_to_ridges(p.x, p.y, to, window));
  }
  return worst;
}

double hausdorff(const RidgeSet& a, const RidgeSet& b, const ChartDomain& window) {
  return std::max(directed_hausdorff(a, b, window), directed_hausdorff(b, a, window));
}

RidgeSet dominant_polylines(const RidgeSet& ridges, double fraction) {
  std::vector<std::size_t> order(ridges.polylines.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ridges.polylines[a].points.size() > ridges.polylines[b].points.size();
  });
  RidgeSet out;
  out.mode = ridges.mode;
  out.level = ridges.level;
  const double target = fraction * static_cast<double>(ridges.point_count());
  std::size_t taken = 0;
  for (std::size_t k : order) {
    if (static_cast<double>(taken) >= target && !out.polylines.empty()) break;
    out.polylines.push_back(ridges.polylines[k]);
    taken += ridges.polylines[k].points.size();
  }
  return out;
}

}  // namespace flcs
