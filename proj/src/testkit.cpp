#include "mscm/testkit.hpp"

#include "mscm/error.hpp"
#include "mscm/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace mscm::testkit {

namespace {

constexpr double kPi = std::numbers::pi;

double shape_max_radius(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) return s.radius;
        if constexpr (std::is_same_v<T, Ellipse>) return std::max(s.rx, s.ry);
        if constexpr (std::is_same_v<T, Rectangle>)
          return 0.5 * std::hypot(s.width, s.height);
        if constexpr (std::is_same_v<T, Star>) return s.outer_radius;
      },
      shape);
}

bool shape_contains(const Shape& shape, const Vec2& p) {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return p.squaredNorm() <= s.radius * s.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const double u = p.x() / s.rx, v = p.y() / s.ry;
          return u * u + v * v <= 1.0;
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          return std::abs(p.x()) <= 0.5 * s.width && std::abs(p.y()) <= 0.5 * s.height;
        } else {
          // Star: the boundary radius at angle phi is piecewise linear between
          // alternating outer/inner vertices; use even-odd polygon crossing.
          const int n = 2 * s.points;
          int crossings = 0;
          for (int i = 0; i < n; ++i) {
            const double r0 = (i % 2 == 0) ? s.outer_radius : s.inner_radius;
            const double r1 = (i % 2 == 0) ? s.inner_radius : s.outer_radius;
            const double a0 = kPi * i / s.points, a1 = kPi * (i + 1) / s.points;
            const Vec2 q0(r0 * std::cos(a0), r0 * std::sin(a0));
            const Vec2 q1(r1 * std::cos(a1), r1 * std::sin(a1));
            if ((q0.y() > p.y()) != (q1.y() > p.y())) {
              const double t = (p.y() - q0.y()) / (q1.y() - q0.y());
              if (p.x() < q0.x() + t * (q1.x() - q0.x())) ++crossings;
            }
          }
          return crossings % 2 == 1;
        }
      },
      shape);
}

// Dense local-coordinate boundary polyline, positively oriented.
PointMatrix shape_boundary_polyline(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> PointMatrix {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          const int n = 4096;
          PointMatrix pts(n, 2);
          for (int i = 0; i < n; ++i) {
            const double a = 2 * kPi * i / n;
            pts(i, 0) = s.radius * std::cos(a);
            pts(i, 1) = s.radius * std::sin(a);
          }
          return pts;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const int n = 16384;
          PointMatrix pts(n, 2);
          for (int i = 0; i < n; ++i) {
            const double a = 2 * kPi * i / n;
            pts(i, 0) = s.rx * std::cos(a);
            pts(i, 1) = s.ry * std::sin(a);
          }
          return pts;
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          const double w2 = 0.5 * s.width, h2 = 0.5 * s.height;
          const std::array<Vec2, 4> corners = {Vec2(w2, -h2), Vec2(w2, h2), Vec2(-w2, h2),
                                               Vec2(-w2, -h2)};
          const int per_edge = 4;
          PointMatrix pts(4 * per_edge, 2);
          for (int e = 0; e < 4; ++e)
            for (int i = 0; i < per_edge; ++i) {
              const double t = static_cast<double>(i) / per_edge;
              pts.row(e * per_edge + i) =
                  ((1 - t) * corners[static_cast<std::size_t>(e)] +
                   t * corners[static_cast<std::size_t>((e + 1) % 4)]).transpose();
            }
          return pts;
        } else {
          const int n = 2 * s.points;
          const int per_edge = 8;
          PointMatrix pts(n * per_edge, 2);
          for (int i = 0; i < n; ++i) {
            const double r0 = (i % 2 == 0) ? s.outer_radius : s.inner_radius;
            const double r1 = (i % 2 == 0) ? s.inner_radius : s.outer_radius;
            const double a0 = kPi * i / s.points, a1 = kPi * (i + 1) / s.points;
            const Vec2 q0(r0 * std::cos(a0), r0 * std::sin(a0));
            const Vec2 q1(r1 * std::cos(a1), r1 * std::sin(a1));
            for (int j = 0; j < per_edge; ++j) {
              const double t = static_cast<double>(j) / per_edge;
              pts.row(i * per_edge + j) = ((1 - t) * q0 + t * q1).transpose();
            }
          }
          return pts;
        }
      },
      shape);
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Exact point-to-ellipse distance via bisection on the standard orthogonal
// projection equation; u, v are folded into the first quadrant.
double ellipse_distance(double rx, double ry, double u, double v) {
  u = std::abs(u);
  v = std::abs(v);
  if (rx < ry) {
    std::swap(rx, ry);
    std::swap(u, v);
  }
  const double a = rx, b = ry;
  if (u == 0 && v == 0) return b;
  if (v == 0) {
    // On the major axis the closest point leaves the axis inside the evolute.
    const double critical = (a * a - b * b) / a;
    if (u >= critical) return std::abs(u - a);
    const double x = a * a * u / (a * a - b * b);
    const double y = b * std::sqrt(std::max(0.0, 1.0 - (x / a) * (x / a)));
    return std::hypot(u - x, y);
  }
  const auto f = [&](double t) {
    const double fx = a * u / (t + a * a);
    const double fy = b * v / (t + b * b);
    return fx * fx + fy * fy - 1.0;
  };
  double lo = -b * b + b * v;  // f(lo) >= 0
  double hi = -b * b + std::hypot(a * u, b * v);
  while (f(hi) > 0) hi = -b * b + 2 * (hi + b * b);
  for (int i = 0; i < 120; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= 0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * (std::abs(hi) + 1)) break;
  }
  const double t = 0.5 * (lo + hi);
  const double x = a * a * u / (t + a * a);
  const double y = b * b * v / (t + b * b);
  return std::hypot(u - x, v - y);
}

double shape_boundary_distance(const Shape& shape, const Vec2& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return std::abs(p.norm() - s.radius);
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return ellipse_distance(s.rx, s.ry, p.x(), p.y());
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          const double w2 = 0.5 * s.width, h2 = 0.5 * s.height;
          const std::array<Vec2, 4> c = {Vec2(w2, -h2), Vec2(w2, h2), Vec2(-w2, h2),
                                         Vec2(-w2, -h2)};
          double best = segment_distance(p, c[0], c[1]);
          for (int e = 1; e < 4; ++e)
            best = std::min(best, segment_distance(p, c[static_cast<std::size_t>(e)],
                                                   c[static_cast<std::size_t>((e + 1) % 4)]));
          return best;
        } else {
          const int n = 2 * s.points;
          double best = std::numeric_limits<double>::infinity();
          for (int i = 0; i < n; ++i) {
            const double r0 = (i % 2 == 0) ? s.outer_radius : s.inner_radius;
            const double r1 = (i % 2 == 0) ? s.inner_radius : s.outer_radius;
            const double a0 = kPi * i / s.points, a1 = kPi * (i + 1) / s.points;
            best = std::min(best, segment_distance(p, Vec2(r0 * std::cos(a0), r0 * std::sin(a0)),
                                                   Vec2(r1 * std::cos(a1), r1 * std::sin(a1))));
          }
          return best;
        }
      },
      shape);
}

double intensity_at(const Intensity& intensity, const Vec2& local, double max_radius) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return g.value;
        } else if constexpr (std::is_same_v<T, LinearRamp>) {
          const Vec2 dir(std::cos(g.angle), std::sin(g.angle));
          const double s = std::clamp(local.dot(dir) / (2 * max_radius) + 0.5, 0.0, 1.0);
          return g.low + (g.high - g.low) * s;
        } else {
          const double s = std::clamp(local.norm() / max_radius, 0.0, 1.0);
          return g.low + (g.high - g.low) * s;
        }
      },
      intensity);
}

}  // namespace

GroundTruth::GroundTruth(SyntheticSpec spec) : spec_(std::move(spec)) {
  if (!(spec_.scale > 0)) throw std::invalid_argument("scale factor must be positive");
  const int w = spec_.canvas_width, h = spec_.canvas_height;
  const Vec2 center(0.5 * (w - 1) + spec_.translation.x(), 0.5 * (h - 1) + spec_.translation.y());
  const double reach = spec_.scale * shape_max_radius(spec_.shape);
  if (center.x() - reach < 2 || center.y() - reach < 2 || center.x() + reach > w - 3 ||
      center.y() + reach > h - 3)
    raise(Errc::shape_out_of_canvas, "shape reach " + std::to_string(reach) +
                                         " leaves less than the 2 px canvas margin");

  const double local_max_r = shape_max_radius(spec_.shape);
  const double cos_r = std::cos(-spec_.rotation), sin_r = std::sin(-spec_.rotation);
  mask_.resize(h, w);
  field_.resize(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 d = Vec2(x, y) - center;
      const Vec2 local(
          (cos_r * d.x() - sin_r * d.y()) / spec_.scale,
          (sin_r * d.x() + cos_r * d.y()) / spec_.scale);
      mask_(y, x) = shape_contains(spec_.shape, local) ? 1 : 0;
      field_(y, x) = intensity_at(spec_.intensity, local, local_max_r);
    }
  }
  local_boundary_ = shape_boundary_polyline(spec_.shape);
}

PointMatrix GroundTruth::contour(Eigen::Index nc) const {
  const PointMatrix local = parameterize(local_boundary_, nc).points();
  const int w = spec_.canvas_width, h = spec_.canvas_height;
  const Vec2 center(0.5 * (w - 1) + spec_.translation.x(), 0.5 * (h - 1) + spec_.translation.y());
  const double c = std::cos(spec_.rotation), s = std::sin(spec_.rotation);
  PointMatrix world(local.rows(), 2);
  for (Eigen::Index i = 0; i < local.rows(); ++i) {
    const Vec2 p = spec_.scale * Vec2(c * local(i, 0) - s * local(i, 1),
                                      s * local(i, 0) + c * local(i, 1));
    world.row(i) = (center + p).transpose();
  }
  return world;
}

double GroundTruth::boundary_distance(const Vec2& p) const {
  const int w = spec_.canvas_width, h = spec_.canvas_height;
  const Vec2 center(0.5 * (w - 1) + spec_.translation.x(), 0.5 * (h - 1) + spec_.translation.y());
  const double cos_r = std::cos(-spec_.rotation), sin_r = std::sin(-spec_.rotation);
  const Vec2 d = p - center;
  const Vec2 local((cos_r * d.x() - sin_r * d.y()) / spec_.scale,
                   (sin_r * d.x() + cos_r * d.y()) / spec_.scale);
  // Distances scale with the similarity transform.
  return spec_.scale * shape_boundary_distance(spec_.shape, local);
}

bool GroundTruth::convex() const { return !std::holds_alternative<Star>(spec_.shape); }

double GroundTruth::max_radius() const { return spec_.scale * shape_max_radius(spec_.shape); }

std::optional<double> GroundTruth::eta_half() const {
  if (const Disk* d = std::get_if<Disk>(&spec_.shape)) return 2 * spec_.scale * d->radius;
  return std::nullopt;
}

std::optional<double> GroundTruth::h_half() const {
  if (const Disk* d = std::get_if<Disk>(&spec_.shape)) return 2 * spec_.scale * d->radius / kPi;
  return std::nullopt;
}

std::optional<double> GroundTruth::constant_mu() const {
  if (const Constant* c = std::get_if<Constant>(&spec_.intensity)) return c->value;
  return std::nullopt;
}

std::optional<double> GroundTruth::constant_sigma() const {
  if (std::holds_alternative<Constant>(spec_.intensity)) return 0.0;
  return std::nullopt;
}

std::pair<RasterImage, GroundTruth> render(const SyntheticSpec& spec) {
  GroundTruth gt(spec);
  RasterImage img(spec.canvas_width, spec.canvas_height, 1);
  const MaskArray& mask = gt.mask();
  const ArrayXX& field = gt.intensity_field();
  for (int y = 0; y < spec.canvas_height; ++y)
    for (int x = 0; x < spec.canvas_width; ++x)
      img.at(x, y) = mask(y, x)
                         ? static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(field(y, x), 0.0, 1.0)))
                         : 0;
  return {std::move(img), std::move(gt)};
}

double uniform01(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t state = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL) ^
                        (c * 0x165667b19e3779f9ULL);
  uniform01(state);  // burn one step to decorrelate nearby keys
  return state;
}

namespace {

// Per-class parameter schedule. Appearance (intensity level x pattern family)
// separates classes sharing a shape family; cycles are coprime so the first
// collision would need 132 classes.
SyntheticSpec mini_spec(int cls, int part, int sample, std::uint64_t seed) {
  std::uint64_t rng = mix_seed(seed, static_cast<std::uint64_t>(cls),
                               static_cast<std::uint64_t>(part), static_cast<std::uint64_t>(sample));
  const double size = 52.0 + 3.5 * ((cls / 4) % 9);
  const int family = (cls + part) % 4;
  const int pattern = (cls + 2 * part) % 3;
  const double level = 0.28 + 0.045 * (cls % 11);
  const double aspect = 1.25 + 0.11 * (cls % 7);

  SyntheticSpec spec;
  const double size_jitter = 1.0 + (uniform01(rng) - 0.5) * 0.01;
  switch (family) {
    case 0: spec.shape = Disk{size * size_jitter}; break;
    case 1: spec.shape = Ellipse{size * size_jitter, size * size_jitter / aspect}; break;
    case 2:
      spec.shape = Rectangle{1.8 * size * size_jitter, 1.8 * size * size_jitter / aspect};
      break;
    default:
      spec.shape = Star{5 + ((cls / 4) % 4), (0.42 + 0.04 * (cls % 5)) * 1.1 * size * size_jitter,
                        1.1 * size * size_jitter};
      break;
  }
  const double low = level * 0.6;
  switch (pattern) {
    case 0: spec.intensity = Constant{level}; break;
    case 1:
      spec.intensity = LinearRamp{0.61 * cls + 0.3 * part, low + (uniform01(rng) - 0.5) * 0.01,
                                  std::min(0.95, low + 0.4)};
      break;
    default:
      spec.intensity = RadialGradient{low + (uniform01(rng) - 0.5) * 0.01, std::min(0.95, low + 0.5)};
      break;
  }
  spec.rotation = 0.61 * cls + 0.85 * part + (uniform01(rng) - 0.5) * 0.06;
  spec.translation = Vec2((uniform01(rng) - 0.5) * 4.0, (uniform01(rng) - 0.5) * 4.0);
  spec.canvas_width = 256;
  spec.canvas_height = 256;
  return spec;
}

}  // namespace

void make_mini_dataset(const std::filesystem::path& root, int n_classes, std::uint64_t seed) {
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");
  std::filesystem::create_directories(root);
  for (int cls = 0; cls < n_classes; ++cls) {
    char name[16];
    std::snprintf(name, sizeof(name), "c%03d", cls);
    const std::filesystem::path dir = root / name;
    std::filesystem::create_directories(dir);
    for (int part = 0; part < 3; ++part) {
      for (int sample = 1; sample <= 2; ++sample) {
        const auto [img, gt] = render(mini_spec(cls, part, sample, seed));
        constexpr std::array<char, 3> tags = {'U', 'M', 'L'};
        const std::string file =
            std::string(1, tags[static_cast<std::size_t>(part)]) + "_" + std::to_string(sample) + ".png";
        save_png(dir / file, img);
      }
    }
  }
}

}  // namespace mscm::testkit
