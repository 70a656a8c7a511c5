#include "mscm/geometry.hpp"

#include "mscm/error.hpp"

#include <cmath>
#include <stdexcept>

namespace mscm {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

// Chords shorter than this (in image-plane units) are degenerate.
constexpr double kDegenerateLength = 1e-9;

}  // namespace

Contour::Contour(PointMatrix points, double perimeter_len)
    : points_(std::move(points)), perimeter_(perimeter_len) {
  const Eigen::Index n = points_.rows();
  if (n < 8 || !is_power_of_two(n))
    throw std::invalid_argument("contour sample count must be a power of two >= 8, got " +
                                std::to_string(n));
  if (!(perimeter_ > 0)) raise(Errc::too_few_points, "contour has zero perimeter");
}

Contour Contour::translated(const Vec2& d) const {
  PointMatrix pts = points_;
  pts.col(0).array() += d.x();
  pts.col(1).array() += d.y();
  return Contour(std::move(pts), perimeter_);
}

Contour Contour::rotated(double angle) const {
  const double c = std::cos(angle), s = std::sin(angle);
  PointMatrix pts(points_.rows(), 2);
  pts.col(0) = c * points_.col(0) - s * points_.col(1);
  pts.col(1) = s * points_.col(0) + c * points_.col(1);
  return Contour(std::move(pts), perimeter_);
}

Contour Contour::scaled(double factor) const {
  if (!(factor > 0)) throw std::invalid_argument("scale factor must be positive");
  return Contour(points_ * factor, perimeter_ * factor);
}

Contour Contour::start_shifted(Eigen::Index shift) const {
  const Eigen::Index n = points_.rows();
  PointMatrix pts(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) pts.row(i) = points_.row(((i + shift) % n + n) % n);
  return Contour(std::move(pts), perimeter_);
}

Contour parameterize(const PointMatrix& boundary, Eigen::Index nc) {
  const Eigen::Index n = boundary.rows();
  if (n < 8) raise(Errc::too_few_points, "boundary has " + std::to_string(n) + " points, need 8");
  if (nc < 8 || !is_power_of_two(nc))
    throw std::invalid_argument("nc must be a power of two, got " + std::to_string(nc));

  // Cumulative arc length over the closed polyline, including the segment
  // back to the start.
  VectorX cumulative(n + 1);
  cumulative(0) = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    cumulative(i + 1) = cumulative(i) + (boundary.row(j) - boundary.row(i)).norm();
  }
  const double perimeter = cumulative(n);
  if (perimeter <= 0) raise(Errc::too_few_points, "boundary has zero perimeter");

  PointMatrix pts(nc, 2);
  Eigen::Index seg = 0;
  for (Eigen::Index k = 0; k < nc; ++k) {
    const double target = perimeter * static_cast<double>(k) / static_cast<double>(nc);
    while (seg + 1 <= n && cumulative(seg + 1) <= target) ++seg;
    const double seg_len = cumulative(seg + 1) - cumulative(seg);
    const double frac = seg_len > 0 ? (target - cumulative(seg)) / seg_len : 0.0;
    const Eigen::Index j = (seg + 1) % n;
    pts.row(k) = boundary.row(seg) + frac * (boundary.row(j) - boundary.row(seg));
  }
  return Contour(std::move(pts), perimeter);
}

Chord chord_at(const Contour& c, Eigen::Index i, double r) {
  const Eigen::Index n = c.size();
  const double span_real = r * static_cast<double>(n);
  const auto span = static_cast<Eigen::Index>(std::llround(span_real));
  if (r <= 0 || r > 0.5 || std::abs(span_real - static_cast<double>(span)) > 1e-9)
    throw std::invalid_argument("arc fraction r must be in (0, 1/2] with r*Nc integral");

  Chord ch;
  ch.start = c.point(i);
  ch.end = c.point(i + span);
  ch.length = (ch.end - ch.start).norm();
  if (ch.length < kDegenerateLength) {
    ch.degenerate = true;
    ch.length = 0;
    ch.cos_theta = 1;
    ch.sin_theta = 0;
  } else {
    ch.cos_theta = (ch.end.x() - ch.start.x()) / ch.length;
    ch.sin_theta = (ch.end.y() - ch.start.y()) / ch.length;
  }
  return ch;
}

Vec2 chord_point(const Chord& ch, double tau) {
  if (tau < 0 || tau > ch.length)
    raise(Errc::out_of_range,
          "tau = " + std::to_string(tau) + " outside [0, " + std::to_string(ch.length) + "]");
  return Vec2(ch.start.x() + tau * ch.cos_theta, ch.start.y() + tau * ch.sin_theta);
}

double perp_distance(const Contour& c, Eigen::Index i, double r, double s) {
  if (!(s > 0 && s < r)) throw std::invalid_argument("arc offset s must satisfy 0 < s < r");
  const Chord ch = chord_at(c, i, r);
  if (ch.degenerate) raise(Errc::degenerate_chord, "chord endpoints coincide");

  const Eigen::Index n = c.size();
  const double offset_real = s * static_cast<double>(n);
  const auto offset = static_cast<Eigen::Index>(std::llround(offset_real));
  if (std::abs(offset_real - static_cast<double>(offset)) > 1e-9)
    throw std::invalid_argument("arc offset s must land on a contour sample");

  const Vec2 a = c.point(i);
  const Vec2 m = c.point(i + offset);
  const Vec2 b = c.point(i + static_cast<Eigen::Index>(std::llround(r * static_cast<double>(n))));
  Eigen::Matrix3d det;
  det << a.x(), a.y(), 1,  //
      m.x(), m.y(), 1,     //
      b.x(), b.y(), 1;
  return std::abs(det.determinant()) / ch.length;
}

}  // namespace mscm
