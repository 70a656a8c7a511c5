// Arc-length parameterized closed contours and the chords spanned between
// contour points. The contour parameter t lives in [0,1) with the perimeter
// normalized to one unit, realized as Nc equally spaced samples; all index
// arithmetic wraps mod Nc so z(t+1) = z(t).

#ifndef MSCM_GEOMETRY_HPP
#define MSCM_GEOMETRY_HPP

#include "mscm/types.hpp"

#include <Eigen/Dense>

namespace mscm {

class Contour {
 public:
  // `points` must be equally spaced along the source polyline (1e-6 relative)
  // and the count a power of two; `perimeter_len` is the source boundary's
  // perimeter in image-plane units. Use parameterize() to build one from an
  // arbitrary boundary chain.
  Contour(PointMatrix points, double perimeter_len);

  Eigen::Index size() const { return points_.rows(); }
  double perimeter() const { return perimeter_; }
  const PointMatrix& points() const { return points_; }

  // Wrapping accessor: point(i + size()) == point(i).
  Vec2 point(Eigen::Index i) const {
    const Eigen::Index n = points_.rows();
    Eigen::Index j = i % n;
    if (j < 0) j += n;
    return points_.row(j).transpose();
  }

  Contour translated(const Vec2& d) const;
  Contour rotated(double angle) const;
  Contour scaled(double factor) const;
  // Same point set starting from sample `shift`.
  Contour start_shifted(Eigen::Index shift) const;

 private:
  PointMatrix points_;
  double perimeter_;
};

struct Chord {
  Vec2 start{0, 0};
  Vec2 end{0, 0};
  double length = 0;     // l
  double cos_theta = 1;  // unit direction, valid when not degenerate
  double sin_theta = 0;
  bool degenerate = false;  // endpoints coincide (l = 0)
};

// Resamples a closed boundary chain (>= 8 points) to `nc` points at equal
// arc-length steps by linear interpolation, starting at the chain start.
// `nc` must be a power of two; production use keeps nc >= 64.
Contour parameterize(const PointMatrix& boundary, Eigen::Index nc);

// Chord from z(t_i) to z(t_i + r). `r` is an arc fraction in (0, 1/2] and
// r * size() must be integral (exact for dyadic r on power-of-two contours).
Chord chord_at(const Contour& c, Eigen::Index i, double r);

// Point at distance tau in [0, length] from the chord start.
Vec2 chord_point(const Chord& ch, double tau);

// Perpendicular distance from z(t_i + s) to the chord's supporting line,
// |det [z(t) 1; z(t+s) 1; z(t+r) 1]| / l. Requires 0 < s < r.
double perp_distance(const Contour& c, Eigen::Index i, double r, double s);

}  // namespace mscm

#endif  // MSCM_GEOMETRY_HPP
