// Core dense types. Everything numeric in the library flows through Eigen;
// points are stored one per row so point sets map onto Nx2 matrices.

#ifndef MSCM_TYPES_HPP
#define MSCM_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>

namespace mscm {

using Scalar = double;

using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
using ArrayXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// One point per row, columns are (x, y) in image-plane units.
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

// Binary field, 0 = background, 1 = inside region. Indexed (row=y, col=x).
using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

inline Vec2 rotate(const Vec2& p, Scalar angle) {
  const Scalar c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * p.x() - s * p.y(), s * p.x() + c * p.y());
}

}  // namespace mscm

#endif  // MSCM_TYPES_HPP
