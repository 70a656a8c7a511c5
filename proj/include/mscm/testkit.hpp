// Synthetic shapes with analytic ground truth. Shapes and intensity patterns
// are defined in shape-local coordinates and carried through a similarity
// transform, so a scaled rendering is exactly the scaled image model; the
// ground-truth handle exposes exact contours, masks, distances to the ideal
// boundary, and closed-form measure values where they exist.

#ifndef MSCM_TESTKIT_HPP
#define MSCM_TESTKIT_HPP

#include "mscm/image.hpp"
#include "mscm/image_io.hpp"

#include <filesystem>
#include <optional>
#include <variant>

namespace mscm::testkit {

struct Disk {
  double radius = 50;
};
struct Ellipse {
  double rx = 60, ry = 40;
};
struct Rectangle {
  double width = 100, height = 60;
};
struct Star {
  int points = 5;
  double inner_radius = 40, outer_radius = 100;
};
using Shape = std::variant<Disk, Ellipse, Rectangle, Star>;

struct Constant {
  double value = 0.5;
};
struct LinearRamp {
  double angle = 0;  // ramp direction in shape-local coordinates
  double low = 0.2, high = 0.8;
};
struct RadialGradient {
  double low = 0.25, high = 0.85;  // center -> rim
};
using Intensity = std::variant<Constant, LinearRamp, RadialGradient>;

struct SyntheticSpec {
  Shape shape;
  Intensity intensity;
  double scale = 1;
  double rotation = 0;
  Vec2 translation{0, 0};
  int canvas_width = 256;
  int canvas_height = 256;
};

class GroundTruth {
 public:
  GroundTruth(SyntheticSpec spec);

  // Exact center-inside rasterization of the transformed shape.
  const MaskArray& mask() const { return mask_; }

  // The intensity model evaluated over the whole canvas (no masking, no
  // 8-bit quantization).
  const ArrayXX& intensity_field() const { return field_; }

  // Continuous-model leaf: exact mask plus unquantized intensity field.
  LeafImage leaf() const { return LeafImage{field_, mask_}; }

  // `nc` boundary points at equal arc-length steps, transformed.
  PointMatrix contour(Eigen::Index nc) const;

  // Unsigned distance from a canvas point to the ideal (continuous) boundary.
  double boundary_distance(const Vec2& p) const;

  bool convex() const;
  double max_radius() const;  // after scaling

  // Closed forms for the transformed shape where available.
  std::optional<double> eta_half() const;    // disk: 2R
  std::optional<double> h_half() const;      // disk: 2R/pi
  std::optional<double> constant_mu() const; // constant intensity value
  std::optional<double> constant_sigma() const;  // 0 for constant intensity

  const SyntheticSpec& spec() const { return spec_; }

 private:
  SyntheticSpec spec_;
  MaskArray mask_;
  ArrayXX field_;
  PointMatrix local_boundary_;  // dense local-coords polyline for polygon shapes / ellipse
};

// Anti-alias-free rendering: 8-bit gray, background 0, foreground pixels
// carry the quantized intensity model.
std::pair<RasterImage, GroundTruth> render(const SyntheticSpec& spec);

// Deterministic dataset tree under `root`: n_classes cultivars x 2 samples x
// 3 parts, per-class shape/intensity parameters spread far apart relative to
// the within-class sample jitter.
void make_mini_dataset(const std::filesystem::path& root, int n_classes, std::uint64_t seed);

// Cross-platform deterministic uniform double in [0,1).
double uniform01(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace mscm::testkit

#endif  // MSCM_TESTKIT_HPP
