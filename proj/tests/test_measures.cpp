#include "mscm/error.hpp"
#include "mscm/measures.hpp"
#include "mscm/testkit.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace mscm;
using namespace mscm::testkit;

namespace {

constexpr double kPi = std::numbers::pi;

struct DiskFixture {
  GroundTruth gt;
  LeafImage leaf;
  Contour contour;

  explicit DiskFixture(double radius = 100, Intensity intensity = Constant{0.5})
      : gt([&] {
          SyntheticSpec spec;
          spec.shape = Disk{radius};
          spec.intensity = intensity;
          spec.canvas_width = spec.canvas_height = static_cast<int>(2 * radius + 32);
          return GroundTruth(spec);
        }()),
        leaf(gt.leaf()),
        contour(gt.contour(512), 2 * kPi * radius) {}
};

// Exact line integral of the nearest-pixel mask/gray fields along a chord:
// split the chord at every half-integer lattice crossing and accumulate each
// sub-segment against the pixel containing its midpoint.
std::pair<double, double> rasterized_line_integrals(const LeafImage& leaf, const Chord& ch) {
  std::vector<double> cuts = {0.0, ch.length};
  const auto add_axis_cuts = [&](double p0, double dir) {
    if (std::abs(dir) < 1e-12) return;
    const double lo = std::min(p0, p0 + dir * ch.length), hi = std::max(p0, p0 + dir * ch.length);
    for (double border = std::floor(lo) + 0.5; border <= hi; border += 1.0) {
      const double tau = (border - p0) / dir;
      if (tau > 0 && tau < ch.length) cuts.push_back(tau);
    }
  };
  add_axis_cuts(ch.start.x(), ch.cos_theta);
  add_axis_cuts(ch.start.y(), ch.sin_theta);
  std::sort(cuts.begin(), cuts.end());

  double eta = 0, gf = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double len = cuts[i + 1] - cuts[i];
    const Vec2 p = ch.start + mid * Vec2(ch.cos_theta, ch.sin_theta);
    const int x = std::clamp(static_cast<int>(std::lround(p.x())), 0, leaf.width() - 1);
    const int y = std::clamp(static_cast<int>(std::lround(p.y())), 0, leaf.height() - 1);
    if (leaf.mask(y, x)) {
      eta += len;
      gf += len * leaf.gray(y, x);
    }
  }
  return {eta, gf};
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("eta equals the chord length on a convex shape") {
  const DiskFixture fx;
  for (Eigen::Index i = 0; i < 512; i += 31) {
    const Chord ch = chord_at(fx.contour, i, 0.5);
    const double eta = eta_measure(fx.leaf, ch, quadrature_samples(ch.length));
    CHECK(eta <= ch.length + 1e-12);
    CHECK(eta / ch.length > 0.98);
  }
}

TEST_CASE("eta of a chord outside the region is zero") {
  const DiskFixture fx;
  Chord ch;
  ch.start = Vec2(1, 1);
  ch.end = Vec2(12, 1);
  ch.length = 11;
  ch.cos_theta = 1;
  ch.sin_theta = 0;
  CHECK(eta_measure(fx.leaf, ch, 16) == 0.0);
  const auto [mu, sigma] = mu_sigma(fx.leaf, ch, 16);
  CHECK(mu == 0.0);
  CHECK(sigma == 0.0);
}

TEST_CASE("eta across a rasterized disk matches the diameter within 1%") {
  // Full pipeline: rendered 8-bit image, traced boundary, resampled contour.
  SyntheticSpec spec;
  spec.shape = Disk{100};
  spec.intensity = Constant{0.5};
  spec.canvas_width = spec.canvas_height = 232;
  const auto [img, gt] = render(spec);
  const LeafImage leaf = make_leaf(to_gray(img));
  const Contour c = parameterize(trace_boundary(leaf.mask), 512);
  for (Eigen::Index i = 0; i < 512; i += 17) {
    const ChordMeasures m = measure_all(leaf, c, i, 0.5);
    CHECK(std::abs(m.eta - 200.0) < 2.0);
  }
}

TEST_CASE("h vanishes on a straight polygon edge") {
  PointMatrix square(8, 2);
  square << 0, 0, 16, 0, 32, 0, 32, 16, 32, 32, 16, 32, 0, 32, 0, 16;
  const Contour c = parameterize(square, 64);
  CHECK(h_measure(c, 2, 1.0 / 16.0) == 0.0);
}

TEST_CASE("h of a unit-circle half chord is 2/pi") {
  PointMatrix pts(512, 2);
  for (int i = 0; i < 512; ++i) {
    pts(i, 0) = std::cos(2 * kPi * i / 512.0);
    pts(i, 1) = std::sin(2 * kPi * i / 512.0);
  }
  const Contour c(pts, 2 * kPi);
  for (Eigen::Index i : {0, 100, 300}) {
    CHECK(std::abs(h_measure(c, i, 0.5) - 2.0 / kPi) < 0.01 * (2.0 / kPi));
  }
}

TEST_CASE("h scales linearly with the contour") {
  PointMatrix pts(256, 2);
  for (int i = 0; i < 256; ++i) {
    pts(i, 0) = 10 * std::cos(2 * kPi * i / 256.0);
    pts(i, 1) = 10 * std::sin(2 * kPi * i / 256.0);
  }
  const Contour c(pts, 20 * kPi);
  const Contour scaled = c.scaled(3.0);
  for (Eigen::Index i = 0; i < 256; i += 37)
    CHECK(h_measure(scaled, i, 0.25) ==
          doctest::Approx(3.0 * h_measure(c, i, 0.25)).epsilon(1e-9));
}

TEST_CASE("constant intensity gives exact mu and zero sigma") {
  const DiskFixture fx(100, Constant{0.5});
  const Chord ch = chord_at(fx.contour, 40, 0.5);
  const auto [mu, sigma] = mu_sigma(fx.leaf, ch, quadrature_samples(ch.length));
  CHECK(mu == 0.5);     // bilinear interpolation of a constant is exact
  CHECK(sigma == 0.0);  // two-pass central moment of a constant is exactly 0

  const DiskFixture fx3(60, Constant{0.3});
  const Chord ch3 = chord_at(fx3.contour, 7, 0.5);
  const auto [mu3, sigma3] = mu_sigma(fx3.leaf, ch3, quadrature_samples(ch3.length));
  CHECK(mu3 == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(sigma3 <= 1e-12);
}

TEST_CASE("a linear ramp along an interior chord has uniform moments") {
  // g runs 0 -> 1 along the horizontal diameter of a wide disk.
  const int size = 240;
  LeafImage leaf;
  leaf.gray.resize(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) leaf.gray(y, x) = static_cast<double>(x) / (size - 1);
  leaf.mask = MaskArray::Constant(size, size, 1);

  Chord ch;
  ch.start = Vec2(0, 120);
  ch.end = Vec2(size - 1, 120);
  ch.length = size - 1;
  ch.cos_theta = 1;
  ch.sin_theta = 0;
  const auto [mu, sigma] = mu_sigma(leaf, ch, quadrature_samples(ch.length));
  CHECK(mu == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sigma == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(0.01));
}

TEST_CASE("measure_all matches the analytic disk at the coarsest scale") {
  const DiskFixture fx(100, Constant{0.5});
  for (Eigen::Index i = 0; i < 512; i += 61) {
    const ChordMeasures m = measure_all(fx.leaf, fx.contour, i, 0.5);
    CHECK(std::abs(m.eta - 200.0) < 2.0);            // 2R within 1%
    CHECK(std::abs(m.h - 200.0 / kPi) < 2.0 / kPi);  // 2R/pi within 1%
    CHECK(m.mu == 0.5);
    CHECK(m.sigma == 0.0);
  }
}

TEST_CASE("measure_all of an all-background chord is all zeros") {
  const DiskFixture fx;
  LeafImage empty = fx.leaf;
  empty.mask.setZero();
  const ChordMeasures m = measure_all(empty, fx.contour, 0, 0.25);
  CHECK(m.eta == 0.0);
  CHECK(m.mu == 0.0);
  CHECK(m.sigma == 0.0);
}

TEST_CASE("measure_all agrees with a rasterized-line oracle") {
  const DiskFixture fx(90, RadialGradient{0.2, 0.9});
  std::uint64_t rng = 42;
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto i = static_cast<Eigen::Index>(uniform01(rng) * 512);
    const double r = std::ldexp(1.0, -(1 + static_cast<int>(uniform01(rng) * 2)));
    const Chord ch = chord_at(fx.contour, i, r);
    if (ch.degenerate || ch.length < 30) continue;

    const auto [eta_oracle, gf_oracle] = rasterized_line_integrals(fx.leaf, ch);
    const ChordMeasures m = measure_all(fx.leaf, fx.contour, i, r);
    CHECK(std::abs(m.eta - eta_oracle) <= 0.02 * eta_oracle);
    if (eta_oracle > 0) {
      const double mu_oracle = gf_oracle / eta_oracle;
      CHECK(std::abs(m.mu - mu_oracle) <= 0.02 * mu_oracle);
    }
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("eta never exceeds the chord length") {
  SyntheticSpec spec;
  spec.shape = Star{5, 40, 100};
  spec.intensity = Constant{0.6};
  spec.canvas_width = spec.canvas_height = 232;
  GroundTruth gt(spec);
  const LeafImage leaf = gt.leaf();
  const Contour c(gt.contour(512), 1.0);
  std::uint64_t rng = 9;
  for (int trial = 0; trial < 200; ++trial) {
    const auto i = static_cast<Eigen::Index>(uniform01(rng) * 512);
    const int k = 1 + static_cast<int>(uniform01(rng) * 6);
    const Chord ch = chord_at(c, i, std::ldexp(1.0, -k));
    if (ch.degenerate) continue;
    const double eta = eta_measure(leaf, ch, quadrature_samples(ch.length));
    CHECK(eta >= 0.0);
    CHECK(eta <= ch.length + 1e-12);
  }
}

TEST_CASE("sigma^2 equals the masked second central moment") {
  const DiskFixture fx(80, LinearRamp{0.4, 0.1, 0.9});
  std::uint64_t rng = 5;
  for (int trial = 0; trial < 40; ++trial) {
    const auto i = static_cast<Eigen::Index>(uniform01(rng) * 512);
    const Chord ch = chord_at(fx.contour, i, 0.25);
    const int m = quadrature_samples(ch.length);
    const auto [mu, sigma] = mu_sigma(fx.leaf, ch, m);

    // Independent accumulation from the same sampling convention.
    double sum_f = 0, sum_gf = 0, sum_ggf = 0;
    for (int j = 0; j < m; ++j) {
      const double tau = (j + 0.5) * ch.length / m;
      const Vec2 p = ch.start + tau * Vec2(ch.cos_theta, ch.sin_theta);
      const double f = sample_mask(fx.leaf.mask, p);
      const double g = sample_gray(fx.leaf.gray, p);
      sum_f += f;
      sum_gf += g * f;
      sum_ggf += g * g * f;
    }
    if (sum_f == 0) continue;
    const double mu_ref = sum_gf / sum_f;
    const double var_ref = sum_ggf / sum_f - mu_ref * mu_ref;
    CHECK(mu == doctest::Approx(mu_ref).epsilon(1e-12));
    CHECK(std::abs(sigma * sigma - var_ref) < 1e-9);
  }
}

TEST_CASE("integer translation leaves all four measures unchanged") {
  const DiskFixture base(70, LinearRamp{0.9, 0.2, 0.8});
  SyntheticSpec moved_spec = base.gt.spec();
  moved_spec.translation = Vec2(6, -4);
  GroundTruth moved(moved_spec);
  const LeafImage leaf2 = moved.leaf();
  const Contour c2(moved.contour(512), base.contour.perimeter());
  for (Eigen::Index i = 0; i < 512; i += 57) {
    for (int k : {1, 2, 3}) {
      const ChordMeasures a = measure_all(base.leaf, base.contour, i, std::ldexp(1.0, -k));
      const ChordMeasures b = measure_all(leaf2, c2, i, std::ldexp(1.0, -k));
      CHECK(std::abs(a.eta - b.eta) < 1e-9 * std::max(1.0, a.eta));
      CHECK(std::abs(a.h - b.h) < 1e-9 * std::max(1.0, a.h));
      CHECK(std::abs(a.mu - b.mu) < 1e-9);
      CHECK(std::abs(a.sigma - b.sigma) < 1e-9);
    }
  }
}

TEST_CASE("rotation changes the measures by less than 2%") {
  const DiskFixture base(90, LinearRamp{0.6, 0.15, 0.95});
  SyntheticSpec rot_spec = base.gt.spec();
  rot_spec.rotation = 0.61;
  GroundTruth rotated(rot_spec);
  const LeafImage leaf2 = rotated.leaf();
  const Contour c2(rotated.contour(512), base.contour.perimeter());

  for (int k : {1, 2}) {
    const double r = std::ldexp(1.0, -k);
    double eta_max = 0, h_max = 0, mu_max = 0, sigma_max = 0;
    std::vector<ChordMeasures> a(512), b(512);
    for (Eigen::Index i = 0; i < 512; ++i) {
      a[static_cast<std::size_t>(i)] = measure_all(base.leaf, base.contour, i, r);
      b[static_cast<std::size_t>(i)] = measure_all(leaf2, c2, i, r);
      eta_max = std::max(eta_max, a[static_cast<std::size_t>(i)].eta);
      h_max = std::max(h_max, a[static_cast<std::size_t>(i)].h);
      mu_max = std::max(mu_max, a[static_cast<std::size_t>(i)].mu);
      sigma_max = std::max(sigma_max, a[static_cast<std::size_t>(i)].sigma);
    }
    for (Eigen::Index i = 0; i < 512; ++i) {
      CHECK(std::abs(a[static_cast<std::size_t>(i)].eta - b[static_cast<std::size_t>(i)].eta) <= 0.02 * eta_max);
      CHECK(std::abs(a[static_cast<std::size_t>(i)].h - b[static_cast<std::size_t>(i)].h) <= 0.02 * h_max);
      CHECK(std::abs(a[static_cast<std::size_t>(i)].mu - b[static_cast<std::size_t>(i)].mu) <= 0.02 * mu_max);
      CHECK(std::abs(a[static_cast<std::size_t>(i)].sigma - b[static_cast<std::size_t>(i)].sigma) <= 0.02 * std::max(sigma_max, 0.05));
    }
  }
}

TEST_CASE("degenerate chords yield all-zero measures") {
  PointMatrix pts(512, 2);
  for (int i = 0; i < 512; ++i) {
    pts(i, 0) = 50 + 20 * std::cos(2 * kPi * i / 512.0);
    pts(i, 1) = 50 + 20 * std::sin(2 * kPi * i / 512.0);
  }
  pts.row(256) = pts.row(0);  // self-touching: antipodal sample collapses
  const Contour c(pts, 40 * kPi);
  LeafImage leaf;
  leaf.gray = ArrayXX::Constant(100, 100, 0.5);
  leaf.mask = MaskArray::Constant(100, 100, 1);

  const ChordMeasures m = measure_all(leaf, c, 0, 0.5);
  CHECK(m.eta == 0.0);
  CHECK(m.h == 0.0);
  CHECK(m.mu == 0.0);
  CHECK(m.sigma == 0.0);
  CHECK(h_measure(c, 0, 0.5) == 0.0);
}

TEST_CASE("quadrature sample count follows the chord length") {
  CHECK(quadrature_samples(0.3) == 2);
  CHECK(quadrature_samples(1.0) == 2);
  CHECK(quadrature_samples(17.2) == 18);
  CHECK(quadrature_samples(200.0) == 200);
}

}  // TEST_SUITE
