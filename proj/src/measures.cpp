#include "mscm/measures.hpp"

#include "mscm/error.hpp"

#include <cmath>
#include <stdexcept>

namespace mscm {

namespace {

struct ChordFieldStats {
  double eta = 0, mu = 0, sigma = 0;
};

// Composite-midpoint quadrature along the chord. The mask is sampled nearest
// pixel; the gray field bilinearly, only when `want_intensity`.
ChordFieldStats chord_field_stats(const LeafImage& leaf, const Chord& ch, int m,
                                  bool want_intensity) {
  if (m < 2) throw std::invalid_argument("quadrature sample count must be >= 2");
  ChordFieldStats out;
  if (ch.degenerate) return out;

  const double step = ch.length / static_cast<double>(m);
  const Vec2 dir(ch.cos_theta, ch.sin_theta);

  thread_local std::vector<double> f_vals, g_vals;
  f_vals.clear();
  g_vals.clear();
  f_vals.reserve(static_cast<std::size_t>(m));
  if (want_intensity) g_vals.reserve(static_cast<std::size_t>(m));

  double sum_f = 0, sum_gf = 0;
  for (int j = 0; j < m; ++j) {
    const double tau = (static_cast<double>(j) + 0.5) * step;
    const Vec2 p = ch.start + tau * dir;
    const double f = sample_mask(leaf.mask, p);
    f_vals.push_back(f);
    sum_f += f;
    if (want_intensity) {
      const double g = sample_gray(leaf.gray, p);
      g_vals.push_back(g);
      sum_gf += g * f;
    }
  }

  out.eta = step * sum_f;
  if (!want_intensity || sum_f == 0) return out;

  out.mu = sum_gf / sum_f;
  // Two-pass central moment for stability near constant intensity.
  double sum_dev = 0;
  for (int j = 0; j < m; ++j) {
    const double d = g_vals[static_cast<std::size_t>(j)] - out.mu;
    sum_dev += f_vals[static_cast<std::size_t>(j)] * d * d;
  }
  out.sigma = std::sqrt(sum_dev / sum_f);
  return out;
}

double perp_distance_to(const Vec2& a, const Vec2& m, const Vec2& b, double chord_length) {
  Eigen::Matrix3d det;
  det << a.x(), a.y(), 1,  //
      m.x(), m.y(), 1,     //
      b.x(), b.y(), 1;
  return std::abs(det.determinant()) / chord_length;
}

}  // namespace

int quadrature_samples(double chord_length) {
  return std::max(2, static_cast<int>(std::ceil(chord_length)));
}

double eta_measure(const LeafImage& leaf, const Chord& ch, int m) {
  return chord_field_stats(leaf, ch, m, /*want_intensity=*/false).eta;
}

std::pair<double, double> mu_sigma(const LeafImage& leaf, const Chord& ch, int m) {
  const ChordFieldStats stats = chord_field_stats(leaf, ch, m, /*want_intensity=*/true);
  return {stats.mu, stats.sigma};
}

double h_measure(const Contour& c, Eigen::Index i, double r) {
  const Chord ch = chord_at(c, i, r);
  if (ch.degenerate) return 0;  // flagged as zero rather than raised

  const Eigen::Index span =
      static_cast<Eigen::Index>(std::llround(r * static_cast<double>(c.size())));
  if (span < 2) return 0;  // no interior samples at this scale

  const Vec2 a = c.point(i);
  const Vec2 b = c.point(i + span);
  double sum = 0;
  for (Eigen::Index j = 1; j < span; ++j)
    sum += perp_distance_to(a, c.point(i + j), b, ch.length);
  return sum / static_cast<double>(span - 1);
}

ChordMeasures measure_all(const LeafImage& leaf, const Contour& c, Eigen::Index i, double r,
                          int m) {
  const Chord ch = chord_at(c, i, r);
  ChordMeasures out;
  if (ch.degenerate) return out;  // all zeros for a degenerate chord

  if (m < 0) m = quadrature_samples(ch.length);
  const ChordFieldStats stats = chord_field_stats(leaf, ch, m, /*want_intensity=*/true);
  out.eta = stats.eta;
  out.mu = stats.mu;
  out.sigma = stats.sigma;
  out.h = h_measure(c, i, r);
  return out;
}

}  // namespace mscm
