// The four chord measures. For a chord between z(t) and z(t+r):
//   eta   — length of the chord portion inside the region,
//   h     — mean perpendicular deviation of the arc from its chord,
//   mu    — mean region intensity along the chord,
//   sigma — intensity standard deviation along the chord.
// Chord integrals use composite-midpoint quadrature with the mask sampled
// nearest-pixel and the gray field bilinearly; the arc integral of h is the
// mean over the contour samples interior to the arc.

#ifndef MSCM_MEASURES_HPP
#define MSCM_MEASURES_HPP

#include "mscm/geometry.hpp"
#include "mscm/image.hpp"

namespace mscm {

struct ChordMeasures {
  double eta = 0;
  double h = 0;
  double mu = 0;
  double sigma = 0;
};

// Default sample count: one sample per pixel of chord length, at least 2.
int quadrature_samples(double chord_length);

double eta_measure(const LeafImage& leaf, const Chord& ch, int m);

// Mean of perp_distance over the r*Nc - 1 interior arc samples.
// Degenerate chords yield 0.
double h_measure(const Contour& c, Eigen::Index i, double r);

// Masked mean / standard deviation (two-pass) of gray along the chord.
// Both are 0 when the chord misses the region entirely.
std::pair<double, double> mu_sigma(const LeafImage& leaf, const Chord& ch, int m);

// All four measures for one (t, r); all zeros for a degenerate chord.
// m < 0 picks quadrature_samples(l) automatically.
ChordMeasures measure_all(const LeafImage& leaf, const Contour& c, Eigen::Index i, double r,
                          int m = -1);

}  // namespace mscm

#endif  // MSCM_MEASURES_HPP
