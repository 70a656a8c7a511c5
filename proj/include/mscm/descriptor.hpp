// Multiscale signatures and the invariant descriptor built from them.
//
// Sliding the chord start around the contour at the dyadic scales
// r = 2^-1 .. 2^-K yields 4K signature functions of length Nc. eta and h are
// divided by their per-scale maxima (scale invariance), every signature is
// compacted to the magnitudes of its first C Fourier coefficients (start-point
// invariance), and each measure is balanced by the average 0th-order
// coefficient over the training images. The result is a flat nonnegative
// vector of dimension 4*C*K.

#ifndef MSCM_DESCRIPTOR_HPP
#define MSCM_DESCRIPTOR_HPP

#include "mscm/measures.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace mscm {

inline constexpr int kMeasureCount = 4;
enum Measure : int { kEta = 0, kH = 1, kMu = 2, kSigma = 3 };

// K x Nc sample grids, row k-1 holding the scale r = 2^-k.
struct SignatureSet {
  Eigen::ArrayXXd eta, h, mu, sigma;
  // Set by max_normalize: per-scale flags for signatures that were all zero
  // (degenerate shapes); such rows are left as zeros rather than rejected.
  Eigen::Array<bool, Eigen::Dynamic, 1> eta_zero, h_zero;

  int scale_count() const { return static_cast<int>(eta.rows()); }
  int sample_count() const { return static_cast<int>(eta.cols()); }
  const Eigen::ArrayXXd& measure(int m) const;
  Eigen::ArrayXXd& measure(int m);
};

// measure_all at every start index and scale. Requires 2^scale_count <= Nc.
SignatureSet slide(const LeafImage& leaf, const Contour& c, int scale_count);

// Divides each eta/h scale row by its own maximum; mu and sigma are already
// scale invariant and pass through untouched.
SignatureSet max_normalize(SignatureSet sig);

// Magnitudes of the first `coeff_count` DFT coefficients, scaled by 1/N so
// the 0th term equals the series mean. Requires coeff_count <= N/2.
VectorX fourier_compact(const Eigen::Ref<const VectorX>& series, int coeff_count);

// Fourier-magnitude tables before training normalization, K x C per measure.
struct RawCoefficients {
  int coeff_count = 0;  // C
  int scale_count = 0;  // K
  std::array<MatrixX, kMeasureCount> coeffs;

  const MatrixX& measure(int m) const { return coeffs[static_cast<std::size_t>(m)]; }
};

RawCoefficients raw_coefficients(const SignatureSet& sig, int coeff_count);

// Per-measure averages of the 0th-order coefficients over the model images
// and scales; the descriptor divides by these.
struct NormStats {
  double eta_dot = 1, h_dot = 1, mu_dot = 1, sigma_dot = 1;

  double measure(int m) const;
  static NormStats ones() { return NormStats{}; }
};

NormStats train_stats(const std::vector<RawCoefficients>& model_coeffs);

class Descriptor {
 public:
  Descriptor() = default;
  Descriptor(int coeff_count, int scale_count, VectorX values);

  static Descriptor from_raw(const RawCoefficients& raw, const NormStats& stats);

  int coeff_count() const { return coeff_count_; }
  int scale_count() const { return scale_count_; }
  Eigen::Index size() const { return values_.size(); }
  const VectorX& values() const { return values_; }

  // Length K*C segment of one measure; layout is measure-major, then scale
  // ascending, then frequency ascending.
  Eigen::Ref<const VectorX> measure_block(int m) const;

  bool same_shape(const Descriptor& other) const {
    return coeff_count_ == other.coeff_count_ && scale_count_ == other.scale_count_;
  }

 private:
  int coeff_count_ = 0;
  int scale_count_ = 0;
  VectorX values_;
};

// Full pipeline: slide -> max_normalize -> fourier_compact -> stats division.
Descriptor build(const LeafImage& leaf, const Contour& c, int scale_count, int coeff_count,
                 const NormStats& stats);

// CSV persistence, header `id,part,C,K,v0..v{4CK-1}`; values round-trip
// exactly (17 significant digits).
struct DescriptorRow {
  std::string id;
  char part = 'U';
  Descriptor descriptor;
};

std::string descriptors_to_csv(const std::vector<DescriptorRow>& rows);
std::vector<DescriptorRow> descriptors_from_csv(const std::string& text);
void save_descriptors_csv(const std::filesystem::path& path, const std::vector<DescriptorRow>& rows);
std::vector<DescriptorRow> load_descriptors_csv(const std::filesystem::path& path);

std::string format_double(double v);  // shortest exact round-trip formatting

}  // namespace mscm

#endif  // MSCM_DESCRIPTOR_HPP
