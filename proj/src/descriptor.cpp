#include "mscm/descriptor.hpp"

#include "mscm/error.hpp"
#include "mscm/image_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mscm {

const Eigen::ArrayXXd& SignatureSet::measure(int m) const {
  switch (m) {
    case kEta: return eta;
    case kH: return h;
    case kMu: return mu;
    case kSigma: return sigma;
    default: throw std::invalid_argument("measure index out of range");
  }
}

Eigen::ArrayXXd& SignatureSet::measure(int m) {
  return const_cast<Eigen::ArrayXXd&>(static_cast<const SignatureSet&>(*this).measure(m));
}

SignatureSet slide(const LeafImage& leaf, const Contour& c, int scale_count) {
  if (scale_count < 1) throw std::invalid_argument("scale count must be >= 1");
  const Eigen::Index nc = c.size();
  if ((Eigen::Index{1} << scale_count) > nc)
    raise(Errc::scale_too_fine, "2^" + std::to_string(scale_count) + " scales exceed " +
                                    std::to_string(nc) + " contour samples");

  SignatureSet sig;
  sig.eta.setZero(scale_count, nc);
  sig.h.setZero(scale_count, nc);
  sig.mu.setZero(scale_count, nc);
  sig.sigma.setZero(scale_count, nc);
  for (int k = 1; k <= scale_count; ++k) {
    const double r = std::ldexp(1.0, -k);  // 2^-k, exact
    for (Eigen::Index i = 0; i < nc; ++i) {
      const ChordMeasures m = measure_all(leaf, c, i, r);
      sig.eta(k - 1, i) = m.eta;
      sig.h(k - 1, i) = m.h;
      sig.mu(k - 1, i) = m.mu;
      sig.sigma(k - 1, i) = m.sigma;
    }
  }
  return sig;
}

SignatureSet max_normalize(SignatureSet sig) {
  const int scales = sig.scale_count();
  sig.eta_zero.setConstant(scales, false);
  sig.h_zero.setConstant(scales, false);
  for (int k = 0; k < scales; ++k) {
    const double eta_max = sig.eta.row(k).maxCoeff();
    if (eta_max > 0)
      sig.eta.row(k) /= eta_max;
    else
      sig.eta_zero(k) = true;  // degenerate shape: left as zeros
    const double h_max = sig.h.row(k).maxCoeff();
    if (h_max > 0)
      sig.h.row(k) /= h_max;
    else
      sig.h_zero(k) = true;
  }
  // mu and sigma are scale invariant already; untouched.
  return sig;
}

VectorX fourier_compact(const Eigen::Ref<const VectorX>& series, int coeff_count) {
  const Eigen::Index n = series.size();
  if (coeff_count < 1 || coeff_count > n / 2)
    throw std::invalid_argument("coefficient count must be in [1, N/2]");

  const ArrayX samples = series.array();
  const ArrayX index = ArrayX::LinSpaced(n, 0, static_cast<double>(n - 1));
  VectorX mags(coeff_count);
  for (int w = 0; w < coeff_count; ++w) {
    const ArrayX angle = index * (-2.0 * std::numbers::pi * w / static_cast<double>(n));
    const double re = (samples * angle.cos()).sum();
    const double im = (samples * angle.sin()).sum();
    mags(w) = std::sqrt(re * re + im * im) / static_cast<double>(n);
  }
  return mags;
}

RawCoefficients raw_coefficients(const SignatureSet& sig, int coeff_count) {
  RawCoefficients raw;
  raw.coeff_count = coeff_count;
  raw.scale_count = sig.scale_count();
  for (int m = 0; m < kMeasureCount; ++m) {
    MatrixX& table = raw.coeffs[static_cast<std::size_t>(m)];
    table.resize(raw.scale_count, coeff_count);
    for (int k = 0; k < raw.scale_count; ++k)
      table.row(k) = fourier_compact(sig.measure(m).row(k).matrix().transpose(), coeff_count);
  }
  return raw;
}

double NormStats::measure(int m) const {
  switch (m) {
    case kEta: return eta_dot;
    case kH: return h_dot;
    case kMu: return mu_dot;
    case kSigma: return sigma_dot;
    default: throw std::invalid_argument("measure index out of range");
  }
}

NormStats train_stats(const std::vector<RawCoefficients>& model_coeffs) {
  if (model_coeffs.empty()) throw std::invalid_argument("need at least one training image");
  const int scales = model_coeffs.front().scale_count;

  std::array<double, kMeasureCount> sums{};
  for (const RawCoefficients& raw : model_coeffs) {
    if (raw.scale_count != scales)
      raise(Errc::dimension_mismatch, "training coefficient tables disagree on scale count");
    for (int m = 0; m < kMeasureCount; ++m) sums[static_cast<std::size_t>(m)] += raw.measure(m).col(0).sum();
  }
  const double denom = static_cast<double>(model_coeffs.size()) * static_cast<double>(scales);

  NormStats stats;
  stats.eta_dot = sums[kEta] / denom;
  stats.h_dot = sums[kH] / denom;
  stats.mu_dot = sums[kMu] / denom;
  stats.sigma_dot = sums[kSigma] / denom;
  for (int m = 0; m < kMeasureCount; ++m)
    if (!(stats.measure(m) > 0))
      raise(Errc::zero_statistic, "0th-order coefficient average for measure " + std::to_string(m) +
                                      " is zero; cannot normalize");
  return stats;
}

Descriptor::Descriptor(int coeff_count, int scale_count, VectorX values)
    : coeff_count_(coeff_count), scale_count_(scale_count), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(kMeasureCount) * coeff_count_ * scale_count_)
    raise(Errc::dimension_mismatch, "descriptor length does not match 4*C*K");
}

Descriptor Descriptor::from_raw(const RawCoefficients& raw, const NormStats& stats) {
  const int c = raw.coeff_count, k = raw.scale_count;
  for (int m = 0; m < kMeasureCount; ++m)
    if (!(stats.measure(m) > 0)) raise(Errc::zero_statistic, "normalization statistic must be positive");

  VectorX values(static_cast<Eigen::Index>(kMeasureCount) * c * k);
  Eigen::Index at = 0;
  for (int m = 0; m < kMeasureCount; ++m) {
    const double dot = stats.measure(m);
    const MatrixX& table = raw.measure(m);
    for (int scale = 0; scale < k; ++scale)
      for (int w = 0; w < c; ++w) values(at++) = table(scale, w) / dot;
  }
  return Descriptor(c, k, std::move(values));
}

Eigen::Ref<const VectorX> Descriptor::measure_block(int m) const {
  const Eigen::Index block = static_cast<Eigen::Index>(coeff_count_) * scale_count_;
  return values_.segment(m * block, block);
}

Descriptor build(const LeafImage& leaf, const Contour& c, int scale_count, int coeff_count,
                 const NormStats& stats) {
  const SignatureSet sig = max_normalize(slide(leaf, c, scale_count));
  return Descriptor::from_raw(raw_coefficients(sig, coeff_count), stats);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string descriptors_to_csv(const std::vector<DescriptorRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no descriptor rows to serialize");
  const int c = rows.front().descriptor.coeff_count();
  const int k = rows.front().descriptor.scale_count();

  std::ostringstream out;
  out << "id,part,C,K";
  for (Eigen::Index i = 0; i < rows.front().descriptor.size(); ++i) out << ",v" << i;
  out << "\n";
  for (const DescriptorRow& row : rows) {
    if (!row.descriptor.same_shape(rows.front().descriptor))
      raise(Errc::dimension_mismatch, "descriptor rows disagree on C or K");
    out << row.id << "," << row.part << "," << c << "," << k;
    for (Eigen::Index i = 0; i < row.descriptor.size(); ++i)
      out << "," << format_double(row.descriptor.values()(i));
    out << "\n";
  }
  return out.str();
}

std::vector<DescriptorRow> descriptors_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,part,C,K", 0) != 0)
    raise(Errc::io_error, "descriptor CSV missing header");

  std::vector<DescriptorRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string id, part, c_str, k_str;
    if (!std::getline(cells, id, ',') || !std::getline(cells, part, ',') ||
        !std::getline(cells, c_str, ',') || !std::getline(cells, k_str, ','))
      raise(Errc::io_error, "malformed descriptor CSV row");
    const int c = std::stoi(c_str), k = std::stoi(k_str);
    if (part.size() != 1 || (part[0] != 'U' && part[0] != 'M' && part[0] != 'L'))
      raise(Errc::io_error, "bad part tag '" + part + "' in descriptor CSV");

    VectorX values(static_cast<Eigen::Index>(kMeasureCount) * c * k);
    std::string cell;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (!std::getline(cells, cell, ',')) raise(Errc::io_error, "descriptor CSV row too short");
      values(i) = std::strtod(cell.c_str(), nullptr);
    }
    rows.push_back(DescriptorRow{id, part[0], Descriptor(c, k, std::move(values))});
  }
  return rows;
}

void save_descriptors_csv(const std::filesystem::path& path, const std::vector<DescriptorRow>& rows) {
  write_file_atomic(path, descriptors_to_csv(rows));
}

std::vector<DescriptorRow> load_descriptors_csv(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return descriptors_from_csv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace mscm
