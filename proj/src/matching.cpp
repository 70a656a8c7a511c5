#include "mscm/matching.hpp"

#include "mscm/error.hpp"
#include "mscm/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mscm {

namespace {

void check_weight(double w) {
  if (!(w >= 0 && w <= 1)) throw std::invalid_argument("weight W must lie in [0, 1]");
}

// Shape (eta+h) and appearance (mu+sigma) L1 halves of the weighted
// dissimilarity; combining them as w*shape + (1-w)*appearance reproduces
// part_dissimilarity bit for bit.
std::pair<double, double> split_l1(const Descriptor& a, const Descriptor& b) {
  if (!a.same_shape(b) || a.size() != b.size())
    raise(Errc::dimension_mismatch, "descriptors disagree on C or K");
  const double shape = (a.measure_block(kEta) - b.measure_block(kEta)).lpNorm<1>() +
                       (a.measure_block(kH) - b.measure_block(kH)).lpNorm<1>();
  const double appearance = (a.measure_block(kMu) - b.measure_block(kMu)).lpNorm<1>() +
                            (a.measure_block(kSigma) - b.measure_block(kSigma)).lpNorm<1>();
  return {shape, appearance};
}

// Samples grouped into (first, second) per cultivar, sorted by cultivar id.
struct PairedSamples {
  std::vector<std::string> cultivars;
  std::vector<const JointDescriptor*> first;
  std::vector<const JointDescriptor*> second;

  int size() const { return static_cast<int>(cultivars.size()); }
};

PairedSamples pair_samples(const std::vector<JointDescriptor>& samples) {
  std::map<std::string, std::vector<const JointDescriptor*>> by_cultivar;
  for (const JointDescriptor& s : samples) by_cultivar[s.cultivar_id].push_back(&s);

  PairedSamples out;
  for (auto& [cultivar, list] : by_cultivar) {
    if (list.size() != 2)
      raise(Errc::unpaired_cultivar, "cultivar " + cultivar + " has " +
                                         std::to_string(list.size()) + " samples, need 2");
    std::sort(list.begin(), list.end(), [](const JointDescriptor* a, const JointDescriptor* b) {
      return a->sample_id < b->sample_id;
    });
    out.cultivars.push_back(cultivar);
    out.first.push_back(list[0]);
    out.second.push_back(list[1]);
  }
  if (out.cultivars.empty()) raise(Errc::empty_model_set, "no samples to evaluate");
  return out;
}

// S[p], A[p]: n x n shape/appearance tables, entry (i, j) comparing the
// second sample of cultivar i against the first sample of cultivar j.
struct EvalTables {
  PairedSamples pairs;
  std::array<MatrixX, 3> shape;
  std::array<MatrixX, 3> appearance;
};

EvalTables build_tables(const std::vector<JointDescriptor>& samples) {
  EvalTables t{pair_samples(samples), {}, {}};
  const int n = t.pairs.size();
  for (int p = 0; p < 3; ++p) {
    t.shape[static_cast<std::size_t>(p)].resize(n, n);
    t.appearance[static_cast<std::size_t>(p)].resize(n, n);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < 3; ++p) {
        const auto [s, a] = split_l1(t.pairs.second[static_cast<std::size_t>(i)]->parts[static_cast<std::size_t>(p)],
                                     t.pairs.first[static_cast<std::size_t>(j)]->parts[static_cast<std::size_t>(p)]);
        t.shape[static_cast<std::size_t>(p)](i, j) = s;
        t.appearance[static_cast<std::size_t>(p)](i, j) = a;
      }
  return t;
}

MatrixX joint_matrix(const EvalTables& t, double w) {
  const int n = t.pairs.size();
  MatrixX m = MatrixX::Zero(n, n);
  for (int p = 0; p < 3; ++p)
    m += w * t.shape[static_cast<std::size_t>(p)] + (1 - w) * t.appearance[static_cast<std::size_t>(p)];
  return m;
}

// Two-way counting: row-wise argmin (second-as-test), then column-wise
// (first-as-test); ties keep the lowest model index.
int count_correct(const MatrixX& m) {
  const int n = static_cast<int>(m.rows());
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < n; ++j)
      if (m(i, j) < m(i, best)) best = j;
    if (best == i) ++correct;
  }
  for (int j = 0; j < n; ++j) {
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (m(i, j) < m(best, j)) best = i;
    if (best == j) ++correct;
  }
  return correct;
}

MatrixX min_max_normalize(MatrixX m) {
  const double lo = m.minCoeff(), hi = m.maxCoeff();
  if (hi > lo)
    m = (m.array() - lo) / (hi - lo);
  else
    m.setZero();
  return m;
}

}  // namespace

int part_index(char part) {
  switch (part) {
    case 'U': return 0;
    case 'M': return 1;
    case 'L': return 2;
    default: throw std::invalid_argument(std::string("unknown part tag '") + part + "'");
  }
}

double part_dissimilarity(const Descriptor& a, const Descriptor& b, double w) {
  check_weight(w);
  const auto [shape, appearance] = split_l1(a, b);
  return w * shape + (1 - w) * appearance;
}

double joint_dissimilarity(const JointDescriptor& a, const JointDescriptor& b, double w) {
  double sum = 0;
  for (int p = 0; p < 3; ++p)
    sum += part_dissimilarity(a.parts[static_cast<std::size_t>(p)], b.parts[static_cast<std::size_t>(p)], w);
  return sum;
}

std::string nn_classify(const JointDescriptor& query, const std::vector<JointDescriptor>& models,
                        double w) {
  if (models.empty()) raise(Errc::empty_model_set, "model set is empty");
  std::size_t best = 0;
  double best_d = joint_dissimilarity(query, models[0], w);
  for (std::size_t i = 1; i < models.size(); ++i) {
    const double d = joint_dissimilarity(query, models[i], w);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return models[best].cultivar_id;
}

EvalReport evaluate(const std::vector<JointDescriptor>& samples, const EvalOptions& opts) {
  check_weight(opts.w);
  const EvalTables tables = build_tables(samples);
  const int n = tables.pairs.size();

  EvalReport report;
  report.cultivars = tables.pairs.cultivars;
  report.n_tests = 2 * n;

  const MatrixX joint = joint_matrix(tables, opts.w);
  report.n_correct = count_correct(joint);
  report.accuracy = static_cast<double>(report.n_correct) / report.n_tests;
  report.confusion = min_max_normalize(joint);

  for (int p = 0; p < 3; ++p) {
    const double wp = opts.part_w ? (*opts.part_w)[static_cast<std::size_t>(p)] : opts.w;
    check_weight(wp);
    const MatrixX part = wp * tables.shape[static_cast<std::size_t>(p)] +
                         (1 - wp) * tables.appearance[static_cast<std::size_t>(p)];
    report.per_part_accuracy[static_cast<std::size_t>(p)] =
        static_cast<double>(count_correct(part)) / report.n_tests;
  }
  return report;
}

EvalReport evaluate_with(const std::vector<JointDescriptor>& samples,
                         const JointDissimilarityFn& fn) {
  const PairedSamples pairs = pair_samples(samples);
  const int n = pairs.size();

  // Injected dissimilarities need not be symmetric; compute both directions.
  MatrixX second_vs_first(n, n), first_vs_second(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      second_vs_first(i, j) = fn(*pairs.second[static_cast<std::size_t>(i)], *pairs.first[static_cast<std::size_t>(j)]);
      first_vs_second(i, j) = fn(*pairs.first[static_cast<std::size_t>(i)], *pairs.second[static_cast<std::size_t>(j)]);
    }

  EvalReport report;
  report.cultivars = pairs.cultivars;
  report.n_tests = 2 * n;
  int correct = 0;
  for (int i = 0; i < n; ++i) {  // second-as-test round
    int best = 0;
    for (int j = 1; j < n; ++j)
      if (second_vs_first(i, j) < second_vs_first(i, best)) best = j;
    if (best == i) ++correct;
  }
  for (int i = 0; i < n; ++i) {  // first-as-test round
    int best = 0;
    for (int j = 1; j < n; ++j)
      if (first_vs_second(i, j) < first_vs_second(i, best)) best = j;
    if (best == i) ++correct;
  }
  report.n_correct = correct;
  report.accuracy = static_cast<double>(correct) / report.n_tests;
  report.confusion = min_max_normalize(second_vs_first);
  return report;
}

std::vector<std::pair<double, double>> sweep_w(const std::vector<JointDescriptor>& samples,
                                               int steps) {
  if (steps < 2) throw std::invalid_argument("weight sweep needs at least 2 steps");
  const EvalTables tables = build_tables(samples);
  const int n = tables.pairs.size();

  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    const double w = static_cast<double>(s) / static_cast<double>(steps - 1);
    const double acc = static_cast<double>(count_correct(joint_matrix(tables, w))) / (2.0 * n);
    out.emplace_back(w, acc);
  }
  return out;
}

std::vector<std::pair<int, double>> scaling_study(const std::vector<JointDescriptor>& samples,
                                                  int start, int stop, int step, double w) {
  if (step < 1 || start < 1 || start > stop) throw std::invalid_argument("bad scaling grid");
  const PairedSamples pairs = pair_samples(samples);
  if (stop > pairs.size())
    raise(Errc::not_enough_classes, "requested " + std::to_string(stop) + " cultivars, have " +
                                        std::to_string(pairs.size()));

  std::vector<std::pair<int, double>> out;
  for (int n = start; n <= stop; n += step) {
    std::vector<JointDescriptor> prefix;
    prefix.reserve(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
      prefix.push_back(*pairs.first[static_cast<std::size_t>(i)]);
      prefix.push_back(*pairs.second[static_cast<std::size_t>(i)]);
    }
    out.emplace_back(n, evaluate(prefix, EvalOptions{w, std::nullopt}).accuracy);
  }
  return out;
}

std::string report_to_json(const EvalReport& report, double w) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["n_correct"] = report.n_correct;
  j["n_tests"] = report.n_tests;
  j["per_part"] = {{"upper", report.per_part_accuracy[0]},
                   {"middle", report.per_part_accuracy[1]},
                   {"lower", report.per_part_accuracy[2]}};
  j["n_cultivars"] = report.cultivars.size();
  j["w"] = w;
  j["cultivars"] = report.cultivars;
  return j.dump(2) + "\n";
}

std::string confusion_to_csv(const EvalReport& report) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) {
      if (j) out << ",";
      out << format_double(report.confusion(i, j));
    }
    out << "\n";
  }
  return out.str();
}

void save_report_json(const std::filesystem::path& path, const EvalReport& report, double w) {
  write_file_atomic(path, report_to_json(report, w));
}

void save_confusion_csv(const std::filesystem::path& path, const EvalReport& report) {
  write_file_atomic(path, confusion_to_csv(report));
}

void save_confusion_pgm(const std::filesystem::path& path, const EvalReport& report) {
  const int n = static_cast<int>(report.confusion.rows());
  RasterImage img(std::max(n, 1), std::max(n, 1), 1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(255.0 * report.confusion(y, x)));
  save_pgm(path, img);
}

}  // namespace mscm
