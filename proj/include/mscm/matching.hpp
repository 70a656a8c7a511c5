// Joint descriptors, weighted-L1 dissimilarity and the two-way
// model/test evaluation protocol with its experiment drivers.

#ifndef MSCM_MATCHING_HPP
#define MSCM_MATCHING_HPP

#include "mscm/descriptor.hpp"

#include <array>
#include <functional>
#include <optional>
#include <utility>

namespace mscm {

inline constexpr std::array<char, 3> kParts = {'U', 'M', 'L'};

int part_index(char part);  // U -> 0, M -> 1, L -> 2

// One plant sample: descriptors of its upper, middle and lower leaves.
struct JointDescriptor {
  std::array<Descriptor, 3> parts;  // indexed by part_index
  std::string sample_id;
  std::string cultivar_id;

  const Descriptor& upper() const { return parts[0]; }
  const Descriptor& middle() const { return parts[1]; }
  const Descriptor& lower() const { return parts[2]; }
};

// Weighted L1 between two descriptors: weight w on the shape blocks
// (eta, h) and 1-w on the appearance blocks (mu, sigma).
double part_dissimilarity(const Descriptor& a, const Descriptor& b, double w);

// Sum of the three per-part dissimilarities.
double joint_dissimilarity(const JointDescriptor& a, const JointDescriptor& b, double w);

// Cultivar of the minimum-dissimilarity model; ties keep the lowest index.
std::string nn_classify(const JointDescriptor& query, const std::vector<JointDescriptor>& models,
                        double w);

struct EvalReport {
  double accuracy = 0;
  int n_correct = 0;
  int n_tests = 0;
  std::array<double, 3> per_part_accuracy = {0, 0, 0};  // U, M, L
  std::vector<std::string> cultivars;                   // sorted ids, matrix order
  MatrixX confusion;  // row = second sample, col = first sample, min-max normalized
};

struct EvalOptions {
  double w = 0.29;
  // Per-part weight override for the single-part accuracy columns; defaults
  // to the joint weight.
  std::optional<std::array<double, 3>> part_w;
};

// Two-way protocol over exactly two samples per cultivar: sample 1 as model
// against sample 2 as test, then roles swapped; 2n tests total.
EvalReport evaluate(const std::vector<JointDescriptor>& samples, const EvalOptions& opts = {});

// Same protocol with an injected joint dissimilarity (used to test the
// counting arithmetic independently of the descriptor math). Per-part
// accuracies are not computed; the confusion matrix uses `fn`.
using JointDissimilarityFn =
    std::function<double(const JointDescriptor&, const JointDescriptor&)>;
EvalReport evaluate_with(const std::vector<JointDescriptor>& samples, const JointDissimilarityFn& fn);

// Accuracy at `steps` uniformly spaced weights spanning [0, 1].
std::vector<std::pair<double, double>> sweep_w(const std::vector<JointDescriptor>& samples,
                                               int steps);

// Accuracy on the first n cultivars (sorted by id) for n = start,
// start+step, ..., <= stop.
std::vector<std::pair<int, double>> scaling_study(const std::vector<JointDescriptor>& samples,
                                                  int start, int stop, int step,
                                                  double w = 0.29);

std::string report_to_json(const EvalReport& report, double w);
std::string confusion_to_csv(const EvalReport& report);
void save_report_json(const std::filesystem::path& path, const EvalReport& report, double w);
void save_confusion_csv(const std::filesystem::path& path, const EvalReport& report);
// Gray-scale rendering, 0 = black for the closest pairs.
void save_confusion_pgm(const std::filesystem::path& path, const EvalReport& report);

}  // namespace mscm

#endif  // MSCM_MATCHING_HPP
