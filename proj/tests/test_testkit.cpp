#include "mscm/dataset.hpp"
#include "mscm/descriptor.hpp"
#include "mscm/error.hpp"
#include "mscm/testkit.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace mscm;
using namespace mscm::testkit;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mscm_tk_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_SUITE("testkit") {

TEST_CASE("render is deterministic") {
  SyntheticSpec spec;
  spec.shape = Star{6, 40, 90};
  spec.intensity = RadialGradient{0.3, 0.9};
  spec.rotation = 0.7;
  const auto [img1, gt1] = render(spec);
  const auto [img2, gt2] = render(spec);
  CHECK(img1.data == img2.data);
  CHECK((gt1.mask() == gt2.mask()).all());
}

TEST_CASE("identity transform renders the plain shape") {
  SyntheticSpec plain;
  plain.shape = Disk{40};
  plain.intensity = Constant{0.5};
  SyntheticSpec identity = plain;
  identity.scale = 1.0;
  identity.rotation = 0.0;
  identity.translation = Vec2(0, 0);
  CHECK(render(plain).first.data == render(identity).first.data);
}

TEST_CASE("ground truth matches the measured disk within 2%") {
  SyntheticSpec spec;
  spec.shape = Disk{100};
  spec.intensity = Constant{0.5};
  spec.canvas_width = spec.canvas_height = 232;
  GroundTruth gt(spec);
  const LeafImage leaf = gt.leaf();
  const Contour c(gt.contour(512), 2 * kPi * 100);

  REQUIRE(gt.eta_half().has_value());
  REQUIRE(gt.h_half().has_value());
  for (Eigen::Index i = 0; i < 512; i += 37) {
    const ChordMeasures m = measure_all(leaf, c, i, 0.5);
    CHECK(std::abs(m.eta - *gt.eta_half()) <= 0.02 * *gt.eta_half());
    CHECK(std::abs(m.h - *gt.h_half()) <= 0.02 * *gt.h_half());
    CHECK(m.mu == *gt.constant_mu());
    CHECK(m.sigma == *gt.constant_sigma());
  }
}

TEST_CASE("closed forms scale with the transform") {
  SyntheticSpec spec;
  spec.shape = Disk{60};
  spec.intensity = Constant{0.4};
  spec.scale = 2.5;
  spec.canvas_width = spec.canvas_height = 340;
  GroundTruth gt(spec);
  CHECK(*gt.eta_half() == doctest::Approx(300.0));
  CHECK(*gt.h_half() == doctest::Approx(300.0 / kPi));
  CHECK(gt.max_radius() == doctest::Approx(150.0));
}

TEST_CASE("a star is not convex: some half-arc chord leaves the region") {
  const auto min_eta_ratio = [](double inner) {
    SyntheticSpec spec;
    spec.shape = Star{5, inner, 100};
    spec.intensity = Constant{0.6};
    spec.canvas_width = spec.canvas_height = 232;
    GroundTruth gt(spec);
    CHECK_FALSE(gt.convex());
    const LeafImage leaf = gt.leaf();
    const Contour c(gt.contour(512), 1.0);
    double min_ratio = 1.0;
    for (Eigen::Index i = 0; i < 512; ++i) {
      const Chord ch = chord_at(c, i, 0.5);
      if (ch.degenerate) continue;
      min_ratio =
          std::min(min_ratio, eta_measure(leaf, ch, quadrature_samples(ch.length)) / ch.length);
    }
    return min_ratio;
  };
  CHECK(min_eta_ratio(40) < 0.999);  // mildly concave: some chord already leaves
  CHECK(min_eta_ratio(10) < 0.9);    // deep notches: half-arc chords cross the gaps
}

TEST_CASE("ground-truth contours are equally spaced and positively oriented") {
  SyntheticSpec spec;
  spec.shape = Ellipse{80, 50};
  spec.intensity = Constant{0.5};
  spec.rotation = 0.6;
  spec.canvas_width = spec.canvas_height = 200;
  GroundTruth gt(spec);
  const PointMatrix pts = gt.contour(256);

  double area2 = 0, min_step = 1e9, max_step = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const Eigen::Index j = (i + 1) % pts.rows();
    area2 += pts(i, 0) * pts(j, 1) - pts(j, 0) * pts(i, 1);
    const double step = (pts.row(j) - pts.row(i)).norm();
    min_step = std::min(min_step, step);
    max_step = std::max(max_step, step);
  }
  CHECK(area2 > 0);
  CHECK((max_step - min_step) / max_step < 0.01);  // smooth boundary, near-equal chords
}

TEST_CASE("boundary_distance agrees with a dense polyline oracle") {
  SyntheticSpec spec;
  spec.shape = Ellipse{70, 45};
  spec.intensity = Constant{0.5};
  spec.rotation = 0.35;
  spec.scale = 1.4;
  spec.translation = Vec2(5, -3);
  spec.canvas_width = spec.canvas_height = 260;
  GroundTruth gt(spec);

  const PointMatrix dense = gt.contour(8192);
  std::uint64_t rng = 7;
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 p(uniform01(rng) * 260, uniform01(rng) * 260);
    double oracle = 1e300;
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
      oracle = std::min(oracle, (dense.row(i).transpose() - p).norm());
    CHECK(std::abs(gt.boundary_distance(p) - oracle) < 1e-2);
  }
}

TEST_CASE("boundary_distance is exact for disks and rectangle edges") {
  SyntheticSpec spec;
  spec.shape = Disk{50};
  spec.intensity = Constant{0.5};
  spec.canvas_width = spec.canvas_height = 128;
  GroundTruth gt(spec);
  const Vec2 center(63.5, 63.5);
  CHECK(gt.boundary_distance(center + Vec2(10, 0)) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(gt.boundary_distance(center + Vec2(60, 0)) == doctest::Approx(10.0).epsilon(1e-12));

  SyntheticSpec rect;
  rect.shape = Rectangle{60, 40};
  rect.intensity = Constant{0.5};
  rect.canvas_width = rect.canvas_height = 128;
  GroundTruth rgt(rect);
  CHECK(rgt.boundary_distance(center) == doctest::Approx(20.0).epsilon(1e-12));  // to long edge
  CHECK(rgt.boundary_distance(center + Vec2(40, 30)) ==
        doctest::Approx(std::hypot(10.0, 10.0)).epsilon(1e-12));  // past the corner
}

TEST_CASE("shapes must fit the canvas with margin") {
  SyntheticSpec spec;
  spec.shape = Disk{120};
  spec.intensity = Constant{0.5};
  spec.canvas_width = spec.canvas_height = 200;
  CHECK_THROWS_WITH_AS(render(spec), doctest::Contains("ShapeOutOfCanvas"), Error);
}

TEST_CASE("mini datasets are deterministic down to the bytes") {
  TempDir a("mini_a"), b("mini_b");
  make_mini_dataset(a.path, 3, 7);
  make_mini_dataset(b.path, 3, 7);
  int files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.path)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(entry.path(), a.path);
    CHECK(read_file(entry.path()) == read_file(b.path / rel));
  }
  CHECK(files == 18);

  TempDir c("mini_c");
  make_mini_dataset(c.path, 3, 8);  // different seed, different bytes
  bool any_differ = false;
  for (const auto& entry : fs::recursive_directory_iterator(a.path)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a.path);
    any_differ |= read_file(entry.path()) != read_file(c.path / rel);
  }
  CHECK(any_differ);
}

TEST_CASE("mini dataset classifies perfectly under 1NN") {
  TempDir data("mini_eval");
  make_mini_dataset(data.path, 4, 7);
  const DescriptorStore store = extract_all(scan_directory(data.path), ExtractConfig{});
  const EvalReport report = evaluate(assemble_joints(store), {});
  CHECK(report.n_tests == 8);
  CHECK(report.accuracy == 1.0);
  CHECK(report.per_part_accuracy[0] == 1.0);
  CHECK(report.per_part_accuracy[1] == 1.0);
  CHECK(report.per_part_accuracy[2] == 1.0);
}

TEST_CASE("swapping two class directories permutes the confusion matrix") {
  TempDir data("mini_swap");
  make_mini_dataset(data.path, 4, 31);
  const DescriptorStore store = extract_all(scan_directory(data.path), ExtractConfig{});
  const EvalReport base = evaluate(assemble_joints(store), {});

  fs::rename(data.path / "c001", data.path / "ctmp");
  fs::rename(data.path / "c002", data.path / "c001");
  fs::rename(data.path / "ctmp", data.path / "c002");
  const DescriptorStore swapped_store = extract_all(scan_directory(data.path), ExtractConfig{});
  const EvalReport swapped = evaluate(assemble_joints(swapped_store), {});

  CHECK(swapped.accuracy == base.accuracy);
  const std::array<int, 4> perm = {0, 2, 1, 3};  // c001 <-> c002
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(swapped.confusion(i, j) ==
            doctest::Approx(base.confusion(perm[static_cast<std::size_t>(i)],
                                           perm[static_cast<std::size_t>(j)]))
                .epsilon(1e-12));
}

TEST_CASE("uniform01 is deterministic and in range") {
  std::uint64_t a = 42, b = 42;
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform01(a);
    CHECK(x == uniform01(b));
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(mix_seed(7, 1, 2, 3) == mix_seed(7, 1, 2, 3));
  CHECK(mix_seed(7, 1, 2, 3) != mix_seed(7, 1, 2, 4));
}

}  // TEST_SUITE
