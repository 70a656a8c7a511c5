#include "mscm/dataset.hpp"
#include "mscm/error.hpp"
#include "mscm/testkit.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace mscm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("mscm_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void touch(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << "";
}

std::string slurp(const fs::path& p) {
  const auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

ExtractConfig fast_cfg(const fs::path& cache = {}) {
  ExtractConfig cfg;
  cfg.nc = 128;
  cfg.scale_count = 4;
  cfg.coeff_count = 5;
  cfg.cache_dir = cache;
  return cfg;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("scan_directory parses the cultivar/part/sample layout") {
  TempDir dir("scan");
  for (const char* name : {"U_1.png", "U_2.png", "M_1.png", "M_2.png", "L_1.png", "L_2.png"})
    touch(dir.path / "c001" / name);

  const Manifest m = scan_directory(dir.path);
  CHECK(m.records.size() == 6);
  CHECK(m.n_cultivars == 1);
  CHECK(m.unmatched.empty());
  // sorted: sample-major then U < M < L
  CHECK(m.records[0].part == 'U');
  CHECK(m.records[0].sample_index == 1);
  CHECK(m.records[1].part == 'M');
  CHECK(m.records[2].part == 'L');
  CHECK(m.records[3].sample_index == 2);
  CHECK(m.records[0].id() == "c001#1");
}

TEST_CASE("scan_directory fails on empty trees and missing roots") {
  TempDir dir("empty");
  CHECK_THROWS_WITH_AS(scan_directory(dir.path), doctest::Contains("NoRecordsFound"), Error);
  CHECK_THROWS_AS(scan_directory(dir.path / "nope"), Error);
}

TEST_CASE("scan_directory handles the full 200-cultivar layout") {
  TempDir dir("full");
  for (int c = 0; c < 200; ++c) {
    char name[8];
    std::snprintf(name, sizeof(name), "v%03d", c);
    for (const char* file : {"U_1.png", "U_2.png", "M_1.png", "M_2.png", "L_1.png", "L_2.png"})
      touch(dir.path / name / file);
  }
  const Manifest m = scan_directory(dir.path);
  CHECK(m.records.size() == 1200);
  CHECK(m.n_cultivars == 200);
  CHECK_NOTHROW(validate_strict(m));
}

TEST_CASE("scan_directory reports unmatched files without failing") {
  TempDir dir("unmatched");
  touch(dir.path / "c001" / "U_1.png");
  touch(dir.path / "c001" / "notes.txt");
  touch(dir.path / "c001" / "X_9.png");
  touch(dir.path / "stray.png");
  const Manifest m = scan_directory(dir.path);
  CHECK(m.records.size() == 1);
  CHECK(m.unmatched.size() == 3);
}

TEST_CASE("validate_strict names the missing record") {
  TempDir dir("strict");
  for (const char* name : {"U_1.png", "U_2.png", "M_1.png", "M_2.png", "L_1.png"})
    touch(dir.path / "c007" / name);
  const Manifest m = scan_directory(dir.path);
  CHECK_THROWS_WITH_AS(validate_strict(m), doctest::Contains("L_2"), Error);
}

TEST_CASE("extract_all produces one descriptor per record") {
  TempDir data("toy"), out("toyout");
  testkit::make_mini_dataset(data.path, 2, 11);
  const Manifest m = scan_directory(data.path);
  const DescriptorStore store = extract_all(m, fast_cfg());
  CHECK(store.entries.size() == 12);
  CHECK(store.skipped.empty());
  for (const StoreEntry& e : store.entries)
    CHECK(e.descriptor.size() == 4 * 5 * 4);  // 4 * C * K
  CHECK(store.stats.pooled.eta_dot > 0);
}

TEST_CASE("extraction is deterministic and idempotent") {
  TempDir data("det"), out1("det1"), out2("det2");
  testkit::make_mini_dataset(data.path, 2, 3);
  const Manifest m = scan_directory(data.path);

  save_store(extract_all(m, fast_cfg()), out1.path);
  save_store(extract_all(m, fast_cfg()), out2.path);
  CHECK(slurp(out1.path / "descriptors.csv") == slurp(out2.path / "descriptors.csv"));
  CHECK(slurp(out1.path / "norm_stats.json") == slurp(out2.path / "norm_stats.json"));
  CHECK(slurp(out1.path / "skips.txt") == slurp(out2.path / "skips.txt"));
}

TEST_CASE("the raw-coefficient cache does not change results") {
  TempDir data("cache"), out("cacheout");
  testkit::make_mini_dataset(data.path, 2, 5);
  const Manifest m = scan_directory(data.path);
  const fs::path cache = out.path / "cache";

  save_store(extract_all(m, fast_cfg(cache)), out.path / "first");
  CHECK(fs::exists(cache));
  const auto n_cached = std::distance(fs::directory_iterator(cache), fs::directory_iterator{});
  CHECK(n_cached == 12);

  // warm-cache rerun, then cold rerun after deleting the cache
  save_store(extract_all(m, fast_cfg(cache)), out.path / "warm");
  fs::remove_all(cache);
  save_store(extract_all(m, fast_cfg(cache)), out.path / "cold");
  CHECK(slurp(out.path / "first" / "descriptors.csv") == slurp(out.path / "warm" / "descriptors.csv"));
  CHECK(slurp(out.path / "first" / "descriptors.csv") == slurp(out.path / "cold" / "descriptors.csv"));
}

TEST_CASE("training statistics depend only on sample-1 records") {
  TempDir data("stats");
  testkit::make_mini_dataset(data.path, 2, 9);
  const Manifest m = scan_directory(data.path);
  const StatsSet before = extract_all(m, fast_cfg()).stats;

  // Overwrite a *test* image (sample 2): stats must not move.
  const auto [img, gt] = testkit::render([] {
    testkit::SyntheticSpec s;
    s.shape = testkit::Disk{40};
    s.intensity = testkit::Constant{0.77};
    return s;
  }());
  save_png(data.path / "c001" / "M_2.png", img);
  const StatsSet after_test_edit = extract_all(m, fast_cfg()).stats;
  CHECK(before.pooled.eta_dot == after_test_edit.pooled.eta_dot);
  CHECK(before.pooled.sigma_dot == after_test_edit.pooled.sigma_dot);

  // Overwrite a *model* image (sample 1): stats must move.
  save_png(data.path / "c001" / "M_1.png", img);
  const StatsSet after_model_edit = extract_all(m, fast_cfg()).stats;
  CHECK(before.pooled.eta_dot != after_model_edit.pooled.eta_dot);
}

TEST_CASE("per-part statistics split the training pool") {
  TempDir data("ppstats");
  testkit::make_mini_dataset(data.path, 2, 21);
  const Manifest m = scan_directory(data.path);
  ExtractConfig cfg = fast_cfg();
  cfg.stats_per_part = true;
  const DescriptorStore store = extract_all(m, cfg);
  CHECK(store.stats.per_part);
  CHECK(store.stats.parts[0].eta_dot > 0);
  CHECK(store.stats.parts[0].eta_dot != store.stats.parts[2].eta_dot);

  TempDir out("ppout");
  save_store(store, out.path);
  const DescriptorStore loaded = load_store(out.path);
  CHECK(loaded.stats.per_part);
  CHECK(loaded.stats.parts[1].mu_dot == store.stats.parts[1].mu_dot);
}

TEST_CASE("save and load round-trip the store") {
  TempDir data("roundtrip"), out("rtout");
  testkit::make_mini_dataset(data.path, 2, 13);
  const DescriptorStore store = extract_all(scan_directory(data.path), fast_cfg());
  save_store(store, out.path);
  const DescriptorStore loaded = load_store(out.path);
  REQUIRE(loaded.entries.size() == store.entries.size());
  for (std::size_t i = 0; i < store.entries.size(); ++i) {
    CHECK(loaded.entries[i].record.id() == store.entries[i].record.id());
    CHECK(loaded.entries[i].record.part == store.entries[i].record.part);
    CHECK((loaded.entries[i].descriptor.values() - store.entries[i].descriptor.values())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK(loaded.stats.pooled.h_dot == store.stats.pooled.h_dot);
}

TEST_CASE("assemble_joints builds one joint per sample") {
  TempDir data("joints");
  testkit::make_mini_dataset(data.path, 2, 17);
  const DescriptorStore store = extract_all(scan_directory(data.path), fast_cfg());
  const auto joints = assemble_joints(store);
  REQUIRE(joints.size() == 4);  // 2 cultivars x 2 samples
  CHECK(joints[0].cultivar_id == "c000");
  CHECK(joints[0].sample_id == "c000#1");

  // joint parts match their source descriptors exactly
  for (const JointDescriptor& j : joints)
    for (int p = 0; p < 3; ++p) {
      bool found = false;
      for (const StoreEntry& e : store.entries) {
        if (e.record.id() == j.sample_id && part_index(e.record.part) == p) {
          CHECK((e.descriptor.values() - j.parts[static_cast<std::size_t>(p)].values())
                    .cwiseAbs()
                    .maxCoeff() == 0.0);
          found = true;
        }
      }
      CHECK(found);
    }
}

TEST_CASE("assemble_joints names the missing part") {
  TempDir data("missing");
  testkit::make_mini_dataset(data.path, 2, 19);
  DescriptorStore store = extract_all(scan_directory(data.path), fast_cfg());
  std::erase_if(store.entries, [](const StoreEntry& e) {
    return e.record.cultivar_id == "c001" && e.record.sample_index == 2 && e.record.part == 'M';
  });
  CHECK_THROWS_WITH_AS(assemble_joints(store), doctest::Contains("c001#2"), Error);
}

TEST_CASE("unreadable images are skipped with a reason") {
  TempDir data("skips");
  testkit::make_mini_dataset(data.path, 2, 23);
  // corrupt one image
  write_file_atomic(data.path / "c000" / "L_2.png", std::string("not a png"));
  ExtractConfig cfg = fast_cfg();
  cfg.strict = true;  // manifest still complete; decode fails per record
  const DescriptorStore store = extract_all(scan_directory(data.path), cfg);
  CHECK(store.entries.size() == 11);
  REQUIRE(store.skipped.size() == 1);
  CHECK(store.skipped[0].record.id() == "c000#2");
  CHECK(store.skipped[0].reason.find("BadImage") != std::string::npos);
}

TEST_CASE("content_hash distinguishes file contents") {
  const std::vector<std::uint8_t> a = {1, 2, 3}, b = {1, 2, 4};
  CHECK(content_hash(a) != content_hash(b));
  CHECK(content_hash(a) == content_hash({1, 2, 3}));
}

}  // TEST_SUITE
