// Dataset ingestion: scans a directory tree of leaf images laid out as
// <root>/<cultivar_id>/<part>_<sample>.png (part in {U,M,L}, sample in
// {1,2}), extracts descriptors for every record, and assembles the per-sample
// joint descriptors used by the matching protocol.

#ifndef MSCM_DATASET_HPP
#define MSCM_DATASET_HPP

#include "mscm/matching.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mscm {

struct LeafRecord {
  std::string cultivar_id;
  int sample_index = 1;  // 1 or 2
  char part = 'U';
  std::filesystem::path image_path;

  std::string id() const;  // "<cultivar>#<sample>"
};

struct Manifest {
  std::vector<LeafRecord> records;  // sorted by (cultivar, sample, part)
  int n_cultivars = 0;
  std::vector<std::string> unmatched;  // files that did not fit the layout
};

Manifest scan_directory(const std::filesystem::path& root);

// Every cultivar must have exactly 6 records (2 samples x 3 parts).
void validate_strict(const Manifest& m);

void save_manifest_csv(const std::filesystem::path& path, const Manifest& m);

struct ExtractConfig {
  int nc = 512;          // contour samples
  int scale_count = 7;   // K
  int coeff_count = 7;   // C
  bool strict = true;
  bool stats_per_part = false;  // train stats pooled over parts by default
  std::filesystem::path cache_dir;  // empty disables the raw-coefficient cache
  unsigned threads = 0;             // 0 = hardware concurrency
};

// Training statistics: pooled, or one set per part when stats_per_part.
struct StatsSet {
  bool per_part = false;
  NormStats pooled;
  std::array<NormStats, 3> parts;

  const NormStats& for_part(char part) const;
};

struct StoreEntry {
  LeafRecord record;
  RawCoefficients raw;
  Descriptor descriptor;
};

struct SkipEntry {
  LeafRecord record;
  std::string reason;
};

struct DescriptorStore {
  int nc = 0, scale_count = 0, coeff_count = 0;
  StatsSet stats;
  std::vector<StoreEntry> entries;  // manifest order
  std::vector<SkipEntry> skipped;
};

// Full extraction over the manifest. Raw coefficients come from the
// per-record pipeline (cached by image content hash + config); the training
// statistics use sample_index == 1 records only, then every record is
// finalized against them. Per-record failures are collected, not fatal.
DescriptorStore extract_all(const Manifest& m, const ExtractConfig& cfg);

// descriptors.csv + norm_stats.json + skips.txt under `dir`.
void save_store(const DescriptorStore& store, const std::filesystem::path& dir);
DescriptorStore load_store(const std::filesystem::path& dir);

// One JointDescriptor per (cultivar, sample); throws MissingPart naming the
// record when a part is absent.
std::vector<JointDescriptor> assemble_joints(const DescriptorStore& store);

// FNV-1a over the file bytes, used as the cache key component.
std::uint64_t content_hash(const std::vector<std::uint8_t>& bytes);

}  // namespace mscm

#endif  // MSCM_DATASET_HPP
