#include "mscm/dataset.hpp"

#include "mscm/error.hpp"
#include "mscm/image_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <thread>

namespace mscm {

namespace fs = std::filesystem;

namespace {

int part_order(char part) { return part == 'U' ? 0 : part == 'M' ? 1 : 2; }

bool parse_leaf_filename(const std::string& name, char& part, int& sample) {
  // <part>_<sample>.<ext>, part in {U,M,L}, sample in {1,2}
  const auto dot = name.rfind('.');
  if (dot == std::string::npos) return false;
  const std::string stem = name.substr(0, dot);
  const std::string ext = name.substr(dot);
  if (ext != ".png" && ext != ".pgm" && ext != ".ppm") return false;
  if (stem.size() != 3 || stem[1] != '_') return false;
  if (stem[0] != 'U' && stem[0] != 'M' && stem[0] != 'L') return false;
  if (stem[2] != '1' && stem[2] != '2') return false;
  part = stem[0];
  sample = stem[2] - '0';
  return true;
}

std::string cache_key(std::uint64_t hash, const ExtractConfig& cfg) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64 "-%d-%d-%d.csv", hash, cfg.nc, cfg.scale_count,
                cfg.coeff_count);
  return buf;
}

bool load_cached_raw(const fs::path& file, int scale_count, int coeff_count, RawCoefficients& raw) {
  std::error_code ec;
  if (!fs::exists(file, ec)) return false;
  std::string text;
  try {
    const auto bytes = read_file(file);
    text.assign(bytes.begin(), bytes.end());
  } catch (const Error&) {
    return false;
  }
  std::istringstream in(text);
  int c = 0, k = 0;
  if (!(in >> c >> k) || c != coeff_count || k != scale_count) return false;

  raw.coeff_count = c;
  raw.scale_count = k;
  for (int m = 0; m < kMeasureCount; ++m) {
    raw.coeffs[static_cast<std::size_t>(m)].resize(k, c);
    for (int row = 0; row < k; ++row)
      for (int col = 0; col < c; ++col)
        if (!(in >> raw.coeffs[static_cast<std::size_t>(m)](row, col))) return false;
  }
  return true;
}

void store_cached_raw(const fs::path& file, const RawCoefficients& raw) {
  std::ostringstream out;
  out << raw.coeff_count << " " << raw.scale_count << "\n";
  for (int m = 0; m < kMeasureCount; ++m) {
    for (int row = 0; row < raw.scale_count; ++row)
      for (int col = 0; col < raw.coeff_count; ++col) {
        if (row || col) out << " ";
        out << format_double(raw.coeffs[static_cast<std::size_t>(m)](row, col));
      }
    out << "\n";
  }
  write_file_atomic(file, out.str());
}

RawCoefficients extract_raw(const std::vector<std::uint8_t>& bytes, const ExtractConfig& cfg) {
  const LeafImage leaf = make_leaf(to_gray(decode_image(bytes)));
  const Contour contour = parameterize(trace_boundary(leaf.mask), cfg.nc);
  const SignatureSet sig = max_normalize(slide(leaf, contour, cfg.scale_count));
  return raw_coefficients(sig, cfg.coeff_count);
}

nlohmann::ordered_json stats_to_json(const NormStats& s) {
  return {{"eta_dot", s.eta_dot}, {"h_dot", s.h_dot}, {"mu_dot", s.mu_dot}, {"sigma_dot", s.sigma_dot}};
}

NormStats stats_from_json(const nlohmann::json& j) {
  NormStats s;
  s.eta_dot = j.at("eta_dot").get<double>();
  s.h_dot = j.at("h_dot").get<double>();
  s.mu_dot = j.at("mu_dot").get<double>();
  s.sigma_dot = j.at("sigma_dot").get<double>();
  return s;
}

}  // namespace

std::string LeafRecord::id() const { return cultivar_id + "#" + std::to_string(sample_index); }

Manifest scan_directory(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) raise(Errc::io_error, "dataset root not found: " + root.string());

  Manifest m;
  std::vector<fs::path> cultivar_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory())
      cultivar_dirs.push_back(entry.path());
    else
      m.unmatched.push_back(entry.path().filename().string());
  }
  std::sort(cultivar_dirs.begin(), cultivar_dirs.end());

  for (const fs::path& dir : cultivar_dirs) {
    const std::string cultivar = dir.filename().string();
    if (cultivar.find(',') != std::string::npos || cultivar.find('#') != std::string::npos) {
      m.unmatched.push_back(cultivar + "/ (cultivar id may not contain ',' or '#')");
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      char part = 'U';
      int sample = 1;
      if (!fs::is_regular_file(file) || !parse_leaf_filename(file.filename().string(), part, sample)) {
        m.unmatched.push_back(cultivar + "/" + file.filename().string());
        continue;
      }
      m.records.push_back(LeafRecord{cultivar, sample, part, file});
    }
  }

  std::sort(m.records.begin(), m.records.end(), [](const LeafRecord& a, const LeafRecord& b) {
    if (a.cultivar_id != b.cultivar_id) return a.cultivar_id < b.cultivar_id;
    if (a.sample_index != b.sample_index) return a.sample_index < b.sample_index;
    return part_order(a.part) < part_order(b.part);
  });
  std::vector<std::string> ids;
  for (const LeafRecord& r : m.records)
    if (ids.empty() || ids.back() != r.cultivar_id) ids.push_back(r.cultivar_id);
  m.n_cultivars = static_cast<int>(ids.size());

  if (m.records.empty()) raise(Errc::no_records_found, "no leaf images under " + root.string());
  return m;
}

void validate_strict(const Manifest& m) {
  std::map<std::string, int> seen;  // bit per (sample, part)
  for (const LeafRecord& r : m.records)
    seen[r.cultivar_id] |= 1 << ((r.sample_index - 1) * 3 + part_order(r.part));
  for (const auto& [cultivar, bits] : seen) {
    if (bits == 0x3F) continue;
    for (int s = 1; s <= 2; ++s)
      for (const char part : kParts)
        if (!(bits & (1 << ((s - 1) * 3 + part_order(part)))))
          raise(Errc::missing_part, "cultivar " + cultivar + " lacks " + std::string(1, part) +
                                        "_" + std::to_string(s));
  }
}

void save_manifest_csv(const fs::path& path, const Manifest& m) {
  std::ostringstream out;
  out << "cultivar_id,sample_index,part,path\n";
  for (const LeafRecord& r : m.records)
    out << r.cultivar_id << "," << r.sample_index << "," << r.part << ","
        << r.image_path.generic_string() << "\n";
  write_file_atomic(path, out.str());
}

const NormStats& StatsSet::for_part(char part) const {
  return per_part ? parts[static_cast<std::size_t>(part_index(part))] : pooled;
}

std::uint64_t content_hash(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DescriptorStore extract_all(const Manifest& m, const ExtractConfig& cfg) {
  if (cfg.strict) validate_strict(m);
  if (!cfg.cache_dir.empty()) fs::create_directories(cfg.cache_dir);

  const std::size_t n = m.records.size();
  std::vector<RawCoefficients> raws(n);
  std::vector<std::string> failures(n);
  std::vector<char> ok(n, 0);

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      const LeafRecord& record = m.records[i];
      try {
        const std::vector<std::uint8_t> bytes = read_file(record.image_path);
        fs::path cache_file;
        if (!cfg.cache_dir.empty())
          cache_file = cfg.cache_dir / cache_key(content_hash(bytes), cfg);
        if (cache_file.empty() ||
            !load_cached_raw(cache_file, cfg.scale_count, cfg.coeff_count, raws[i])) {
          raws[i] = extract_raw(bytes, cfg);
          if (!cache_file.empty()) store_cached_raw(cache_file, raws[i]);
        }
        ok[i] = 1;
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  unsigned thread_count = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  thread_count = std::max(1u, std::min<unsigned>(thread_count, static_cast<unsigned>(n)));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  DescriptorStore store;
  store.nc = cfg.nc;
  store.scale_count = cfg.scale_count;
  store.coeff_count = cfg.coeff_count;

  // Training statistics from the model half (sample 1) only.
  store.stats.per_part = cfg.stats_per_part;
  if (cfg.stats_per_part) {
    for (const char part : kParts) {
      std::vector<RawCoefficients> model;
      for (std::size_t i = 0; i < n; ++i)
        if (ok[i] && m.records[i].sample_index == 1 && m.records[i].part == part)
          model.push_back(raws[i]);
      if (model.empty())
        raise(Errc::no_records_found,
              std::string("no model images for part ") + part + " survived extraction");
      store.stats.parts[static_cast<std::size_t>(part_index(part))] = train_stats(model);
    }
  } else {
    std::vector<RawCoefficients> model;
    for (std::size_t i = 0; i < n; ++i)
      if (ok[i] && m.records[i].sample_index == 1) model.push_back(raws[i]);
    if (model.empty()) raise(Errc::no_records_found, "no model images survived extraction");
    store.stats.pooled = train_stats(model);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) {
      store.skipped.push_back(SkipEntry{m.records[i], failures[i]});
      continue;
    }
    store.entries.push_back(StoreEntry{
        m.records[i], raws[i],
        Descriptor::from_raw(raws[i], store.stats.for_part(m.records[i].part))});
  }
  return store;
}

void save_store(const DescriptorStore& store, const fs::path& dir) {
  fs::create_directories(dir);

  std::vector<DescriptorRow> rows;
  rows.reserve(store.entries.size());
  for (const StoreEntry& e : store.entries)
    rows.push_back(DescriptorRow{e.record.id(), e.record.part, e.descriptor});
  save_descriptors_csv(dir / "descriptors.csv", rows);

  nlohmann::ordered_json j;
  j["nc"] = store.nc;
  j["scale_count"] = store.scale_count;
  j["coeff_count"] = store.coeff_count;
  j["per_part"] = store.stats.per_part;
  if (store.stats.per_part) {
    j["parts"] = {{"U", stats_to_json(store.stats.parts[0])},
                  {"M", stats_to_json(store.stats.parts[1])},
                  {"L", stats_to_json(store.stats.parts[2])}};
  } else {
    j["pooled"] = stats_to_json(store.stats.pooled);
  }
  write_file_atomic(dir / "norm_stats.json", j.dump(2) + "\n");

  std::ostringstream skips;
  for (const SkipEntry& s : store.skipped) skips << s.record.id() << " " << s.reason << "\n";
  write_file_atomic(dir / "skips.txt", skips.str());
}

DescriptorStore load_store(const fs::path& dir) {
  DescriptorStore store;

  const auto stats_bytes = read_file(dir / "norm_stats.json");
  const auto j = nlohmann::json::parse(stats_bytes.begin(), stats_bytes.end());
  store.nc = j.at("nc").get<int>();
  store.scale_count = j.at("scale_count").get<int>();
  store.coeff_count = j.at("coeff_count").get<int>();
  store.stats.per_part = j.at("per_part").get<bool>();
  if (store.stats.per_part) {
    store.stats.parts[0] = stats_from_json(j.at("parts").at("U"));
    store.stats.parts[1] = stats_from_json(j.at("parts").at("M"));
    store.stats.parts[2] = stats_from_json(j.at("parts").at("L"));
  } else {
    store.stats.pooled = stats_from_json(j.at("pooled"));
  }

  for (const DescriptorRow& row : load_descriptors_csv(dir / "descriptors.csv")) {
    const auto hash_at = row.id.rfind('#');
    if (hash_at == std::string::npos || hash_at + 2 != row.id.size())
      raise(Errc::io_error, "bad descriptor id '" + row.id + "'");
    LeafRecord record;
    record.cultivar_id = row.id.substr(0, hash_at);
    record.sample_index = row.id[hash_at + 1] - '0';
    record.part = row.part;
    store.entries.push_back(StoreEntry{std::move(record), RawCoefficients{}, row.descriptor});
  }
  return store;
}

std::vector<JointDescriptor> assemble_joints(const DescriptorStore& store) {
  std::map<std::pair<std::string, int>, std::array<const StoreEntry*, 3>> groups;
  for (const StoreEntry& e : store.entries) {
    auto& slot = groups[{e.record.cultivar_id, e.record.sample_index}];
    slot[static_cast<std::size_t>(part_index(e.record.part))] = &e;
  }

  std::vector<JointDescriptor> joints;
  joints.reserve(groups.size());
  for (const auto& [key, slot] : groups) {
    JointDescriptor joint;
    joint.cultivar_id = key.first;
    joint.sample_id = key.first + "#" + std::to_string(key.second);
    for (int p = 0; p < 3; ++p) {
      if (!slot[static_cast<std::size_t>(p)])
        raise(Errc::missing_part, joint.sample_id + " lacks part " + std::string(1, kParts[static_cast<std::size_t>(p)]));
      joint.parts[static_cast<std::size_t>(p)] = slot[static_cast<std::size_t>(p)]->descriptor;
    }
    joints.push_back(std::move(joint));
  }
  return joints;
}

}  // namespace mscm
