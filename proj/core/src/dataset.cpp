#include "photon_discrim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "photon_discrim/photon_stats.hpp"
#include "photon_discrim/rng.hpp"

namespace photon_discrim {

namespace {

// Salts for the independent seed streams hanging off one master seed.
constexpr std::uint64_t kSubsetStream = 0x5542u;   // per-subset sampling
constexpr std::uint64_t kShuffleStream = 0x5348u;  // per-class shuffle

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
    const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
    std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
  }
  return idx;
}

}  // namespace

FeatureVector featurize(const PhotonCountSequence& counts) {
  if (counts.counts.empty()) throw std::domain_error("featurize requires a non-empty sequence");
  FeatureVector fv;
  const double inv_m = 1.0 / static_cast<double>(counts.counts.size());
  for (int c : counts.counts) {
    if (c < 0) throw std::domain_error("negative photon count");
    fv.probs[std::min(c, kFeatureDim - 1)] += inv_m;
  }
  fv.m = static_cast<int>(counts.counts.size());
  fv.label = counts.source;
  fv.nbar = counts.nbar;
  return fv;
}

std::pair<SubsetCollection, SubsetCollection> build_collection(
    MeanPhotonNumber nbar, int m, const CollectionOptions& options,
    std::uint64_t seed) {
  if (m < 1) throw std::domain_error("subset size m must be >= 1");
  if (options.n_subsets_per_class < 2) {
    throw ConfigError("n_subsets_per_class must be >= 2, got " +
                      std::to_string(options.n_subsets_per_class));
  }
  if (options.split_fraction <= 0.0 || options.split_fraction >= 1.0) {
    throw ConfigError("split_fraction must lie in (0,1), got " +
                      std::to_string(options.split_fraction));
  }
  const int n = options.n_subsets_per_class;
  const int n_train = static_cast<int>(std::lround(options.split_fraction * n));
  if (n_train < 1 || n_train >= n) {
    throw ConfigError("split_fraction " + std::to_string(options.split_fraction) +
                      " leaves an empty train or test partition for n=" + std::to_string(n));
  }

  auto init = [&](SubsetCollection& col) {
    col.m = m;
    col.n_subsets_per_class = n;
    col.split_fraction = options.split_fraction;
    col.nbar = nbar.value();
  };
  SubsetCollection train, test;
  init(train);
  init(test);

  const SourceKind kinds[2] = {SourceKind::Coherent, SourceKind::Thermal};
  for (int k = 0; k < 2; ++k) {
    std::vector<Subset> pool(n);
    if (options.mode == SamplingMode::FreshSubsets) {
      for (int i = 0; i < n; ++i) {
        const std::uint64_t sub_seed =
            derive_seed(seed, kSubsetStream, static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(i));
        pool[i].counts = sample_counts(kinds[k], nbar, static_cast<std::size_t>(m), sub_seed);
      }
    } else {
      // Strict-fidelity mode: one long record per class, chopped in order.
      const std::uint64_t pool_seed = derive_seed(seed, kSubsetStream, static_cast<std::uint64_t>(k));
      const PhotonCountSequence record =
          sample_counts(kinds[k], nbar, static_cast<std::size_t>(n) * m, pool_seed);
      for (int i = 0; i < n; ++i) {
        pool[i].counts.counts.assign(record.counts.begin() + static_cast<std::ptrdiff_t>(i) * m,
                                     record.counts.begin() + static_cast<std::ptrdiff_t>(i + 1) * m);
        pool[i].counts.source = kinds[k];
        pool[i].counts.nbar = nbar.value();
        pool[i].counts.seed = pool_seed;
      }
    }
    for (int i = 0; i < n; ++i) {
      pool[i].id = static_cast<std::uint64_t>(k) * n + i;
      pool[i].features = featurize(pool[i].counts);
    }

    Rng shuffle_rng(derive_seed(seed, kShuffleStream, static_cast<std::uint64_t>(k)));
    const auto order = shuffled_indices(static_cast<std::size_t>(n), shuffle_rng);
    for (int i = 0; i < n; ++i) {
      auto& dst = (i < n_train) ? train : test;
      dst.subsets.push_back(std::move(pool[order[i]]));
    }
  }
  return {std::move(train), std::move(test)};
}

void save_collection(const SubsetCollection& collection,
                     const std::string& features_csv_path,
                     const std::string& raw_counts_csv_path,
                     const std::string& manifest_json_path,
                     std::uint64_t seed) {
  std::ofstream feat(features_csv_path);
  if (!feat) throw IoError("cannot open for writing: " + features_csv_path);
  feat << "subset_id,class,nbar,m,p0,p1,p2,p3,p4,p5,p6plus\n";
  char buf[64];
  for (const Subset& s : collection.subsets) {
    feat << s.id << ',' << (s.features.label ? to_string(*s.features.label) : "unknown") << ',';
    std::snprintf(buf, sizeof(buf), "%.6g", s.features.nbar);
    feat << buf << ',' << s.features.m;
    for (double p : s.features.probs) {
      std::snprintf(buf, sizeof(buf), ",%.12g", p);
      feat << buf;
    }
    feat << '\n';
  }
  if (!feat) throw IoError("failed writing " + features_csv_path);

  std::ofstream raw(raw_counts_csv_path);
  if (!raw) throw IoError("cannot open for writing: " + raw_counts_csv_path);
  raw << "subset_id,bin_index,count\n";
  for (const Subset& s : collection.subsets) {
    for (std::size_t b = 0; b < s.counts.counts.size(); ++b) {
      raw << s.id << ',' << b << ',' << s.counts.counts[b] << '\n';
    }
  }
  if (!raw) throw IoError("failed writing " + raw_counts_csv_path);

  nlohmann::json manifest{{"schema", 1},
                          {"seed", seed},
                          {"nbar", collection.nbar},
                          {"m", collection.m},
                          {"n_subsets_per_class", collection.n_subsets_per_class},
                          {"split_fraction", collection.split_fraction},
                          {"generator_version", "0.1.0"}};
  std::ofstream man(manifest_json_path);
  if (!man) throw IoError("cannot open for writing: " + manifest_json_path);
  man << manifest.dump(2) << '\n';
  if (!man) throw IoError("failed writing " + manifest_json_path);
}

std::vector<Subset> load_raw_counts(const std::string& raw_counts_csv_path) {
  std::ifstream is(raw_counts_csv_path);
  if (!is) throw IoError("cannot open raw counts CSV: " + raw_counts_csv_path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("subset_id,bin_index,count", 0) != 0) {
    throw IoError("missing subset_id,bin_index,count header in " + raw_counts_csv_path);
  }
  std::map<std::uint64_t, std::vector<std::pair<std::size_t, int>>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::uint64_t id;
    std::size_t bin;
    int count;
    if (std::sscanf(line.c_str(), "%llu,%zu,%d", reinterpret_cast<unsigned long long*>(&id),
                    &bin, &count) != 3) {
      throw IoError("malformed row " + std::to_string(line_no) + " in " + raw_counts_csv_path);
    }
    rows[id].emplace_back(bin, count);
  }
  std::vector<Subset> subsets;
  subsets.reserve(rows.size());
  for (auto& [id, bins] : rows) {
    std::sort(bins.begin(), bins.end());
    Subset s;
    s.id = id;
    s.counts.counts.reserve(bins.size());
    for (const auto& [bin, count] : bins) s.counts.counts.push_back(count);
    s.features = featurize(s.counts);
    subsets.push_back(std::move(s));
  }
  return subsets;
}

std::vector<std::pair<std::uint64_t, SourceKind>> load_labels(
    const std::string& features_csv_path) {
  std::ifstream is(features_csv_path);
  if (!is) throw IoError("cannot open features CSV: " + features_csv_path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("subset_id,class,", 0) != 0) {
    throw IoError("missing subset_id,class,... header in " + features_csv_path);
  }
  std::vector<std::pair<std::uint64_t, SourceKind>> labels;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw IoError("malformed row in " + features_csv_path);
    }
    labels.emplace_back(std::stoull(line.substr(0, c1)),
                        source_kind_from_string(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  return labels;
}

}  // namespace photon_discrim
