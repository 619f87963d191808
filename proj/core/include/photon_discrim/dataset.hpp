#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "photon_discrim/types.hpp"

namespace photon_discrim {

/// Estimates [P(0)..P(5), P(>=6)] from one count sequence. Entries are
/// integer multiples of 1/m and sum to one.
FeatureVector featurize(const PhotonCountSequence& counts);

/// One labelled unit of classification: a subset of m measurements, kept
/// both raw (naive Bayes input) and featurized (ADALINE/MNN/CNN input).
struct Subset {
  std::uint64_t id = 0;
  PhotonCountSequence counts;
  FeatureVector features;
};

struct SubsetCollection {
  std::vector<Subset> subsets;
  int m = 0;
  int n_subsets_per_class = 0;
  double split_fraction = 0.0;
  double nbar = 0.0;
};

/// Fresh sampling draws every subset independently; pool partition carves
/// one long measurement record per class into consecutive subsets.
enum class SamplingMode { FreshSubsets, PartitionPool };

struct CollectionOptions {
  int n_subsets_per_class = 1000;
  double split_fraction = 0.7;
  SamplingMode mode = SamplingMode::FreshSubsets;
};

/// Builds balanced train/test collections for one (nbar, m) setting. Each
/// subset's seed derives from (seed, class, index), the per-class shuffle is
/// seed-determined, and the split is stratified so both partitions stay
/// exactly balanced.
std::pair<SubsetCollection, SubsetCollection> build_collection(
    MeanPhotonNumber nbar, int m, const CollectionOptions& options,
    std::uint64_t seed);

/// Feature CSV (`subset_id,class,nbar,m,p0..p6plus`), raw-count sidecar
/// (`subset_id,bin_index,count`) and a JSON manifest describing the
/// generator settings.
void save_collection(const SubsetCollection& collection,
                     const std::string& features_csv_path,
                     const std::string& raw_counts_csv_path,
                     const std::string& manifest_json_path,
                     std::uint64_t seed);

/// Reads a raw-count sidecar back into per-subset sequences (ordered by
/// subset id). Labels are not part of the sidecar.
std::vector<Subset> load_raw_counts(const std::string& raw_counts_csv_path);

/// Reads labels from a feature CSV: subset_id -> class.
std::vector<std::pair<std::uint64_t, SourceKind>> load_labels(
    const std::string& features_csv_path);

}  // namespace photon_discrim
