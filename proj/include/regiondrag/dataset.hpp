// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regiondrag/codec.hpp"
#include "regiondrag/denoiser.hpp"
#include "regiondrag/mapping.hpp"
#include "regiondrag/metrics.hpp"
#include "regiondrag/region.hpp"
#include "regiondrag/types.hpp"

namespace regiondrag {

struct BenchSample {
  std::string id;
  std::filesystem::path image_path;  // relative paths resolve against the dataset root
  std::string prompt;
  Extent extent;
  std::optional<Region> mask;
  std::vector<PointPair> points;
  std::vector<RegionPair> regions;
  /// In-memory image for synthetic samples; disk samples decode on demand.
  std::shared_ptr<const ImageBuffer> image;
};

ImageBuffer load_sample_image(const BenchSample& sample);

struct LoadRejection {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

struct LoadedDataset {
  std::filesystem::path root;
  std::vector<BenchSample> samples;
  std::vector<LoadRejection> rejects;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Reads <root>/manifest.jsonl: one JSON record per line,
/// {id, image, prompt, mask?, points?: [{hx,hy,tx,ty}], regions?: [{handle, target}]}.
/// Invalid records are rejected with a reason; loading continues.
LoadedDataset load_dataset(const std::filesystem::path& root);

nlohmann::json sample_to_json(const BenchSample& sample);
BenchSample sample_from_json(const nlohmann::json& j, const std::filesystem::path& root);
void save_manifest(const std::filesystem::path& root, const std::vector<BenchSample>& samples);

struct PointCountStats {
  std::vector<std::size_t> counts;  // per region pair, sample order
  double median = 0.0;
  double bin_width = 0.25;
  /// bin index k covers log10(count) in [k * bin_width, (k + 1) * bin_width).
  std::map<int, std::size_t> log10_histogram;
};

/// Equivalent point-pair counts from the dense mapper; even-count medians
/// average the two middle values.
PointCountStats equivalent_point_stats(const std::vector<BenchSample>& samples);

/// ceil(fraction * N) pairs drawn uniformly without replacement, kept in
/// their original order. Same seed, same subset.
MappedPointSet sample_point_subset(const MappedPointSet& pairs, double fraction, std::uint64_t seed);

/// Region pairs used to edit a sample: its region pairs, or one-pixel
/// regions for point-only samples.
std::vector<RegionPair> edit_region_pairs(const BenchSample& sample);

/// Point pairs used for Mean Distance: the annotated points, or one pair per
/// region pair whose target is nearest the target-region centroid.
std::vector<PointPair> evaluation_points(const BenchSample& sample);

struct BenchRow {
  std::string id;
  bool failed = false;
  std::string error;
  double md_x100 = 0.0;
  double proxy_x100 = 0.0;
  double wall_ms = 0.0;
  std::size_t mapped_points = 0;
};

struct BenchAggregates {
  double mean_md_x100 = 0.0;
  double mean_proxy_x100 = 0.0;
  double mean_wall_ms = 0.0;
  std::size_t evaluated = 0;
  std::size_t failed = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::optional<BenchAggregates> aggregates;  // absent when no sample succeeded
  EditConfig config;
  std::string backend;
  std::string codec;
  std::string matcher;
};

struct BenchOptions {
  /// Fraction of mapped latent points used for copy-paste (point-subset ablation).
  std::optional<double> subset_fraction;
  std::uint64_t subset_seed = 0;
  int workers = 1;
};

BenchReport run_benchmark(const std::vector<BenchSample>& samples, const EditConfig& cfg, const Denoiser& backend,
                          const LatentCodec& codec, const FeatureMatcher& matcher, const BenchOptions& options = {});

nlohmann::json report_to_json(const BenchReport& report);
/// One row per sample: id,status,md_x100,proxy_x100,wall_ms,mapped_points.
std::string report_to_csv(const BenchReport& report);

}  // namespace regiondrag
