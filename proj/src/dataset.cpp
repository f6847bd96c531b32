// Copyright (C) 2026 regiondrag contributors
// SPDX-License-Identifier: Apache-2.0

#include "regiondrag/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "regiondrag/error.hpp"
#include "regiondrag/image_io.hpp"
#include "regiondrag/pipeline.hpp"
#include "regiondrag/rng.hpp"
#include "regiondrag/serialization.hpp"

namespace regiondrag {

using nlohmann::json;

ImageBuffer load_sample_image(const BenchSample& sample) {
  if (sample.image) return *sample.image;
  return read_png(sample.image_path);
}

json sample_to_json(const BenchSample& s) {
  json j{{"id", s.id}, {"image", s.image_path.filename().string()}, {"prompt", s.prompt}};
  if (s.image_path.has_parent_path() && s.image_path.is_relative()) j["image"] = s.image_path.generic_string();
  if (s.mask) j["mask"] = io::region_to_json(*s.mask);
  if (!s.points.empty()) {
    json pts = json::array();
    for (const auto& p : s.points) pts.push_back(io::point_pair_to_json(p));
    j["points"] = std::move(pts);
  }
  if (!s.regions.empty()) {
    json regs = json::array();
    for (const auto& r : s.regions) regs.push_back(io::region_pair_to_json(r));
    j["regions"] = std::move(regs);
  }
  return j;
}

BenchSample sample_from_json(const json& j, const std::filesystem::path& root) {
  if (!j.is_object()) throw Error(ErrorCode::kValidation, "sample record must be an object");
  BenchSample s;
  try {
    s.id = j.at("id").get<std::string>();
    s.image_path = j.at("image").get<std::string>();
    s.prompt = j.value("prompt", std::string{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("sample record: {}", e.what()));
  }
  const std::filesystem::path full = s.image_path.is_absolute() ? s.image_path : root / s.image_path;
  if (!std::filesystem::exists(full)) {
    throw Error(ErrorCode::kIo, fmt::format("missing image {}", full.string()));
  }
  s.extent = read_png_extent(full);
  if (j.contains("mask")) s.mask = io::region_from_json(j.at("mask"));
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) s.points.push_back(io::point_pair_from_json(p));
  }
  if (j.contains("regions")) {
    const auto& regs = j.at("regions");
    if (!regs.is_array()) throw Error(ErrorCode::kValidation, "regions must be an array");
    for (std::size_t i = 0; i < regs.size(); ++i) {
      s.regions.push_back(io::region_pair_from_json(regs[i], static_cast<int>(i)));
    }
  }
  if (s.points.empty() && s.regions.empty()) {
    throw Error(ErrorCode::kValidation, "sample needs at least one point pair or region pair");
  }
  const auto check_region = [&](const Region& r, const char* what) {
    if (r.bounds() != s.extent) {
      throw Error(ErrorCode::kOutOfBounds, fmt::format("{} annotated on a {}x{} image but the image is {}x{}", what,
                                                       r.bounds().width, r.bounds().height, s.extent.width,
                                                       s.extent.height));
    }
  };
  if (s.mask) check_region(*s.mask, "mask");
  for (const auto& r : s.regions) {
    check_region(r.handle, "handle region");
    check_region(r.target, "target region");
  }
  for (const auto& p : s.points) {
    if (!s.extent.contains(p.handle) || !s.extent.contains(p.target)) {
      throw Error(ErrorCode::kOutOfBounds, "point pair outside the image");
    }
  }
  // Keep the relative form for serialisation; loading resolves against root.
  s.image_path = full;
  return s;
}

LoadedDataset load_dataset(const std::filesystem::path& root) {
  LoadedDataset out;
  out.root = root;
  std::ifstream in(root / kManifestName);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("no {} under {}", kManifestName, root.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    std::string id;
    try {
      const json j = json::parse(line);
      if (j.is_object()) id = j.value("id", std::string{});
      out.samples.push_back(sample_from_json(j, root));
    } catch (const json::exception& e) {
      out.rejects.push_back({lineno, id, fmt::format("malformed JSON: {}", e.what())});
    } catch (const Error& e) {
      out.rejects.push_back({lineno, id, e.what()});
    }
  }
  return out;
}

void save_manifest(const std::filesystem::path& root, const std::vector<BenchSample>& samples) {
  std::filesystem::create_directories(root);
  std::ostringstream text;
  for (const auto& s : samples) {
    BenchSample rel = s;
    if (rel.image_path.is_absolute()) rel.image_path = std::filesystem::relative(rel.image_path, root);
    text << sample_to_json(rel).dump() << "\n";
  }
  io::write_text_file(root / kManifestName, text.str());
}

PointCountStats equivalent_point_stats(const std::vector<BenchSample>& samples) {
  PointCountStats stats;
  for (const auto& s : samples) {
    for (const auto& r : s.regions) stats.counts.push_back(map_region_pair_dense(r.handle, r.target).size());
  }
  if (stats.counts.empty()) return stats;
  std::vector<std::size_t> sorted = stats.counts;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.median = n % 2 ? static_cast<double>(sorted[n / 2])
                       : 0.5 * (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2]));
  for (std::size_t c : stats.counts) {
    const int bin = static_cast<int>(std::floor(std::log10(static_cast<double>(c)) / stats.bin_width));
    ++stats.log10_histogram[bin];
  }
  return stats;
}

MappedPointSet sample_point_subset(const MappedPointSet& pairs, double fraction, std::uint64_t seed) {
  if (pairs.empty()) throw Error(ErrorCode::kValidation, "cannot subsample an empty mapping");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kValidation, "subset fraction must be in (0, 1]");
  const std::size_t n = pairs.size();
  const auto k = std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const CounterRng rng(seed);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform(NoisePurpose::kSubset, 0, i) * static_cast<double>(n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  MappedPointSet out;
  out.space = pairs.space;
  for (std::size_t i : idx) out.push(pairs.pairs[i], pairs.source[i]);
  return out;
}

std::vector<RegionPair> edit_region_pairs(const BenchSample& sample) {
  if (!sample.regions.empty()) return sample.regions;
  std::vector<RegionPair> out;
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const auto& p = sample.points[i];
    auto dot = [&](Point q) {
      Mask m(sample.extent);
      m.set(q);
      return rasterize_region(BrushShape{std::move(m)}, sample.extent);
    };
    out.push_back({dot(p.handle), dot(p.target), static_cast<int>(i)});
  }
  return out;
}

std::vector<PointPair> evaluation_points(const BenchSample& sample) {
  if (!sample.points.empty()) return sample.points;
  std::vector<PointPair> out;
  for (const auto& r : sample.regions) {
    const MappedPointSet m = map_region_pair(r);
    double cx = 0, cy = 0;
    for (Point p : r.target.pixels()) {
      cx += p.x;
      cy += p.y;
    }
    cx /= static_cast<double>(r.target.size());
    cy /= static_cast<double>(r.target.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.pairs.size(); ++i) {
      const double d = std::hypot(m.pairs[i].target.x - cx, m.pairs[i].target.y - cy);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out.push_back(m.pairs[best]);
  }
  return out;
}

BenchReport run_benchmark(const std::vector<BenchSample>& samples, const EditConfig& cfg, const Denoiser& backend,
                          const LatentCodec& codec, const FeatureMatcher& matcher, const BenchOptions& options) {
  BenchReport report;
  report.config = cfg;
  report.backend = backend.name();
  report.codec = codec.name();
  report.matcher = matcher.name();
  report.rows.resize(samples.size());

  auto run_one = [&](std::size_t i) {
    const BenchSample& s = samples[i];
    BenchRow& row = report.rows[i];
    row.id = s.id;
    const auto start = std::chrono::steady_clock::now();
    try {
      const ImageBuffer image = load_sample_image(s);
      EditOptions eo;
      if (options.subset_fraction) {
        const double f = *options.subset_fraction;
        const std::uint64_t seed = options.subset_seed;
        eo.mapping_filter = [f, seed](const MappedPointSet& m) { return sample_point_subset(m, f, seed); };
      }
      EditResult result = run_edit(image, edit_region_pairs(s), s.prompt, cfg, backend, codec, eo);
      row.mapped_points = result.session.mapped.size();
      row.md_x100 = mean_distance(image, result.edited, evaluation_points(s), matcher).md_x100;
      row.proxy_x100 = pixel_similarity_proxy(image, result.edited);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  const int workers = std::max(1, backend.concurrent() ? options.workers : 1);
  if (workers == 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < samples.size(); i = next++) run_one(i);
      });
    }
  }

  BenchAggregates agg;
  for (const auto& row : report.rows) {
    if (row.failed) {
      ++agg.failed;
      continue;
    }
    ++agg.evaluated;
    agg.mean_md_x100 += row.md_x100;
    agg.mean_proxy_x100 += row.proxy_x100;
    agg.mean_wall_ms += row.wall_ms;
  }
  if (agg.evaluated > 0) {
    const auto n = static_cast<double>(agg.evaluated);
    agg.mean_md_x100 /= n;
    agg.mean_proxy_x100 /= n;
    agg.mean_wall_ms /= n;
    report.aggregates = agg;
  } else if (agg.failed > 0) {
    report.aggregates = std::nullopt;
  }
  return report;
}

json report_to_json(const BenchReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json j{{"id", r.id}, {"status", r.failed ? "failed" : "ok"}, {"wall_ms", r.wall_ms}};
    if (r.failed) {
      j["error"] = r.error;
    } else {
      j["md_x100"] = r.md_x100;
      j["proxy_x100"] = r.proxy_x100;
      j["mapped_points"] = r.mapped_points;
    }
    rows.push_back(std::move(j));
  }
  json out{{"rows", std::move(rows)},
           {"config", io::config_to_json(report.config)},
           {"backend", report.backend},
           {"codec", report.codec},
           {"matcher", report.matcher}};
  if (report.aggregates) {
    const auto& a = *report.aggregates;
    out["aggregates"] = {{"mean_md_x100", a.mean_md_x100},
                         {"mean_proxy_x100", a.mean_proxy_x100},
                         {"mean_wall_ms", a.mean_wall_ms},
                         {"evaluated", a.evaluated},
                         {"failed", a.failed}};
  } else {
    out["aggregates"] = nullptr;
  }
  return out;
}

std::string report_to_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "id,status,md_x100,proxy_x100,wall_ms,mapped_points\n";
  for (const auto& r : report.rows) {
    if (r.failed) {
      out << fmt::format("{},failed,,,{:.3f},\n", r.id, r.wall_ms);
    } else {
      out << fmt::format("{},ok,{:.6f},{:.6f},{:.3f},{}\n", r.id, r.md_x100, r.proxy_x100, r.wall_ms, r.mapped_points);
    }
  }
  return out.str();
}

}  // namespace regiondrag
