#include "treedecay/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "treedecay/fusion.hpp"
#include "treedecay/las_io.hpp"
#include "treedecay/ppm_io.hpp"
#include "treedecay/text_io.hpp"

namespace treedecay {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const io_error& e) {
    throw StageError(name, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), false);
  }
}

PointCloud load_cloud(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".las" || ext == ".LAS") return read_las_file(path);
  return read_text_cloud_file(path);
}

CanvasSpec resolve_canvas(const std::vector<LabeledSample>& samples,
                          const PipelineConfig& config) {
  std::vector<TreeSegment> segments;
  segments.reserve(samples.size());
  for (const auto& s : samples) segments.push_back(s.tree);
  CanvasSpec spec = config.proj;
  if (config.proj_world_width > 0 && config.proj_world_height > 0) {
    spec.world_width = config.proj_world_width;
    spec.world_height = config.proj_world_height;
    return spec;
  }
  return fit_canvas(segments, spec);
}

void parallel_over(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t per = (n + jobs - 1) / jobs;
  for (int w = 0; w < jobs; ++w) {
    const std::size_t begin = w * per;
    if (begin >= n) break;
    const std::size_t end = std::min(n, begin + per);
    pool.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

FeatureTable extract_features(const std::vector<LabeledSample>& samples,
                              const PipelineOptions& options, const std::string& image_dir) {
  const CanvasSpec canvas = resolve_canvas(samples, options.config);
  const FeatureOptions& fopts = options.config.features;

  struct PerSample {
    std::array<std::vector<double>, 4> rows;
  };
  std::vector<PerSample> extracted(samples.size());

  const bool write_images = !image_dir.empty();
  if (write_images) std::filesystem::create_directories(image_dir);

  parallel_over(samples.size(), options.jobs, [&](std::size_t i) {
    const auto views = project_views(samples[i].tree, canvas);
    for (int v = 0; v < 4; ++v) {
      extracted[i].rows[v] = global_feature_vector(views[v], fopts).values;
      if (write_images) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_az%03d.ppm", samples[i].id.c_str(),
                      views[v].azimuth);
        write_ppm_file(view_to_ppm(views[v]), image_dir + "/" + name);
      }
    }
  });

  FeatureTable table;
  const std::size_t base_len = feature_names(fopts).size();
  const std::size_t total_len =
      extracted.empty() ? base_len : extracted[0].rows[0].size();
  const std::size_t hog_len =
      fopts.include_optional && total_len > base_len ? total_len - base_len : 0;
  table.feature_names = feature_names(fopts, hog_len);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int v = 0; v < 4; ++v) {
      table.tree_ids.push_back(samples[i].id);
      table.azimuths.push_back(v * 90);
      table.labels.push_back(samples[i].label.value());
      table.rows.push_back(std::move(extracted[i].rows[v]));
    }
  }

  if (write_images) {
    std::ofstream sidecar(image_dir + "/views.csv");
    if (!sidecar) throw io_error("projection: cannot write sidecar in " + image_dir);
    sidecar << "tree_id,azimuth,label,path\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_az%03d.ppm", table.tree_ids[r].c_str(),
                    table.azimuths[r]);
      sidecar << table.tree_ids[r] << "," << table.azimuths[r] << "," << table.labels[r]
              << "," << name << "\n";
    }
  }
  return table;
}

void run_pipeline_plot(const std::string& cloud_path, const std::string& raster_path,
                       const std::string& world_path, const std::string& out_dir,
                       const PipelineOptions& options) {
  std::filesystem::create_directories(out_dir);
  const PipelineConfig& config = options.config;

  PointCloud cloud = stage("input", [&] { return load_cloud(cloud_path); });

  cloud = stage("fusion", [&] {
    const GeoRaster raster = read_geo_raster_files(raster_path, world_path);
    if (config.crop_radius > 0) {
      const Bounds3& b = cloud.bounds();
      cloud = crop_cylinder(cloud, (b.min.x + b.max.x) / 2, (b.min.y + b.max.y) / 2,
                            config.crop_radius);
      if (cloud.empty()) throw std::runtime_error("parcel crop removed every point");
    }
    const ColorizeResult colorized = colorize(cloud, raster);
    return normalize_channels(colorized.cloud);
  });

  cloud = stage("terrain", [&] {
    const auto mask = filter_ground(cloud, config.terrain);
    const Dtm dtm = build_dtm(cloud, mask, config.terrain_dtm_cell);
    write_dtm_file(dtm, out_dir + "/dtm.txt");
    return normalize_heights(cloud, dtm);
  });

  const std::vector<TreeSegment> kept = stage("segmentation", [&] {
    const SegmentationResult result = segment_trees(cloud, config.seg);
    auto [keep, reject] = filter_segments(result.trees, config.seg);
    write_segments(keep, out_dir + "/segments");
    return keep;
  });

  const FeatureTable table = stage("features", [&] {
    std::vector<LabeledSample> samples;
    samples.reserve(kept.size());
    for (const auto& seg : kept) {
      char id[32];
      std::snprintf(id, sizeof(id), "segment_%04d", seg.id);
      // unlabeled at this point: label 0 is written to the csv
      LabeledSample s{seg, DecayLevel(1), LabeledSample::Source::field, seg.id, id};
      samples.push_back(std::move(s));
    }
    FeatureTable t =
        extract_features(samples, options, options.write_images ? out_dir + "/images" : "");
    std::fill(t.labels.begin(), t.labels.end(), 0);
    return t;
  });
  stage("features", [&] {
    write_feature_csv(table, out_dir + "/features.csv");
    return 0;
  });
}

void run_pipeline_dataset(const std::string& dataset_dir, const std::string& out_dir,
                          const PipelineOptions& options) {
  std::filesystem::create_directories(out_dir);
  const std::vector<LabeledSample> samples =
      stage("input", [&] { return read_dataset(dataset_dir); });
  const FeatureTable table = stage("features", [&] {
    return extract_features(samples, options,
                            options.write_images ? out_dir + "/images" : "");
  });
  stage("features", [&] {
    write_feature_csv(table, out_dir + "/features.csv");
    return 0;
  });
}

}  // namespace treedecay
