// treedecay: batch pipeline for classifying conifer decay stages from
// fused airborne LiDAR and CIR rasters. Subcommands cover the whole
// chain (synth, colorize, ground, normalize, segment, project,
// features, pipeline, crossval); all randomness flows from --seed.
//
// Exit codes: 0 ok, 1 usage, 2 bad input file/format, 3 stage failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "treedecay/config.hpp"
#include "treedecay/crossval.hpp"
#include "treedecay/fusion.hpp"
#include "treedecay/las_io.hpp"
#include "treedecay/pca.hpp"
#include "treedecay/pipeline.hpp"
#include "treedecay/ppm_io.hpp"
#include "treedecay/rng.hpp"
#include "treedecay/text_io.hpp"

namespace td = treedecay;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 42;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--set", args.overrides, "override a config key (key=value)")
      ->take_all();
  cmd->add_option("--seed", args.seed, "master random seed");
  cmd->add_option("--jobs", args.jobs, "worker threads for per-tree stages")
      ->check(CLI::PositiveNumber);
}

td::PipelineConfig build_config(const CommonArgs& args) {
  td::PipelineConfig config;
  if (!args.config_path.empty()) config.load_file(args.config_path);
  for (const auto& assignment : args.overrides) config.apply_override(assignment);
  config.eval_aug.seed = args.seed;
  return config;
}

td::PointCloud load_cloud_arg(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".las" || ext == ".LAS") return td::read_las_file(path);
  return td::read_text_cloud_file(path);
}

void save_cloud_arg(const td::PointCloud& cloud, const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".las" || ext == ".LAS")
    td::write_las_file(cloud, path);
  else
    td::write_text_cloud_file(cloud, path);
}

std::array<int, 5> parse_counts(const std::string& text) {
  std::array<int, 5> counts{};
  int parsed = std::sscanf(text.c_str(), "%d,%d,%d,%d,%d", &counts[0], &counts[1],
                           &counts[2], &counts[3], &counts[4]);
  if (parsed != 5)
    throw CLI::ValidationError("--counts", "expected five comma-separated integers");
  return counts;
}

std::vector<int> groups_from_ids(const std::vector<std::string>& ids) {
  std::map<std::string, int> seen;
  std::vector<int> groups;
  groups.reserve(ids.size());
  for (const auto& id : ids) {
    const auto [it, inserted] = seen.emplace(id, static_cast<int>(seen.size()));
    groups.push_back(it->second);
  }
  return groups;
}

void write_pca_csv(const td::FeatureTable& table, const td::PcaResult& pca,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw td::io_error("pca: cannot open " + path + " for writing");
  out << "tree_id,azimuth,label,pc1,pc2\n";
  char buf[96];
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.6f,%.6f\n", table.tree_ids[i].c_str(),
                  table.azimuths[i], table.labels[i], pca.projected[i][0],
                  pca.projected[i][1]);
    out << buf;
  }
}

void write_importance_csvs(const td::ForestModel& model,
                           const std::vector<std::string>& names,
                           const td::FeatureOptions& fopts, const std::string& dir) {
  const auto& imp = td::feature_importance(model);
  std::vector<std::size_t> order(imp.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  {
    std::ofstream out(dir + "/importance.csv");
    if (!out) throw td::io_error("importance: cannot write in " + dir);
    out << "feature,importance\n";
    char buf[64];
    for (std::size_t i : order) {
      std::snprintf(buf, sizeof(buf), ",%.9g\n", imp[i]);
      out << names[i] << buf;
    }
  }
  {
    std::ofstream out(dir + "/importance_blocks.csv");
    if (!out) throw td::io_error("importance: cannot write in " + dir);
    out << "block,importance\n";
    char buf[64];
    for (const auto& block : td::feature_blocks(fopts)) {
      double total = 0.0;
      for (std::size_t i = block.offset; i < block.offset + block.size && i < imp.size(); ++i)
        total += imp[i];
      std::snprintf(buf, sizeof(buf), ",%.9g\n", total);
      out << block.name << buf;
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"tree decay stage classification pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  CommonArgs synth_args;
  std::string synth_out;
  std::string synth_counts = "233,167,236,239,155";
  synth->add_option("--out", synth_out, "output dataset directory")->required();
  synth->add_option("--counts", synth_counts, "per-level tree counts c1,c2,c3,c4,c5");
  add_common(synth, synth_args);

  // ---- colorize ----
  auto* colorize_cmd = app.add_subcommand("colorize", "fuse a cloud with a CIR raster");
  CommonArgs colorize_args;
  std::string col_cloud, col_raster, col_world, col_out;
  bool col_normalize = false;
  colorize_cmd->add_option("--cloud", col_cloud, "input .las or .xyz cloud")->required();
  colorize_cmd->add_option("--raster", col_raster, "CIR raster (.ppm)")->required();
  colorize_cmd->add_option("--world", col_world, "6-line world file")->required();
  colorize_cmd->add_option("--out", col_out, "output cloud path")->required();
  colorize_cmd->add_flag("--normalize", col_normalize, "min-max normalize channels too");
  add_common(colorize_cmd, colorize_args);

  // ---- ground ----
  auto* ground_cmd = app.add_subcommand("ground", "classify ground points, export a DTM");
  CommonArgs ground_args;
  std::string grd_cloud, grd_dtm, grd_ground;
  ground_cmd->add_option("--cloud", grd_cloud, "input cloud")->required();
  ground_cmd->add_option("--out-dtm", grd_dtm, "DTM text grid output")->required();
  ground_cmd->add_option("--out-ground", grd_ground, "optional ground-only cloud output");
  add_common(ground_cmd, ground_args);

  // ---- normalize ----
  auto* norm_cmd = app.add_subcommand("normalize", "height- and/or channel-normalize");
  CommonArgs norm_args;
  std::string nrm_cloud, nrm_dtm, nrm_out;
  bool nrm_channels = false;
  norm_cmd->add_option("--cloud", nrm_cloud, "input cloud")->required();
  norm_cmd->add_option("--dtm", nrm_dtm, "DTM for height normalization");
  norm_cmd->add_flag("--channels", nrm_channels, "min-max normalize channels");
  norm_cmd->add_option("--out", nrm_out, "output cloud path")->required();
  add_common(norm_cmd, norm_args);

  // ---- segment ----
  auto* seg_cmd = app.add_subcommand("segment", "individual tree segmentation");
  CommonArgs seg_args;
  std::string seg_cloud, seg_out;
  seg_cmd->add_option("--cloud", seg_cloud, "height-normalized cloud")->required();
  seg_cmd->add_option("--out", seg_out, "segment output directory")->required();
  add_common(seg_cmd, seg_args);

  // ---- project ----
  auto* proj_cmd = app.add_subcommand("project", "render side-view images");
  CommonArgs proj_args;
  std::string prj_dataset, prj_out;
  proj_cmd->add_option("--dataset", prj_dataset, "dataset directory (manifest.csv)")
      ->required();
  proj_cmd->add_option("--out", prj_out, "output directory")->required();
  add_common(proj_cmd, proj_args);

  // ---- features ----
  auto* feat_cmd = app.add_subcommand("features", "extract the feature table");
  CommonArgs feat_args;
  std::string fts_dataset, fts_out;
  feat_cmd->add_option("--dataset", fts_dataset, "dataset directory")->required();
  feat_cmd->add_option("--out", fts_out, "features.csv path")->required();
  add_common(feat_cmd, feat_args);

  // ---- pipeline ----
  auto* pipe_cmd = app.add_subcommand("pipeline", "run the full chain");
  CommonArgs pipe_args;
  std::string pip_cloud, pip_raster, pip_world, pip_dataset, pip_out;
  bool pip_images = false;
  pipe_cmd->add_option("--cloud", pip_cloud, "plot cloud (.las or .xyz)");
  pipe_cmd->add_option("--raster", pip_raster, "CIR raster (.ppm)");
  pipe_cmd->add_option("--world", pip_world, "world file");
  pipe_cmd->add_option("--dataset", pip_dataset, "pre-segmented dataset directory");
  pipe_cmd->add_option("--out", pip_out, "output directory")->required();
  pipe_cmd->add_flag("--images", pip_images, "also write view images");
  add_common(pipe_cmd, pipe_args);

  // ---- crossval ----
  auto* cv_cmd = app.add_subcommand("crossval", "k-fold cross-validation + PCA map");
  CommonArgs cv_args;
  std::string cv_features, cv_dataset, cv_out;
  bool cv_grid = false, cv_shuffle = false, cv_importance = false;
  cv_cmd->add_option("--features", cv_features, "precomputed features.csv");
  cv_cmd->add_option("--dataset", cv_dataset, "dataset directory (enables augmentation)");
  cv_cmd->add_option("--out", cv_out, "output directory")->required();
  cv_cmd->add_flag("--grid", cv_grid, "also run the hyperparameter grid search");
  cv_cmd->add_flag("--shuffle-labels", cv_shuffle, "chance-level control");
  cv_cmd->add_flag("--importance", cv_importance, "fit on all data, write importances");
  add_common(cv_cmd, cv_args);

  auto* keys_cmd = app.add_subcommand("config-keys", "list config keys and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message or help text
    return code == 0 ? 0 : 1;
  }

  if (keys_cmd->parsed()) {
    std::cout << td::PipelineConfig::describe_keys();
    return 0;
  }

  if (synth->parsed()) {
    const auto counts = parse_counts(synth_counts);
    td::SyntheticSpec spec = td::SyntheticSpec::defaults();
    spec.seed = synth_args.seed;
    const auto samples = td::generate_dataset(spec, counts);
    td::write_dataset(samples, synth_out);
    std::cout << "wrote " << samples.size() << " samples to " << synth_out << "\n";
    return 0;
  }

  if (colorize_cmd->parsed()) {
    td::PointCloud cloud = load_cloud_arg(col_cloud);
    const td::GeoRaster raster = td::read_geo_raster_files(col_raster, col_world);
    const td::ColorizeResult result = td::colorize(cloud, raster);
    td::PointCloud out = result.cloud;
    if (col_normalize) out = td::normalize_channels(out);
    save_cloud_arg(out, col_out);
    std::cout << "colorized " << out.size() << " points, " << result.outside_count
              << " outside the raster\n";
    return 0;
  }

  if (ground_cmd->parsed()) {
    const td::PipelineConfig config = build_config(ground_args);
    const td::PointCloud cloud = load_cloud_arg(grd_cloud);
    const auto mask = td::filter_ground(cloud, config.terrain);
    const td::Dtm dtm = td::build_dtm(cloud, mask, config.terrain_dtm_cell);
    td::write_dtm_file(dtm, grd_dtm);
    std::size_t n_ground = 0;
    for (auto m : mask) n_ground += m ? 1 : 0;
    if (!grd_ground.empty()) {
      std::vector<td::MultispectralPoint> ground_points;
      for (std::size_t i = 0; i < cloud.size(); ++i)
        if (mask[i]) ground_points.push_back(cloud[i]);
      save_cloud_arg(td::PointCloud(std::move(ground_points), cloud.channel_state()),
                     grd_ground);
    }
    std::cout << n_ground << " of " << cloud.size() << " points classified as ground\n";
    return 0;
  }

  if (norm_cmd->parsed()) {
    if (nrm_dtm.empty() && !nrm_channels)
      throw CLI::ValidationError("normalize", "need --dtm and/or --channels");
    td::PointCloud cloud = load_cloud_arg(nrm_cloud);
    if (!nrm_dtm.empty()) cloud = td::normalize_heights(cloud, td::read_dtm_file(nrm_dtm));
    if (nrm_channels) cloud = td::normalize_channels(cloud);
    save_cloud_arg(cloud, nrm_out);
    return 0;
  }

  if (seg_cmd->parsed()) {
    const td::PipelineConfig config = build_config(seg_args);
    const td::PointCloud cloud = load_cloud_arg(seg_cloud);
    const td::SegmentationResult result = td::segment_trees(cloud, config.seg);
    const auto [kept, rejected] = td::filter_segments(result.trees, config.seg);
    td::write_segments(kept, seg_out);
    std::cout << kept.size() << " segments kept, " << rejected.size() << " rejected, "
              << result.residual.size() << " residual points\n";
    return 0;
  }

  if (proj_cmd->parsed() || feat_cmd->parsed()) {
    const bool projecting = proj_cmd->parsed();
    const CommonArgs& args = projecting ? proj_args : feat_args;
    td::PipelineOptions options;
    options.config = build_config(args);
    options.seed = args.seed;
    options.jobs = args.jobs;
    const auto samples = td::read_dataset(projecting ? prj_dataset : fts_dataset);
    if (projecting) {
      std::filesystem::create_directories(prj_out);
      td::extract_features(samples, options, prj_out + "/images");
      std::cout << "wrote " << samples.size() * 4 << " view images\n";
    } else {
      const td::FeatureTable table = td::extract_features(samples, options, "");
      td::write_feature_csv(table, fts_out);
      std::cout << "wrote " << table.rows.size() << " feature rows\n";
    }
    return 0;
  }

  if (pipe_cmd->parsed()) {
    td::PipelineOptions options;
    options.config = build_config(pipe_args);
    options.seed = pipe_args.seed;
    options.jobs = pipe_args.jobs;
    options.write_images = pip_images;
    if (!pip_dataset.empty()) {
      td::run_pipeline_dataset(pip_dataset, pip_out, options);
    } else {
      if (pip_cloud.empty() || pip_raster.empty() || pip_world.empty())
        throw CLI::ValidationError("pipeline",
                                   "need --dataset or all of --cloud/--raster/--world");
      td::run_pipeline_plot(pip_cloud, pip_raster, pip_world, pip_out, options);
    }
    std::cout << "pipeline outputs in " << pip_out << "\n";
    return 0;
  }

  if (cv_cmd->parsed()) {
    td::PipelineOptions options;
    options.config = build_config(cv_args);
    options.seed = cv_args.seed;
    options.jobs = cv_args.jobs;
    const td::PipelineConfig& config = options.config;
    std::filesystem::create_directories(cv_out);

    if (!cv_dataset.empty()) {
      // Cloud mode: the full protocol with per-fold training
      // augmentation.
      const auto samples = td::read_dataset(cv_dataset);
      std::vector<td::CloudSample> clouds;
      std::vector<td::TreeSegment> segs;
      for (const auto& s : samples) {
        clouds.push_back({s.tree.points, s.label.value(), s.group});
        segs.push_back(s.tree);
      }
      if (cv_shuffle) {
        std::vector<int> labels, groups;
        for (const auto& c : clouds) {
          labels.push_back(c.label);
          groups.push_back(c.group);
        }
        const auto shuffled = td::shuffle_labels_by_group(labels, groups, cv_args.seed);
        for (std::size_t i = 0; i < clouds.size(); ++i) clouds[i].label = shuffled[i];
      }
      td::CanvasSpec canvas = config.proj;
      if (config.proj_world_width > 0 && config.proj_world_height > 0) {
        canvas.world_width = config.proj_world_width;
        canvas.world_height = config.proj_world_height;
      } else {
        canvas = td::fit_canvas(segs, canvas);
      }
      td::AugmentConfig aug = config.eval_aug;
      if (!config.eval_augment) {
        aug.rotation = false;
        aug.removal_fraction = 0.0;
        aug.jitter_sigma = 0.0;
      }
      const td::CrossvalReport report =
          td::crossval_run_clouds(clouds, canvas, config.features, aug, config.rf,
                                  config.eval_k, cv_args.seed, cv_args.jobs);
      td::write_metrics_csv(report, cv_out + "/metrics.csv");
      std::cout << "mean OA " << report.mean.oa << ", kappa " << report.mean.kappa << "\n";
      return 0;
    }

    if (cv_features.empty())
      throw CLI::ValidationError("crossval", "need --features or --dataset");
    td::FeatureTable table = td::read_feature_csv(cv_features);
    for (int label : table.labels)
      if (label < 1)
        throw td::io_error("crossval: feature table has unlabeled rows");
    std::vector<int> groups = groups_from_ids(table.tree_ids);
    std::vector<int> labels = table.labels;
    if (cv_shuffle) labels = td::shuffle_labels_by_group(labels, groups, cv_args.seed);

    const td::CrossvalReport report = td::crossval_run(
        table.rows, labels, groups, config.rf, config.eval_k, cv_args.seed, cv_args.jobs);
    td::write_metrics_csv(report, cv_out + "/metrics.csv");

    const td::PcaResult pca = td::pca_2d(table.rows);
    write_pca_csv(table, pca, cv_out + "/pca.csv");

    if (cv_importance) {
      const td::ForestModel model =
          td::fit_forest(table.rows, labels, config.rf, cv_args.jobs);
      write_importance_csvs(model, table.feature_names, config.features, cv_out);
      td::save_model(model, cv_out + "/model.bin");
    }

    if (cv_grid) {
      // documented default grid; the spec of the searched ranges in the
      // source experiments is unknown
      std::vector<td::RfConfig> grid;
      for (int trees : {200, 400, 800})
        for (int depth : {16, 32, 64}) {
          td::RfConfig rf = config.rf;
          rf.n_estimators = trees;
          rf.max_depth = depth;
          grid.push_back(rf);
        }
      const td::GridSearchResult result =
          td::grid_search(table.rows, labels, grid, config.eval_k, cv_args.seed, cv_args.jobs);
      std::ofstream out(cv_out + "/grid.csv");
      if (!out) throw td::io_error("grid: cannot write in " + cv_out);
      out << "n_estimators,max_depth,mean_oa\n";
      char buf[96];
      for (const auto& [rf, score] : result.table) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6f\n", rf.n_estimators, rf.max_depth,
                      score);
        out << buf;
      }
      std::cout << "grid best: n_estimators " << result.best.n_estimators << ", max_depth "
                << result.best.max_depth << "\n";
    }

    std::cout << "mean OA " << report.mean.oa << ", kappa " << report.mean.kappa << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const td::StageError& e) {
    std::cerr << "error " << e.what() << "\n";
    return e.io ? 2 : 3;
  } catch (const td::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
