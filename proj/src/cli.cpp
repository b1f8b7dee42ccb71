#include "mvreg/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

#include "internal.hpp"
#include "mvreg/config.hpp"
#include "mvreg/io.hpp"
#include "mvreg/pipeline.hpp"
#include "mvreg/synth.hpp"

namespace mvreg {

namespace {

constexpr double kDefaultVoxel = 0.025;

using detail::format_exact;
using detail::format_fixed;

void print_matrix(std::ostream& out, const Mat4& m) {
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << (c ? " " : "") << format_exact(m(r, c));
    out << '\n';
  }
}

std::optional<double> voxel_size(const CLI::Option* opt, const std::string& arg) {
  if (opt->count() == 0) return std::nullopt;
  if (arg.empty()) return kDefaultVoxel;
  double v = 0.0;
  try {
    v = std::stod(arg);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--voxel", "not a number: " + arg);
  }
  if (!(v > 0.0)) throw CLI::ValidationError("--voxel", "must be positive");
  return v;
}

std::string summary(const ErrorReport& r) {
  std::string s = "mean_rot=" + format_fixed(r.mean_rotation_deg, 3) + "deg median_rot=" +
                  format_fixed(r.median_rotation_deg, 3) + "deg mean_trans=" + format_fixed(r.mean_translation_m, 4) +
                  "m median_trans=" + format_fixed(r.median_translation_m, 4) + "m";
  for (std::size_t k = 0; k < r.rotation_thresholds_deg.size(); ++k)
    s += " ecdf@" + detail::format_short(r.rotation_thresholds_deg[k]) + "=" + format_fixed(r.ecdf_rotation[k], 4);
  return s;
}

struct PairwiseArgs {
  std::string source;
  std::string target;
  std::vector<std::string> features;
  double temperature = PairwiseConfig{}.temperature;
  std::string voxel;
  CLI::Option* voxel_opt = nullptr;
};

int run_pairwise(const PairwiseArgs& a, std::ostream& out) {
  PointCloud p(read_ply_points(a.source), read_features(a.features[0]));
  PointCloud q(read_ply_points(a.target), read_features(a.features[1]));
  if (const auto v = voxel_size(a.voxel_opt, a.voxel)) {
    p = voxel_downsample(p, *v);
    q = voxel_downsample(q, *v);
  }
  PairwiseConfig cfg;
  cfg.temperature = a.temperature;
  const PairwiseResult r = register_pair(p, q, cfg);
  print_matrix(out, r.motion.matrix());
  out << "inlier_ratio " << format_fixed(r.inlier_ratio, 6) << '\n';
  out << "confidence " << format_fixed(r.local_confidence, 6) << '\n';
  return 0;
}

struct MultiviewArgs {
  std::string dir;
  std::string config;
  std::string edges;
  std::string output;
  std::string gt;
  std::string inject;
  bool pairwise_only = false;
  int threads = -1;
  std::string voxel;
  CLI::Option* voxel_opt = nullptr;
};

int run_multiview_cmd(const MultiviewArgs& a, std::ostream& out) {
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : read_config(a.config);
  if (!a.edges.empty()) cfg.connectivity = read_edge_list(a.edges);
  if (a.threads >= 0) cfg.threads = a.threads;
  cfg.validate();

  std::vector<PointCloud> clouds = load_scan_directory(a.dir);
  if (const auto v = voxel_size(a.voxel_opt, a.voxel))
    for (PointCloud& c : clouds) c = voxel_downsample(c, *v);
  std::vector<RigidMotion> gt;
  if (!a.gt.empty()) {
    gt = absolute_poses(read_trajectory(a.gt).entries);
    if (gt.size() != clouds.size())
      throw Error(ErrorCode::LengthMismatch, "ground truth has " + std::to_string(gt.size()) + " poses for " +
                                                 std::to_string(clouds.size()) + " scans");
  }
  std::vector<PairInput> pairs = build_pair_inputs(clouds, cfg);
  if (!a.inject.empty()) inject_pair_corruptions(pairs, read_corruptions(a.inject));
  const int n = static_cast<int>(clouds.size());
  out << "scans " << n << ", pairs " << pairs.size() << '\n';

  if (a.pairwise_only) {
    std::vector<TrajectoryEntry> entries;
    const PairwiseConfig pcfg = cfg.pairwise();
    for (const PairInput& p : pairs) {
      const PairwiseResult r = register_correspondences(p.correspondences, pcfg);
      entries.push_back(make_entry(p.i, p.j, n, r.motion));
    }
    write_trajectory(a.output, entries);
    out << "wrote " << entries.size() << " pairwise motions to " << a.output << '\n';
    return 0;
  }

  const MultiviewResult result = run_multiview_from_pairs(n, pairs, cfg, gt);
  if (result.trace.pairwise) out << "pairwise " << summary(*result.trace.pairwise) << '\n';
  for (const IterationTrace& it : result.trace.iterations) {
    out << "iteration " << it.iteration << " active_edges=" << it.active_edges
        << " disconnected=" << (it.disconnected ? "yes" : "no");
    if (it.errors) out << ' ' << summary(*it.errors);
    out << '\n';
  }
  if (result.sync.disconnected) out << "pruning disconnected the graph; kept the last connected synchronization\n";
  write_trajectory(a.output, absolute_entries(result.sync.absolute));
  out << "wrote " << n << " absolute poses to " << a.output << '\n';
  return 0;
}

struct SynthArgs {
  SceneConfig scene;
  std::string output;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticScene scene = generate_scene(a.scene);
  write_scene(a.output, scene);
  out << "wrote " << scene.clouds.size() << " scans (" << scene.corruptions.size() << " outlier pairs) to "
      << a.output << '\n';
  return 0;
}

struct EvalArgs {
  std::string estimate;
  std::string gt;
  std::vector<double> rotation_thresholds = kRotationThresholdsDeg;
  std::vector<double> translation_thresholds = kTranslationThresholdsM;
  std::string label = "mvreg";
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const TrajectoryFile est = read_trajectory(a.estimate);
  const std::vector<RigidMotion> gt = absolute_poses(read_trajectory(a.gt).entries);
  ErrorReport report;
  if (is_absolute(est.entries)) {
    report = evaluate_absolute(absolute_poses(est.entries), gt, {}, a.rotation_thresholds, a.translation_thresholds);
  } else {
    report = evaluate_relative(relative_estimates(est.entries), gt, a.rotation_thresholds, a.translation_thresholds);
  }
  out << ecdf_table_header(report) << '\n';
  out << ecdf_table_row(report, a.label) << '\n';
  out << "pairs " << report.rotation_errors_deg.size() << '\n';
  out << "rotation mean " << format_fixed(report.mean_rotation_deg, 4) << " deg, median "
      << format_fixed(report.median_rotation_deg, 4) << " deg\n";
  out << "translation mean " << format_fixed(report.mean_translation_m, 4) << " m, median "
      << format_fixed(report.median_translation_m, 4) << " m\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiview point cloud registration"};
  app.name("mvreg");
  app.require_subcommand(1);

  PairwiseArgs pw;
  auto* pairwise = app.add_subcommand("pairwise", "Register two clouds with their features");
  pairwise->add_option("source", pw.source, "Source PLY")->required()->check(CLI::ExistingFile);
  pairwise->add_option("target", pw.target, "Target PLY")->required()->check(CLI::ExistingFile);
  pairwise->add_option("--features", pw.features, "Feature files of source and target")
      ->required()
      ->expected(2)
      ->check(CLI::ExistingFile);
  pairwise->add_option("--temperature", pw.temperature, "Soft matching temperature")->check(CLI::PositiveNumber);
  pw.voxel_opt = pairwise->add_option("--voxel", pw.voxel, "Voxel downsampling cell in meters (default 0.025)")
                     ->expected(0, 1);

  MultiviewArgs mv;
  auto* multiview = app.add_subcommand("multiview", "Register and synchronize a directory of scans");
  multiview->add_option("dir", mv.dir, "Directory with scan_*.ply and scan_*.feat")->required()->check(CLI::ExistingDirectory);
  multiview->add_option("--config", mv.config, "key = value configuration file")->check(CLI::ExistingFile);
  multiview->add_option("--edges", mv.edges, "Pairs to register, one \"i j\" per line")->check(CLI::ExistingFile);
  multiview->add_option("--out", mv.output, "Output trajectory")->required();
  multiview->add_option("--gt", mv.gt, "Ground-truth trajectory for the per-iteration trace")->check(CLI::ExistingFile);
  multiview->add_option("--inject", mv.inject, "Pair corruptions to apply (outliers.log)")->check(CLI::ExistingFile);
  multiview->add_flag("--pairwise-only", mv.pairwise_only, "Write pairwise estimates without synchronization");
  multiview->add_option("--threads", mv.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  mv.voxel_opt = multiview->add_option("--voxel", mv.voxel, "Voxel downsampling cell in meters (default 0.025)")
                     ->expected(0, 1);

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene");
  synth->add_option("--scans", sy.scene.n_scans, "Number of scans")->check(CLI::Range(3, 100000));
  synth->add_option("--points", sy.scene.pts_per_scan, "Points per scan")->check(CLI::Range(3, 100000000));
  synth->add_option("--noise", sy.scene.noise_sigma, "Point noise sigma in meters")->check(CLI::NonNegativeNumber);
  synth->add_option("--outliers", sy.scene.outlier_edge_fraction, "Fraction of corrupted pairs")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", sy.scene.seed, "Random seed");
  synth->add_option("--overlap", sy.scene.overlap, "Expected shared fraction between scans")->check(CLI::Range(0.01, 1.0));
  synth->add_option("--descriptor-noise", sy.scene.descriptor_noise, "Descriptor noise sigma")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--out", sy.output, "Output directory")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Compare a trajectory with ground truth");
  eval->add_option("--est", ev.estimate, "Estimated trajectory (absolute or pairwise)")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ev.gt, "Ground-truth absolute trajectory")->required()->check(CLI::ExistingFile);
  eval->add_option("--thresholds", ev.rotation_thresholds, "Rotation ECDF thresholds in degrees");
  eval->add_option("--trans-thresholds", ev.translation_thresholds, "Translation ECDF thresholds in meters");
  eval->add_option("--label", ev.label, "Row label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*pairwise) return run_pairwise(pw, out);
    if (*multiview) return run_multiview_cmd(mv, out);
    if (*synth) return run_synth(sy, out);
    return run_eval(ev, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mvreg
