#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "mdr/acquisition.hpp"
#include "mdr/csv.hpp"
#include "mdr/gauss_source.hpp"
#include "mdr/harness.hpp"
#include "mdr/lmmse.hpp"
#include "mdr/opta.hpp"
#include "mdr/sampling.hpp"

namespace {

std::string hash_suffix(const mdr::ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(cfg.stable_hash()));
  return std::string(buf);
}

std::string sibling_path(const std::string& out, const std::string& name) {
  const std::filesystem::path p(out);
  return (p.has_parent_path() ? p.parent_path() / name : std::filesystem::path(name))
      .string();
}

mdr::ObservationMask draw_mask(const mdr::ExperimentConfig& cfg, double gamma,
                               mdr::RandomStream& rng) {
  if (cfg.sampling == mdr::SamplingModel::uniform)
    return mdr::uniform_mask(cfg.n_rows, cfg.n_cols, gamma, rng);
  const auto params =
      mdr::markov_params_from_targets(gamma, cfg.markov_l0, cfg.markov_calibration);
  return mdr::markov_mask(cfg.n_rows, cfg.n_cols, params, rng);
}

int cmd_generate(const std::string& config_path, const std::string& out_prefix,
                 std::optional<std::uint64_t> seed) {
  auto cfg = mdr::load_config(config_path);
  if (seed) cfg.base_seed = *seed;
  const auto spec = cfg.source_spec();
  spec.validate();
  const double gamma = cfg.gamma_grid.front();
  const double sigma2 = mdr::sigma_from_snr(spec.covariance, cfg.snr_db);

  auto source_rng = mdr::make_stream(mdr::derive_seed(cfg.base_seed, {0, 0, 1}));
  const auto truth = mdr::sample_source(spec, cfg.n_cols, source_rng);
  auto mask_rng = mdr::make_stream(mdr::derive_seed(cfg.base_seed, {0, 0, 2}));
  const auto mask = draw_mask(cfg, gamma, mask_rng);
  auto noise_rng = mdr::make_stream(mdr::derive_seed(cfg.base_seed, {0, 0, 3}));
  const auto obs = mdr::acquire(truth, mask, sigma2, noise_rng);

  mdr::write_matrix_csv(out_prefix + "_truth.csv", truth.values);
  mdr::write_mask_csv(out_prefix + "_mask.csv", mask);
  mdr::write_observations_csv(out_prefix + "_obs.csv", obs);
  std::cout << "wrote " << out_prefix << "_{truth,mask,obs}.csv  (gamma=" << gamma
            << ", sigma2=" << mdr::fmt_double(sigma2) << ")\n";
  return 0;
}

int cmd_recover(const std::string& config_path, const std::string& method_name,
                const std::string& obs_path, const std::string& out_path,
                const std::string& smr_label, std::optional<std::uint64_t> seed) {
  auto cfg = mdr::load_config(config_path);
  if (seed) cfg.base_seed = *seed;
  const auto method = mdr::method_from_name(method_name);
  const auto obs = mdr::read_observations_csv(obs_path);
  auto spec = cfg.source_spec();
  spec.validate();
  Eigen::MatrixXd cov = spec.covariance;
  if (smr_label != "exact") {
    const double smr = mdr::parse_double(smr_label);
    auto rng = mdr::make_stream(mdr::derive_seed(cfg.base_seed, {4, 0}));
    cov = mdr::mismatch_covariance(spec.covariance, smr, rng, cfg.mismatch_mode);
  }
  mdr::LmmseModel model{spec.mean, cov, obs.noise_variance};

  mdr::StateMatrix estimate;
  int iterations = 0;
  bool converged = true;
  switch (method) {
    case mdr::Method::lmmse:
      estimate = mdr::lmmse_recover(obs, model);
      break;
    case mdr::Method::svt: {
      const auto res = mdr::svt_recover(obs, cfg.svt);
      estimate = res.estimate;
      iterations = res.iterations;
      converged = res.converged;
      break;
    }
    case mdr::Method::bsvt: {
      mdr::BsvtConfig bc;
      bc.step_size = cfg.bsvt_step;
      bc.tolerance = cfg.bsvt_tolerance;
      bc.max_iterations = cfg.bsvt_max_iterations;
      bc.threshold_grid_size = cfg.bsvt_grid;
      bc.lmmse_model = model;
      const auto res = mdr::bsvt_recover(obs, bc);
      estimate = res.estimate;
      iterations = res.iterations;
      converged = res.converged;
      break;
    }
  }
  mdr::write_matrix_csv(out_path, estimate.values);
  std::cout << "wrote " << out_path << "  (iterations=" << iterations
            << ", converged=" << (converged ? 1 : 0) << ")\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override,
              std::optional<std::uint64_t> seed, int threads) {
  auto cfg = mdr::load_config(config_path);
  if (seed) cfg.base_seed = *seed;
  if (!out_override.empty()) cfg.out = out_override;
  const auto output = mdr::run_sweep(cfg, threads);
  mdr::write_results_csv(cfg.out, output.rows);

  const std::filesystem::path out_path(cfg.out);
  auto stem_sibling = [&](const std::string& suffix) {
    std::filesystem::path p = out_path;
    p.replace_filename(out_path.stem().string() + suffix);
    return p.string();
  };
  mdr::write_aggregates_csv(stem_sibling("_aggregate.csv"), output.aggregates);
  const std::string tag = hash_suffix(cfg);
  mdr::emit_plot_data(sibling_path(cfg.out, "plot_" + tag + ".csv"), output.aggregates,
                      output.opta);
  if (cfg.emit_opta)
    mdr::write_opta_csv(sibling_path(cfg.out, "opta_" + tag + ".csv"), output.opta);

  int failures = 0;
  for (const auto& r : output.rows) failures += r.failed ? 1 : 0;
  std::cout << "wrote " << cfg.out << " (" << output.rows.size() << " rows, "
            << failures << " failed)\n";
  return failures == 0 ? 0 : 2;
}

int cmd_opta(const std::string& config_path, const std::string& out_path,
             std::optional<std::uint64_t> seed) {
  auto cfg = mdr::load_config(config_path);
  if (seed) cfg.base_seed = *seed;
  const auto curve = mdr::opta_curve(cfg);
  const std::string path = out_path.empty()
                               ? sibling_path(cfg.out, "opta_" + hash_suffix(cfg) + ".csv")
                               : out_path;
  mdr::write_opta_csv(path, curve);
  std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missing-data recovery toolkit for low-rank Gaussian state matrices"};
  app.require_subcommand(1);

  std::string config_path, out, obs_path, method = "bsvt", smr = "exact";
  std::optional<std::uint64_t> seed;
  int threads = 1;

  auto add_common = [&](CLI::App* sub, bool need_out) {
    sub->add_option("--config", config_path, "experiment config file")->required();
    auto* o = sub->add_option("--out", out, "output path");
    if (need_out) o->required();
    sub->add_option("--seed", seed, "override base_seed");
  };

  auto* generate = app.add_subcommand(
      "generate", "draw one (truth, mask, observations) triple and write CSVs");
  add_common(generate, true);

  auto* recover = app.add_subcommand(
      "recover", "recover one estimate from an observations CSV");
  add_common(recover, true);
  recover->add_option("--method", method, "lmmse | svt | bsvt")->required();
  recover->add_option("--obs", obs_path, "observations CSV")->required();
  recover->add_option("--smr", smr, "postulated-statistics level: exact or a ratio");

  auto* sweep = app.add_subcommand("sweep", "run the full Monte-Carlo sweep");
  add_common(sweep, false);
  sweep->add_option("--threads", threads, "worker threads");

  auto* opta = app.add_subcommand("opta", "emit the OPTA bound curve");
  add_common(opta, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(config_path, out, seed);
    if (recover->parsed()) return cmd_recover(config_path, method, obs_path, out, smr, seed);
    if (sweep->parsed()) return cmd_sweep(config_path, out, seed, threads);
    if (opta->parsed()) return cmd_opta(config_path, out, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
