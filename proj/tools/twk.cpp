// Command-line front end: watermark embedding, generation, detection,
// post-editing attacks, robustness benchmarks, and the theory harnesses.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "twk/attacks.hpp"
#include "twk/config.hpp"
#include "twk/detect.hpp"
#include "twk/io.hpp"
#include "twk/metrics.hpp"
#include "twk/parallel.hpp"
#include "twk/sampler.hpp"
#include "twk/theory.hpp"
#include "twk/watermark.hpp"

namespace {

using nlohmann::json;

constexpr int kExitDetected = 0;
constexpr int kExitNotDetected = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct CommonOpts {
  std::string config_path;
  std::string key_hex;
  std::string out;
  std::size_t threads = 0;
};

twk::RunConfig loadConfig(const CommonOpts& opts, bool required) {
  twk::RunConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = twk::RunConfig::load(opts.config_path);
  } else if (required) {
    throw std::invalid_argument("--config is required for this command");
  }
  if (!opts.key_hex.empty()) {
    cfg.key_hex = opts.key_hex;
  }
  if (!opts.out.empty()) {
    cfg.out = opts.out;
  }
  if (opts.threads > 0) {
    cfg.threads = opts.threads;
  }
  twk::set_max_threads(cfg.threads);
  return cfg;
}

std::string outPath(const twk::RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return (std::filesystem::path(cfg.out) / name).string();
}

json seedsToJson(const twk::SeedMatrix& seeds) {
  json rows = json::array();
  for (std::size_t w = 0; w < seeds.window(); ++w) {
    json row = json::array();
    for (std::size_t f = 0; f < seeds.features(); ++f) {
      row.push_back(seeds.at(w, f));
    }
    rows.push_back(row);
  }
  return json{{"window", seeds.window()},
              {"features", seeds.features()},
              {"bits", seeds.bitLevels()},
              {"interval", seeds.interval()},
              {"seeds", rows}};
}

twk::SeedMatrix seedsFromJson(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("cannot open seed sidecar " + path);
  }
  json j = json::parse(is);
  twk::SeedMatrix m(j.at("window").get<std::size_t>(),
                    j.at("features").get<std::size_t>(),
                    j.at("bits").get<std::size_t>(),
                    j.at("interval").get<std::size_t>());
  const auto& rows = j.at("seeds");
  for (std::size_t w = 0; w < m.window(); ++w) {
    for (std::size_t f = 0; f < m.features(); ++f) {
      m.at(w, f) = rows.at(w).at(f).get<std::uint32_t>();
    }
  }
  return m;
}

int cmdKeygen(const std::string& out_file) {
  const twk::WatermarkKey key = twk::WatermarkKey::random();
  const std::string hex = key.toHex() + "\n";
  if (out_file.empty()) {
    std::cout << hex;
  } else {
    twk::write_text_file(out_file, hex);
  }
  return kExitDetected;
}

int cmdSample(const CommonOpts& opts) {
  const twk::RunConfig cfg = loadConfig(opts, true);
  auto prepared = cfg.prepare();
  const auto params = cfg.embedParams(prepared.features);
  const auto sched = cfg.makeSchedule();

  auto [noise, seeds] = twk::embed(params, cfg.batch);
  const twk::TrajectoryRecord traj = twk::bdia_sample(noise, *prepared.estimator, sched);
  twk::SeriesTensor x0 = traj.states[0];
  if (cfg.attack) {
    x0 = twk::apply_attack(x0, *cfg.attack, params.key, prepared.estimator.get(), &sched);
  }

  const std::string tensor_path = outPath(cfg, "x0.twk");
  const std::string seeds_path = outPath(cfg, "seeds.json");
  twk::save_tensor(x0, tensor_path);
  twk::write_text_file(seeds_path, seedsToJson(seeds).dump(2) + "\n");

  const auto [avg_l1, max_l1] = twk::x1_x0_distance(traj);
  json summary{{"tensor", tensor_path},
               {"seeds", seeds_path},
               {"batch", x0.batch()},
               {"window", x0.window()},
               {"features", x0.features()},
               {"x1_x0_avg_l1", avg_l1},
               {"x1_x0_max_l1", max_l1}};
  // Quality of the synthetic batch against real windows of the dataset.
  const twk::SeriesTensor real = twk::window(prepared.data, cfg.window, cfg.window);
  try {
    const twk::QualityReport q = twk::quality_report(real, x0);
    summary["quality"] = {{"correlational", q.correlational},
                          {"mdd", q.mdd},
                          {"acd", q.acd},
                          {"sd", q.sd},
                          {"kd", q.kd}};
  } catch (const std::domain_error& e) {
    summary["quality"] = {{"error", e.what()}};
  }
  std::cout << summary.dump(2) << "\n";
  return kExitDetected;
}

int cmdDetect(const CommonOpts& opts, const std::string& input,
              const std::string& mode_name, const std::string& seeds_path,
              double fpr_override, std::size_t spr_override) {
  const twk::RunConfig cfg = loadConfig(opts, true);
  auto prepared = cfg.prepare();
  const auto sched = cfg.makeSchedule();

  const twk::SeriesTensor x0 = twk::load_tensor(input);
  if (x0.window() != cfg.window || x0.features() != prepared.features) {
    throw std::runtime_error("detect: input tensor shape does not match config");
  }
  const auto params = cfg.embedParams(prepared.features);

  twk::DetectionMode mode = twk::DetectionMode::blind;
  std::optional<twk::SeedMatrix> reference;
  if (mode_name == "informed") {
    mode = twk::DetectionMode::informed;
    if (seeds_path.empty()) {
      throw std::invalid_argument("detect: informed mode needs --seeds");
    }
    reference = seedsFromJson(seeds_path);
  } else if (mode_name != "blind") {
    throw std::invalid_argument("detect: mode must be blind or informed");
  }

  const double fpr = fpr_override > 0 ? fpr_override : cfg.fpr;
  const std::size_t spr = spr_override > 0 ? spr_override : cfg.samples_per_record;
  const twk::DetectionReport report = twk::detect(
      x0, params.key, params, *prepared.estimator, sched, mode, nullptr,
      cfg.baseline, reference ? &*reference : nullptr, fpr, spr);
  std::cout << report.toJson() << "\n";
  return (report.z >= cfg.z_threshold) ? kExitDetected : kExitNotDetected;
}

int cmdAttack(const CommonOpts& opts, const std::string& input,
              const std::string& attack_text, const std::string& out_file) {
  const twk::RunConfig cfg = loadConfig(opts, false);
  const twk::AttackSpec spec =
      attack_text.empty() ? cfg.attack.value() : twk::AttackSpec::parse(attack_text);
  const twk::SeriesTensor x = twk::load_tensor(input);
  const twk::WatermarkKey key = cfg.key();

  twk::SeriesTensor attacked;
  if (spec.kind == twk::AttackKind::reconstruct) {
    auto prepared = cfg.prepare();
    const auto sched = cfg.makeSchedule();
    attacked = twk::apply_attack(x, spec, key, prepared.estimator.get(), &sched);
  } else {
    attacked = twk::apply_attack(x, spec, key);
  }
  twk::save_tensor(attacked, out_file);
  json summary{{"attack", spec.toString()}, {"output", out_file}};
  std::cout << summary.dump(2) << "\n";
  return kExitDetected;
}

int cmdBench(const CommonOpts& opts) {
  const twk::RunConfig cfg = loadConfig(opts, true);
  auto prepared = cfg.prepare();
  const auto params = cfg.embedParams(prepared.features);
  const auto sched = cfg.makeSchedule();

  auto [noise, seeds] = twk::embed(params, cfg.batch);
  const twk::SeriesTensor x0_w = twk::bdia_sample(noise, *prepared.estimator, sched).states[0];
  const twk::SeriesTensor xT_nw = twk::standard_normal_tensor(
      cfg.baseline, params.window, params.features, params.key.subKey("baseline"), 0);
  const twk::SeriesTensor x0_nw =
      twk::bdia_sample(xT_nw, *prepared.estimator, sched).states[0];
  const std::vector<double> acc_nw = twk::detection_accuracies(
      x0_nw, params.key, params, *prepared.estimator, sched, twk::DetectionMode::blind);

  const std::vector<std::pair<std::string, std::optional<twk::AttackSpec>>> cases = {
      {"no_attack", std::nullopt},
      {"offset_5", twk::AttackSpec{twk::AttackKind::offset, 0.05, 1}},
      {"offset_30", twk::AttackSpec{twk::AttackKind::offset, 0.30, 2}},
      {"crop_5", twk::AttackSpec{twk::AttackKind::random_crop, 0.05, 3}},
      {"crop_30", twk::AttackSpec{twk::AttackKind::random_crop, 0.30, 4}},
      {"minmax_5", twk::AttackSpec{twk::AttackKind::minmax_insert, 0.05, 5}},
      {"minmax_30", twk::AttackSpec{twk::AttackKind::minmax_insert, 0.30, 6}},
  };
  std::ostringstream header, row;
  bool first = true;
  for (const auto& [name, spec] : cases) {
    const twk::SeriesTensor attacked =
        spec ? twk::apply_attack(x0_w, *spec, params.key) : x0_w;
    const std::vector<double> acc_w = twk::detection_accuracies(
        attacked, params.key, params, *prepared.estimator, sched,
        twk::DetectionMode::blind);
    const double z = twk::z_score(acc_w, acc_nw).z;
    if (!first) {
      header << ",";
      row << ",";
    }
    first = false;
    header << name;
    row << z;
  }
  const std::string csv = header.str() + "\n" + row.str() + "\n";
  twk::write_text_file(outPath(cfg, "bench.csv"), csv);
  std::cout << csv;
  return kExitDetected;
}

int cmdSimulate(const CommonOpts& opts, std::size_t window, std::size_t features,
                std::size_t interval, const std::vector<std::size_t>& bits,
                const std::vector<double>& sigmas, std::size_t trials,
                std::size_t samples, bool with_transposed) {
  const twk::RunConfig cfg = loadConfig(opts, false);
  const twk::WatermarkKey key = cfg.key();
  std::ostringstream csv;
  csv << "L,sigma,transposed,mean_acc\n";
  for (const double sigma : sigmas) {
    for (const std::size_t L : bits) {
      const double acc = twk::simulate_bit_accuracy(window, features, L, sigma,
                                                    trials, samples, false, key,
                                                    interval);
      csv << L << "," << sigma << ",0," << acc << "\n";
    }
    if (with_transposed) {
      const double acc = twk::simulate_bit_accuracy(window, features, 2, sigma,
                                                    trials, samples, true, key,
                                                    interval);
      csv << 2 << "," << sigma << ",1," << acc << "\n";
    }
  }
  twk::write_text_file(outPath(cfg, "simulate.csv"), csv.str());
  std::cout << csv.str();
  return kExitDetected;
}

int cmdBoundCheck(const CommonOpts& opts, std::size_t trials, std::size_t probes,
                  double scale_frac) {
  const twk::RunConfig cfg = loadConfig(opts, true);
  auto prepared = cfg.prepare();
  const auto sched = cfg.makeSchedule();
  const auto params = cfg.embedParams(prepared.features);

  const twk::SeriesTensor windows = twk::window(prepared.data, cfg.window, cfg.window);
  const std::size_t probe_count = std::min<std::size_t>(windows.batch(), 16);
  twk::SeriesTensor probe_data(probe_count, cfg.window, prepared.features);
  for (std::size_t b = 0; b < probe_count; ++b) {
    auto src = windows.sample(b);
    auto dst = probe_data.sample(b);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  double var = 0.0, mean = 0.0;
  for (double v : probe_data.flat()) mean += v;
  mean /= static_cast<double>(probe_data.size());
  for (double v : probe_data.flat()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(probe_data.size());
  const double scale = scale_frac * std::sqrt(std::max(var, 1e-12));

  const auto delta = twk::estimate_lipschitz(*prepared.estimator, sched, probe_data,
                                             scale, probes, params.key.subKey("probe"));
  const twk::SeriesTensor xT = twk::standard_normal_tensor(
      trials, cfg.window, prepared.features, params.key.subKey("bound"), 0);
  const twk::BoundReport report =
      twk::verify_bound(xT, *prepared.estimator, sched, delta);

  std::ostringstream csv;
  csv << "t,delta_t,factor_t\n";
  for (std::size_t t = 1; t + 1 <= sched.steps; ++t) {
    csv << t << "," << delta[t] << "," << report.per_step_factor[t] << "\n";
  }
  twk::write_text_file(outPath(cfg, "bound.csv"), csv.str());

  json j{{"c_T", report.c_T},
         {"log10_c_T", report.log10_c_T},
         {"trials", report.trials},
         {"satisfied_count", report.satisfied_count},
         {"satisfied", report.satisfied},
         {"worst_measured_delta_T", report.measured_delta_T},
         {"worst_epsilon_norm", report.epsilon_norm}};
  std::cout << j.dump(2) << "\n";
  return report.satisfied ? kExitDetected : kExitNotDetected;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-series diffusion watermarking toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--config", common.config_path, "Run configuration file (key=value)");
  app.add_option("--key", common.key_hex, "Master key (64 hex chars), overrides config");
  app.add_option("--out", common.out, "Output directory, overrides config");
  app.add_option("--threads", common.threads, "Worker threads for batch loops");

  auto* keygen = app.add_subcommand("keygen", "Generate a fresh 256-bit master key");
  std::string keygen_out;
  keygen->add_option("--out", keygen_out, "Write the key to a file instead of stdout");

  auto* sample = app.add_subcommand(
      "sample", "Embed a watermark and generate a synthetic batch (writes x0.twk + seeds.json)");

  auto* detect = app.add_subcommand("detect", "Run watermark detection on a tensor");
  std::string detect_input, detect_mode = "blind", detect_seeds;
  double detect_fpr = 0.0;
  std::size_t detect_spr = 0;
  detect->add_option("input", detect_input, "Input tensor (TWK1)")->required();
  detect->add_option("--mode", detect_mode, "blind|informed (default blind)");
  detect->add_option("--seeds", detect_seeds, "Seed sidecar for informed mode");
  detect->add_option("--fpr", detect_fpr, "FPR for the TPR curve");
  detect->add_option("--samples-per-record", detect_spr, "Samples aggregated per record");

  auto* attack = app.add_subcommand("attack", "Apply a post-editing attack to a tensor");
  std::string attack_input, attack_text, attack_out = "attacked.twk";
  attack->add_option("input", attack_input, "Input tensor (TWK1)")->required();
  attack->add_option("--attack", attack_text, "kind:strength (offset|crop|minmax|reconstruct)");
  attack->add_option("--output", attack_out, "Output tensor path");

  auto* bench = app.add_subcommand(
      "bench", "Z-score table across {offset,crop,minmax} x {5%,30%} attacks");

  auto* simulate = app.add_subcommand(
      "simulate", "Noise-only bit-accuracy simulation (no diffusion)");
  std::size_t sim_window = 24, sim_features = 10, sim_interval = 2;
  std::size_t sim_trials = 50, sim_samples = 2000;
  std::vector<std::size_t> sim_bits = {2, 3, 4};
  std::vector<double> sim_sigmas = {0.0, 0.5, 1.0, 2.0};
  bool sim_transposed = false;
  simulate->add_option("--window", sim_window, "Timesteps W");
  simulate->add_option("--features", sim_features, "Features F");
  simulate->add_option("--interval", sim_interval, "Interval H");
  simulate->add_option("--bits", sim_bits, "Bit levels to sweep");
  simulate->add_option("--sigmas", sim_sigmas, "Noise scales to sweep");
  simulate->add_option("--trials", sim_trials, "Independent rounds");
  simulate->add_option("--samples", sim_samples, "Samples per round");
  simulate->add_flag("--transposed", sim_transposed, "Also run the feature-chained variant");

  auto* bound = app.add_subcommand("bound-check", "Inversion error bound verification");
  std::size_t bound_trials = 100, bound_probes = 64;
  double bound_scale = 1e-2;
  bound->add_option("--trials", bound_trials, "Trajectories to test");
  bound->add_option("--probes", bound_probes, "Lipschitz probes per step");
  bound->add_option("--scale-frac", bound_scale, "Perturbation scale as a fraction of data std");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (keygen->parsed()) return cmdKeygen(keygen_out);
    if (sample->parsed()) return cmdSample(common);
    if (detect->parsed()) {
      return cmdDetect(common, detect_input, detect_mode, detect_seeds, detect_fpr,
                       detect_spr);
    }
    if (attack->parsed()) return cmdAttack(common, attack_input, attack_text, attack_out);
    if (bench->parsed()) return cmdBench(common);
    if (simulate->parsed()) {
      return cmdSimulate(common, sim_window, sim_features, sim_interval, sim_bits,
                         sim_sigmas, sim_trials, sim_samples, sim_transposed);
    }
    if (bound->parsed()) {
      return cmdBoundCheck(common, bound_trials, bound_probes, bound_scale);
    }
  } catch (const twk::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
