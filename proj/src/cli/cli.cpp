// Copyright 2026 The CBDNet-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cbd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cbd/ablation.hpp"
#include "cbd/dataset.hpp"
#include "cbd/error.hpp"
#include "cbd/metrics.hpp"
#include "cbd/png_io.hpp"
#include "cbd/scenes.hpp"
#include "cbd/service.hpp"
#include "cbd/training.hpp"
#include "cbd/weights_io.hpp"

namespace cbd {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  std::string in, out, gt_mode = "montecarlo", pool = "training";
  int count = 0, mc_draws = 16;
  bool jpeg = false;
  std::uint64_t seed = 0;
};

struct ScenesArgs {
  std::string out;
  int count = 0, size = 64;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string config, synthetic, real, out, resume, log;
};

struct DenoiseArgs {
  std::string model, in, out, out_map;
  double gamma = 1.0;
};

struct EstimateArgs {
  std::string model, in, out_map;
};

struct EvalArgs {
  std::string model, clean, noisy, report;
};

struct AblateArgs {
  std::string variants = "G,HG,HG+ISP", test_sets, budget, report;
};

struct ServeArgs {
  std::string model, host = "127.0.0.1";
  int port = 8080;
  std::size_t pixel_budget = 4'000'000;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

int run_synth(const SynthArgs& a) {
  std::vector<Image> clean;
  for (const auto& p : list_pngs(a.in)) clean.push_back(read_png(p));
  SynthOptions opts;
  opts.count = a.count;
  opts.jpeg = a.jpeg;
  opts.seed = a.seed;
  opts.synthesis.gt_mode = parse_gt_mode(a.gt_mode);
  opts.synthesis.mc_draws = a.mc_draws;
  opts.sampler = a.pool == "held-out" ? NoiseSampler::held_out_pool() : NoiseSampler::training_pool();
  build_synthetic_dataset(clean, a.out, opts);
  std::cout << "wrote " << a.count << " pairs to " << a.out << "\n";
  return 0;
}

int run_scenes(const ScenesArgs& a) {
  for (int i = 0; i < a.count; ++i) {
    Rng rng = make_rng(a.seed, static_cast<std::uint64_t>(i));
    write_png(fs::path(a.out) / (pair_stem(i) + ".png"), generate_scene(rng, a.size, a.size));
  }
  std::cout << "wrote " << a.count << " scenes to " << a.out << "\n";
  return 0;
}

int run_train(const TrainArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig::desk() : TrainConfig::load(a.config);
  if (!a.real.empty() && !cfg.mix_real)
    throw ArgumentError("--real given but the config does not set mix_real = true");
  TrainingData data;
  data.synthetic = load_pairs(a.synthetic, true);
  if (cfg.mix_real) {
    if (a.real.empty()) throw ArgumentError("mix_real = true requires --real");
    data.real = load_pairs(a.real, false);
  }
  data = split_validation(std::move(data), cfg.val_count);

  std::optional<ModelWeights> initial;
  if (!a.resume.empty()) {
    initial = load_weights(a.resume);
    cfg.network = initial->config();
  }
  std::ofstream log;
  if (!a.log.empty()) {
    log.open(a.log);
    log << "epoch\ttotal\trec\tasymm\ttv\tval_psnr\n";
  }
  std::cout << "epoch\ttotal\trec\tasymm\ttv\tval_psnr\n";
  train(data, cfg, initial, [&](const EpochMetrics& m, const ModelWeights& w) {
    const std::string line = format_metrics_line(m);
    std::cout << line << std::endl;
    if (log) log << line << std::endl;
    save_weights(w, a.out);
  });
  std::cout << "saved " << a.out << "\n";
  return 0;
}

void write_map(const fs::path& path, const NoiseLevelMap& map) {
  if (path.extension() == ".bin") {
    write_sigma_map(path, map);
  } else {
    double scale = 0.0;
    write_png(path, noise_heatmap(map, scale));
    std::cout << "map_scale " << scale << "\n";
  }
}

int run_denoise(const DenoiseArgs& a) {
  const ModelWeights w = load_weights(a.model);
  const BlindResult r = blind_denoise(w, read_png(a.in), a.gamma);
  write_png(a.out, clamp01(r.x_hat));
  if (!a.out_map.empty()) write_map(a.out_map, r.sigma_hat);
  return 0;
}

int run_estimate(const EstimateArgs& a) {
  const ModelWeights w = load_weights(a.model);
  write_map(a.out_map, estimate_noise(w, read_png(a.in)));
  return 0;
}

int run_eval(const EvalArgs& a) {
  const ModelWeights w = load_weights(a.model);
  std::vector<EvalPair> pairs;
  for (const auto& noisy : list_pngs(a.noisy)) {
    const fs::path clean = fs::path(a.clean) / noisy.filename();
    if (!fs::exists(clean)) throw IngestionError("no clean reference for " + noisy.string());
    pairs.push_back({noisy.stem().string(), read_png(clean), read_png(noisy)});
  }
  const EvalReport report = evaluate_model(w, pairs, a.model, a.noisy);
  write_report(report, a.report);
  std::printf("mean psnr %.4f (noisy %.4f), mean ssim %.4f (noisy %.4f)\n", report.mean_psnr,
              report.mean_psnr_noisy, report.mean_ssim, report.mean_ssim_noisy);
  return 0;
}

int run_ablate(const AblateArgs& a) {
  const AblationBudget budget =
      a.budget.empty() ? AblationBudget::desk() : AblationBudget::parse(read_text(a.budget));
  std::vector<NoiseModel> variants, tests;
  for (const auto& v : split_list(a.variants)) variants.push_back(parse_noise_model(v));
  for (const auto& v : split_list(a.test_sets.empty() ? a.variants : a.test_sets))
    tests.push_back(parse_noise_model(v));
  const auto reports = run_ablation(variants, tests, budget);
  write_summary(reports, a.report);
  for (const auto& r : reports)
    std::printf("%s on %s: %.4f dB\n", r.label.c_str(), r.test_label.c_str(), r.mean_psnr);
  return 0;
}

int run_serve(const ServeArgs& a) {
  DenoiseService service(load_weights(a.model), fs::path(a.model).filename().string(),
                         a.pixel_budget);
  if (!run_server(service, a.host, a.port)) {
    std::cerr << "error: cannot listen on " << a.host << ":" << a.port << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int cli_dispatch(int argc, char** argv) {
  CLI::App app{"Convolutional blind denoising: synthesis, training, inference and serving"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", kVersion);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Build a synthetic dataset from a folder of clean PNGs");
  s->add_option("--in", synth.in, "Clean image folder")->required()->check(CLI::ExistingDirectory);
  s->add_option("--out", synth.out, "Output dataset root")->required();
  s->add_option("--count", synth.count, "Number of pairs")->required()->check(CLI::PositiveNumber);
  s->add_flag("--jpeg", synth.jpeg, "Add a JPEG round trip with random quality");
  s->add_option("--seed", synth.seed, "Seed");
  s->add_option("--gt-mode", synth.gt_mode, "Ground-truth map mode")
      ->check(CLI::IsMember({"montecarlo", "raw_propagate"}));
  s->add_option("--mc-draws", synth.mc_draws, "Monte-Carlo draws")->check(CLI::Range(8, 4096));
  s->add_option("--pool", synth.pool, "Parameter ranges")->check(CLI::IsMember({"training", "held-out"}));

  ScenesArgs scenes;
  auto* sc = app.add_subcommand("scenes", "Render procedural clean images");
  sc->add_option("--out", scenes.out, "Output folder")->required();
  sc->add_option("--count", scenes.count, "Number of images")->required()->check(CLI::PositiveNumber);
  sc->add_option("--size", scenes.size, "Side length")->check(CLI::Range(8, 4096));
  sc->add_option("--seed", scenes.seed, "Seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train both subnetworks");
  t->add_option("--config", tr.config, "key = value config (desk preset when omitted)")
      ->check(CLI::ExistingFile);
  t->add_option("--synthetic", tr.synthetic, "Synthetic dataset root")->required();
  t->add_option("--real", tr.real, "Real pair root (clean/ + noisy/)");
  t->add_option("--out", tr.out, "Weights file, rewritten after every epoch")->required();
  t->add_option("--resume", tr.resume, "Start from these weights")->check(CLI::ExistingFile);
  t->add_option("--log", tr.log, "Per-epoch metrics TSV");

  DenoiseArgs dn;
  auto* d = app.add_subcommand("denoise", "Blind-denoise one PNG");
  d->add_option("--model", dn.model, "Weights file")->required()->check(CLI::ExistingFile);
  d->add_option("--in", dn.in, "Noisy PNG")->required()->check(CLI::ExistingFile);
  d->add_option("--out", dn.out, "Denoised PNG")->required();
  d->add_option("--gamma", dn.gamma, "Noise-map scale")->check(CLI::PositiveNumber);
  d->add_option("--out-map", dn.out_map, "Also write the estimated map (.bin or .png)");

  EstimateArgs es;
  auto* e = app.add_subcommand("estimate", "Estimate the noise level map of one PNG");
  e->add_option("--model", es.model, "Weights file")->required()->check(CLI::ExistingFile);
  e->add_option("--in", es.in, "Noisy PNG")->required()->check(CLI::ExistingFile);
  e->add_option("--out-map", es.out_map, "Map output (.bin raw floats, otherwise PNG heatmap)")
      ->required();

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "Score a model on matching clean/noisy folders");
  v->add_option("--model", ev.model, "Weights file")->required()->check(CLI::ExistingFile);
  v->add_option("--clean", ev.clean, "Clean folder")->required()->check(CLI::ExistingDirectory);
  v->add_option("--noisy", ev.noisy, "Noisy folder")->required()->check(CLI::ExistingDirectory);
  v->add_option("--report", ev.report, "Per-image TSV report")->required();

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Compare noise models under one budget");
  a->add_option("--variants", ab.variants, "Comma-separated training noise models");
  a->add_option("--test-sets", ab.test_sets, "Comma-separated test noise models (default: variants)");
  a->add_option("--budget", ab.budget, "Budget file")->check(CLI::ExistingFile);
  a->add_option("--report", ab.report, "Summary TSV")->required();

  ServeArgs sv;
  auto* srv = app.add_subcommand("serve", "HTTP service for interactive denoising");
  srv->add_option("--model", sv.model, "Weights file")->required()->check(CLI::ExistingFile);
  srv->add_option("--port", sv.port, "Port")->check(CLI::Range(1, 65535));
  srv->add_option("--host", sv.host, "Bind address");
  srv->add_option("--pixel-budget", sv.pixel_budget, "Largest accepted image in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 1;
  }

  try {
    if (*s) return run_synth(synth);
    if (*sc) return run_scenes(scenes);
    if (*t) return run_train(tr);
    if (*d) return run_denoise(dn);
    if (*e) return run_estimate(es);
    if (*v) return run_eval(ev);
    if (*a) return run_ablate(ab);
    if (*srv) return run_serve(sv);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cbd
