// Copyright 2026 The HYSP Lab Authors
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


// hysp_lab: command-line front end for the HYSP laboratory.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "hysp/analytics.hpp"
#include "hysp/config.hpp"
#include "hysp/errors.hpp"
#include "hysp/gradcheck.hpp"
#include "hysp/trainer.hpp"

#ifndef HYSP_LAB_VERSION
#define HYSP_LAB_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : hysp::Error {
  using hysp::Error::Error;
  const char* kind() const noexcept override { return "Usage"; }
};

struct CheckFailed : hysp::Error {
  using hysp::Error::Error;
  const char* kind() const noexcept override { return "CheckFailed"; }
};

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw hysp::IoError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

/// Exclusive ownership of an output directory for the lifetime of a run.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw hysp::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr)
      throw hysp::IoError("output directory " + dir.string() + " is locked by another run (remove " +
                          path_.string() + " if stale)");
    std::fprintf(f, "%s\n", HYSP_LAB_VERSION);
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "hysp_out";
  std::string preset = "desk";
};

struct Run {
  hysp::TrainConfig cfg;
  std::string seed_source;
  fs::path out;
  json manifest;

  void write_manifest() const {
    std::ofstream os(out / "manifest.json", std::ios::trunc);
    if (!os) throw hysp::IoError("cannot write manifest in " + out.string());
    os << manifest.dump(2) << '\n';
  }
  void add_input(const std::string& name, const fs::path& p) {
    manifest["inputs"][name] = {{"path", p.string()}, {"fnv1a", hysp::content_hash(read_file(p))}};
  }
  fs::path output(const std::string& name) {
    manifest["outputs"].push_back(name);
    return out / name;
  }
};

std::size_t worker_cap() {
  const char* env = std::getenv("HYSP_LAB_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0) throw hysp::InvalidInput(std::string("HYSP_LAB_THREADS must be a non-negative integer, got '") + env + "'");
  return static_cast<std::size_t>(v);
}

/// Preset, then the config file, then --seed. Without --seed or a seed in the
/// file, the seed is drawn from entropy and recorded.
Run resolve(const Common& c, const std::string& command, int argc, char** argv) {
  Run r;
  r.cfg = hysp::preset(c.preset);
  json file_json;
  if (!c.config_path.empty()) {
    try {
      file_json = json::parse(read_file(c.config_path));
    } catch (const json::parse_error& e) {
      throw hysp::InvalidInput("config " + c.config_path + ": " + e.what());
    }
    r.cfg = hysp::merge_json(r.cfg, file_json);
  }
  if (c.seed) {
    r.cfg.seed = *c.seed;
    r.seed_source = "flag";
  } else if (file_json.contains("trainer") && file_json["trainer"].contains("seed")) {
    r.seed_source = "config";
  } else {
    r.cfg.seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) | std::random_device{}();
    r.seed_source = "entropy";
  }
  r.cfg.validate();
  r.out = c.out;
  std::vector<std::string> args(argv, argv + argc);
  r.manifest = {{"command", command},
                {"argv", args},
                {"code_version", HYSP_LAB_VERSION},
                {"preset", c.preset},
                {"seed", r.cfg.seed},
                {"seed_source", r.seed_source},
                {"config", hysp::to_json(r.cfg)},
                {"config_hash", hysp::content_hash(hysp::to_json(r.cfg).dump())},
                {"threads", worker_cap()},
                {"inputs", json::object()},
                {"outputs", json::array()},
                {"status", "running"}};
  if (!c.config_path.empty()) r.add_input("config", c.config_path);
  return r;
}

struct Splits {
  hysp::data::Dataset train, test;
};

Splits load_splits(Run& run, const std::string& data_path) {
  hysp::data::Dataset all;
  if (data_path.empty()) {
    all = hysp::trainer::make_dataset(run.cfg);
  } else {
    run.add_input("dataset", data_path);
    all = hysp::data::load_dataset(data_path).second;
  }
  const auto s = hysp::data::stratified_split(all, run.cfg.data.test_fraction, run.cfg.data.seed);
  return {hysp::data::subset(all, s.train), hysp::data::subset(all, s.test)};
}

hysp::trainer::Checkpoint load_ckpt(Run& run, const std::string& path) {
  run.add_input("checkpoint", path);
  return hysp::trainer::load_checkpoint(path, hysp::config_hash(run.cfg), &std::cerr);
}

void print_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) w[i] = header[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) std::cout << std::left << std::setw(static_cast<int>(w[i] + 2)) << cells[i];
    std::cout << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HYSP hyperbolic self-paced learning laboratory"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON config overriding the preset")->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "Training seed (drawn from entropy when omitted)");
  app.add_option("--out", common.out, "Output directory (one run at a time)");
  app.add_option("--preset", common.preset, "Base preset")->check(CLI::IsMember({"desk", "paper"}));

  std::string data_path, ckpt_path, resume_path;
  double label_fraction = 1.0;
  bool finetune = false, random_init = false, online_branch = false;
  std::size_t bins = hysp::analytics::kDefaultBins;
  int views = hysp::analytics::kDefaultViews, gc_seeds = 20, gc_pairs = 1000;

  auto* gen = app.add_subcommand("generate", "Generate the synthetic dataset");
  auto* pre = app.add_subcommand("pretrain", "HYSP pretraining");
  pre->add_option("--data", data_path, "Dataset file (generated from the config when omitted)");
  pre->add_option("--resume", resume_path, "Checkpoint to resume from")->check(CLI::ExistingFile);
  auto* probe = app.add_subcommand("probe", "Linear, semi-supervised or finetune evaluation");
  probe->add_option("--data", data_path);
  probe->add_option("--checkpoint", ckpt_path)->check(CLI::ExistingFile);
  probe->add_option("--label-fraction", label_fraction, "Fraction of labels per class, in (0, 1]");
  probe->add_flag("--finetune", finetune, "Train the encoder together with the classifier");
  probe->add_flag("--random-init", random_init, "Probe a freshly initialized encoder");
  auto* ablate = app.add_subcommand("ablate", "Baseline, with negatives, without hyperbolic, without curriculum");
  ablate->add_option("--data", data_path);
  auto* split = app.add_subcommand("split", "Hard-half versus easy-half pretraining");
  split->add_option("--data", data_path);
  split->add_option("--checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  auto* analyze = app.add_subcommand("analyze", "Uncertainty reports for a checkpoint");
  analyze->add_option("--data", data_path);
  analyze->add_option("--checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  analyze->add_option("--bins", bins, "Histogram bins");
  analyze->add_option("--views", views, "Augmented pairs averaged per sample");
  analyze->add_flag("--online", online_branch, "Take the radius from the online branch");
  auto* sweep = app.add_subcommand("sweep-batch", "Probe accuracy over probe batch sizes");
  sweep->add_option("--data", data_path);
  sweep->add_option("--checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference and Riemannian gradient oracles");
  gc->add_option("--seeds", gc_seeds, "Seeds per primitive");
  gc->add_option("--pairs", gc_pairs, "Random pairs for the Riemannian oracle");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: kind=Usage msg=" << one_line(e.what()) << '\n' << app.help();
    return 2;
  }

  CLI::App* cmd = app.get_subcommands().front();
  std::optional<Run> run;
  bool owns_dir = false;
  try {
    run = resolve(common, cmd->get_name(), argc, argv);
    DirLock lock(run->out);
    owns_dir = true;
    run->write_manifest();
    auto& cfg = run->cfg;
    using namespace hysp;

    if (cmd == gen) {
      const auto ds = trainer::make_dataset(cfg);
      data::DatasetHeader h{1, static_cast<std::uint32_t>(cfg.model.joints), static_cast<std::uint32_t>(cfg.data.frames),
                            static_cast<std::uint32_t>(cfg.data.amplitudes.size()), cfg.data.seed};
      data::save_dataset(ds, h, run->output("dataset.hysd"));
      std::cout << "wrote " << ds.size() << " sequences to " << (run->out / "dataset.hysd").string() << '\n';
    } else if (cmd == pre) {
      const auto s = load_splits(*run, data_path);
      std::optional<trainer::Checkpoint> resume;
      if (!resume_path.empty()) {
        run->add_input("resume", resume_path);
        resume = trainer::load_checkpoint(resume_path, config_hash(cfg), &std::cerr);
      }
      run->write_manifest();
      const auto r = trainer::pretrain(cfg, s.train, std::move(resume));
      trainer::write_metrics_csv(r.metrics, run->output("metrics.csv"));
      trainer::write_timing_csv(r.metrics, run->output("timing.csv"));
      trainer::save_checkpoint(r.checkpoint, run->output("checkpoint.hysp"));
      std::vector<std::vector<std::string>> rows;
      for (const auto& m : r.metrics)
        rows.push_back({std::to_string(m.epoch), fmt(m.loss, 6), fmt(m.mean_h_norm), fmt(m.mean_h_hat_norm),
                        fmt(m.mean_grad_norm, 6), fmt(m.alpha, 3)});
      print_table({"epoch", "loss", "|h|", "|h_hat|", "grad", "alpha"}, rows);
    } else if (cmd == probe) {
      if (ckpt_path.empty() == !random_init) throw UsageError("probe needs exactly one of --checkpoint or --random-init");
      const auto s = load_splits(*run, data_path);
      const auto ck = random_init ? trainer::initial_checkpoint(cfg) : load_ckpt(*run, ckpt_path);
      run->write_manifest();
      const auto r = trainer::linear_probe(ck.twin, s.train, s.test, cfg, label_fraction, finetune);
      std::ofstream os(run->output("predictions.csv"));
      os << "sample_id,label,predicted\n";
      for (std::size_t i = 0; i < r.labels.size(); ++i)
        os << r.sample_ids[i] << ',' << r.labels[i] << ',' << r.predicted[i] << '\n';
      const json res{{"accuracy", r.accuracy}, {"label_fraction", label_fraction}, {"finetune", finetune},
                     {"random_init", random_init}, {"test_samples", r.labels.size()}};
      analytics::write_text(run->output("probe.json"), res.dump(2) + "\n");
      std::cout << "accuracy " << fmt(r.accuracy) << " on " << r.labels.size() << " test samples\n";
    } else if (cmd == ablate) {
      const auto s = load_splits(*run, data_path);
      run->write_manifest();
      const auto rows = trainer::ablation_grid(cfg, s.train, s.test);
      trainer::write_ablation_csv(rows, run->output("ablation.csv"));
      std::vector<std::vector<std::string>> t;
      for (const auto& r : rows)
        t.push_back({r.name, fmt(r.final_loss, 6), r.finite ? "yes" : "no", fmt(r.probe_accuracy)});
      print_table({"variant", "final_loss", "finite", "probe_acc"}, t);
    } else if (cmd == split) {
      const auto s = load_splits(*run, data_path);
      const auto ck = load_ckpt(*run, ckpt_path);
      run->write_manifest();
      const auto r = trainer::hard_easy_split_experiment(ck, s.train, s.test, cfg);
      std::ofstream os(run->output("split.csv"));
      os << "variant,samples,accuracy\n"
         << "full," << s.train.size() << ',' << r.full_accuracy << '\n'
         << "hard," << r.halves.hard.size() << ',' << r.hard_accuracy << '\n'
         << "easy," << r.halves.easy.size() << ',' << r.easy_accuracy << '\n';
      print_table({"variant", "samples", "accuracy"},
                  {{"full", std::to_string(s.train.size()), fmt(r.full_accuracy)},
                   {"hard", std::to_string(r.halves.hard.size()), fmt(r.hard_accuracy)},
                   {"easy", std::to_string(r.halves.easy.size()), fmt(r.easy_accuracy)}});
    } else if (cmd == analyze) {
      const auto s = load_splits(*run, data_path);
      const auto ck = load_ckpt(*run, ckpt_path);
      run->write_manifest();
      analytics::RecordOptions opts;
      opts.n_views = views;
      opts.seed = cfg.seed;
      opts.branch = online_branch ? analytics::Branch::kOnline : analytics::Branch::kTarget;
      opts.augmentation = cfg.augmentation;
      analytics::AnalysisInputs in;
      in.records = analytics::collect_records(ck.twin, s.test, ck.curvature, opts);
      const auto pr = trainer::linear_probe(ck.twin, s.train, s.test, cfg);
      in.test_labels = pr.labels;
      in.test_predicted = pr.predicted;
      in.n_bins = bins;
      in.n_views = views;
      in.branch = opts.branch;
      const auto sum = analytics::write_analysis(in, run->out / "analysis");
      run->manifest["outputs"].push_back("analysis/index.json");
      std::vector<std::vector<std::string>> t;
      for (const auto& c : sum.ranking)
        t.push_back({std::to_string(c.class_id), fmt(c.median_radius, 6), std::to_string(c.count)});
      print_table({"class", "median_radius", "samples"}, t);
      std::cout << "cosine-distance trend " << fmt(sum.cosine_trend, 3) << ", grad-norm trend "
                << fmt(sum.grad_trend, 3) << '\n';
    } else if (cmd == sweep) {
      const auto s = load_splits(*run, data_path);
      const auto ck = load_ckpt(*run, ckpt_path);
      run->write_manifest();
      const auto rows = trainer::batch_size_sweep(ck.twin, s.train, s.test, cfg);
      std::ofstream os(run->output("batch_sweep.csv"));
      os << "batch_size,accuracy\n";
      std::vector<std::vector<std::string>> t;
      for (const auto& r : rows) {
        os << r.batch_size << ',' << r.accuracy << '\n';
        t.push_back({std::to_string(r.batch_size), fmt(r.accuracy)});
      }
      print_table({"batch_size", "accuracy"}, t);
    } else if (cmd == gc) {
      const auto rows = gradcheck::run_primitive_suite(gc_seeds);
      const auto oracle = gradcheck::run_riemannian_oracle(gc_pairs, {2, 8, 64}, cfg.seed);
      std::vector<std::vector<std::string>> t;
      bool ok = oracle.max_rel_error < gradcheck::kRiemannianTolerance;
      std::ofstream os(run->output("gradcheck.csv"));
      os << "check,max_rel_error,pass\n";
      for (const auto& r : rows) {
        ok = ok && r.pass;
        std::ostringstream e;
        e << std::scientific << std::setprecision(3) << r.max_rel_error;
        t.push_back({r.name, e.str(), r.pass ? "ok" : "FAIL"});
        os << r.name << ',' << r.max_rel_error << ',' << r.pass << '\n';
      }
      std::ostringstream e;
      e << std::scientific << std::setprecision(3) << oracle.max_rel_error;
      const bool oracle_ok = oracle.max_rel_error < gradcheck::kRiemannianTolerance;
      t.push_back({"riemannian_closed_form", e.str(), oracle_ok ? "ok" : "FAIL"});
      os << "riemannian_closed_form," << oracle.max_rel_error << ',' << oracle_ok << '\n';
      print_table({"check", "max_rel_error", "status"}, t);
      if (!ok) throw CheckFailed("one or more gradient checks exceeded tolerance");
    }
    run->manifest["status"] = "complete";
    run->write_manifest();
    return 0;
  } catch (const hysp::Error& e) {
    std::cerr << "error: kind=" << e.kind() << " msg=" << one_line(e.what()) << '\n';
    if (run && owns_dir) {
      run->manifest["status"] = "failed";
      run->manifest["error"] = e.what();
      try {
        if (fs::exists(run->out / "manifest.json")) run->write_manifest();
      } catch (const hysp::Error&) {
      }
    }
    return dynamic_cast<const UsageError*>(&e) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=Internal msg=" << one_line(e.what()) << '\n';
    return 1;
  }
}
