#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "md2ga/checkpoint.hpp"
#include "md2ga/data.hpp"
#include "md2ga/io.hpp"
#include "md2ga/schedule.hpp"
#include "md2ga/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// One JSON document drives every command; flags override individual fields.
struct CliConfig {
  md2ga::SyntheticConfig data;
  md2ga::TrainConfig train;
  double split_train = 0.75;
  double split_val = 0.25;
  double split_test = 0.0;
  std::uint64_t seed = 1;
};

json config_to_json(const CliConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["data"] = {{"joints", c.data.joints},   {"dims", c.data.dims},
               {"t_p", c.data.t_p},         {"t_f", c.data.t_f},
               {"count", c.data.count},     {"freq_lo", c.data.freq_lo},
               {"freq_hi", c.data.freq_hi}, {"amp_lo", c.data.amp_lo},
               {"amp_hi", c.data.amp_hi},   {"noise_std", c.data.noise_std},
               {"num_classes", c.data.num_classes}};
  j["model"] = {{"num_decoders", c.train.model.num_decoders},
                {"mode", md2ga::mode_name(c.train.model.mode)},
                {"encoder", md2ga::encoder_name(c.train.model.encoder)},
                {"embed_hidden", c.train.model.embed_hidden},
                {"embed_width", c.train.model.embed_width},
                {"encoder_blocks", c.train.model.encoder_blocks},
                {"head_hidden", c.train.model.head_hidden},
                {"gate_hidden", c.train.model.gate_hidden}};
  j["train"] = {{"lr", c.train.lr},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"clip_norm", c.train.clip_norm},
                {"single_decoder", c.train.single_decoder},
                {"no_l1", c.train.no_l1},
                {"no_l2", c.train.no_l2},
                {"no_ga", c.train.no_ga},
                {"eval_mode", md2ga::eval_mode_name(c.train.eval_mode)}};
  j["split"] = {{"train", c.split_train}, {"val", c.split_val}, {"test", c.split_test}};
  return j;
}

// Overlay semantics: keys present in the file replace defaults, everything
// else keeps its default, so configs can stay minimal.
void overlay_config(CliConfig& c, const json& j) {
  c.seed = j.value("seed", c.seed);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    c.data.joints = d.value("joints", c.data.joints);
    c.data.dims = d.value("dims", c.data.dims);
    c.data.t_p = d.value("t_p", c.data.t_p);
    c.data.t_f = d.value("t_f", c.data.t_f);
    c.data.count = d.value("count", c.data.count);
    c.data.freq_lo = d.value("freq_lo", c.data.freq_lo);
    c.data.freq_hi = d.value("freq_hi", c.data.freq_hi);
    c.data.amp_lo = d.value("amp_lo", c.data.amp_lo);
    c.data.amp_hi = d.value("amp_hi", c.data.amp_hi);
    c.data.noise_std = d.value("noise_std", c.data.noise_std);
    c.data.num_classes = d.value("num_classes", c.data.num_classes);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    auto& mc = c.train.model;
    mc.num_decoders = m.value("num_decoders", mc.num_decoders);
    if (m.contains("mode")) mc.mode = md2ga::parse_mode(m.at("mode").get<std::string>());
    if (m.contains("encoder"))
      mc.encoder = md2ga::parse_encoder(m.at("encoder").get<std::string>());
    mc.embed_hidden = m.value("embed_hidden", mc.embed_hidden);
    mc.embed_width = m.value("embed_width", mc.embed_width);
    mc.encoder_blocks = m.value("encoder_blocks", mc.encoder_blocks);
    mc.head_hidden = m.value("head_hidden", mc.head_hidden);
    mc.gate_hidden = m.value("gate_hidden", mc.gate_hidden);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.lr = t.value("lr", c.train.lr);
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.batch_size = t.value("batch_size", c.train.batch_size);
    c.train.clip_norm = t.value("clip_norm", c.train.clip_norm);
    c.train.single_decoder = t.value("single_decoder", c.train.single_decoder);
    c.train.no_l1 = t.value("no_l1", c.train.no_l1);
    c.train.no_l2 = t.value("no_l2", c.train.no_l2);
    c.train.no_ga = t.value("no_ga", c.train.no_ga);
    if (t.contains("eval_mode"))
      c.train.eval_mode = md2ga::parse_eval_mode(t.at("eval_mode").get<std::string>());
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    c.split_train = s.value("train", c.split_train);
    c.split_val = s.value("val", c.split_val);
    c.split_test = s.value("test", c.split_test);
  }
}

// Gathers artifacts, then drops a manifest with the resolved config, the
// schedule table when one applies, artifact checksums, and wall-clock time.
class RunContext {
 public:
  RunContext(std::string command, const std::string& out_flag)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
    if (!out_flag.empty()) {
      dir_ = out_flag;
    } else {
      const char* root = std::getenv("MD2GA_OUT");
      dir_ = fs::path(root && *root ? root : "md2ga_out") / command_;
    }
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  fs::path add_artifact(const std::string& name, const std::string& filename,
                        const std::string& content) {
    const fs::path path = dir_ / filename;
    md2ga::write_file_atomic(path, content);
    outputs_[name] = path.string();
    checksums_[filename] = md2ga::fnv1a64(content);
    return path;
  }

  void note_file(const std::string& name, const fs::path& path) {
    outputs_[name] = path.string();
    checksums_[path.filename().string()] = md2ga::fnv1a64(md2ga::read_file(path));
  }

  void set_schedule(const md2ga::HorizonSchedule& s) {
    json table = json::array();
    for (int k = 1; k <= s.num_decoders; ++k)
      table.push_back({{"k", k},
                       {"length", s.lengths[static_cast<size_t>(k - 1)]},
                       {"cover_begin", s.cover_begin(k)},
                       {"cover_end", s.cover_end(k)}});
    schedule_ = std::move(table);
  }

  void finish(const json& resolved_config, std::uint64_t seed) {
    json manifest;
    manifest["command"] = command_;
    manifest["config"] = resolved_config;
    manifest["seed"] = seed;
    if (!schedule_.is_null()) manifest["schedule"] = schedule_;
    manifest["outputs"] = outputs_;
    json sums = json::object();
    for (const auto& [file, sum] : checksums_) sums[file] = sum;
    manifest["checksums"] = sums;
    manifest["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    md2ga::write_file_atomic(dir_ / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (dir_ / "manifest.json").string() << "\n";
  }

 private:
  std::string command_;
  fs::path dir_;
  json schedule_;
  std::map<std::string, std::string> outputs_;
  std::map<std::string, std::uint64_t> checksums_;
  std::chrono::steady_clock::time_point start_;
};

void require_finite(const std::vector<double>& values, const std::string& what) {
  for (double v : values)
    if (!std::isfinite(v))
      throw std::runtime_error(what + ": non-finite value in output");
}

md2ga::Dataset load_or_generate(const CliConfig& cfg, const std::string& data_path) {
  if (!data_path.empty()) return md2ga::load_csv(data_path);
  auto dc = cfg.data;
  dc.seed = cfg.seed;
  return md2ga::gen_synthetic(dc);
}

void apply_dataset_shape(md2ga::TrainConfig& tc, const md2ga::Dataset& ds) {
  tc.model.joints = ds.joints;
  tc.model.dims = ds.dims;
  tc.model.t_p = ds.t_p;
  tc.model.t_f = ds.t_f;
}

std::string eval_rows_csv(const std::vector<md2ga::EvalReport>& reports) {
  std::string csv = "mode,average_mpjpe\n";
  for (const auto& r : reports)
    csv += r.mode + "," + md2ga::format_double(r.average_mpjpe) + "\n";
  return csv;
}

std::string eval_frames_csv(const std::vector<md2ga::EvalReport>& reports) {
  std::string csv = "mode,frame,mpjpe\n";
  for (const auto& r : reports)
    for (size_t i = 0; i < r.per_frame_mpjpe.size(); ++i)
      csv += r.mode + "," + std::to_string(r.first_frame + static_cast<int>(i)) + "," +
             md2ga::format_double(r.per_frame_mpjpe[i]) + "\n";
  return csv;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_schedule(int t_p, int t_f, int k, const std::string& mode) {
  auto s = md2ga::compute_horizons(t_p, t_f, k, md2ga::parse_mode(mode));
  std::cout << "k,length,future_frames\n";
  for (int i = 1; i <= s.num_decoders; ++i) {
    const int future = s.cover_end(i) - std::max(s.cover_begin(i) - 1, s.t_p);
    std::cout << i << "," << s.lengths[static_cast<size_t>(i - 1)] << "," << future
              << "\n";
  }
  return 0;
}

int cmd_gen_data(const CliConfig& cfg, const std::string& out_flag) {
  RunContext run("gen-data", out_flag);
  auto dc = cfg.data;
  dc.seed = cfg.seed;
  auto ds = md2ga::gen_synthetic(dc);
  const fs::path path = run.dir() / "data.csv";
  md2ga::save_csv(ds, path, config_to_json(cfg)["data"]);
  run.note_file("data_csv", path);
  run.note_file("data_manifest", path.string() + ".json");
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

int cmd_train(CliConfig cfg, const std::string& data_path, const std::string& out_flag) {
  RunContext run("train", out_flag);
  auto ds = load_or_generate(cfg, data_path);
  auto [train_set, val_set, test_set] =
      md2ga::split(ds, cfg.split_train, cfg.split_val, cfg.split_test, cfg.seed);
  apply_dataset_shape(cfg.train, ds);
  cfg.train.seed = cfg.seed;
  auto result = md2ga::train(cfg.train, train_set, val_set);
  run.set_schedule(result.model.schedule);

  run.add_artifact("history", "history.csv", md2ga::history_csv(result.history));
  const fs::path ckpt = run.dir() / "checkpoint.json";
  md2ga::save_checkpoint(result.model, ckpt);
  run.note_file("checkpoint", ckpt);
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

int cmd_eval(const CliConfig& cfg, const std::string& ckpt_path,
             const std::string& data_path, const std::string& out_flag) {
  RunContext run("eval", out_flag);
  auto model = md2ga::load_checkpoint(ckpt_path);
  auto ds = md2ga::load_csv(data_path);
  run.set_schedule(model.schedule);

  const auto kind = (cfg.train.no_ga || !model.params.has_gate)
                        ? md2ga::AttentionKind::Uniform
                        : md2ga::AttentionKind::Learned;
  std::vector<md2ga::EvalReport> reports;
  reports.push_back(evaluate(model, ds, md2ga::EvalMode::Blended, kind));
  const int k_last = model.schedule.num_decoders;
  if (model.schedule.cover_begin(k_last) <= model.config.t_p + 1 &&
      model.schedule.cover_end(k_last) == model.config.t_p + model.config.t_f)
    reports.push_back(evaluate(model, ds, md2ga::EvalMode::LastDecoderOnly, kind));
  reports.push_back(md2ga::zero_velocity_report(ds));
  for (const auto& r : reports) require_finite(r.per_frame_mpjpe, "eval " + r.mode);

  json full;
  for (const auto& r : reports) full["reports"].push_back(md2ga::eval_report_json(r));
  run.add_artifact("eval_summary", "eval.csv", eval_rows_csv(reports));
  run.add_artifact("eval_frames", "eval_frames.csv", eval_frames_csv(reports));
  run.add_artifact("eval_json", "eval.json", full.dump(2) + "\n");
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

int cmd_ablate(CliConfig cfg, const std::string& data_path, const std::string& out_flag) {
  RunContext run("ablate", out_flag);
  auto ds = load_or_generate(cfg, data_path);
  auto [train_set, val_set, test_set] =
      md2ga::split(ds, cfg.split_train, cfg.split_val, cfg.split_test, cfg.seed);
  apply_dataset_shape(cfg.train, ds);
  cfg.train.seed = cfg.seed;

  struct Variant {
    std::string name;
    std::function<void(md2ga::TrainConfig&)> tweak;
  };
  const std::vector<Variant> variants{
      {"full", [](md2ga::TrainConfig&) {}},
      {"single", [](md2ga::TrainConfig& t) { t.single_decoder = true; }},
      {"no_l1", [](md2ga::TrainConfig& t) { t.no_l1 = true; }},
      {"no_l2", [](md2ga::TrainConfig& t) { t.no_l2 = true; }},
      {"no_ga", [](md2ga::TrainConfig& t) { t.no_ga = true; }},
      {"full-all",
       [](md2ga::TrainConfig& t) { t.model.mode = md2ga::ScheduleMode::FullAll; }},
      {"disjoint",
       [](md2ga::TrainConfig& t) {
         t.model.mode = md2ga::ScheduleMode::DisjointSegments;
       }},
  };

  std::string csv = "variant,average_val_mpjpe\n";
  for (const auto& variant : variants) {
    md2ga::TrainConfig tc = cfg.train;
    tc.single_decoder = tc.no_l1 = tc.no_l2 = tc.no_ga = false;
    tc.model.mode = md2ga::ScheduleMode::Incremental;
    variant.tweak(tc);
    auto result = md2ga::train(tc, train_set, val_set);
    auto report = evaluate(result.model, val_set, md2ga::EvalMode::Blended,
                           tc.attention_kind());
    require_finite({report.average_mpjpe}, "ablate " + variant.name);
    csv += variant.name + "," + md2ga::format_double(report.average_mpjpe) + "\n";
    run.add_artifact(variant.name + "_history", variant.name + "_history.csv",
                     md2ga::history_csv(result.history));
  }
  auto baseline = md2ga::zero_velocity_report(val_set);
  csv += "zero-velocity," + md2ga::format_double(baseline.average_mpjpe) + "\n";

  run.add_artifact("comparison", "ablate.csv", csv);
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

int cmd_fig1(CliConfig cfg, const std::vector<int>& horizons, int num_seeds,
             const std::string& out_flag) {
  RunContext run("fig1", out_flag);
  md2ga::Fig1Config fc;
  fc.data = cfg.data;
  fc.train = cfg.train;
  fc.horizons = horizons;
  for (int i = 0; i < num_seeds; ++i)
    fc.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
  fc.val_fraction = cfg.split_val;

  auto curves = md2ga::fig1_harness(fc);
  std::string csv = "t_f,frame,mpjpe\n";
  for (const auto& curve : curves) {
    require_finite(curve.mean_per_frame, "fig1 t_f=" + std::to_string(curve.t_f));
    for (size_t t = 0; t < curve.mean_per_frame.size(); ++t)
      csv += std::to_string(curve.t_f) + "," + std::to_string(t + 1) + "," +
             md2ga::format_double(curve.mean_per_frame[t]) + "\n";
  }
  run.add_artifact("curves", "fig1.csv", csv);
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

int cmd_consistency(const CliConfig& cfg, const std::string& ckpt_path,
                    const std::string& data_path, const std::string& out_flag) {
  RunContext run("consistency", out_flag);
  auto model = md2ga::load_checkpoint(ckpt_path);
  auto ds = md2ga::load_csv(data_path);
  run.set_schedule(model.schedule);
  auto cm = md2ga::consistency_matrix(model, ds,
                                      model.params.has_gate
                                          ? md2ga::AttentionKind::Learned
                                          : md2ga::AttentionKind::Uniform);
  require_finite(cm.entries, "consistency");

  std::string csv = "decoder";
  for (int j = 1; j <= cm.num_decoders; ++j) csv += "," + std::to_string(j);
  csv += "\n";
  for (int i = 1; i <= cm.num_decoders; ++i) {
    csv += std::to_string(i);
    for (int j = 1; j <= cm.num_decoders; ++j)
      csv += "," + md2ga::format_double(cm.at(i, j));
    csv += "\n";
  }
  run.add_artifact("matrix", "consistency.csv", csv);
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

int cmd_attention(const CliConfig& cfg, const std::string& ckpt_path,
                  const std::string& data_path, const std::string& out_flag) {
  RunContext run("attention", out_flag);
  auto model = md2ga::load_checkpoint(ckpt_path);
  auto ds = md2ga::load_csv(data_path);
  if (!model.params.has_gate)
    throw std::runtime_error("attention: checkpoint has no gating network");
  run.set_schedule(model.schedule);

  // mean attention matrix per action class
  const int k_count = model.schedule.num_decoders;
  const int total = model.schedule.total_len();
  std::map<int, std::pair<std::vector<double>, int>> per_class;  // sums, count
  for (size_t i = 0; i < ds.size(); ++i) {
    auto f = forward_sequence(model, ds.history(i), md2ga::AttentionKind::Learned);
    auto& [sums, count] = per_class[ds.labels[i]];
    if (sums.empty()) sums.assign(static_cast<size_t>(k_count) * total, 0.0);
    const auto& a = f.attention.values();
    for (size_t j = 0; j < sums.size(); ++j) sums[j] += a[j];
    ++count;
  }

  std::string csv = "action,decoder,frame,attention\n";
  std::string log_csv = "action,decoder,frame,log_attention\n";
  for (auto& [label, entry] : per_class) {
    auto& [sums, count] = entry;
    for (int k = 1; k <= k_count; ++k)
      for (int t = 1; t <= total; ++t) {
        const double mean =
            sums[static_cast<size_t>(k - 1) * total + (t - 1)] / count;
        const std::string prefix = std::to_string(label) + "," + std::to_string(k) +
                                   "," + std::to_string(t) + ",";
        csv += prefix + md2ga::format_double(mean) + "\n";
        log_csv += prefix + (mean > 0.0 ? md2ga::format_double(std::log(mean)) : "") + "\n";
      }
  }
  run.add_artifact("attention", "attention.csv", csv);
  run.add_artifact("attention_log", "attention_log.csv", log_csv);
  run.finish(config_to_json(cfg), cfg.seed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-range motion prediction toolkit"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string config_path, out_flag, data_path, ckpt_path;
  std::uint64_t seed_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed_flag, "master seed (overrides config)");
    sub->add_option("--out", out_flag,
                    "output directory (default: $MD2GA_OUT/<command>)");
  };

  // schedule
  int s_tp = 10, s_tf = 10, s_k = 6;
  std::string s_mode = "incremental";
  auto* sched = app.add_subcommand("schedule", "print the horizon table as CSV");
  sched->add_option("--tp", s_tp, "history frames");
  sched->add_option("--tf", s_tf, "future frames");
  sched->add_option("--k", s_k, "decoder count");
  sched->add_option("--mode", s_mode, "incremental|full-all|disjoint");

  // flag overrides shared by data/train-owning commands
  int f_joints = 0, f_dims = 0, f_tp = 0, f_tf = 0, f_count = 0, f_classes = 0,
      f_k = 0, f_epochs = -1, f_batch = 0;
  double f_noise = -1, f_lr = 0, f_clip = -1;
  std::string f_mode, f_encoder, f_eval_mode;
  bool f_single = false, f_no_l1 = false, f_no_l2 = false, f_no_ga = false;
  auto add_data_flags = [&](CLI::App* sub) {
    sub->add_option("--joints", f_joints, "joint count");
    sub->add_option("--dims", f_dims, "spatial dimensions (2 or 3)");
    sub->add_option("--tp", f_tp, "history frames");
    sub->add_option("--tf", f_tf, "future frames");
    sub->add_option("--count", f_count, "sequence count");
    sub->add_option("--classes", f_classes, "action classes");
    sub->add_option("--noise", f_noise, "observation noise std");
  };
  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("--k", f_k, "decoder count");
    sub->add_option("--mode", f_mode, "incremental|full-all|disjoint");
    sub->add_option("--encoder", f_encoder, "gcn|mlp");
    sub->add_option("--epochs", f_epochs, "training epochs");
    sub->add_option("--lr", f_lr, "learning rate");
    sub->add_option("--batch-size", f_batch, "minibatch size");
    sub->add_option("--clip-norm", f_clip, "global gradient-norm clip (0 = off)");
    sub->add_option("--eval-mode", f_eval_mode, "blended|last_decoder_only");
    sub->add_flag("--single-decoder", f_single, "sole-decoder baseline");
    sub->add_flag("--no-l1", f_no_l1, "drop the blended-prediction loss term");
    sub->add_flag("--no-l2", f_no_l2, "drop the per-decoder loss term");
    sub->add_flag("--no-ga", f_no_ga, "replace gating with uniform attention");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen);
  add_data_flags(gen);

  auto* tr = app.add_subcommand("train", "train a model and write history + checkpoint");
  add_common(tr);
  add_data_flags(tr);
  add_train_flags(tr);
  tr->add_option("--data", data_path, "dataset CSV (generated from config if absent)");

  auto* ev = app.add_subcommand("eval", "score a checkpoint on a dataset");
  add_common(ev);
  ev->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  ev->add_option("--data", data_path, "dataset CSV")->required();
  ev->add_flag("--no-ga", f_no_ga, "force uniform attention at evaluation");

  auto* ab = app.add_subcommand("ablate", "run the 8-variant comparison grid");
  add_common(ab);
  add_data_flags(ab);
  add_train_flags(ab);
  ab->add_option("--data", data_path, "dataset CSV (generated from config if absent)");

  std::vector<int> horizons{2, 5, 10};
  int num_seeds = 3;
  auto* f1 = app.add_subcommand("fig1", "per-frame error curves across horizons");
  add_common(f1);
  add_data_flags(f1);
  add_train_flags(f1);
  f1->add_option("--horizons", horizons, "future-length grid");
  f1->add_option("--num-seeds", num_seeds, "seeds per setting");

  auto* co = app.add_subcommand("consistency", "pairwise decoder agreement matrix");
  add_common(co);
  co->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  co->add_option("--data", data_path, "dataset CSV")->required();

  auto* at = app.add_subcommand("attention", "per-action mean attention matrices");
  add_common(at);
  at->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  at->add_option("--data", data_path, "dataset CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sched->parsed()) return cmd_schedule(s_tp, s_tf, s_k, s_mode);

    if (!config_path.empty())
      overlay_config(cfg, json::parse(md2ga::read_file(config_path)));
    if (seed_flag != 0) cfg.seed = seed_flag;
    if (f_joints > 0) cfg.data.joints = f_joints;
    if (f_dims > 0) cfg.data.dims = f_dims;
    if (f_tp > 0) cfg.data.t_p = f_tp;
    if (f_tf > 0) cfg.data.t_f = f_tf;
    if (f_count > 0) cfg.data.count = f_count;
    if (f_classes > 0) cfg.data.num_classes = f_classes;
    if (f_noise >= 0) cfg.data.noise_std = f_noise;
    if (f_k > 0) cfg.train.model.num_decoders = f_k;
    if (!f_mode.empty()) cfg.train.model.mode = md2ga::parse_mode(f_mode);
    if (!f_encoder.empty()) cfg.train.model.encoder = md2ga::parse_encoder(f_encoder);
    if (f_epochs >= 0) cfg.train.epochs = f_epochs;
    if (f_lr > 0) cfg.train.lr = f_lr;
    if (f_batch > 0) cfg.train.batch_size = f_batch;
    if (f_clip >= 0) cfg.train.clip_norm = f_clip;
    if (!f_eval_mode.empty()) cfg.train.eval_mode = md2ga::parse_eval_mode(f_eval_mode);
    if (f_single) cfg.train.single_decoder = true;
    if (f_no_l1) cfg.train.no_l1 = true;
    if (f_no_l2) cfg.train.no_l2 = true;
    if (f_no_ga) cfg.train.no_ga = true;

    if (gen->parsed()) return cmd_gen_data(cfg, out_flag);
    if (tr->parsed()) return cmd_train(cfg, data_path, out_flag);
    if (ev->parsed()) return cmd_eval(cfg, ckpt_path, data_path, out_flag);
    if (ab->parsed()) return cmd_ablate(cfg, data_path, out_flag);
    if (f1->parsed()) return cmd_fig1(cfg, horizons, num_seeds, out_flag);
    if (co->parsed()) return cmd_consistency(cfg, ckpt_path, data_path, out_flag);
    if (at->parsed()) return cmd_attention(cfg, ckpt_path, data_path, out_flag);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
