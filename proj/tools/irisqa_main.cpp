// irisqa command-line driver: synth -> label -> factors -> train -> predict
// -> eval -> report.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 I/O, 4 numeric failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "irisqa/irisqa.hpp"

namespace fs = std::filesystem;
using namespace irisqa;

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_f(double v, int prec = 4) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

/// Relative output paths may be redirected by IRISQA_OUT_DIR.
fs::path resolve_out(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  if (const char* base = std::getenv("IRISQA_OUT_DIR")) return fs::path(base) / p;
  return p;
}

/// Keeps record-relative paths valid when a manifest is written to a
/// different directory: each relative path is re-expressed relative to the
/// new manifest location. Absolute paths pass through untouched.
void rebase_paths(std::vector<SampleRecord>& records, const fs::path& from_manifest,
                  const fs::path& to_manifest) {
  const fs::path from_dir = fs::weakly_canonical(from_manifest).parent_path();
  const fs::path to_dir = fs::weakly_canonical(to_manifest).parent_path();
  if (from_dir == to_dir) return;
  auto rebase = [&](std::string& path) {
    if (fs::path(path).is_absolute()) return;
    path = fs::relative(from_dir / path, to_dir).generic_string();
  };
  for (SampleRecord& r : records) {
    rebase(r.image_path);
    rebase(r.occlusion_path);
  }
}

nlohmann::json load_json_config(const std::string& path) {
  if (!fs::exists(path)) throw IoError("no such config file: " + path);
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

void print_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cout << "[irisqa " << cmd << "] resolved config:\n";
  for (const auto& [k, v] : kv) std::cout << "  " << k << " = " << v << "\n";
}

// --- quality field selection -------------------------------------------------

const std::vector<std::string> kFactorFields = {"sharpness", "iris_size", "dilation",
                                                "gray_level_spread", "usable_area"};

bool is_factor_field(const std::string& f) {
  for (const std::string& k : kFactorFields)
    if (k == f) return true;
  return false;
}

void check_field_name(const std::string& f) {
  if (f == "dfs_label" || f == "predicted_quality" || is_factor_field(f)) return;
  throw ValidationError("unknown quality field: " + f +
                        " (expected dfs_label, predicted_quality, or a factor name)");
}

std::map<std::string, FactorReport> compute_factor_table(const std::vector<SampleRecord>& records,
                                                         const fs::path& manifest_path,
                                                         int threads) {
  std::vector<FactorReport> reports(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const SampleRecord& r = records[i];
    const GrayImage image = read_image(resolve_against(manifest_path, r.image_path));
    const OcclusionMask mask = read_mask(resolve_against(manifest_path, r.occlusion_path));
    reports[i] = factor_report(image, r.geometry, mask);
  });
  std::map<std::string, FactorReport> table;
  for (std::size_t i = 0; i < records.size(); ++i) table[records[i].sample_id] = reports[i];
  return table;
}

double factor_value(const FactorReport& r, const std::string& field) {
  if (field == "sharpness") return r.sharpness;
  if (field == "iris_size") return r.iris_size;
  if (field == "dilation") return r.dilation;
  if (field == "gray_level_spread") return r.gray_level_spread;
  return r.usable_area;
}

std::function<double(const SampleRecord&)> make_quality_getter(
    const std::string& field, const std::map<std::string, FactorReport>* factors) {
  if (field == "dfs_label")
    return [](const SampleRecord& r) {
      if (!r.dfs_label) throw ValidationError("record " + r.sample_id + " has no dfs_label");
      return *r.dfs_label;
    };
  if (field == "predicted_quality")
    return [](const SampleRecord& r) {
      if (!r.predicted_quality)
        throw ValidationError("record " + r.sample_id + " has no predicted_quality");
      return *r.predicted_quality;
    };
  return [field, factors](const SampleRecord& r) {
    return factor_value(factors->at(r.sample_id), field);
  };
}

// --- subcommands --------------------------------------------------------------

struct CommonArgs {
  std::string manifest;
  std::string out;
  int threads = 1;
};

int cmd_synth(const std::string& config_path, const std::string& out,
              std::optional<std::uint64_t> seed) {
  SynthConfig config = SynthConfig::sized(128, 96);
  if (!config_path.empty()) config = load_json_config(config_path).get<SynthConfig>();
  if (seed) config.seed = *seed;
  config.validate();
  const fs::path out_dir = resolve_out(out);
  print_config("synth", {{"config", config_path.empty() ? "<default>" : config_path},
                         {"out", out_dir.string()},
                         {"seed", std::to_string(config.seed)},
                         {"n_classes", std::to_string(config.n_classes)},
                         {"samples_per_class", std::to_string(config.samples_per_class)},
                         {"image_size", std::to_string(config.width) + "x" + std::to_string(config.height)},
                         {"embedding_dim", std::to_string(config.embedding_dim)}});
  const std::vector<SampleRecord> records = gen_dataset(config, out_dir);
  std::cout << "wrote " << records.size() << " samples to " << out_dir.string() << "\n";
  return 0;
}

int cmd_label(const std::string& manifest, const std::string& out) {
  const fs::path out_path = resolve_out(out);
  print_config("label", {{"manifest", manifest}, {"out", out_path.string()}});
  const std::vector<SampleRecord> records = load_manifest(manifest);
  LabeledDataset labeled = build_labels(records);
  rebase_paths(labeled.records, manifest, out_path);
  save_manifest(labeled.records, out_path);
  std::cout << "labeled " << labeled.records.size() << " records ("
            << labeled.enrollment_index.size() << " classes)\n";
  return 0;
}

int cmd_factors(const CommonArgs& args) {
  const fs::path out_path = resolve_out(args.out);
  print_config("factors", {{"manifest", args.manifest},
                           {"out", out_path.string()},
                           {"threads", std::to_string(args.threads)}});
  const std::vector<SampleRecord> records = load_manifest(args.manifest);
  const auto table = compute_factor_table(records, args.manifest, args.threads);
  std::ostringstream csv;
  csv << "sample_id,sharpness,iris_size,dilation,gray_level_spread,usable_area\n";
  for (const SampleRecord& r : records) {
    const FactorReport& f = table.at(r.sample_id);
    csv << r.sample_id << "," << fmt_g(f.sharpness) << "," << fmt_g(f.iris_size) << ","
        << fmt_g(f.dilation) << "," << fmt_g(f.gray_level_spread) << ","
        << fmt_g(f.usable_area) << "\n";
  }
  atomic_write_file(out_path, csv.str());
  std::cout << "wrote factor table for " << records.size() << " samples\n";
  return 0;
}

int cmd_train(const std::string& manifest, const std::string& config_path,
              const std::string& out_checkpoint, std::string out_log,
              std::optional<std::uint64_t> seed) {
  TrainConfig config;
  if (!config_path.empty()) config = load_json_config(config_path).get<TrainConfig>();
  if (seed) config.seed = *seed;
  config.validate();
  const fs::path ckpt_path = resolve_out(out_checkpoint);
  if (out_log.empty()) out_log = out_checkpoint + ".log.csv";
  const fs::path log_path = resolve_out(out_log);
  print_config("train", {{"manifest", manifest},
                         {"config", config_path.empty() ? "<default>" : config_path},
                         {"out_checkpoint", ckpt_path.string()},
                         {"out_log", log_path.string()},
                         {"epochs", std::to_string(config.epochs)},
                         {"batch_size", std::to_string(config.batch_size)},
                         {"lr0", fmt_g(config.lr0)},
                         {"lambda0", fmt_g(config.lambda0)},
                         {"channels", std::to_string(config.model.c1) + "," +
                                          std::to_string(config.model.c2) + "," +
                                          std::to_string(config.model.c3)},
                         {"seed", std::to_string(config.seed)}});
  const std::vector<SampleRecord> records = load_manifest(manifest);
  const std::vector<TrainSample> samples = make_train_samples(records, manifest);
  const TrainResult result = train(samples, config);

  save_checkpoint(result.params, ckpt_path);
  std::ostringstream csv;
  csv << "epoch,lambda,lr,loss,mask_loss,dfs_loss\n";
  for (const EpochLog& e : result.log)
    csv << e.epoch << "," << fmt_g(e.lambda) << "," << fmt_g(e.lr) << "," << fmt_g(e.loss) << ","
        << fmt_g(e.mask_loss) << "," << fmt_g(e.dfs_loss) << "\n";
  atomic_write_file(log_path, csv.str());
  std::cout << "trained " << result.params.param_count() << " parameters for " << config.epochs
            << " epochs; final loss " << fmt_g(result.log.back().loss) << "\n";
  return 0;
}

int cmd_predict(const std::string& manifest, const std::string& checkpoint,
                const std::string& out, int threads) {
  const fs::path out_path = resolve_out(out);
  print_config("predict", {{"manifest", manifest},
                           {"checkpoint", checkpoint},
                           {"out", out_path.string()},
                           {"threads", std::to_string(threads)}});
  const ModelParams params = load_checkpoint(checkpoint);
  std::vector<SampleRecord> records = load_manifest(manifest);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const GrayImage image = read_image(resolve_against(manifest, records[i].image_path));
    predict(params, image, records[i]);
  });
  rebase_paths(records, manifest, out_path);
  save_manifest(records, out_path);
  std::cout << "predicted quality for " << records.size() << " records\n";
  return 0;
}

std::string curve_to_csv(const IrrEerCurve& curve) {
  std::ostringstream csv;
  csv << "irr,eer,threshold\n";
  for (const CurvePoint& p : curve.points)
    csv << fmt_g(p.irr) << "," << fmt_g(p.eer) << "," << fmt_g(p.threshold) << "\n";
  if (curve.truncated) csv << "# " << curve.note << "\n";
  return csv.str();
}

int cmd_eval(const CommonArgs& args, const std::string& field, int steps) {
  check_field_name(field);
  const fs::path out_path = resolve_out(args.out);
  print_config("eval", {{"manifest", args.manifest},
                        {"quality_field", field},
                        {"steps", std::to_string(steps)},
                        {"out", out_path.string()},
                        {"threads", std::to_string(args.threads)}});
  const std::vector<SampleRecord> records = load_manifest(args.manifest);
  std::map<std::string, FactorReport> factors;
  if (is_factor_field(field))
    factors = compute_factor_table(records, args.manifest, args.threads);
  const IrrEerCurve curve = irr_eer_curve(records, make_quality_getter(field, &factors), steps);
  atomic_write_file(out_path, curve_to_csv(curve));
  std::cout << "wrote " << curve.points.size() << " curve points";
  if (curve.truncated) std::cout << " (" << curve.note << ")";
  std::cout << "\n";
  return 0;
}

const CurvePoint* nearest_not_exceeding(const IrrEerCurve& curve, double irr_target) {
  const CurvePoint* best = nullptr;
  for (const CurvePoint& p : curve.points)
    if (p.irr <= irr_target + 1e-12) best = &p;
  return best;
}

int cmd_report(const CommonArgs& args, std::vector<std::string> fields,
               const std::string& train_manifest, int steps) {
  const fs::path out_path = resolve_out(args.out);
  const std::vector<SampleRecord> records = load_manifest(args.manifest);

  if (fields.empty()) {
    bool has_pred = true;
    for (const SampleRecord& r : records) has_pred = has_pred && r.predicted_quality.has_value();
    if (has_pred) fields.push_back("predicted_quality");
    fields.insert(fields.end(), kFactorFields.begin(), kFactorFields.end());
  }
  for (const std::string& f : fields) check_field_name(f);

  std::string mu_source = train_manifest.empty() ? args.manifest : train_manifest;
  std::ostringstream fields_joined;
  for (std::size_t i = 0; i < fields.size(); ++i) fields_joined << (i ? "," : "") << fields[i];
  print_config("report", {{"manifest", args.manifest},
                          {"quality_fields", fields_joined.str()},
                          {"train_manifest", mu_source},
                          {"steps", std::to_string(steps)},
                          {"out", out_path.string()},
                          {"threads", std::to_string(args.threads)}});

  bool need_factors = false;
  for (const std::string& f : fields) need_factors = need_factors || is_factor_field(f);
  std::map<std::string, FactorReport> factors;
  if (need_factors) factors = compute_factor_table(records, args.manifest, args.threads);

  // band-gating centers come from the training split
  std::map<std::string, double> mu;
  if (need_factors) {
    std::vector<SampleRecord> train_records =
        mu_source == args.manifest ? records : load_manifest(mu_source);
    const auto train_factors = mu_source == args.manifest
                                   ? factors
                                   : compute_factor_table(train_records, mu_source, args.threads);
    for (const std::string& f : fields) {
      if (!is_factor_field(f)) continue;
      double sum = 0.0;
      for (const SampleRecord& r : train_records) sum += factor_value(train_factors.at(r.sample_id), f);
      mu[f] = sum / static_cast<double>(train_records.size());
    }
  }

  const std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 0.95};
  std::ostringstream csv;
  std::ostringstream human;

  csv << "# correlation_vs_dfs\nfield,lcc,srocc,mse\n";
  human << "Correlation against the DFS label\n";
  char line[256];
  std::snprintf(line, sizeof(line), "  %-20s %9s %9s %12s\n", "field", "LCC", "SROCC", "MSE");
  human << line;
  std::vector<std::pair<std::string, CorrelationReport>> correlations;
  for (const std::string& f : fields) {
    const CorrelationReport rep = correlation_report(records, make_quality_getter(f, &factors));
    correlations.emplace_back(f, rep);
    csv << f << "," << fmt_g(rep.lcc) << "," << fmt_g(rep.srocc) << "," << fmt_g(rep.mse) << "\n";
    std::snprintf(line, sizeof(line), "  %-20s %9.4f %9.4f %12.6g\n", f.c_str(), rep.lcc,
                  rep.srocc, rep.mse);
    human << line;
  }

  csv << "# eer_at_irr\nfield,gating,irr_target,irr_actual,eer,threshold\n";
  human << "\nEER at IRR grid (nearest point not exceeding each target)\n";
  std::snprintf(line, sizeof(line), "  %-20s %8s %8s %8s %8s %8s\n", "field", "0", "0.25", "0.5",
                "0.75", "0.95");
  human << line;
  for (const std::string& f : fields) {
    const bool band = is_factor_field(f);
    const VerificationSet vset = build_verification_set(records, make_quality_getter(f, &factors));
    const IrrEerCurve curve =
        band ? band_irr_eer_curve(vset, mu.at(f), steps) : irr_eer_curve(vset, steps);
    std::string row = "  ";
    std::snprintf(line, sizeof(line), "%-20s ", f.c_str());
    row += line;
    for (double target : grid) {
      const CurvePoint* p = nearest_not_exceeding(curve, target);
      csv << f << "," << (band ? "band" : "threshold") << "," << fmt_g(target) << ",";
      if (p) {
        csv << fmt_g(p->irr) << "," << fmt_g(p->eer) << "," << fmt_g(p->threshold) << "\n";
        std::snprintf(line, sizeof(line), "%8s ", fmt_f(p->eer).c_str());
      } else {
        csv << ",,\n";
        std::snprintf(line, sizeof(line), "%8s ", "-");
      }
      row += line;
    }
    human << row << "\n";
  }

  atomic_write_file(out_path, csv.str());
  std::cout << human.str();
  std::cout << "wrote report to " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recognition-oriented iris image quality assessment toolkit"};
  app.set_version_flag("--version", std::string("irisqa ") + kVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic dataset");
  std::string synth_config, synth_out = "dataset";
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--config", synth_config, "SynthConfig JSON file");
  synth->add_option("--out", synth_out, "Output dataset directory");
  synth->add_option("--seed", synth_seed, "Override the config seed");

  // label
  auto* label = app.add_subcommand("label", "Populate dfs_label from embeddings");
  std::string label_manifest, label_out;
  label->add_option("--manifest", label_manifest, "Input manifest")->required();
  label->add_option("--out", label_out, "Output manifest")->required();

  // factors
  auto* factors_cmd = app.add_subcommand("factors", "Compute hand-crafted quality factors");
  CommonArgs factors_args;
  factors_cmd->add_option("--manifest", factors_args.manifest, "Input manifest")->required();
  factors_cmd->add_option("--out", factors_args.out, "Output CSV")->required();
  factors_cmd->add_option("--threads", factors_args.threads, "Worker threads (default 1)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the DFS predictor");
  std::string train_manifest, train_config, train_ckpt, train_log;
  std::optional<std::uint64_t> train_seed;
  train_cmd->add_option("--manifest", train_manifest, "Labeled manifest")->required();
  train_cmd->add_option("--config", train_config, "TrainConfig JSON file");
  train_cmd->add_option("--out-checkpoint", train_ckpt, "Checkpoint path")->required();
  train_cmd->add_option("--out-log", train_log, "Loss log CSV (default <checkpoint>.log.csv)");
  train_cmd->add_option("--seed", train_seed, "Override the config seed");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict quality with a trained model");
  std::string pred_manifest, pred_ckpt, pred_out;
  int pred_threads = 1;
  predict_cmd->add_option("--manifest", pred_manifest, "Input manifest")->required();
  predict_cmd->add_option("--checkpoint", pred_ckpt, "Model checkpoint")->required();
  predict_cmd->add_option("--out", pred_out, "Output manifest")->required();
  predict_cmd->add_option("--threads", pred_threads, "Worker threads (default 1)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Emit the IRR-EER curve for a quality field");
  CommonArgs eval_args;
  std::string eval_field = "dfs_label";
  int eval_steps = 20;
  eval_cmd->add_option("--manifest", eval_args.manifest, "Labeled manifest")->required();
  eval_cmd->add_option("--quality-field", eval_field,
                       "dfs_label, predicted_quality, or a factor name");
  eval_cmd->add_option("--steps", eval_steps, "Curve resolution (default 20)");
  eval_cmd->add_option("--out", eval_args.out, "Output CSV")->required();
  eval_cmd->add_option("--threads", eval_args.threads, "Worker threads (default 1)");

  // report
  auto* report_cmd = app.add_subcommand("report", "Correlation table and EER@IRR grid");
  CommonArgs report_args;
  std::vector<std::string> report_fields;
  std::string report_train_manifest;
  int report_steps = 100;
  report_cmd->add_option("--manifest", report_args.manifest, "Labeled manifest")->required();
  report_cmd->add_option("--quality-fields", report_fields,
                         "Comma-separated quality fields (default: all available)")
      ->delimiter(',');
  report_cmd->add_option("--train-manifest", report_train_manifest,
                         "Manifest supplying band-gating centers (default: --manifest)");
  report_cmd->add_option("--steps", report_steps, "Curve resolution (default 100)");
  report_cmd->add_option("--out", report_args.out, "Output report CSV")->required();
  report_cmd->add_option("--threads", report_args.threads, "Worker threads (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (app.got_subcommand(synth)) return cmd_synth(synth_config, synth_out, synth_seed);
    if (app.got_subcommand(label)) return cmd_label(label_manifest, label_out);
    if (app.got_subcommand(factors_cmd)) return cmd_factors(factors_args);
    if (app.got_subcommand(train_cmd))
      return cmd_train(train_manifest, train_config, train_ckpt, train_log, train_seed);
    if (app.got_subcommand(predict_cmd))
      return cmd_predict(pred_manifest, pred_ckpt, pred_out, pred_threads);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_args, eval_field, eval_steps);
    if (app.got_subcommand(report_cmd))
      return cmd_report(report_args, report_fields, report_train_manifest, report_steps);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
