// wgtune: workgroup-size autotuning for stencil kernels against a simulated
// runtime. Subcommands: generate, collect, evaluate, train, serve.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wgtune/bench.hpp"
#include "wgtune/datastore.hpp"
#include "wgtune/errors.hpp"
#include "wgtune/learn.hpp"
#include "wgtune/serve.hpp"
#include "wgtune/simoracle.hpp"
#include "wgtune/synthgen.hpp"

namespace fs = std::filesystem;
using namespace wgtune;

namespace {

struct ScenarioFilter {
  std::vector<std::string> devices;
  std::vector<std::string> kernels;
  std::vector<std::string> datasets;
  int limit = 0;

  bool keep(const Scenario& s) const {
    auto match = [](const std::vector<std::string>& names, const std::string& value) {
      if (names.empty()) return true;
      for (const auto& n : names) {
        if (n == value) return true;
      }
      return false;
    };
    std::string ds = std::to_string(s.dataset.width) + "x" + std::to_string(s.dataset.height) +
                     "-" + std::string(to_string(s.dataset.in_type)) + "-" +
                     std::string(to_string(s.dataset.out_type));
    return match(devices, s.device.id) && match(kernels, s.kernel.name) && match(datasets, ds);
  }
};

std::vector<Scenario> filtered_scenarios(const DescriptorSet& set, const ScenarioFilter& f) {
  std::vector<Scenario> all = cross_scenarios(set);
  std::vector<Scenario> out;
  for (const auto& s : all) {
    if (f.keep(s)) out.push_back(s);
  }
  if (f.limit > 0 && static_cast<int>(out.size()) > f.limit) {
    out.resize(static_cast<std::size_t>(f.limit));
  }
  return out;
}

void add_filter_flags(CLI::App* cmd, ScenarioFilter& filter) {
  cmd->add_option("--device", filter.devices, "restrict to these device ids");
  cmd->add_option("--kernel", filter.kernels, "restrict to these kernel names");
  cmd->add_option("--dataset", filter.datasets,
                  "restrict to these datasets (<w>x<h>-<in>-<out>)");
  cmd->add_option("--limit", filter.limit, "cap the scenario count (after filtering)");
}

EvalData load_eval_data(const fs::path& scenario_dir, const fs::path& samples_path,
                        const fs::path& refused_path, const OracleConfig& cfg,
                        const ScenarioFilter& filter) {
  auto scenarios = filtered_scenarios(load_descriptors(scenario_dir), filter);
  SampleTable table = load_samples(samples_path);
  RefusedRecord refused;
  if (!refused_path.empty()) refused = load_refused(refused_path);

  // Keep only scenarios that actually have data; evaluation covers those.
  std::vector<Scenario> with_data;
  for (auto& s : scenarios) {
    if (table.has_scenario(s.id)) with_data.push_back(std::move(s));
  }
  if (with_data.empty()) {
    throw InvalidArgument("no scenario in " + scenario_dir.string() + " has samples in " +
                          samples_path.string());
  }
  return assemble_eval_data(with_data, std::move(table), refused, cfg);
}

int cmd_generate(int kernels, std::uint64_t seed, const fs::path& out_dir, bool reference,
                 int gaussian_border) {
  DescriptorSet set;
  set.devices = reference_devices();
  set.kernels = generate_kernels(kernels, seed);
  if (reference) {
    auto real = reference_kernels(gaussian_border);
    set.kernels.insert(set.kernels.end(), real.begin(), real.end());
  }
  set.datasets = generate_datasets();
  save_descriptors(set, out_dir);
  std::cout << "wrote " << set.devices.size() << " devices, " << set.kernels.size()
            << " kernels, " << set.datasets.size() << " datasets under " << out_dir.string()
            << "\n";
  return 0;
}

int cmd_collect(const fs::path& scenario_dir, const fs::path& out_path,
                const fs::path& refused_path, const OracleConfig& cfg,
                const ScenarioFilter& filter) {
  auto scenarios = filtered_scenarios(load_descriptors(scenario_dir), filter);
  if (scenarios.empty()) {
    throw InvalidArgument("no scenarios match the filters");
  }
  CollectResult result = collect(scenarios, cfg);
  save_samples(result.table, out_path);
  if (!refused_path.empty()) save_refused(result.refused, refused_path);
  std::size_t refused_count = 0;
  for (const auto& [_, sizes] : result.refused) refused_count += sizes.size();
  std::cout << "collected " << result.table.row_count() << " test cases over "
            << scenarios.size() << " scenarios (" << refused_count << " refused sizes)\n";
  return 0;
}

int cmd_evaluate(const fs::path& scenario_dir, const fs::path& samples_path,
                 const fs::path& refused_path, const std::string& technique_id,
                 const std::string& partition, int kfold_k, std::uint64_t seed,
                 const fs::path& metrics_path, const OracleConfig& cfg,
                 const ScenarioFilter& filter, const std::string& pin_baseline,
                 bool human_expert) {
  EvalData data = load_eval_data(scenario_dir, samples_path, refused_path, cfg, filter);

  std::vector<Scenario> scenarios;
  std::vector<std::string> ids;
  for (const auto& [id, s] : data.scenarios) {
    scenarios.push_back(s);
    ids.push_back(id);
  }

  std::vector<Partition> partitions;
  if (partition == "kfold") {
    partitions = partition_kfold(ids, kfold_k, seed);
  } else if (partition == "synthreal") {
    partitions.push_back(partition_synthetic_real(scenarios));
  } else if (partition == "loo-device") {
    partitions = partition_leave_one_out(scenarios, LeaveOneOutDimension::Device);
  } else if (partition == "loo-kernel") {
    partitions = partition_leave_one_out(scenarios, LeaveOneOutDimension::Kernel);
  } else if (partition == "loo-dataset") {
    partitions = partition_leave_one_out(scenarios, LeaveOneOutDimension::Dataset);
  } else {
    throw InvalidArgument("unknown partition '" + partition + "'");
  }

  EvalOptions options;
  if (!pin_baseline.empty()) options.pinned_baseline = WorkgroupSize::parse(pin_baseline);

  std::vector<EvalRecord> records;
  for (const auto& [train, test] : partitions) {
    auto technique = make_technique(technique_id);
    auto fold = evaluate(*technique, train, test, data, seed, options);
    records.insert(records.end(), fold.begin(), fold.end());
  }

  auto rows = rows_of(records);
  std::cout << format_report(summarize(rows));
  if (human_expert) {
    std::cout << "\nversus human expert w(32x4), where legal:\n"
              << format_report(human_expert_summary(records, data));
  }
  if (!metrics_path.empty()) {
    write_metrics_csv(rows, metrics_path);
    std::cout << "\nwrote " << rows.size() << " metric rows to " << metrics_path.string()
              << "\n";
  }
  return 0;
}

int cmd_train(const fs::path& scenario_dir, const fs::path& samples_path,
              const fs::path& refused_path, const std::string& technique_id,
              std::uint64_t seed, const fs::path& model_path, const OracleConfig& cfg,
              const ScenarioFilter& filter) {
  EvalData data = load_eval_data(scenario_dir, samples_path, refused_path, cfg, filter);
  std::vector<std::string> train_ids;
  for (const auto& [id, _] : data.scenarios) train_ids.push_back(id);

  TunerBundle bundle;
  bundle.seed = seed;
  for (const auto& [id, ctx] : data.contexts) {
    bundle.prior_refused.insert(ctx.refused().begin(), ctx.refused().end());
  }

  if (technique_id == "runtime-reg" || technique_id == "speedup-reg") {
    RegressionMode mode = technique_id == "runtime-reg" ? RegressionMode::Runtime
                                                        : RegressionMode::Speedup;
    RegressionDataset dataset;
    dataset.mode = mode;
    WorkgroupSize base;
    if (mode == RegressionMode::Speedup) {
      std::vector<ConstraintContext> contexts;
      int max_eff = 0;
      for (const auto& [_, ctx] : data.contexts) {
        contexts.push_back(ctx);
        max_eff = std::max(max_eff, ctx.effective_max());
      }
      base = baseline_param(train_ids, data.table,
                            safe_set(contexts, enumerate_space(max_eff)));
    }
    for (const auto& id : train_ids) {
      FeatureVector f = extract(data.scenarios.at(id));
      for (const auto& [w, _] : data.table.scenario_rows(id)) {
        double target = mode == RegressionMode::Runtime
                            ? data.table.mean_runtime(id, w)
                            : speedup(id, w, base, data.table);
        dataset.rows.push_back({f, w, target});
      }
    }
    bundle.kind = TunerBundle::Kind::Regressor;
    bundle.regressor = train_regressor(dataset, seed);
  } else {
    auto dash = technique_id.find('-');
    if (dash == std::string::npos) {
      throw InvalidArgument("unknown technique '" + technique_id + "'");
    }
    std::string algo_name = technique_id.substr(0, dash);
    ClassifierAlgo algo = algo_name == "zeror"    ? ClassifierAlgo::ZeroR
                          : algo_name == "nb"     ? ClassifierAlgo::NaiveBayes
                          : algo_name == "tree"   ? ClassifierAlgo::DecisionTree
                          : algo_name == "forest" ? ClassifierAlgo::RandomForest
                                                  : throw InvalidArgument(
                                                        "unknown technique '" + technique_id +
                                                        "'");
    LabelledDataset labelled;
    for (const auto& id : train_ids) {
      labelled.features.push_back(extract(data.scenarios.at(id)));
      labelled.labels.push_back(oracle(id, data.table));
    }
    bundle.kind = TunerBundle::Kind::Classifier;
    bundle.fallback = fallback_kind_from_string(technique_id.substr(dash + 1));
    bundle.classifier = train_classifier(algo, labelled, seed);
    if (bundle.fallback == FallbackKind::Baseline) {
      std::vector<ConstraintContext> contexts;
      int max_eff = 0;
      for (const auto& [_, ctx] : data.contexts) {
        contexts.push_back(ctx);
        max_eff = std::max(max_eff, ctx.effective_max());
      }
      bundle.baseline_ranking = baseline_ranking(
          train_ids, data.table, safe_set(contexts, enumerate_space(max_eff)));
    }
  }

  std::ofstream out(model_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + model_path.string());
  }
  out << bundle.to_json().dump() << "\n";
  std::cout << "trained " << technique_id << " on " << train_ids.size()
            << " scenarios; model written to " << model_path.string() << "\n";
  return 0;
}

PredictionServer* g_server = nullptr;

int cmd_serve(const fs::path& model_path, std::uint16_t port) {
  std::ifstream in(model_path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open model " + model_path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad model JSON: " + std::string(e.what()));
  }
  TunerBundle bundle = TunerBundle::from_json(j);

  PredictionServer server(bundle, port);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "listening on 127.0.0.1:" << server.port() << std::endl;
  server.serve_forever();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workgroup-size autotuner for stencil kernels"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "write descriptor fixtures");
  int gen_kernels = 10;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  bool gen_reference = false;
  int gaussian_border = 5;
  generate->add_option("--kernels", gen_kernels, "number of synthetic kernels")
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--out", gen_out, "output directory")->required();
  generate->add_flag("--reference", gen_reference, "also write the six real-world kernels");
  generate->add_option("--gaussian-border", gaussian_border,
                       "border size for the gaussian reference kernel (1-10)");

  // collect
  auto* collect_cmd = app.add_subcommand("collect", "enumerate the space with the simulator");
  std::string col_scenarios, col_out, col_refused;
  OracleConfig col_cfg;
  ScenarioFilter col_filter;
  collect_cmd->add_option("--scenarios", col_scenarios, "descriptor directory")->required();
  collect_cmd->add_option("--out", col_out, "samples CSV path")->required();
  collect_cmd->add_option("--refused", col_refused, "refused-sizes CSV path");
  collect_cmd->add_option("--samples", col_cfg.min_samples, "runtimes per test case")
      ->check(CLI::PositiveNumber);
  collect_cmd->add_option("--noise", col_cfg.noise_sigma, "lognormal noise sigma")
      ->check(CLI::NonNegativeNumber);
  collect_cmd->add_option("--seed", col_cfg.seed, "noise seed");
  collect_cmd->add_option("--max-wgsize", col_cfg.max_wgsize_cap,
                          "cap the effective max workgroup size");
  add_filter_flags(collect_cmd, col_filter);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "train and score a technique");
  std::string ev_scenarios, ev_samples, ev_refused, ev_technique, ev_partition = "kfold";
  std::string ev_metrics, ev_pin;
  int ev_k = 10;
  std::uint64_t ev_seed = 0;
  OracleConfig ev_cfg;
  ScenarioFilter ev_filter;
  bool ev_expert = false;
  evaluate_cmd->add_option("--scenarios", ev_scenarios, "descriptor directory")->required();
  evaluate_cmd->add_option("--samples", ev_samples, "samples CSV")->required();
  evaluate_cmd->add_option("--refused", ev_refused, "refused-sizes CSV");
  evaluate_cmd->add_option("--technique", ev_technique,
                           "one of " + [] {
                             std::string s;
                             for (const auto& id : technique_ids()) s += id + " ";
                             return s;
                           }())
      ->required();
  evaluate_cmd->add_option("--partition", ev_partition,
                           "kfold | synthreal | loo-device | loo-kernel | loo-dataset");
  evaluate_cmd->add_option("--k", ev_k, "folds for kfold");
  evaluate_cmd->add_option("--seed", ev_seed, "seed for shuffling and training");
  evaluate_cmd->add_option("--out", ev_metrics, "metrics CSV path");
  evaluate_cmd->add_option("--max-wgsize", ev_cfg.max_wgsize_cap,
                           "cap used when the samples were collected");
  evaluate_cmd->add_option("--pin-baseline", ev_pin,
                           "pin the speedup baseline to a size, e.g. 4x4");
  evaluate_cmd->add_flag("--human-expert", ev_expert, "also report speedup over w(32x4)");
  add_filter_flags(evaluate_cmd, ev_filter);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model bundle for serve");
  std::string tr_scenarios, tr_samples, tr_refused, tr_technique, tr_out;
  std::uint64_t tr_seed = 0;
  OracleConfig tr_cfg;
  ScenarioFilter tr_filter;
  train_cmd->add_option("--scenarios", tr_scenarios, "descriptor directory")->required();
  train_cmd->add_option("--samples", tr_samples, "samples CSV")->required();
  train_cmd->add_option("--refused", tr_refused, "refused-sizes CSV");
  train_cmd->add_option("--technique", tr_technique, "technique id")->required();
  train_cmd->add_option("--seed", tr_seed, "training seed");
  train_cmd->add_option("--out", tr_out, "model bundle path")->required();
  train_cmd->add_option("--max-wgsize", tr_cfg.max_wgsize_cap,
                        "cap used when the samples were collected");
  add_filter_flags(train_cmd, tr_filter);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the prediction daemon");
  std::string sv_model;
  std::uint16_t sv_port = 0;
  serve_cmd->add_option("--model", sv_model, "model bundle path")->required();
  serve_cmd->add_option("--port", sv_port, "TCP port (0 = pick a free one)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      return cmd_generate(gen_kernels, gen_seed, gen_out, gen_reference, gaussian_border);
    }
    if (*collect_cmd) {
      return cmd_collect(col_scenarios, col_out, col_refused, col_cfg, col_filter);
    }
    if (*evaluate_cmd) {
      return cmd_evaluate(ev_scenarios, ev_samples, ev_refused, ev_technique, ev_partition,
                          ev_k, ev_seed, ev_metrics, ev_cfg, ev_filter, ev_pin, ev_expert);
    }
    if (*train_cmd) {
      return cmd_train(tr_scenarios, tr_samples, tr_refused, tr_technique, tr_seed, tr_out,
                       tr_cfg, tr_filter);
    }
    if (*serve_cmd) {
      return cmd_serve(sv_model, sv_port);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
