#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacc/constraint.hpp"
#include "pacc/dataset.hpp"
#include "pacc/errors.hpp"
#include "pacc/loss.hpp"
#include "pacc/metrics.hpp"
#include "pacc/model.hpp"
#include "pacc/runconfig.hpp"
#include "pacc/solver.hpp"
#include "pacc/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void emit_error(const char* type, const std::string& message) {
  ordered_json err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cerr << err.dump() << "\n";
}

int dispatch(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const pacc::ConfigError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const pacc::SchemaError& e) {
    emit_error("schema", e.what());
    return 1;
  } catch (const pacc::DataError& e) {
    emit_error("data", e.what());
    return 1;
  } catch (const pacc::NumericError& e) {
    emit_error("numeric", e.what());
    return 2;
  } catch (const pacc::InfeasibleError& e) {
    emit_error("infeasible", e.what());
    return 2;
  } catch (const pacc::Error& e) {
    emit_error("invalid", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 2;
  }
}

struct Pipeline {
  pacc::RunConfig config;
  pacc::LoadedDataset loaded;
  pacc::SplitResult split;
  std::size_t num_classes = 0;
};

Pipeline load_pipeline(const std::string& config_path,
                       const std::vector<std::string>& overrides) {
  Pipeline p;
  p.config = pacc::load_run_config(config_path, overrides);
  p.loaded = pacc::load_dataset(p.config.dataset_path, p.config.schema);
  p.num_classes = p.loaded.meta.label_levels.size();
  p.split = pacc::stratified_split(p.loaded.samples, p.config.fractions,
                                   p.config.split_seed);
  if (p.loaded.dropped_rows > 0) {
    std::cerr << "note: dropped " << p.loaded.dropped_rows
              << " rows with missing values\n";
  }
  for (const auto& w : p.split.warnings) std::cerr << "warning: " << w << "\n";
  return p;
}

// Metrics and certification run on the test split; degenerate splits fall
// back to the training rows so smoke configs stay usable.
const pacc::SampleSet& eval_split(const Pipeline& p) {
  return p.split.test.size() > 0 ? p.split.test : p.split.train;
}

std::string format_epsilon(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eps);
  return buf;
}

pacc::CounterfactualMap sensitivity_map(const Pipeline& p) {
  std::string column = p.config.evaluation.sensitivity_column;
  if (column.empty()) {
    for (const auto& col : p.loaded.meta.columns) {
      if (col.role == pacc::ColumnRole::Protected &&
          col.type == pacc::ColumnType::Categorical) {
        column = col.name;
        break;
      }
    }
  }
  if (column.empty()) {
    throw pacc::ConfigError(
        "no protected categorical column; set evaluation.sensitivity_column");
  }
  const pacc::EncodedColumn* col = p.loaded.meta.find(column);
  if (!col) throw pacc::ConfigError("unknown sensitivity column '" + column + "'");
  if (col->type != pacc::ColumnType::Categorical) {
    throw pacc::ConfigError("sensitivity column '" + column + "' is numeric");
  }
  pacc::CounterfactualMap map;
  for (std::size_t j = 0; j < col->width; ++j) map.columns.push_back(col->offset + j);
  if (col->width <= 2) {
    map.rule = pacc::CounterfactualMap::Rule::BinarySwap;
  } else {
    map.rule = pacc::CounterfactualMap::Rule::OneHotPermute;
    for (std::size_t j = 0; j < col->width; ++j) {
      map.permutation.push_back((j + 1) % col->width);
    }
  }
  map.validate();
  return map;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pacc::ConfigError("cannot write '" + path + "'");
  out << text;
}

pacc::SavedModel load_model_for(const Pipeline& p, const std::string& model_path) {
  std::string path = model_path.empty()
                         ? p.config.outputs.path(p.config.outputs.model)
                         : model_path;
  pacc::SavedModel saved = pacc::load_model_json(path);
  if (saved.spec.input_dim != p.loaded.meta.encoded_dim()) {
    throw pacc::ConfigError("model at '" + path + "' expects " +
                            std::to_string(saved.spec.input_dim) +
                            " features, dataset encodes " +
                            std::to_string(p.loaded.meta.encoded_dim()));
  }
  return saved;
}

double mean_objective(const pacc::ModelSpec& model, const pacc::ParameterVector& params,
                      const pacc::LossSpec& objective, const pacc::SampleSet& set) {
  auto losses = pacc::loss_rows(objective, pacc::forward_batch(model, params, set.features),
                                set.labels);
  double sum = 0.0;
  for (double v : losses) sum += v;
  return sum / static_cast<double>(losses.size());
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
  Pipeline p = load_pipeline(config_path, overrides);
  pacc::Problem problem =
      pacc::build_problem(p.config, p.split.train, p.loaded.meta, p.num_classes);
  pacc::TrainResult result = pacc::train(problem, p.config.solver);

  const auto& outputs = p.config.outputs;
  if (!outputs.dir.empty()) fs::create_directories(outputs.dir);

  {
    std::ofstream trace(outputs.path(outputs.trace), std::ios::binary);
    if (!trace) throw pacc::ConfigError("cannot write '" + outputs.path(outputs.trace) + "'");
    result.report.write_csv(trace);
  }
  pacc::save_model_json(outputs.path(outputs.model), problem.model, result.params);

  const pacc::SampleSet& eval = eval_split(p);
  ordered_json metrics;
  metrics["clean_accuracy"] = pacc::accuracy(problem.model, result.params, eval);

  for (const auto& conf : p.config.constraints) {
    pacc::ConstraintSpec heldout = pacc::build_constraint(conf, eval, p.loaded.meta);
    pacc::SlackEntry entry =
        pacc::eval_slack(heldout, problem.model, result.params, p.config.solver.seed);
    metrics["slack." + conf.id] = entry.average;
  }

  bool have_protected = false;
  for (const auto& col : p.loaded.meta.columns) {
    if (col.role == pacc::ColumnRole::Protected &&
        col.type == pacc::ColumnType::Categorical) {
      have_protected = true;
    }
  }
  if (have_protected || !p.config.evaluation.sensitivity_column.empty()) {
    metrics["sensitivity_rate"] =
        pacc::sensitivity_rate(problem.model, result.params, eval, sensitivity_map(p));
  }

  if (!p.config.evaluation.attack_grid.empty()) {
    auto table = pacc::robust_accuracy_sweep(
        problem.model, result.params, eval, p.config.evaluation.attack_grid,
        p.config.evaluation.eval_attack(0.0), p.config.solver.seed, p.config.objective);
    for (const auto& point : table) {
      metrics["robust_accuracy." + format_epsilon(point.epsilon)] = point.accuracy;
    }
    std::ofstream sweep(outputs.path(outputs.sweep), std::ios::binary);
    pacc::write_robust_sweep_csv(sweep, table);
  }

  {
    std::size_t avg = 0, pw = 0;
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
      const auto& spec = problem.constraints[k];
      double l1 = 0.0;
      if (spec.kind == pacc::ConstraintKind::Average) {
        l1 = result.duals.mu[avg++];
      } else {
        const auto& lambda = result.duals.lambda[pw++];
        for (double v : lambda) l1 += v;
        l1 /= static_cast<double>(lambda.size());
      }
      metrics["dual_l1." + spec.id] = l1;
    }
  }

  std::string metrics_text = metrics.dump(2) + "\n";
  write_text(outputs.path(outputs.metrics), metrics_text);

  // Dual-variable distribution for the first (or configured) pointwise
  // constraint, over the training rows the duals index.
  {
    std::string want = p.config.evaluation.report_constraint;
    std::size_t pw = 0;
    for (std::size_t k = 0; k < problem.constraints.size(); ++k) {
      const auto& spec = problem.constraints[k];
      if (spec.kind != pacc::ConstraintKind::Pointwise) continue;
      if (want.empty() || want == spec.id) {
        auto report = pacc::dual_sensitivity_report(
            result.duals.lambda[pw], problem.train, p.loaded.meta,
            p.config.evaluation.report_quantile, p.config.evaluation.histogram_bins);
        std::ofstream hist(outputs.path(outputs.histogram), std::ios::binary);
        report.write_histogram_csv(hist);
        std::ofstream prev(outputs.path(outputs.prevalence), std::ios::binary);
        report.write_prevalence_csv(prev);
        break;
      }
      ++pw;
    }
  }

  std::cout << metrics_text;
  return 0;
}

int cmd_certify(const std::string& config_path, const std::vector<std::string>& overrides,
                const std::string& model_path, double epsilon) {
  Pipeline p = load_pipeline(config_path, overrides);
  pacc::SavedModel saved = load_model_for(p, model_path);
  const pacc::SampleSet& heldout = eval_split(p);

  std::vector<pacc::ConstraintSpec> specs;
  pacc::HeldoutData data;
  data.objective = heldout;
  for (const auto& conf : p.config.constraints) {
    specs.push_back(pacc::build_constraint(conf, p.split.train, p.loaded.meta));
    data.per_constraint.push_back(heldout);
  }

  double p_hat = mean_objective(saved.spec, saved.params, p.config.objective,
                                p.split.train);
  double eps = epsilon >= 0.0 ? epsilon : p.config.evaluation.certify_epsilon;
  pacc::PaccCertificate cert =
      pacc::pacc_certificate(saved.spec, saved.params, p.config.objective, specs, data,
                             eps, p_hat, p.config.solver.seed);

  const auto& outputs = p.config.outputs;
  if (!outputs.dir.empty()) fs::create_directories(outputs.dir);
  std::string text = cert.to_json() + "\n";
  write_text(outputs.path(outputs.certificate), text);
  std::cout << text;
  return cert.verdict ? 0 : 3;
}

int cmd_attack_sweep(const std::string& config_path,
                     const std::vector<std::string>& overrides,
                     const std::string& model_path) {
  Pipeline p = load_pipeline(config_path, overrides);
  if (p.config.evaluation.attack_grid.empty()) {
    throw pacc::ConfigError("evaluation.attack_grid is required for attack-sweep");
  }
  pacc::SavedModel saved = load_model_for(p, model_path);
  auto table = pacc::robust_accuracy_sweep(
      saved.spec, saved.params, eval_split(p), p.config.evaluation.attack_grid,
      p.config.evaluation.eval_attack(0.0), p.config.solver.seed, p.config.objective);

  const auto& outputs = p.config.outputs;
  if (!outputs.dir.empty()) fs::create_directories(outputs.dir);
  std::ofstream sweep(outputs.path(outputs.sweep), std::ios::binary);
  pacc::write_robust_sweep_csv(sweep, table);

  ordered_json doc;
  for (const auto& point : table) {
    doc["robust_accuracy." + format_epsilon(point.epsilon)] = point.accuracy;
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_sensitivity(const std::string& config_path,
                    const std::vector<std::string>& overrides,
                    const std::string& model_path) {
  Pipeline p = load_pipeline(config_path, overrides);
  pacc::SavedModel saved = load_model_for(p, model_path);
  double rate =
      pacc::sensitivity_rate(saved.spec, saved.params, eval_split(p), sensitivity_map(p));
  ordered_json doc;
  doc["sensitivity_rate"] = rate;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

// Finite hypothesis class for the brute-force oracle: constant classifiers
// plus one-feature decision stumps on a uniform threshold grid, both
// orientations. Binary classification only.
int cmd_ecrm_oracle(const std::string& config_path,
                    const std::vector<std::string>& overrides, int thresholds) {
  if (thresholds < 1) throw pacc::ConfigError("--thresholds must be at least 1");
  Pipeline p = load_pipeline(config_path, overrides);
  if (p.num_classes != 2) {
    throw pacc::ConfigError("ecrm-oracle needs a binary label, dataset has " +
                            std::to_string(p.num_classes) + " classes");
  }
  const pacc::SampleSet& data = p.split.train;
  const std::size_t d = data.dim();

  pacc::FiniteHypothesisClass hclass;
  std::vector<std::string> names;
  auto one_hot = [](int cls) {
    return pacc::NumArray({2}, {cls == 0 ? 1.0 : 0.0, cls == 0 ? 0.0 : 1.0});
  };
  for (int cls = 0; cls < 2; ++cls) {
    hclass.hypotheses.push_back([one_hot, cls](const pacc::NumArray&) {
      return one_hot(cls);
    });
    names.push_back("constant " + std::to_string(cls));
  }
  for (std::size_t f = 0; f < d; ++f) {
    for (int i = 1; i <= thresholds; ++i) {
      double t = static_cast<double>(i) / static_cast<double>(thresholds + 1);
      for (int flip = 0; flip < 2; ++flip) {
        hclass.hypotheses.push_back([one_hot, f, t, flip](const pacc::NumArray& x) {
          bool high = x[f] > t;
          return one_hot(high == (flip == 0) ? 1 : 0);
        });
        char buf[96];
        std::snprintf(buf, sizeof(buf), "x[%zu] > %g -> %d", f, t, flip == 0 ? 1 : 0);
        names.push_back(buf);
      }
    }
  }

  std::vector<pacc::ConstraintSpec> specs;
  for (const auto& conf : p.config.constraints) {
    specs.push_back(pacc::build_constraint(conf, data, p.loaded.meta));
  }
  pacc::EcrmResult result =
      pacc::ecrm_bruteforce(hclass, p.config.objective, specs, data);

  ordered_json doc;
  doc["index"] = result.index;
  doc["objective"] = result.objective;
  doc["hypothesis"] = names[result.index];
  doc["class_size"] = hclass.hypotheses.size();
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual constrained learning trainer and report toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string model_path;
  double epsilon = -1.0;
  int thresholds = 9;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration JSON")->required();
    sub->add_option("--set", overrides, "override a config value: dotted.path=value");
  };

  CLI::App* train = app.add_subcommand("train", "train a model under its constraints");
  add_common(train);

  CLI::App* certify =
      app.add_subcommand("certify", "check a trained model on the heldout split");
  add_common(certify);
  certify->add_option("--model", model_path, "saved model path (default from config)");
  certify->add_option("--epsilon", epsilon, "certificate tolerance");

  CLI::App* sweep = app.add_subcommand("attack-sweep", "robust accuracy across radii");
  add_common(sweep);
  sweep->add_option("--model", model_path, "saved model path (default from config)");

  CLI::App* sens =
      app.add_subcommand("sensitivity", "prediction-change rate under the protected swap");
  add_common(sens);
  sens->add_option("--model", model_path, "saved model path (default from config)");

  CLI::App* oracle =
      app.add_subcommand("ecrm-oracle", "brute-force constrained minimizer over stumps");
  add_common(oracle);
  oracle->add_option("--thresholds", thresholds, "stump thresholds per feature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("usage", e.what());
    return 1;
  }

  if (train->parsed()) return dispatch([&] { return cmd_train(config_path, overrides); });
  if (certify->parsed()) {
    return dispatch([&] { return cmd_certify(config_path, overrides, model_path, epsilon); });
  }
  if (sweep->parsed()) {
    return dispatch([&] { return cmd_attack_sweep(config_path, overrides, model_path); });
  }
  if (sens->parsed()) {
    return dispatch([&] { return cmd_sensitivity(config_path, overrides, model_path); });
  }
  if (oracle->parsed()) {
    return dispatch([&] { return cmd_ecrm_oracle(config_path, overrides, thresholds); });
  }
  return 1;
}
