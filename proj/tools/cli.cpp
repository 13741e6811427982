#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "treerules/data.hpp"
#include "treerules/error.hpp"
#include "treerules/explain.hpp"
#include "treerules/file_io.hpp"
#include "treerules/forest.hpp"
#include "treerules/interchange.hpp"
#include "treerules/number_format.hpp"
#include "treerules/rule_predict.hpp"
#include "treerules/rules.hpp"

namespace treerules::cli {
namespace {

namespace fs = std::filesystem;

struct DataOptions {
  std::string data;
  std::string config;
};

struct TrainOptions {
  DataOptions input;
  std::string kind = "dt";
  std::optional<int> max_depth;
  std::optional<int> max_features;
  std::optional<int> max_leaf_nodes;
  int min_samples_split = 2;
  int n_estimators = 5;
  bool no_bootstrap = false;
  double train_frac = 0.7;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string train_out;
  std::string test_out;
};

struct ExtractOptions {
  std::string model;
  std::string rules_out;
  std::string text_out;
};

struct PredictOptions {
  DataOptions input;
  std::string rules;
  std::string out;
  bool compiled = false;
};

struct VerifyOptions {
  DataOptions input;
  std::string model;
  std::string rules;
  std::string out;
};

struct ExplainOptions {
  DataOptions input;
  std::string model;
  std::string rules;
  std::vector<std::size_t> samples;
  std::vector<std::size_t> group;
  std::string dictionary;
  std::string out;
  std::string json_out;
};

struct ReportOptions {
  DataOptions input;
  std::string model;
  std::string rules;
  std::string roc_out;
};

struct SummarizeOptions {
  DataOptions input;
  std::string out;
};

fs::path resolve_config(const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !fs::exists(p)) {
    if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) {
      const fs::path candidate = fs::path(dir) / p;
      if (fs::exists(candidate)) return candidate;
    }
  }
  if (!fs::exists(p)) throw ConfigError("config file '" + path + "' not found");
  return p;
}

Dataset load_dataset(const DataOptions& opts, std::ostream& err) {
  const auto config = load_data_config(resolve_config(opts.config));
  if (!fs::exists(opts.data)) throw ConfigError("data file '" + opts.data + "' not found");
  LoadReport report;
  Dataset data = load_csv(opts.data, config.schema, config.options, &report);
  const std::size_t dropped =
      report.dropped_unmapped_label + report.dropped_missing + report.dropped_parse_error;
  if (dropped > 0 || report.imputed_cells > 0) {
    err << "loaded " << data.n_samples() << " of " << report.rows_read << " rows ("
        << report.dropped_unmapped_label << " unmapped label, " << report.dropped_missing
        << " missing value, " << report.dropped_parse_error << " unparseable; "
        << report.imputed_cells << " cells imputed)\n";
  }
  return data;
}

void check_names(std::span<const std::string> model_names, const Dataset& data) {
  if (model_names.size() != data.n_features()) {
    throw DataError("model expects " + std::to_string(model_names.size()) + " features, dataset has " +
                    std::to_string(data.n_features()));
  }
  for (std::size_t j = 0; j < model_names.size(); ++j) {
    if (model_names[j] != data.schema().features[j]) {
      throw DataError("feature " + std::to_string(j) + " is '" + data.schema().features[j] +
                      "' in the dataset but '" + model_names[j] + "' in the model");
    }
  }
}

void write_or_print(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomically(path, content);
  }
}

std::string auc_text(std::span<const double> scores, std::span<const std::uint8_t> targets) {
  try {
    return format_shortest(roc_auc(scores, targets).auc);
  } catch (const DataError&) {
    return "n/a (single class)";
  }
}

std::vector<double> model_scores(const Model& model, const Dataset& data) {
  std::vector<double> scores;
  scores.reserve(data.n_samples());
  for (std::size_t i = 0; i < data.n_samples(); ++i) scores.push_back(predict_proba(model, data.row(i))[1]);
  return scores;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const bool forest = o.kind == "rf";
  if (!forest && o.kind != "dt") throw ConfigError("--kind must be 'dt' or 'rf'");

  // Zero disables a bound; unset falls back to the per-kind default.
  auto bound = [](std::optional<int> v, std::optional<int> fallback) -> std::optional<int> {
    if (!v) return fallback;
    if (*v == 0) return std::nullopt;
    return v;
  };
  TreeParams tp;
  tp.max_depth = bound(o.max_depth, forest ? 10 : 5);
  tp.max_features = bound(o.max_features, forest ? 4 : 50);
  tp.max_leaf_nodes = bound(o.max_leaf_nodes, forest ? std::nullopt : std::optional<int>(10));
  tp.min_samples_split = o.min_samples_split;
  tp.seed = o.seed;

  const Dataset data = load_dataset(o.input, err);
  auto [train, test] = split(data, o.train_frac, o.seed);
  if (train.empty()) throw DataError("train split is empty");

  Model model;
  if (forest) {
    ForestParams fp;
    fp.n_estimators = o.n_estimators;
    fp.tree_params = tp;
    fp.bootstrap = !o.no_bootstrap;
    fp.seed = o.seed;
    fp.n_threads = o.threads;
    model = fit_forest(train, fp);
  } else {
    model = fit_tree(train, tp);
  }

  export_json(model, o.out, data.schema().features);
  if (!o.train_out.empty()) save_csv(train, o.train_out);
  if (!o.test_out.empty() && !test.empty()) save_csv(test, o.test_out);

  const auto trees = estimators(model);
  out << "model: " << (forest ? "random forest" : "decision tree") << ", " << trees.size()
      << (trees.size() == 1 ? " tree" : " trees") << "\n";
  for (std::size_t t = 0; t < trees.size(); ++t) {
    out << "  tree " << t << ": " << trees[t]->n_leaves() << " leaves, depth " << trees[t]->depth() << "\n";
  }
  out << "train rows: " << train.n_samples() << ", test rows: " << test.n_samples() << "\n";
  out << "train AUC: " << auc_text(model_scores(model, train), train.targets()) << "\n";
  if (!test.empty()) {
    out << "test AUC: " << auc_text(model_scores(model, test), test.targets()) << "\n";
  }
  out << "wrote " << o.out << "\n";
  return kOk;
}

int cmd_extract(const ExtractOptions& o, std::ostream& out) {
  if (o.rules_out.empty() && o.text_out.empty()) {
    throw ConfigError("extract needs --rules-out and/or --text-out");
  }
  const auto doc = import_json(o.model);
  const RuleSet rules = model_2rules(doc.model, doc.feature_names);
  if (!o.rules_out.empty()) {
    emit_csv(rules, o.rules_out);
    out << "wrote " << rules.rules.size() << " rules for " << rules.n_trees
        << (rules.n_trees == 1 ? " tree" : " trees") << " to " << o.rules_out << "\n";
  }
  if (!o.text_out.empty()) write_or_print(o.text_out, emit_text(rules), out);
  return kOk;
}

int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  const RuleSet rules = load_rules_csv(o.rules);
  const Dataset data = load_dataset(o.input, err);
  check_names(rules.feature_names, data);

  std::string csv = "sample_index,p0,p1\n";
  std::optional<CompiledRules> compiled;
  if (o.compiled) compiled.emplace(rules);
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    const auto p = compiled ? compiled->predict(data.row(i)) : rule_predict(rules, data.row(i));
    csv += std::to_string(i) + ',' + format_shortest(p[0]) + ',' + format_shortest(p[1]) + '\n';
  }
  write_or_print(o.out, csv, out);
  return kOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  const auto doc = import_json(o.model);
  const RuleSet rules = load_rules_csv(o.rules);
  const Dataset data = load_dataset(o.input, err);
  check_names(doc.feature_names, data);

  const auto report = verify_equivalence(doc.model, rules, data);
  if (!o.out.empty()) write_file_atomically(o.out, report_to_csv(report));
  out << "samples: " << report.per_sample.size() << "\n";
  out << "max |rule - model|: " << format_shortest(report.max_abs_difference) << "\n";
  out << (report.exact() ? "rules reproduce the model exactly" : "rules DIFFER from the model") << "\n";
  return report.exact() ? kOk : kEquivalenceFailure;
}

int cmd_explain(const ExplainOptions& o, std::ostream& out, std::ostream& err) {
  if (o.samples.empty() == o.group.empty()) {
    throw ConfigError("explain needs either --sample or --group");
  }
  const auto doc = import_json(o.model);
  const RuleSet rules = o.rules.empty() ? model_2rules(doc.model, doc.feature_names) : load_rules_csv(o.rules);
  const Dataset data = load_dataset(o.input, err);
  check_names(doc.feature_names, data);
  const FeatureDictionary dictionary =
      o.dictionary.empty() ? FeatureDictionary{} : load_feature_dictionary(o.dictionary);

  auto row_of = [&](std::size_t i) {
    if (i >= data.n_samples()) {
      throw ConfigError("sample " + std::to_string(i) + " is out of range (dataset has " +
                        std::to_string(data.n_samples()) + " rows)");
    }
    return data.row(i);
  };

  std::vector<DecisionPath> paths;
  if (!o.group.empty()) {
    std::vector<std::span<const double>> members;
    std::string ref = "group:";
    for (std::size_t k = 0; k < o.group.size(); ++k) {
      members.push_back(row_of(o.group[k]));
      ref += (k ? "," : "") + std::to_string(o.group[k]);
    }
    paths.push_back(group_path(doc.model, rules, members, dictionary, ref));
  } else {
    for (auto i : o.samples) {
      paths.push_back(display_rule_per_estimator(doc.model, rules, row_of(i), dictionary, std::to_string(i)));
    }
  }

  std::string text;
  std::string json;
  for (const auto& path : paths) {
    if (paths.size() > 1 || path.kind == PathKind::kGroup) {
      text += (path.kind == PathKind::kGroup ? "common decisions for " : "sample ") + path.sample_ref + "\n";
    }
    text += render_text(path);
    json += render_json(path);
  }
  write_or_print(o.out, text, out);
  if (!o.json_out.empty()) write_file_atomically(o.json_out, json);
  return kOk;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  const auto doc = import_json(o.model);
  const Dataset data = load_dataset(o.input, err);
  check_names(doc.feature_names, data);
  const auto scores = o.rules.empty() ? model_scores(doc.model, data)
                                      : rule_predict_batch(load_rules_csv(o.rules), data);
  const auto curve = roc_auc(scores, data.targets());
  out << "samples: " << data.n_samples() << "\n";
  out << "AUC: " << format_shortest(curve.auc) << "\n";
  if (!o.roc_out.empty()) {
    write_file_atomically(o.roc_out, roc_to_csv(curve));
    out << "wrote " << curve.points.size() << " ROC points to " << o.roc_out << "\n";
  }
  return kOk;
}

int cmd_summarize(const SummarizeOptions& o, std::ostream& out, std::ostream& err) {
  const Dataset data = load_dataset(o.input, err);
  write_or_print(o.out, summary_to_csv(summarize(data), data.schema()), out);
  return kOk;
}

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data, "Input CSV with a header row")->required();
  cmd->add_option("--config", d.config, "Schema config (features, target, labels)")->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transpile tree ensembles into if-then rules and verify them against the model"};
  app.name(args.empty() ? "treerules" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a decision tree or random forest");
  add_data_options(train_cmd, train.input);
  train_cmd->add_option("--kind", train.kind, "dt or rf")->check(CLI::IsMember({"dt", "rf"}));
  train_cmd->add_option("--max-depth", train.max_depth, "Maximum depth, 0 = unlimited (dt 5, rf 10)");
  train_cmd->add_option("--max-features", train.max_features,
                        "Features drawn per split, 0 = all (dt 50, rf 4)");
  train_cmd->add_option("--max-leaf-nodes", train.max_leaf_nodes,
                        "Leaf cap with best-first growth, 0 = none (dt 10, rf none)");
  train_cmd->add_option("--min-samples-split", train.min_samples_split)->capture_default_str();
  train_cmd->add_option("--n-estimators", train.n_estimators, "Trees in the forest")->capture_default_str();
  train_cmd->add_flag("--no-bootstrap", train.no_bootstrap, "Train every tree on the full train split");
  train_cmd->add_option("--train-frac", train.train_frac, "Fraction of rows used for training")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Seed for the split and the trainer")->capture_default_str();
  train_cmd->add_option("--threads", train.threads, "Threads for forest training")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model JSON output")->required();
  train_cmd->add_option("--train-out", train.train_out, "Write the train split as CSV");
  train_cmd->add_option("--test-out", train.test_out, "Write the test split as CSV");

  ExtractOptions extract;
  auto* extract_cmd = app.add_subcommand("extract", "Convert a model into rule CSV and rule text");
  extract_cmd->add_option("--model", extract.model, "Model JSON")->required();
  extract_cmd->add_option("--rules-out", extract.rules_out, "Rule CSV output");
  extract_cmd->add_option("--text-out", extract.text_out, "Nested if/else text output ('-' for stdout)");

  PredictOptions predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict probabilities from a rule file alone");
  add_data_options(predict_cmd, predict.input);
  predict_cmd->add_option("--rules", predict.rules, "Rule CSV")->required();
  predict_cmd->add_option("--out", predict.out, "Probability CSV output (default stdout)");
  predict_cmd->add_flag("--compiled", predict.compiled, "Walk rebuilt trees instead of scanning rules");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check that rules reproduce the model exactly");
  add_data_options(verify_cmd, verify.input);
  verify_cmd->add_option("--model", verify.model, "Model JSON")->required();
  verify_cmd->add_option("--rules", verify.rules, "Rule CSV")->required();
  verify_cmd->add_option("--out", verify.out, "Equivalence report CSV");

  ExplainOptions explain;
  auto* explain_cmd = app.add_subcommand("explain", "Show the decision path of clients");
  add_data_options(explain_cmd, explain.input);
  explain_cmd->add_option("--model", explain.model, "Model JSON")->required();
  explain_cmd->add_option("--rules", explain.rules, "Rule CSV (default: extracted from the model)");
  explain_cmd->add_option("--sample", explain.samples, "Row index to explain (repeatable)");
  explain_cmd->add_option("--group", explain.group, "Comma-separated row indices")->delimiter(',');
  explain_cmd->add_option("--dictionary", explain.dictionary, "CSV feature_name,description");
  explain_cmd->add_option("--out", explain.out, "Text output (default stdout)");
  explain_cmd->add_option("--json", explain.json_out, "JSON output");

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "ROC curve and AUC of a model on a dataset");
  add_data_options(report_cmd, report.input);
  report_cmd->add_option("--model", report.model, "Model JSON")->required();
  report_cmd->add_option("--rules", report.rules, "Score with this rule file instead of the model");
  report_cmd->add_option("--roc-out", report.roc_out, "ROC points CSV (fpr,tpr)");

  SummarizeOptions summarize_opts;
  auto* summarize_cmd = app.add_subcommand("summarize", "Per-feature statistics by target class");
  add_data_options(summarize_cmd, summarize_opts.input);
  summarize_cmd->add_option("--out", summarize_opts.out, "CSV output (default stdout)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (*train_cmd) return cmd_train(train, out, err);
    if (*extract_cmd) return cmd_extract(extract, out);
    if (*predict_cmd) return cmd_predict(predict, out, err);
    if (*verify_cmd) return cmd_verify(verify, out, err);
    if (*explain_cmd) return cmd_explain(explain, out, err);
    if (*report_cmd) return cmd_report(report, out, err);
    if (*summarize_cmd) return cmd_summarize(summarize_opts, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace treerules::cli
