// sadih: train, encode, query and evaluate supervised binary hashing models.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "sadih/sadih.hpp"
#include "sadih/testing/selftest.hpp"

namespace {

using namespace sadih;

// String-valued flags mirroring the config keys; only flags given on the
// command line override the config file.
struct TrainFlags {
  std::string config;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "flat key = value config file");
    for (const auto& key : config_keys()) {
      options[key] = app->add_option("--" + key, values[key], "overrides config key '" + key + "'");
    }
  }

  TrainConfig resolve() const {
    ConfigMap map = config.empty() ? ConfigMap{} : load_config(config);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) map[key] = values.at(key);
    }
    return make_train_config(map);
  }
};

FitResult run_training(const TrainConfig& cfg, bool echo) {
  const FeatureMatrix x = load_features(cfg.features);
  const LabelSet labels = load_labels(cfg.labels);
  IterationCallback cb;
  if (echo) {
    cb = [](const IterationRecord& r) {
      std::fprintf(stderr, "iter %d objective %.10g (similarity %.6g) rejected [%s] %.3fs\n",
                   r.iteration, r.objective, r.terms.similarity,
                   describe_steps(r.rejected_steps).c_str(), r.seconds);
    };
  }
  return fit_model(x, labels, cfg.hyper, cfg.anchors, cfg.sigma, cb);
}

int cmd_train(const TrainFlags& flags) {
  const TrainConfig cfg = flags.resolve();
  const FitResult fit = run_training(cfg, true);
  save_model(cfg.out, fit.model);
  write_trace_csv(cfg.out + ".trace.csv", fit.trace);
  std::fprintf(stderr, "wrote %s and %s.trace.csv\n", cfg.out.c_str(), cfg.out.c_str());
  return 0;
}

int cmd_encode(const std::string& model_path, const std::string& features, const std::string& out) {
  const Model model = load_model(model_path);
  save_codes(out, pack(encode(model, load_features(features))));
  return 0;
}

int cmd_query(const std::string& model_path, const std::string& db_path,
              const std::string& queries, Index k) {
  const Model model = load_model(model_path);
  const PackedCodes db = load_codes(db_path);
  if (db.bits() != model.bits()) {
    throw DataError("model produces " + std::to_string(model.bits()) + "-bit codes but '" +
                    db_path + "' holds " + std::to_string(db.bits()) + "-bit codes");
  }
  const PackedCodes q = pack(encode(model, load_features(queries)));
  std::cout << "query,rank,index,distance\n";
  for (Index i = 0; i < q.size(); ++i) {
    const auto hits = top_k(q, i, db, k);
    for (std::size_t r = 0; r < hits.size(); ++r) {
      std::cout << i << ',' << r << ',' << hits[r].index << ',' << hits[r].distance << '\n';
    }
  }
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& db_path,
             const std::string& db_labels_path, const std::string& queries,
             const std::string& query_labels_path, const std::string& prefix,
             const std::string& method, Index k) {
  const Model model = load_model(model_path);
  const PackedCodes db = load_codes(db_path);
  const LabelSet db_labels = load_labels(db_labels_path);
  const LabelSet query_labels = load_labels(query_labels_path);
  const PackedCodes q = pack(encode(model, load_features(queries)));
  const RetrievalMetrics m = evaluate_retrieval(q, query_labels, db, db_labels, k);
  const std::vector<ReportRow> rows = {
      {method, model.bits(), "map", m.map},
      {method, model.bits(), "precision@" + std::to_string(k), m.precision_at_k}};
  emit_report(rows, prefix + ".csv", ReportFormat::kCsv);
  emit_report(rows, prefix + ".jsonl", ReportFormat::kJsonLines);
  write_pr_curve(prefix + ".pr.csv", m.pr);
  std::cout << "map," << format_value(m.map) << "\nprecision@" << k << ','
            << format_value(m.precision_at_k) << '\n';
  return 0;
}

int cmd_grid(const TrainFlags& flags, const std::string& queries, const std::string& query_labels) {
  const TrainConfig base = flags.resolve();
  const FeatureMatrix x = load_features(base.features);
  const LabelSet labels = load_labels(base.labels);
  const FeatureMatrix xq = load_features(queries);
  const LabelSet lq = load_labels(query_labels);
  const std::vector<double> grid = {0.01, 0.1, 1.0, 5.0, 10.0};
  double best = -1.0;
  Model best_model;
  std::cout << "alpha,beta,map\n";
  for (double alpha : grid) {
    for (double beta : grid) {
      Hyperparams h = base.hyper;
      h.alpha = alpha;
      h.beta = beta;
      const FitResult fit = fit_model(x, labels, h, base.anchors, base.sigma);
      const double map = map_score(pack(encode(fit.model, xq)), lq,
                                   pack(encode(fit.model, x)), labels);
      std::cout << format_value(alpha) << ',' << format_value(beta) << ',' << format_value(map)
                << std::endl;
      if (map > best) {
        best = map;
        best_model = fit.model;
      }
    }
  }
  save_model(base.out, best_model);
  std::fprintf(stderr, "best alpha %g beta %g map %.6g -> %s\n", best_model.hyper.alpha,
               best_model.hyper.beta, best, base.out.c_str());
  return 0;
}

int cmd_selftest() {
  log::warnings_enabled() = false;
  bool ok = true;
  for (const auto& check : testing::run_selftest()) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
    ok = ok && check.passed;
  }
  return ok ? 0 : 4;
}

// The last `holdout` points go to the query files; both splits share the
// same cluster centers.
int cmd_synth(int classes, Index dim, Index n, double separation, std::uint64_t seed,
              const std::string& features, const std::string& labels, Index holdout,
              const std::string& query_features, const std::string& query_labels) {
  if (classes < 1 || dim < 1 || n < classes) throw ConfigError("synth: need n >= classes >= 1");
  if (holdout < 0) throw ConfigError("synth: holdout must be nonnegative");
  if (holdout > 0 && (query_features.empty() || query_labels.empty())) {
    throw ConfigError("synth: --holdout needs --query-features and --query-labels");
  }
  const LabeledData data = make_clusters(classes, dim, n + holdout, separation, seed);
  const LabeledData train = slice(data, 0, n);
  write_features(features, train.x);
  write_labels(labels, train.labels);
  if (holdout > 0) {
    const LabeledData query = slice(data, n, n + holdout);
    write_features(query_features, query.x);
    write_labels(query_labels, query.labels);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised discrete hashing: training, encoding and Hamming retrieval"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "train a model and write it with its trace");
  train_flags.add_to(train);

  std::string model, features, out, db, db_labels, queries, query_labels, prefix;
  std::string method = "SADIH";
  Index k = 100;

  auto* encode_cmd = app.add_subcommand("encode", "hash features into an SDC1 code file");
  encode_cmd->add_option("--model", model)->required();
  encode_cmd->add_option("--features", features)->required();
  encode_cmd->add_option("--out", out)->required();

  auto* query = app.add_subcommand("query", "print the top-k database codes per query");
  query->add_option("--model", model)->required();
  query->add_option("--db", db, "SDC1 database codes")->required();
  query->add_option("--queries", queries, "SDM1 query features")->required();
  query->add_option("-k,--k", k)->check(CLI::NonNegativeNumber);

  auto* eval = app.add_subcommand("eval", "MAP, precision@k and PR curve reports");
  eval->add_option("--model", model)->required();
  eval->add_option("--db", db)->required();
  eval->add_option("--db-labels", db_labels)->required();
  eval->add_option("--queries", queries)->required();
  eval->add_option("--query-labels", query_labels)->required();
  eval->add_option("--out", prefix, "report path prefix")->required();
  eval->add_option("--method", method);
  eval->add_option("-k,--k", k)->check(CLI::PositiveNumber);

  TrainFlags grid_flags;
  auto* grid = app.add_subcommand("grid", "sweep alpha and beta over {0.01, 0.1, 1, 5, 10}");
  grid_flags.add_to(grid);
  grid->add_option("--queries", queries)->required();
  grid->add_option("--query-labels", query_labels)->required();

  app.add_subcommand("selftest", "run the seeded oracle suite");

  int classes = 10;
  Index dim = 32, count = 2000;
  double separation = 3.0;
  std::uint64_t seed = 1;
  std::string labels_out;
  auto* synth = app.add_subcommand("synth", "write labeled Gaussian cluster data");
  synth->add_option("--classes", classes);
  synth->add_option("--dim", dim);
  synth->add_option("--n", count);
  synth->add_option("--separation", separation);
  synth->add_option("--seed", seed);
  synth->add_option("--features", features)->required();
  synth->add_option("--labels", labels_out)->required();
  Index holdout = 0;
  std::string query_features_out, query_labels_out;
  synth->add_option("--holdout", holdout, "extra points written as a query split");
  synth->add_option("--query-features", query_features_out);
  synth->add_option("--query-labels", query_labels_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(train_flags);
    if (*encode_cmd) return cmd_encode(model, features, out);
    if (*query) return cmd_query(model, db, queries, k);
    if (*eval) return cmd_eval(model, db, db_labels, queries, query_labels, prefix, method, k);
    if (*grid) return cmd_grid(grid_flags, queries, query_labels);
    if (app.got_subcommand("selftest")) return cmd_selftest();
    if (*synth) return cmd_synth(classes, dim, count, separation, seed, features, labels_out, holdout,
                                query_features_out, query_labels_out);
  } catch (const sadih::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
