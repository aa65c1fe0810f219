// Command-line front end: ingest/validate a corpus, emit feature datasets,
// train and evaluate boosted models, run feature-selection sweeps, drive the
// full experiment pipeline, and generate synthetic corpora.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "instimpact/experiment.hpp"

namespace fs = std::filesystem;
using namespace instimpact;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string conference;
  std::string learner = "second_order";
  bool learner_given = false;
  bool no_relevance = false;
  int percent = 0;          // 0 = not given
  std::uint64_t seed = 0;
  bool seed_given = false;
  int year = 0;
  bool year_given = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_conference = false) {
  cmd->add_option("--config", args.config_path, "experiment config file (INI)")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  auto* conf = cmd->add_option("--conference", args.conference, "conference id");
  if (needs_conference) conf->required();
}

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config_path);
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (!args.conference.empty()) cfg.conferences = {args.conference};
  if (args.seed_given) cfg.synth.seed = args.seed;
  if (args.percent > 0) cfg.percents = {args.percent};
  if (args.no_relevance) cfg.variants = {Variant::without_relevance};
  return cfg;
}

Variant variant_of(const CommonArgs& args) {
  return args.no_relevance ? Variant::without_relevance : Variant::with_relevance;
}

std::string dataset_file(const ExperimentConfig& cfg, const std::string& conference,
                         Variant variant, const char* split) {
  return (fs::path(cfg.out_dir) / (conference + "_" + std::string(variant_key(variant)) +
                                   "_" + split + ".tsv"))
      .string();
}

Dataset read_dataset_file(const std::string& path, Dataset::Split split_tag) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open dataset '" + path +
                    "' (run the 'features' subcommand first)");
  return read_dataset_tsv(in, split_tag, path);
}

FeatureBuildOptions build_options(const ExperimentConfig& cfg) {
  FeatureBuildOptions options;
  options.aif_delta_t = cfg.aif_delta_t;
  options.author_scope = cfg.author_scope;
  options.warn = [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };
  return options;
}

int cmd_synth(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  if (cfg.out_dir.empty()) throw ConfigError("--out: required for synth");
  const CorpusPaths paths = generate_synthetic(cfg.synth, cfg.out_dir);
  std::cout << "wrote " << paths.papers << "\n"
            << "wrote " << paths.institutions << "\n"
            << "wrote " << paths.editions << "\n"
            << "wrote " << paths.gdp << "\n";
  return 0;
}

int cmd_ingest(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  cfg.require_corpus_paths();
  LoadReport report;
  const Corpus corpus = load_corpus(cfg.paths, cfg.years, &report);
  std::cout << report.summary();
  std::set<std::string> authors;
  for (const auto& p : corpus.papers())
    for (const auto& a : p.authorships) authors.insert(a.author_id);
  std::cout << "authors: " << authors.size() << "\n"
            << "institutions: " << corpus.institutions().size() << "\n"
            << "conferences: " << corpus.conference_ids().size() << "\n"
            << "editions: " << corpus.editions().size() << "\n";
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    const std::string path = (fs::path(args.out_dir) / "relevance_ledger.csv").string();
    auto out = detail::open_output(path);
    RelevanceLedger::build(corpus).write_csv(out);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_export_coords(const CommonArgs& args) {
  if (!args.year_given) throw ConfigError("--year: required for export-coords");
  ExperimentConfig cfg = load_config(args);
  cfg.require_corpus_paths();
  const Corpus corpus = load_corpus(cfg.paths, cfg.years);
  const auto rows = export_coordinates(corpus, args.conference, args.year);
  if (args.out_dir.empty()) {
    write_coordinates_csv(rows, std::cout);
  } else {
    fs::create_directories(args.out_dir);
    const std::string path =
        (fs::path(args.out_dir) /
         ("coordinates_" + args.conference + "_" + std::to_string(args.year) + ".csv"))
            .string();
    auto out = detail::open_output(path);
    write_coordinates_csv(rows, out);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_features(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  cfg.validate();
  cfg.require_corpus_paths();
  const Corpus corpus = load_corpus(cfg.paths, cfg.years);
  auto [train_data, test_data] = build_datasets(corpus, args.conference,
                                                cfg.train_years, cfg.test_year,
                                                build_options(cfg));
  const Variant variant = variant_of(args);
  if (variant == Variant::without_relevance) {
    train_data = drop_group(train_data, FeatureGroup::relevance);
    test_data = drop_group(test_data, FeatureGroup::relevance);
  }
  fs::create_directories(cfg.out_dir);
  for (const auto& [data, split] :
       {std::pair{&train_data, "train"}, std::pair{&test_data, "test"}}) {
    const std::string path = dataset_file(cfg, args.conference, variant, split);
    auto out = detail::open_output(path);
    write_dataset_tsv(*data, out);
    std::cout << "wrote " << path << " (" << data->rows.size() << " rows)\n";
  }
  return 0;
}

std::string model_file(const ExperimentConfig& cfg, const CommonArgs& args) {
  return (fs::path(cfg.out_dir) / (args.conference + "_" + args.learner + "_" +
                                   std::string(variant_key(variant_of(args))) +
                                   ".model"))
      .string();
}

int cmd_train(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  BoostParams params = cfg.boost;
  params.learner = parse_learner(args.learner);
  const Dataset train_data = read_dataset_file(
      dataset_file(cfg, args.conference, variant_of(args), "train"),
      Dataset::Split::train);
  const BoostedModel model = train(train_data, params);
  const std::string path = model_file(cfg, args);
  auto out = detail::open_output(path);
  save_model(model, out);
  std::cout << "trained " << model.trees.size() << " trees on "
            << train_data.rows.size() << " rows; wrote " << path << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  const std::string path = model_file(cfg, args);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model '" + path + "'");
  const BoostedModel model = load_model(in);
  const Dataset test_data = read_dataset_file(
      dataset_file(cfg, args.conference, variant_of(args), "test"),
      Dataset::Split::test);
  const RankingReport report = evaluate_model(model, test_data, cfg.ndcg_n);
  const NdcgCell cell{report.conference_id, report.target_year,
                      report.ndcg.at(cfg.ndcg_n), args.learner, 100,
                      std::string(variant_key(variant_of(args)))};
  write_ndcg_cells_tsv({&cell, 1}, cfg.ndcg_n, std::cout);
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  cfg.validate();
  BoostParams params = cfg.boost;
  params.learner = parse_learner(args.learner);
  const Variant variant = variant_of(args);
  const Dataset train_data = read_dataset_file(
      dataset_file(cfg, args.conference, variant, "train"), Dataset::Split::train);
  const Dataset test_data = read_dataset_file(
      dataset_file(cfg, args.conference, variant, "test"), Dataset::Split::test);
  const SelectionSweep sw = sweep(train_data, test_data, params, cfg.percents,
                                  cfg.ndcg_n);
  const std::string stem =
      args.conference + "_" + args.learner + "_" + std::string(variant_key(variant));
  fs::create_directories(cfg.out_dir);
  {
    auto out = detail::open_output(
        (fs::path(cfg.out_dir) / ("importance_groups_" + stem + ".tsv")).string());
    write_group_table_tsv(sw, train_data.schema.groups_present(), out);
  }
  {
    auto out = detail::open_output(
        (fs::path(cfg.out_dir) / ("importance_features_" + stem + ".tsv")).string());
    write_feature_table_tsv(sw, out);
  }
  std::vector<NdcgCell> cells;
  for (const auto& cell : sw.cells)
    cells.push_back({train_data.rows.front().conference_id, cfg.test_year, cell.ndcg,
                     args.learner, cell.percent,
                     std::string(variant_key(variant))});
  {
    auto out = detail::open_output(
        (fs::path(cfg.out_dir) / ("ndcg_sweep_" + stem + ".tsv")).string());
    write_ndcg_cells_tsv(cells, cfg.ndcg_n, out);
  }
  std::cout << "sweep over " << sw.cells.size() << " percentages; reports under "
            << cfg.out_dir << "\n";
  return 0;
}

int cmd_run(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  if (args.learner_given) cfg.learners = {parse_learner(args.learner)};
  const ExperimentResult result = run_experiment(cfg);
  std::cout << result.load_report.summary();
  std::cout << "cells: " << result.cells.size() << "\n"
            << "manifest: " << result.manifest_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Institution impact forecasting toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  int (*handler)(const CommonArgs&) = nullptr;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, args);
  synth->add_option("--seed", args.seed, "generator seed")
      ->each([&](const std::string&) { args.seed_given = true; });
  synth->callback([&] { handler = cmd_synth; });

  auto* ingest = app.add_subcommand("ingest", "load, validate, and summarize a corpus");
  add_common(ingest, args);
  ingest->callback([&] { handler = cmd_ingest; });

  auto* coords = app.add_subcommand("export-coords",
                                    "export institution/venue coordinates of an edition");
  add_common(coords, args, true);
  coords->add_option("--year", args.year, "edition year")
      ->each([&](const std::string&) { args.year_given = true; });
  coords->callback([&] { handler = cmd_export_coords; });

  auto* features = app.add_subcommand("features", "emit train/test dataset TSVs");
  add_common(features, args, true);
  features->add_flag("--no-relevance", args.no_relevance,
                     "drop the relevance feature group");
  features->callback([&] { handler = cmd_features; });

  auto* train_cmd = app.add_subcommand("train", "train a model from a dataset TSV");
  add_common(train_cmd, args, true);
  train_cmd->add_option("--learner", args.learner, "second_order or gbdt");
  train_cmd->add_flag("--no-relevance", args.no_relevance,
                      "use the no-relevance datasets");
  train_cmd->callback([&] { handler = cmd_train; });

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained model (NDCG@N)");
  add_common(eval_cmd, args, true);
  eval_cmd->add_option("--learner", args.learner, "second_order or gbdt");
  eval_cmd->add_flag("--no-relevance", args.no_relevance,
                     "use the no-relevance datasets");
  eval_cmd->callback([&] { handler = cmd_eval; });

  auto* sweep_cmd =
      app.add_subcommand("sweep", "top-p% feature selection sweep from dataset TSVs");
  add_common(sweep_cmd, args, true);
  sweep_cmd->add_option("--learner", args.learner, "second_order or gbdt");
  sweep_cmd->add_flag("--no-relevance", args.no_relevance,
                      "use the no-relevance datasets");
  sweep_cmd->add_option("--percent", args.percent, "restrict to one percentage");
  sweep_cmd->callback([&] { handler = cmd_sweep; });

  auto* run_cmd = app.add_subcommand("run", "full pipeline from config");
  add_common(run_cmd, args);
  run_cmd->add_option("--percent", args.percent, "restrict to one percentage");
  run_cmd->add_flag("--no-relevance", args.no_relevance,
                    "restrict to the no-relevance variant");
  run_cmd->add_option("--learner", args.learner, "restrict to one learner")
      ->each([&](const std::string&) { args.learner_given = true; });
  run_cmd->add_option("--seed", args.seed, "synthetic seed override")
      ->each([&](const std::string&) { args.seed_given = true; });
  run_cmd->callback([&] { handler = cmd_run; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return handler ? handler(args) : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
