#pragma once

#include <iostream>

#include "instimpact/config.hpp"
#include "instimpact/selection.hpp"

namespace instimpact {

struct CellResult {
  std::string conference;
  BoostParams::Learner learner;
  Variant variant;
  int percent = 100;
  double ndcg = 0.0;
  bool idcg_zero = false;
  std::string model_file;  // relative to the output directory
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  LoadReport load_report;
  std::string out_dir;
  std::string manifest_file;
};

namespace detail {

inline std::string cell_stem(const std::string& conference, BoostParams::Learner learner,
                             Variant variant) {
  return conference + "_" + std::string(learner_key(learner)) + "_" +
         std::string(variant_key(variant));
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  auto out = open_output(path.string());
  out << content;
}

}  // namespace detail

/// Full pipeline over an already-loaded corpus: per conference x learner x
/// variant, train the full model, sweep the configured feature percentages,
/// and evaluate every retrained model at NDCG@n. Emits one grouped-importance
/// table and one per-feature table per combination, pivoted NDCG tables, every
/// retrained model, and a manifest tying each cell to its model file.
inline ExperimentResult run_experiment(const ExperimentConfig& config,
                                       const Corpus& corpus,
                                       const LoadReport& load_report = {}) {
  config.validate();
  namespace fs = std::filesystem;

  for (const auto& conference : config.conferences)
    if (!corpus.has_conference(conference))
      throw DataError("conference '" + conference + "' not present in corpus");

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir / "models");

  ExperimentResult result;
  result.load_report = load_report;
  result.out_dir = config.out_dir;

  FeatureBuildOptions options;
  options.aif_delta_t = config.aif_delta_t;
  options.author_scope = config.author_scope;
  options.warn = [](const std::string& message) {
    std::cerr << "warning: " << message << "\n";
  };

  std::ostringstream manifest;
  manifest << "config_hash\t" << to_hex(config.config_hash()) << "\n";

  for (const auto& conference : config.conferences) {
    const auto [train_full, test_full] =
        build_datasets(corpus, conference, config.train_years, config.test_year,
                       options);
    for (BoostParams::Learner learner : config.learners) {
      BoostParams params = config.boost;
      params.learner = learner;
      for (Variant variant : config.variants) {
        const bool drop_rel = variant == Variant::without_relevance;
        const Dataset train_data =
            drop_rel ? drop_group(train_full, FeatureGroup::relevance) : train_full;
        const Dataset test_data =
            drop_rel ? drop_group(test_full, FeatureGroup::relevance) : test_full;

        const SelectionSweep sw =
            sweep(train_data, test_data, params, config.percents, config.ndcg_n);

        const std::string stem = detail::cell_stem(conference, learner, variant);
        {
          std::ostringstream os;
          write_group_table_tsv(sw, train_data.schema.groups_present(), os);
          detail::write_file(out_dir / ("importance_groups_" + stem + ".tsv"),
                             os.str());
          manifest << "table\timportance_groups\t" << stem << "\t"
                   << ("importance_groups_" + stem + ".tsv") << "\n";
        }
        {
          std::ostringstream os;
          write_feature_table_tsv(sw, os);
          detail::write_file(out_dir / ("importance_features_" + stem + ".tsv"),
                             os.str());
        }

        for (const SweepCell& cell : sw.cells) {
          const std::string model_rel =
              "models/" + stem + "_p" + std::to_string(cell.percent) + ".model";
          {
            auto out = detail::open_output((out_dir / model_rel).string());
            save_model(cell.model, out);
          }
          result.cells.push_back({conference, learner, variant, cell.percent,
                                  cell.ndcg, cell.idcg_zero, model_rel});
        }
      }
    }
  }

  {
    std::vector<NdcgCell> cells;
    for (const auto& c : result.cells)
      cells.push_back({c.conference, config.test_year, c.ndcg,
                       std::string(learner_key(c.learner)), c.percent,
                       std::string(variant_key(c.variant))});
    std::ostringstream os;
    write_ndcg_cells_tsv(cells, config.ndcg_n, os);
    detail::write_file(out_dir / "ndcg_cells.tsv", os.str());
    manifest << "table\tndcg_cells\t-\tndcg_cells.tsv\n";
  }

  // Pivoted NDCG tables: conferences down, percentages across.
  for (BoostParams::Learner learner : config.learners) {
    for (Variant variant : config.variants) {
      std::ostringstream os;
      os << "conference";
      for (int p : config.percents) os << '\t' << p << '%';
      os << "\n";
      for (const auto& conference : config.conferences) {
        os << conference;
        for (int p : config.percents) {
          const CellResult* found = nullptr;
          for (const auto& c : result.cells)
            if (c.conference == conference && c.learner == learner &&
                c.variant == variant && c.percent == p) {
              found = &c;
              break;
            }
          if (!found) throw InternalError("experiment cell missing from results");
          os << '\t' << format_fixed(found->ndcg);
        }
        os << "\n";
      }
      const std::string name = "ndcg_table_" + std::string(learner_key(learner)) +
                               "_" + std::string(variant_key(variant)) + ".tsv";
      detail::write_file(out_dir / name, os.str());
      manifest << "table\tndcg\t" << learner_key(learner) << '_'
               << variant_key(variant) << "\t" << name << "\n";
    }
  }

  for (const auto& c : result.cells)
    manifest << "cell\t" << c.conference << '\t' << learner_key(c.learner) << '\t'
             << variant_key(c.variant) << '\t' << c.percent << '\t'
             << format_fixed(c.ndcg) << '\t' << c.model_file << "\n";

  result.manifest_file = (out_dir / "manifest.tsv").string();
  detail::write_file(out_dir / "manifest.tsv", manifest.str());
  return result;
}

/// Convenience overload that loads the corpus from the configured paths.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  config.require_corpus_paths();
  LoadReport report;
  const Corpus corpus = load_corpus(config.paths, config.years, &report);
  return run_experiment(config, corpus, report);
}

}  // namespace instimpact
