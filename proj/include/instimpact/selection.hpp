#pragma once

#include "instimpact/rankeval.hpp"

namespace instimpact {

struct ImportanceEntry {
  std::string name;
  FeatureGroup group;
  long long count = 0;
  double normalized = 0.0;
};

/// Split-count importance of one trained model: per-feature rows sorted by
/// normalized score (ties by name), plus per-group sums over the groups
/// present in the schema.
struct ImportanceReport {
  std::vector<ImportanceEntry> entries;
  std::map<FeatureGroup, double> group_sums;
  bool has_splits = false;
};

inline ImportanceReport rank_features(const BoostedModel& model,
                                      const FeatureSchema& schema) {
  if (schema.fingerprint() != model.schema_fingerprint)
    throw DataError("rank_features: schema does not match the model");
  const FeatureImportance imp = feature_importance(model);

  ImportanceReport report;
  report.has_splits = imp.has_splits;
  for (FeatureGroup g : schema.groups_present()) report.group_sums[g] = 0.0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& def = schema.defs()[i];
    report.entries.push_back({def.name, def.group, imp.counts[i], imp.normalized[i]});
    report.group_sums[def.group] += imp.normalized[i];
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const ImportanceEntry& a, const ImportanceEntry& b) {
              if (a.normalized != b.normalized) return a.normalized > b.normalized;
              return a.name < b.name;
            });
  return report;
}

/// Top ceil(percent * n / 100) feature names of a ranking.
inline std::vector<std::string> top_fraction(const ImportanceReport& ranking,
                                             int percent) {
  if (percent < 1 || percent > 100)
    throw ConfigError("feature percent must be in [1, 100]");
  const std::size_t n = ranking.entries.size();
  const std::size_t k =
      (static_cast<std::size_t>(percent) * n + 99) / 100;  // ceil(p*n/100)
  if (k == 0) throw ConfigError("feature percent selects zero features");
  std::vector<std::string> names;
  names.reserve(k);
  for (std::size_t i = 0; i < k; ++i) names.push_back(ranking.entries[i].name);
  return names;
}

struct SweepCell {
  int percent = 100;
  std::vector<std::string> selected;  // ranking order
  BoostedModel model;
  ImportanceReport importance;  // of the retrained model
  double ndcg = 0.0;
  bool idcg_zero = false;
};

struct SelectionSweep {
  ImportanceReport full_importance;  // ranking of the all-features model
  std::vector<SweepCell> cells;      // ordered by percent as given
  std::size_t ndcg_n = 20;
};

/// Trains the full model, ranks its features once, then retrains and evaluates
/// on each top-p% subset. Selection uses only the training split; the nested
/// subsets all come from the single full-model ranking.
inline SelectionSweep sweep(const Dataset& train_data, const Dataset& test_data,
                            const BoostParams& params, std::span<const int> percents,
                            std::size_t ndcg_n = 20) {
  if (train_data.schema.fingerprint() != test_data.schema.fingerprint())
    throw DataError("sweep: train/test schema mismatch");
  SelectionSweep out;
  out.ndcg_n = ndcg_n;

  const BoostedModel full = train(train_data, params);
  out.full_importance = rank_features(full, train_data.schema);

  for (int percent : percents) {
    SweepCell cell;
    cell.percent = percent;
    cell.selected = top_fraction(out.full_importance, percent);
    const std::set<std::string> keep(cell.selected.begin(), cell.selected.end());
    const Dataset sub_train = select_features(train_data, keep);
    const Dataset sub_test = select_features(test_data, keep);
    cell.model = train(sub_train, params);
    cell.importance = rank_features(cell.model, sub_train.schema);
    const RankingReport report = evaluate_model(cell.model, sub_test, ndcg_n);
    cell.ndcg = report.ndcg.at(ndcg_n);
    cell.idcg_zero = report.idcg_zero;
    out.cells.push_back(std::move(cell));
  }
  return out;
}

/// Same sweep after removing one feature group from both splits.
inline SelectionSweep sweep_without_group(const Dataset& train_data,
                                          const Dataset& test_data,
                                          const BoostParams& params,
                                          std::span<const int> percents,
                                          FeatureGroup dropped,
                                          std::size_t ndcg_n = 20) {
  return sweep(drop_group(train_data, dropped), drop_group(test_data, dropped), params,
               percents, ndcg_n);
}

/// Grouped importance table: one row per percentage, one column per feature
/// group, mirroring the per-conference report layout.
inline void write_group_table_tsv(const SelectionSweep& sweep_result,
                                  std::span<const FeatureGroup> groups,
                                  std::ostream& out) {
  out << "Features";
  for (FeatureGroup g : groups) out << '\t' << group_label(g);
  out << "\n";
  for (const auto& cell : sweep_result.cells) {
    out << cell.percent << '%';
    for (FeatureGroup g : groups) {
      auto it = cell.importance.group_sums.find(g);
      out << '\t' << format_fixed(it == cell.importance.group_sums.end() ? 0.0
                                                                         : it->second);
    }
    out << "\n";
  }
}

/// Long-form per-feature importances of every retrained model, for bar-chart
/// style plotting.
inline void write_feature_table_tsv(const SelectionSweep& sweep_result,
                                    std::ostream& out) {
  out << "feature_pct\tfeature\tgroup\tsplit_count\tnormalized\n";
  for (const auto& cell : sweep_result.cells)
    for (const auto& e : cell.importance.entries)
      out << cell.percent << '\t' << e.name << '\t' << group_key(e.group) << '\t'
          << e.count << '\t' << format_fixed(e.normalized) << "\n";
}

}  // namespace instimpact
