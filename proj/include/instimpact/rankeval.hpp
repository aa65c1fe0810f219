#pragma once

#include "instimpact/booster.hpp"

namespace instimpact {

/// Discounted cumulative gain of an already-ranked relevance list, truncated
/// at position n. Gains are the raw relevances, discounts log2(rank + 1).
inline double dcg(std::span<const double> relevances, std::size_t n) {
  if (n == 0) throw std::invalid_argument("dcg: n must be >= 1");
  double acc = 0.0;
  const std::size_t limit = std::min(n, relevances.size());
  for (std::size_t i = 0; i < limit; ++i)
    acc += relevances[i] / std::log2(static_cast<double>(i) + 2.0);
  return acc;
}

struct NdcgValue {
  double value = 0.0;
  /// Set when the ground truth carried no positive relevance, which leaves the
  /// ideal DCG at zero; the metric is reported as 0 in that case.
  bool idcg_zero = false;
};

/// NDCG@n of a predicted scoring against true relevances. Institutions are
/// ranked by predicted score (ties by institution id); an institution missing
/// from the truth contributes zero relevance at its rank.
inline NdcgValue ndcg_at(const std::map<std::string, double>& predicted,
                         const std::map<std::string, double>& truth, std::size_t n) {
  std::vector<std::pair<std::string, double>> ranking(predicted.begin(),
                                                      predicted.end());
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<double> gains;
  gains.reserve(ranking.size());
  for (const auto& [inst, score] : ranking) {
    auto it = truth.find(inst);
    gains.push_back(it == truth.end() ? 0.0 : it->second);
  }

  std::vector<double> ideal;
  ideal.reserve(truth.size());
  for (const auto& [inst, rel] : truth) ideal.push_back(rel);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  const double idcg = ideal.empty() ? 0.0 : dcg(ideal, n);
  if (!(idcg > 0.0)) return {0.0, true};
  return {dcg(gains, n) / idcg, false};
}

struct RankedEntry {
  std::string institution_id;
  double predicted = 0.0;
  double truth = 0.0;
};

struct RankingReport {
  std::string conference_id;
  int target_year = 0;
  std::vector<RankedEntry> entries;  // predicted desc, ties by institution id
  std::map<std::size_t, double> ndcg;
  bool idcg_zero = false;
};

/// Scores every test row with the model and evaluates the resulting ranking.
/// All rows must belong to one (conference, year).
inline RankingReport evaluate_model(const BoostedModel& model, const Dataset& test,
                                    std::size_t n = 20) {
  if (test.rows.empty()) throw DataError("evaluate_model: empty test dataset");
  if (test.schema.fingerprint() != model.schema_fingerprint)
    throw DataError("evaluate_model: dataset schema does not match the model");

  RankingReport report;
  report.conference_id = test.rows.front().conference_id;
  report.target_year = test.rows.front().target_year;

  std::map<std::string, double> predicted, truth;
  for (const auto& row : test.rows) {
    if (row.conference_id != report.conference_id ||
        row.target_year != report.target_year)
      throw DataError("evaluate_model: mixed conference/year rows");
    if (!predicted.emplace(row.institution_id, model.predict(row.values)).second)
      throw DataError("evaluate_model: duplicate institution '" + row.institution_id +
                      "'");
    truth[row.institution_id] = row.label;
  }

  for (const auto& [inst, score] : predicted)
    report.entries.push_back({inst, score, truth.at(inst)});
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     if (a.predicted != b.predicted) return a.predicted > b.predicted;
                     return a.institution_id < b.institution_id;
                   });

  const NdcgValue v = ndcg_at(predicted, truth, n);
  report.ndcg[n] = v.value;
  report.idcg_zero = v.idcg_zero;
  return report;
}

struct NdcgCell {
  std::string conference;
  int year = 0;
  double value = 0.0;
  std::string learner;
  int feature_pct = 100;
  std::string variant;
};

/// Long-form report, one line per experiment cell; rows concatenate across
/// conferences, learners, and variants.
inline void write_ndcg_cells_tsv(std::span<const NdcgCell> cells, std::size_t n,
                                 std::ostream& out) {
  out << "conference\tyear\tndcg@" << n << "\tlearner\tfeature_pct\tvariant\n";
  for (const auto& c : cells)
    out << c.conference << '\t' << c.year << '\t' << format_fixed(c.value) << '\t'
        << c.learner << '\t' << c.feature_pct << '\t' << c.variant << "\n";
}

}  // namespace instimpact
