#pragma once

#include <limits>
#include <numbers>

#include "instimpact/corpus.hpp"

namespace instimpact {

inline constexpr double kEarthRadiusKm = 6371.0;

namespace detail {

/// Papers of one author restricted to a year window, optionally to one
/// conference. Indices stay in (year, paper_id) order.
inline std::vector<std::size_t> author_papers_in(
    const Corpus& corpus, const std::string& author_id, int min_year, int max_year,
    const std::string* conference_filter = nullptr) {
  std::vector<std::size_t> out;
  for (std::size_t idx : corpus.author_papers(author_id)) {
    const auto& p = corpus.papers()[idx];
    if (p.year < min_year || p.year > max_year) continue;
    if (conference_filter && p.conference_id != *conference_filter) continue;
    out.push_back(idx);
  }
  return out;
}

}  // namespace detail

/// Author Impact Factor at year T: mean citations of the author's papers
/// published in [T - delta_T, T - 1]. Zero when the window is empty.
inline double author_aif(const Corpus& corpus, const std::string& author_id, int year,
                         int delta_t, const std::string* conference_filter = nullptr) {
  if (delta_t < 1) throw std::invalid_argument("author_aif: delta_t must be >= 1");
  if (!corpus.has_author(author_id))
    throw DataError("unknown author '" + author_id + "'");
  auto idxs = detail::author_papers_in(corpus, author_id, year - delta_t, year - 1,
                                       conference_filter);
  if (idxs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t idx : idxs)
    total += static_cast<double>(corpus.papers()[idx].citation_count);
  return total / static_cast<double>(idxs.size());
}

/// Q from raw citation counts: exp(<log(c+1)> - mu_p). The +1 smoothing keeps
/// zero-citation papers in the mean.
inline double q_value_from_citations(std::span<const double> citations, double mu_p) {
  if (citations.empty())
    throw DataError("q_value_from_citations: no papers");
  double acc = 0.0;
  for (double c : citations) acc += std::log(c + 1.0);
  return std::exp(acc / static_cast<double>(citations.size()) - mu_p);
}

/// Q restricted to papers published up to (and including) a given year.
inline double author_q_up_to(const Corpus& corpus, const std::string& author_id,
                             double mu_p, int up_to_year,
                             const std::string* conference_filter = nullptr) {
  auto idxs = detail::author_papers_in(corpus, author_id,
                                       std::numeric_limits<int>::min(), up_to_year,
                                       conference_filter);
  if (idxs.empty())
    throw DataError("author '" + author_id + "' has no papers up to " +
                    std::to_string(up_to_year));
  std::vector<double> citations;
  citations.reserve(idxs.size());
  for (std::size_t idx : idxs)
    citations.push_back(static_cast<double>(corpus.papers()[idx].citation_count));
  return q_value_from_citations(citations, mu_p);
}

/// Career Q value over all of the author's papers in the corpus.
inline double author_q(const Corpus& corpus, const std::string& author_id,
                       double mu_p) {
  return author_q_up_to(corpus, author_id, mu_p, std::numeric_limits<int>::max());
}

/// Largest H such that the author has H papers (published up to `up_to_year`)
/// with at least H citations each. Total: unknown authors score 0.
inline int author_h_index(const Corpus& corpus, const std::string& author_id,
                          int up_to_year,
                          const std::string* conference_filter = nullptr) {
  auto idxs = detail::author_papers_in(corpus, author_id,
                                       std::numeric_limits<int>::min(), up_to_year,
                                       conference_filter);
  std::vector<long long> citations;
  citations.reserve(idxs.size());
  for (std::size_t idx : idxs) citations.push_back(corpus.papers()[idx].citation_count);
  std::sort(citations.begin(), citations.end(), std::greater<>());
  int h = 0;
  for (std::size_t i = 0; i < citations.size(); ++i)
    if (citations[i] >= static_cast<long long>(i) + 1)
      h = static_cast<int>(i) + 1;
    else
      break;
  return h;
}

/// Fractional paper credit at one edition: every paper carries total credit 1,
/// split equally over its authors, then equally over each author's
/// institutions.
inline std::map<std::string, double> relevance_scores(const Corpus& corpus,
                                                      const std::string& conference_id,
                                                      int year) {
  if (!corpus.edition(conference_id, year))
    throw DataError("unknown edition '" + conference_id + "' year " +
                    std::to_string(year));
  std::map<std::string, double> scores;
  for (const PaperRecord* p : corpus.papers_of(conference_id, year)) {
    const double author_share = 1.0 / static_cast<double>(p->authorships.size());
    for (const auto& a : p->authorships) {
      const double inst_share =
          author_share / static_cast<double>(a.institution_ids.size());
      for (const auto& inst : a.institution_ids) scores[inst] += inst_share;
    }
  }
  return scores;
}

/// (institution, conference, year) -> fractional score, over every edition of
/// the corpus.
struct RelevanceLedger {
  std::map<std::tuple<std::string, std::string, int>, double> scores;

  static RelevanceLedger build(const Corpus& corpus) {
    RelevanceLedger ledger;
    for (const auto& [key, edition] : corpus.editions()) {
      auto per_inst = relevance_scores(corpus, key.first, key.second);
      for (const auto& [inst, score] : per_inst)
        ledger.scores[{inst, key.first, key.second}] = score;
    }
    return ledger;
  }

  double get(const std::string& institution_id, const std::string& conference_id,
             int year) const {
    auto it = scores.find({institution_id, conference_id, year});
    return it == scores.end() ? 0.0 : it->second;
  }

  void write_csv(std::ostream& out) const {
    out << "institution_id,conference_id,year,score\n";
    for (const auto& [key, score] : scores)
      out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key)
          << ',' << format_exact(score) << "\n";
  }
};

/// Great-circle distance in kilometers on a spherical Earth (haversine form).
inline double geo_distance(double lat_a, double lon_a, double lat_i, double lon_i) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double phi_a = lat_a * rad;
  const double phi_i = lat_i * rad;
  const double half_dphi = std::abs(phi_a - phi_i) / 2.0;
  const double half_dlambda = std::abs(lon_a - lon_i) * rad / 2.0;
  const double s_phi = std::sin(half_dphi);
  const double s_lambda = std::sin(half_dlambda);
  double a = s_phi * s_phi + std::cos(phi_a) * std::cos(phi_i) * s_lambda * s_lambda;
  a = std::clamp(a, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

/// Four-year scores weighted toward the forecast year: weights (1,2,3,4)/10,
/// oldest first.
inline double time_weighted_relevance(std::span<const double> scores) {
  if (scores.size() != 4)
    throw std::invalid_argument("time_weighted_relevance: need exactly 4 scores");
  static constexpr double weights[4] = {0.1, 0.2, 0.3, 0.4};
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += weights[i] * scores[i];
  return acc;
}

/// Four-year scores weighted proportionally to the matching distances; an
/// all-zero distance vector degrades to uniform weights.
inline double distance_weighted_relevance(std::span<const double> scores,
                                          std::span<const double> distances) {
  if (scores.size() != 4 || distances.size() != 4)
    throw std::invalid_argument(
        "distance_weighted_relevance: need exactly 4 scores and 4 distances");
  double total = 0.0;
  for (double d : distances) {
    if (d < 0.0)
      throw std::invalid_argument("distance_weighted_relevance: negative distance");
    total += d;
  }
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double w = total > 0.0 ? distances[i] / total : 0.25;
    acc += w * scores[i];
  }
  return acc;
}

}  // namespace instimpact
