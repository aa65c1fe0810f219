#pragma once

#include <array>
#include <functional>

#include "instimpact/scimetrics.hpp"

namespace instimpact {

enum class FeatureGroup { author, relevance, distance, gdp };

inline constexpr std::array<FeatureGroup, 4> kAllGroups = {
    FeatureGroup::author, FeatureGroup::relevance, FeatureGroup::distance,
    FeatureGroup::gdp};

inline std::string_view group_key(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::author: return "author";
    case FeatureGroup::relevance: return "relevance";
    case FeatureGroup::distance: return "distance";
    case FeatureGroup::gdp: return "gdp";
  }
  throw InternalError("bad FeatureGroup");
}

/// Column headers used by the grouped report tables.
inline std::string_view group_label(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::author: return "Author";
    case FeatureGroup::relevance: return "Relevance scores";
    case FeatureGroup::distance: return "Distance";
    case FeatureGroup::gdp: return "GDP";
  }
  throw InternalError("bad FeatureGroup");
}

inline FeatureGroup parse_group(std::string_view key) {
  for (FeatureGroup g : kAllGroups)
    if (group_key(g) == key) return g;
  throw ConfigError("unknown feature group '" + std::string(key) + "'");
}

struct FeatureDef {
  std::string name;
  FeatureGroup group;
};

inline std::uint64_t schema_fingerprint_of(std::span<const std::string> names) {
  std::uint64_t h = fnv1a64("feature-schema");
  for (const auto& name : names) {
    h = fnv1a64(name, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

/// Ordered feature list. The canonical instance has the 38 named features;
/// group-dropped and top-p% subsets preserve the canonical order.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureDef> defs) : defs_(std::move(defs)) {
    std::set<std::string> seen;
    for (const auto& d : defs_)
      if (!seen.insert(d.name).second)
        throw InternalError("duplicate feature name '" + d.name + "'");
  }

  /// The full 38-feature schema: four yearly relevance scores with their
  /// aggregates and trend weightings, author H-index/Q/AIF aggregates, yearly
  /// GDP, and yearly venue distances.
  static const FeatureSchema& full() {
    static const FeatureSchema schema = [] {
      std::vector<FeatureDef> defs;
      auto add = [&](std::string name, FeatureGroup g) {
        defs.push_back({std::move(name), g});
      };
      auto add_aggregates = [&](const std::string& base, FeatureGroup g) {
        for (const char* stat : {"sum", "max", "min", "avg", "med", "dev"})
          add(std::string(stat) + "(" + base + ")", g);
      };
      for (int i = 1; i <= 4; ++i)
        add("rel y" + std::to_string(i), FeatureGroup::relevance);
      add_aggregates("rel", FeatureGroup::relevance);
      add("wt(rel)", FeatureGroup::relevance);
      add("wd(rel)", FeatureGroup::relevance);
      add_aggregates("H-index", FeatureGroup::author);
      for (int i = 1; i <= 4; ++i)
        add("GDP y" + std::to_string(i), FeatureGroup::gdp);
      add_aggregates("Q", FeatureGroup::author);
      add_aggregates("AIF", FeatureGroup::author);
      for (int i = 1; i <= 4; ++i)
        add("distance y" + std::to_string(i), FeatureGroup::distance);
      return FeatureSchema(std::move(defs));
    }();
    return schema;
  }

  /// Rebuilds a schema from names (e.g. a dataset file header); groups come
  /// from the canonical schema.
  static FeatureSchema from_names(std::span<const std::string> names) {
    const auto& canon = full();
    std::vector<FeatureDef> defs;
    defs.reserve(names.size());
    for (const auto& name : names) {
      auto idx = canon.index_of(name);
      if (!idx) throw DataError("unknown feature name '" + name + "'");
      defs.push_back(canon.defs()[*idx]);
    }
    return FeatureSchema(std::move(defs));
  }

  const std::vector<FeatureDef>& defs() const { return defs_; }
  std::size_t size() const { return defs_.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(defs_.size());
    for (const auto& d : defs_) out.push_back(d.name);
    return out;
  }

  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < defs_.size(); ++i)
      if (defs_[i].name == name) return i;
    return std::nullopt;
  }

  std::uint64_t fingerprint() const { return schema_fingerprint_of(names()); }

  FeatureSchema without_group(FeatureGroup group) const {
    std::vector<FeatureDef> defs;
    for (const auto& d : defs_)
      if (d.group != group) defs.push_back(d);
    if (defs.empty()) throw DataError("dropping group leaves no features");
    return FeatureSchema(std::move(defs));
  }

  /// Keeps the named features, in this schema's order.
  FeatureSchema subset(const std::set<std::string>& keep) const {
    std::vector<FeatureDef> defs;
    for (const auto& d : defs_)
      if (keep.count(d.name)) defs.push_back(d);
    if (defs.size() != keep.size())
      throw DataError("feature subset contains unknown names");
    if (defs.empty()) throw DataError("empty feature subset");
    return FeatureSchema(std::move(defs));
  }

  std::vector<FeatureGroup> groups_present() const {
    std::vector<FeatureGroup> out;
    for (FeatureGroup g : kAllGroups)
      for (const auto& d : defs_)
        if (d.group == g) {
          out.push_back(g);
          break;
        }
    return out;
  }

 private:
  std::vector<FeatureDef> defs_;
};

struct FeatureRow {
  std::string institution_id;
  std::string conference_id;
  int target_year = 0;
  std::vector<double> values;
  double label = 0.0;
};

struct Dataset {
  enum class Split { train, test };

  FeatureSchema schema;
  std::vector<FeatureRow> rows;
  Split split = Split::train;
};

enum class AuthorMetricScope { corpus_wide, conference };

struct FeatureBuildOptions {
  int aif_delta_t = 4;
  AuthorMetricScope author_scope = AuthorMetricScope::corpus_wide;
  /// Overrides the corpus-wide mean log potential impact used by Q values.
  std::optional<double> mean_log_impact;
  std::function<void(const std::string&)> warn;
};

struct YearRange {
  int first = 0;
  int last = 0;
};

namespace detail {

/// Shared state for building rows of one conference: relevance by year, venue
/// coordinates, and memoized per-(author, target-year) metrics.
class FeatureBuilder {
 public:
  FeatureBuilder(const Corpus& corpus, std::string conference_id,
                 FeatureBuildOptions options)
      : corpus_(corpus),
        conference_id_(std::move(conference_id)),
        options_(std::move(options)),
        mu_p_(options_.mean_log_impact.value_or(corpus.mean_log_impact())) {
    if (options_.aif_delta_t < 1)
      throw std::invalid_argument("aif_delta_t must be >= 1");
    if (!corpus_.has_conference(conference_id_))
      throw DataError("unknown conference '" + conference_id_ + "'");
  }

  const std::map<std::string, double>& relevance(int year) {
    auto it = rel_by_year_.find(year);
    if (it == rel_by_year_.end())
      it = rel_by_year_.emplace(year, relevance_scores(corpus_, conference_id_, year))
               .first;
    return it->second;
  }

  /// Fails loudly if any edition of [year-4, year] is missing; every feature
  /// window needs all five venues resolved.
  void require_editions(int target_year) const {
    for (int y = target_year - 4; y <= target_year; ++y)
      if (!corpus_.edition(conference_id_, y))
        throw DataError("missing edition '" + conference_id_ + "' year " +
                        std::to_string(y) + " in window of target year " +
                        std::to_string(target_year));
  }

  FeatureRow build(const std::string& institution_id, int target_year) {
    require_editions(target_year);
    const auto& inst = corpus_.institution(institution_id);

    FeatureRow row;
    row.institution_id = institution_id;
    row.conference_id = conference_id_;
    row.target_year = target_year;
    row.values.reserve(FeatureSchema::full().size());

    std::array<double, 4> rel{};
    std::array<double, 4> dist{};
    std::array<double, 4> gdp{};
    for (int j = 0; j < 4; ++j) {
      const int y = target_year - 4 + j;
      auto it = relevance(y).find(institution_id);
      rel[j] = it == relevance(y).end() ? 0.0 : it->second;
      const ConferenceEdition* venue = corpus_.edition(conference_id_, y);
      dist[j] = geo_distance(inst.latitude, inst.longitude, venue->latitude,
                             venue->longitude);
      auto g = corpus_.gdp().lookup(inst.country_code, y);
      if (!g && options_.warn)
        options_.warn("missing GDP for country '" + inst.country_code + "' year " +
                      std::to_string(y) + " (institution '" + institution_id +
                      "'); using 0");
      gdp[j] = g.value_or(0.0);
    }

    for (double v : rel) row.values.push_back(v);
    push_aggregates(row.values, rel);
    row.values.push_back(time_weighted_relevance(rel));
    row.values.push_back(distance_weighted_relevance(rel, dist));

    // Authors credited to this institution on the conference's window papers.
    std::set<std::string> authors;
    for (int y = target_year - 4; y <= target_year - 1; ++y)
      for (const PaperRecord* p : corpus_.papers_of(conference_id_, y))
        for (const auto& a : p->authorships)
          for (const auto& ai : a.institution_ids)
            if (ai == institution_id) authors.insert(a.author_id);

    std::vector<double> h_values, q_values, aif_values;
    for (const auto& author : authors) {
      const auto& m = author_metrics(author, target_year);
      h_values.push_back(m.h_index);
      q_values.push_back(m.q_value);
      aif_values.push_back(m.aif);
    }

    push_aggregates(row.values, h_values);
    for (double v : gdp) row.values.push_back(v);
    push_aggregates(row.values, q_values);
    push_aggregates(row.values, aif_values);
    for (double v : dist) row.values.push_back(v);

    auto label_it = relevance(target_year).find(institution_id);
    row.label = label_it == relevance(target_year).end() ? 0.0 : label_it->second;
    return row;
  }

 private:
  struct AuthorMetrics {
    double aif = 0.0;
    double q_value = 0.0;
    double h_index = 0.0;
  };

  // Metrics as known entering the target year: AIF over [y-delta_T, y-1],
  // Q and H-index over papers up to y-1.
  const AuthorMetrics& author_metrics(const std::string& author, int target_year) {
    auto key = std::make_pair(author, target_year);
    auto it = metrics_.find(key);
    if (it != metrics_.end()) return it->second;
    const std::string* filter =
        options_.author_scope == AuthorMetricScope::conference ? &conference_id_
                                                               : nullptr;
    AuthorMetrics m;
    m.aif = author_aif(corpus_, author, target_year, options_.aif_delta_t, filter);
    m.q_value = author_q_up_to(corpus_, author, mu_p_, target_year - 1, filter);
    m.h_index = author_h_index(corpus_, author, target_year - 1, filter);
    return metrics_.emplace(std::move(key), m).first->second;
  }

  static void push_aggregates(std::vector<double>& out, std::span<const double> v) {
    if (v.empty()) {
      for (int i = 0; i < 6; ++i) out.push_back(0.0);
      return;
    }
    out.push_back(stats::sum(v));
    out.push_back(stats::max(v));
    out.push_back(stats::min(v));
    out.push_back(stats::mean(v));
    out.push_back(stats::median(v));
    out.push_back(stats::pop_stddev(v));
  }

  const Corpus& corpus_;
  std::string conference_id_;
  FeatureBuildOptions options_;
  double mu_p_;
  std::map<int, std::map<std::string, double>> rel_by_year_;
  std::map<std::pair<std::string, int>, AuthorMetrics> metrics_;
};

}  // namespace detail

inline FeatureRow build_row(const Corpus& corpus, const std::string& institution_id,
                            const std::string& conference_id, int target_year,
                            FeatureBuildOptions options = {}) {
  detail::FeatureBuilder builder(corpus, conference_id, std::move(options));
  return builder.build(institution_id, target_year);
}

/// Train rows cover every (institution, target year) with window activity or a
/// nonzero label; test rows are selected on window activity alone so the
/// held-out labels never influence row selection. Rows come out sorted by
/// (institution_id, target_year).
inline std::pair<Dataset, Dataset> build_datasets(const Corpus& corpus,
                                                  const std::string& conference_id,
                                                  YearRange train_years, int test_year,
                                                  FeatureBuildOptions options = {}) {
  if (train_years.first > train_years.last)
    throw ConfigError("train_years: empty range");
  const int min_year = corpus.years().min_year;
  if (train_years.first - 4 < min_year)
    throw DataError("insufficient lead years: train year " +
                    std::to_string(train_years.first) + " needs data from " +
                    std::to_string(train_years.first - 4));
  if (test_year - 4 < min_year)
    throw DataError("insufficient lead years: test year " + std::to_string(test_year) +
                    " needs data from " + std::to_string(test_year - 4));

  detail::FeatureBuilder builder(corpus, conference_id, std::move(options));
  for (int y = train_years.first; y <= train_years.last; ++y)
    builder.require_editions(y);
  builder.require_editions(test_year);

  Dataset train{FeatureSchema::full(), {}, Dataset::Split::train};
  for (int t = train_years.first; t <= train_years.last; ++t) {
    std::set<std::string> active;
    for (int y = t - 4; y <= t - 1; ++y)
      for (const auto& [inst, score] : builder.relevance(y))
        if (score > 0.0) active.insert(inst);
    for (const auto& [inst, score] : builder.relevance(t))
      if (score > 0.0) active.insert(inst);
    for (const auto& inst : active) train.rows.push_back(builder.build(inst, t));
  }

  Dataset test{FeatureSchema::full(), {}, Dataset::Split::test};
  {
    std::set<std::string> active;
    for (int y = test_year - 4; y <= test_year - 1; ++y)
      for (const auto& [inst, score] : builder.relevance(y))
        if (score > 0.0) active.insert(inst);
    for (const auto& inst : active) test.rows.push_back(builder.build(inst, test_year));
  }

  auto row_key = [](const FeatureRow& r) {
    return std::tie(r.institution_id, r.target_year);
  };
  std::sort(train.rows.begin(), train.rows.end(),
            [&](const FeatureRow& a, const FeatureRow& b) {
              return row_key(a) < row_key(b);
            });
  std::sort(test.rows.begin(), test.rows.end(),
            [&](const FeatureRow& a, const FeatureRow& b) {
              return row_key(a) < row_key(b);
            });
  return {std::move(train), std::move(test)};
}

namespace detail {

inline Dataset project_columns(const Dataset& data, const FeatureSchema& schema) {
  std::vector<std::size_t> keep;
  keep.reserve(schema.size());
  for (const auto& d : schema.defs()) {
    auto idx = data.schema.index_of(d.name);
    if (!idx) throw InternalError("projection feature missing from source schema");
    keep.push_back(*idx);
  }
  Dataset out{schema, {}, data.split};
  out.rows.reserve(data.rows.size());
  for (const auto& row : data.rows) {
    FeatureRow r{row.institution_id, row.conference_id, row.target_year, {}, row.label};
    r.values.reserve(keep.size());
    for (std::size_t idx : keep) r.values.push_back(row.values[idx]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

inline Dataset drop_group(const Dataset& data, FeatureGroup group) {
  return detail::project_columns(data, data.schema.without_group(group));
}

/// Restricts a dataset to the named features, keeping the schema order.
inline Dataset select_features(const Dataset& data, const std::set<std::string>& keep) {
  return detail::project_columns(data, data.schema.subset(keep));
}

// Dataset interchange file: TSV with the three row-identity columns, one
// column per feature, label last. Values are written in exact round-trip form.

inline void write_dataset_tsv(const Dataset& data, std::ostream& out) {
  out << "institution_id\tconference_id\ttarget_year";
  for (const auto& d : data.schema.defs()) out << '\t' << d.name;
  out << "\tlabel\n";
  for (const auto& row : data.rows) {
    out << row.institution_id << '\t' << row.conference_id << '\t' << row.target_year;
    for (double v : row.values) out << '\t' << format_exact(v);
    out << '\t' << format_exact(row.label) << "\n";
  }
}

inline Dataset read_dataset_tsv(std::istream& in, Dataset::Split split_tag,
                                const std::string& context = "dataset") {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(context + ": empty dataset file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line, '\t');
  if (header.size() < 5 || header[0] != "institution_id" ||
      header[1] != "conference_id" || header[2] != "target_year" ||
      header.back() != "label")
    throw DataError(context + ":1: bad dataset header");
  std::vector<std::string> names(header.begin() + 3, header.end() - 1);
  Dataset data{FeatureSchema::from_names(names), {}, split_tag};

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != header.size())
      throw DataError(context + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    FeatureRow row;
    row.institution_id = fields[0];
    row.conference_id = fields[1];
    {
      const auto& f = fields[2];
      auto res = std::from_chars(f.data(), f.data() + f.size(), row.target_year);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        throw DataError(context + ":" + std::to_string(line_no) +
                        ": field 'target_year': not an integer");
    }
    bool ok = false;
    row.values.reserve(names.size());
    for (std::size_t i = 3; i + 1 < fields.size(); ++i) {
      double v = parse_double_exact(fields[i], ok);
      if (!ok)
        throw DataError(context + ":" + std::to_string(line_no) + ": field '" +
                        names[i - 3] + "': not a number");
      row.values.push_back(v);
    }
    row.label = parse_double_exact(fields.back(), ok);
    if (!ok)
      throw DataError(context + ":" + std::to_string(line_no) +
                      ": field 'label': not a number");
    data.rows.push_back(std::move(row));
  }
  return data;
}

}  // namespace instimpact
