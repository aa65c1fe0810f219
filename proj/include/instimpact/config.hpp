#pragma once

#include "instimpact/booster.hpp"
#include "instimpact/synthetic.hpp"

namespace instimpact {

enum class Variant { with_relevance, without_relevance };

inline std::string_view variant_key(Variant v) {
  return v == Variant::with_relevance ? "with_relevance" : "without_relevance";
}

inline Variant parse_variant(std::string_view key) {
  if (key == "with_relevance") return Variant::with_relevance;
  if (key == "without_relevance") return Variant::without_relevance;
  throw ConfigError("unknown variant '" + std::string(key) + "'");
}

struct ExperimentConfig {
  CorpusPaths paths;
  CleaningConfig years;
  std::vector<std::string> conferences;
  YearRange train_years{2004, 2010};
  int test_year = 2015;
  int aif_delta_t = 4;
  AuthorMetricScope author_scope = AuthorMetricScope::corpus_wide;
  std::size_t ndcg_n = 20;
  std::vector<int> percents = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<BoostParams::Learner> learners = {BoostParams::Learner::second_order,
                                                BoostParams::Learner::gbdt};
  std::vector<Variant> variants = {Variant::with_relevance,
                                   Variant::without_relevance};
  BoostParams boost;
  std::string out_dir = "out";
  SyntheticSpec synth;

  void validate() const {
    if (conferences.empty()) throw ConfigError("experiment.conferences: required");
    if (train_years.first > train_years.last)
      throw ConfigError("experiment.train_years: empty range");
    if (years.min_year > years.max_year)
      throw ConfigError("corpus.min_year: after corpus.max_year");
    if (train_years.first - 4 < years.min_year)
      throw ConfigError("experiment.train_years: first train year needs four lead "
                        "years inside the corpus range");
    if (train_years.last > years.max_year)
      throw ConfigError("experiment.train_years: beyond corpus range");
    if (test_year - 4 < years.min_year || test_year > years.max_year)
      throw ConfigError("experiment.test_year: needs four lead years inside the "
                        "corpus range");
    if (aif_delta_t < 1) throw ConfigError("experiment.aif_delta_t: must be >= 1");
    if (ndcg_n < 1) throw ConfigError("experiment.ndcg_n: must be >= 1");
    if (percents.empty()) throw ConfigError("experiment.percents: required");
    for (int p : percents)
      if (p < 10 || p > 100 || p % 10 != 0)
        throw ConfigError("experiment.percents: must be multiples of 10 in "
                          "[10, 100], got " +
                          std::to_string(p));
    auto unique_or_throw = [](auto items, const char* field) {
      std::sort(items.begin(), items.end());
      if (std::adjacent_find(items.begin(), items.end()) != items.end())
        throw ConfigError(std::string(field) + ": duplicate entries");
    };
    unique_or_throw(conferences, "experiment.conferences");
    unique_or_throw(percents, "experiment.percents");
    unique_or_throw(learners, "experiment.learners");
    unique_or_throw(variants, "experiment.variants");
    if (learners.empty()) throw ConfigError("experiment.learners: required");
    if (variants.empty()) throw ConfigError("experiment.variants: required");
    if (out_dir.empty()) throw ConfigError("experiment.out: required");
    boost.validate();
  }

  void require_corpus_paths() const {
    if (paths.papers.empty()) throw ConfigError("corpus.papers: required");
    if (paths.institutions.empty()) throw ConfigError("corpus.institutions: required");
    if (paths.editions.empty()) throw ConfigError("corpus.editions: required");
    if (paths.gdp.empty()) throw ConfigError("corpus.gdp: required");
  }

  /// Canonical dump of every experiment-relevant field; its hash identifies
  /// the run in the manifest.
  std::string canonical_text() const {
    std::ostringstream os;
    os << "papers=" << paths.papers << "\ninstitutions=" << paths.institutions
       << "\neditions=" << paths.editions << "\ngdp=" << paths.gdp
       << "\nmin_year=" << years.min_year << "\nmax_year=" << years.max_year
       << "\nconferences=";
    for (const auto& c : conferences) os << c << ',';
    os << "\ntrain_years=" << train_years.first << ".." << train_years.last
       << "\ntest_year=" << test_year << "\naif_delta_t=" << aif_delta_t
       << "\nauthor_scope="
       << (author_scope == AuthorMetricScope::corpus_wide ? "corpus" : "conference")
       << "\nndcg_n=" << ndcg_n << "\npercents=";
    for (int p : percents) os << p << ',';
    os << "\nlearners=";
    for (auto l : learners) os << learner_key(l) << ',';
    os << "\nvariants=";
    for (auto v : variants) os << variant_key(v) << ',';
    os << "\nrounds=" << boost.rounds << "\nmax_depth=" << boost.max_depth
       << "\nlearning_rate=" << format_exact(boost.learning_rate)
       << "\nlambda=" << format_exact(boost.lambda)
       << "\ngamma=" << format_exact(boost.gamma)
       << "\nmin_child_weight=" << format_exact(boost.min_child_weight)
       << "\nseed=" << synth.seed << "\n";
    return os.str();
  }

  std::uint64_t config_hash() const { return fnv1a64(canonical_text()); }
};

namespace detail {

/// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
/// comments. Duplicate keys within a section are rejected.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse(std::istream& in, const std::string& context) {
    IniFile ini;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line.erase(comment);
      auto text = trim(line);
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']')
          throw ConfigError(context + ":" + std::to_string(line_no) +
                            ": unterminated section header");
        section = std::string(trim(text.substr(1, text.size() - 2)));
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(context + ":" + std::to_string(line_no) +
                          ": expected 'key = value'");
      std::string key{trim(text.substr(0, eq))};
      std::string value{trim(text.substr(eq + 1))};
      if (key.empty())
        throw ConfigError(context + ":" + std::to_string(line_no) + ": empty key");
      if (!ini.sections[section].emplace(std::move(key), std::move(value)).second)
        throw ConfigError(context + ":" + std::to_string(line_no) +
                          ": duplicate key in section [" + section + "]");
    }
    return ini;
  }
};

inline int config_int(const std::string& raw, const std::string& field) {
  auto t = trim(raw);
  int v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ConfigError(field + ": not an integer: '" + raw + "'");
  return v;
}

inline std::uint64_t config_u64(const std::string& raw, const std::string& field) {
  auto t = trim(raw);
  std::uint64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ConfigError(field + ": not a non-negative integer: '" + raw + "'");
  return v;
}

inline double config_double(const std::string& raw, const std::string& field) {
  bool ok = false;
  double v = parse_double_exact(trim(raw), ok);
  if (!ok) throw ConfigError(field + ": not a number: '" + raw + "'");
  return v;
}

inline std::vector<std::string> config_list(const std::string& raw) {
  std::vector<std::string> out;
  for (auto& item : split(raw, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline YearRange config_year_range(const std::string& raw, const std::string& field) {
  const auto dots = raw.find("..");
  if (dots == std::string::npos)
    throw ConfigError(field + ": expected '<first>..<last>': '" + raw + "'");
  return {config_int(raw.substr(0, dots), field),
          config_int(raw.substr(dots + 2), field)};
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(std::istream& in,
                                                const std::string& context) {
  const auto ini = detail::IniFile::parse(in, context);
  ExperimentConfig cfg;

  static const std::map<std::string, std::set<std::string>> known = {
      {"corpus", {"papers", "institutions", "editions", "gdp", "min_year", "max_year"}},
      {"experiment",
       {"conferences", "train_years", "test_year", "aif_delta_t", "author_scope",
        "ndcg_n", "percents", "learners", "variants", "out"}},
      {"boost",
       {"rounds", "max_depth", "learning_rate", "lambda", "gamma",
        "min_child_weight"}},
      {"synth",
       {"institutions", "authors", "conferences", "papers_per_year", "first_year",
        "last_year", "quality_weight", "noise_level", "seed"}},
  };
  for (const auto& [section, keys] : ini.sections) {
    auto it = known.find(section);
    if (it == known.end())
      throw ConfigError(context + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!it->second.count(key))
        throw ConfigError(context + ": unknown key '" + section + "." + key + "'");
  }

  auto get = [&](const char* section, const char* key) -> const std::string* {
    auto sit = ini.sections.find(section);
    if (sit == ini.sections.end()) return nullptr;
    auto kit = sit->second.find(key);
    return kit == sit->second.end() ? nullptr : &kit->second;
  };

  if (auto* v = get("corpus", "papers")) cfg.paths.papers = *v;
  if (auto* v = get("corpus", "institutions")) cfg.paths.institutions = *v;
  if (auto* v = get("corpus", "editions")) cfg.paths.editions = *v;
  if (auto* v = get("corpus", "gdp")) cfg.paths.gdp = *v;
  if (auto* v = get("corpus", "min_year"))
    cfg.years.min_year = detail::config_int(*v, "corpus.min_year");
  if (auto* v = get("corpus", "max_year"))
    cfg.years.max_year = detail::config_int(*v, "corpus.max_year");

  if (auto* v = get("experiment", "conferences")) cfg.conferences = detail::config_list(*v);
  if (auto* v = get("experiment", "train_years"))
    cfg.train_years = detail::config_year_range(*v, "experiment.train_years");
  if (auto* v = get("experiment", "test_year"))
    cfg.test_year = detail::config_int(*v, "experiment.test_year");
  if (auto* v = get("experiment", "aif_delta_t"))
    cfg.aif_delta_t = detail::config_int(*v, "experiment.aif_delta_t");
  if (auto* v = get("experiment", "author_scope")) {
    if (*v == "corpus")
      cfg.author_scope = AuthorMetricScope::corpus_wide;
    else if (*v == "conference")
      cfg.author_scope = AuthorMetricScope::conference;
    else
      throw ConfigError("experiment.author_scope: expected 'corpus' or 'conference'");
  }
  if (auto* v = get("experiment", "ndcg_n"))
    cfg.ndcg_n = static_cast<std::size_t>(detail::config_int(*v, "experiment.ndcg_n"));
  if (auto* v = get("experiment", "percents")) {
    if (*v == "all") {
      cfg.percents = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    } else {
      cfg.percents.clear();
      for (const auto& item : detail::config_list(*v))
        cfg.percents.push_back(detail::config_int(item, "experiment.percents"));
    }
  }
  if (auto* v = get("experiment", "learners")) {
    cfg.learners.clear();
    for (const auto& item : detail::config_list(*v))
      cfg.learners.push_back(parse_learner(item));
  }
  if (auto* v = get("experiment", "variants")) {
    cfg.variants.clear();
    for (const auto& item : detail::config_list(*v))
      cfg.variants.push_back(parse_variant(item));
  }
  if (auto* v = get("experiment", "out")) cfg.out_dir = *v;

  if (auto* v = get("boost", "rounds"))
    cfg.boost.rounds = detail::config_int(*v, "boost.rounds");
  if (auto* v = get("boost", "max_depth"))
    cfg.boost.max_depth = detail::config_int(*v, "boost.max_depth");
  if (auto* v = get("boost", "learning_rate"))
    cfg.boost.learning_rate = detail::config_double(*v, "boost.learning_rate");
  if (auto* v = get("boost", "lambda"))
    cfg.boost.lambda = detail::config_double(*v, "boost.lambda");
  if (auto* v = get("boost", "gamma"))
    cfg.boost.gamma = detail::config_double(*v, "boost.gamma");
  if (auto* v = get("boost", "min_child_weight"))
    cfg.boost.min_child_weight = detail::config_double(*v, "boost.min_child_weight");

  if (auto* v = get("synth", "institutions"))
    cfg.synth.institutions = detail::config_int(*v, "synth.institutions");
  if (auto* v = get("synth", "authors"))
    cfg.synth.authors = detail::config_int(*v, "synth.authors");
  if (auto* v = get("synth", "conferences"))
    cfg.synth.conferences = detail::config_int(*v, "synth.conferences");
  if (auto* v = get("synth", "papers_per_year"))
    cfg.synth.papers_per_year = detail::config_int(*v, "synth.papers_per_year");
  if (auto* v = get("synth", "first_year"))
    cfg.synth.first_year = detail::config_int(*v, "synth.first_year");
  if (auto* v = get("synth", "last_year"))
    cfg.synth.last_year = detail::config_int(*v, "synth.last_year");
  if (auto* v = get("synth", "quality_weight"))
    cfg.synth.quality_weight = detail::config_double(*v, "synth.quality_weight");
  if (auto* v = get("synth", "noise_level"))
    cfg.synth.noise_level = detail::config_double(*v, "synth.noise_level");
  if (auto* v = get("synth", "seed"))
    cfg.synth.seed = detail::config_u64(*v, "synth.seed");

  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_experiment_config(in, path);
}

}  // namespace instimpact
