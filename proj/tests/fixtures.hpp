// Small in-memory corpora and dataset builders shared by the test suites.
#pragma once

#include <filesystem>
#include <unistd.h>

#include "instimpact/booster.hpp"
#include "instimpact/synthetic.hpp"

namespace fixtures {

using namespace instimpact;

inline PaperRecord paper(std::string id, int year, std::string conf, long long cites,
                         std::vector<Authorship> authorships) {
  return {std::move(id), year, std::move(conf), cites, std::move(authorships)};
}

inline Authorship by(std::string author, std::vector<std::string> institutions) {
  return {std::move(author), std::move(institutions)};
}

inline InstitutionRecord inst(std::string id, double lat, double lon,
                              std::string country) {
  return {std::move(id), lat, lon, std::move(country)};
}

inline ConferenceEdition edition(std::string conf, int year, double lat, double lon) {
  return {std::move(conf), year, lat, lon};
}

/// Editions of one conference for every year of [first, last], rotating
/// through a few venue coordinates.
inline std::vector<ConferenceEdition> editions_for(const std::string& conf, int first,
                                                   int last) {
  std::vector<ConferenceEdition> out;
  const double venues[][2] = {{10.0, 20.0}, {48.0, 2.0}, {-33.0, 151.0}, {35.0, 139.0}};
  for (int y = first; y <= last; ++y) {
    const auto& v = venues[(y - first) % 4];
    out.push_back({conf, y, v[0], v[1]});
  }
  return out;
}

inline GdpTable gdp_for(const std::vector<std::string>& countries, int first, int last,
                        double base = 30000.0) {
  GdpTable gdp;
  double level = base;
  for (const auto& c : countries) {
    for (int y = first; y <= last; ++y)
      gdp.values[{c, y}] = level + 100.0 * (y - first);
    level += 5000.0;
  }
  return gdp;
}

/// Single-conference corpus covering 2000-2010 with three institutions and a
/// handful of authors; enough structure for metric and feature tests.
inline Corpus small_corpus() {
  std::vector<PaperRecord> papers = {
      paper("p001", 2001, "kdd", 4, {by("alice", {"mit"})}),
      paper("p002", 2002, "kdd", 6, {by("alice", {"mit"}), by("bob", {"eth"})}),
      paper("p003", 2003, "kdd", 10, {by("bob", {"eth"})}),
      paper("p004", 2004, "kdd", 8, {by("alice", {"mit"}), by("carol", {"mit", "nus"})}),
      paper("p005", 2005, "kdd", 5, {by("carol", {"nus"})}),
      paper("p006", 2005, "kdd", 4, {by("bob", {"eth"}), by("alice", {"mit"})}),
      paper("p007", 2006, "kdd", 3, {by("alice", {"mit"})}),
      paper("p008", 2007, "kdd", 0, {by("dave", {"eth"})}),
      paper("p009", 2008, "kdd", 2, {by("dave", {"eth"}), by("carol", {"nus"})}),
      paper("p010", 2009, "kdd", 1, {by("alice", {"mit"})}),
  };
  std::vector<InstitutionRecord> institutions = {
      inst("mit", 42.36, -71.09, "US"),
      inst("eth", 47.38, 8.55, "CH"),
      inst("nus", 1.30, 103.77, "SG"),
  };
  return Corpus::build(std::move(papers), std::move(institutions),
                       editions_for("kdd", 2000, 2010),
                       gdp_for({"US", "CH", "SG"}, 2000, 2010), {2000, 2010});
}

/// Dataset with plain feature names for booster-level tests.
inline Dataset make_dataset(const std::vector<std::vector<double>>& x,
                            const std::vector<double>& y,
                            Dataset::Split split = Dataset::Split::train) {
  std::vector<FeatureDef> defs;
  const std::size_t n_features = x.empty() ? 0 : x[0].size();
  for (std::size_t f = 0; f < n_features; ++f)
    defs.push_back({"x" + std::to_string(f), FeatureGroup::author});
  Dataset data{FeatureSchema(std::move(defs)), {}, split};
  for (std::size_t i = 0; i < x.size(); ++i) {
    FeatureRow row;
    row.institution_id = "inst" + std::to_string(i);
    row.conference_id = "conf";
    row.target_year = 2015;
    row.values = x[i];
    row.label = y[i];
    data.rows.push_back(std::move(row));
  }
  return data;
}

/// Random regression dataset from the deterministic Rng.
inline Dataset random_dataset(Rng& rng, std::size_t rows, std::size_t features,
                              double label_lo = 0.0, double label_hi = 10.0) {
  std::vector<std::vector<double>> x(rows, std::vector<double>(features));
  std::vector<double> y(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t f = 0; f < features; ++f) x[i][f] = rng.uniform(-5.0, 5.0);
    y[i] = rng.uniform(label_lo, label_hi);
  }
  return make_dataset(x, y);
}

struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("instimpact_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  TempDir(TempDir&& other) noexcept : path(std::move(other.path)) {
    other.path.clear();
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    if (!path.empty()) std::filesystem::remove_all(path);
  }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline CorpusPaths paths_in(const TempDir& dir) {
  return {dir.file("papers.jsonl"), dir.file("institutions.csv"),
          dir.file("editions.csv"), dir.file("gdp.csv")};
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace fixtures
