#pragma once

#include <random>

#include "instimpact/corpus.hpp"

namespace instimpact {

/// Deterministic random source. mt19937_64 output is fixed by the standard and
/// all transforms are hand-rolled, so one seed yields identical streams on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct SyntheticSpec {
  int institutions = 60;
  int authors = 240;
  int conferences = 8;
  int papers_per_year = 25;
  int first_year = 2000;
  int last_year = 2015;
  /// Strength of the planted author-quality signal in paper acceptance.
  double quality_weight = 1.0;
  /// Log-normal jitter applied to yearly acceptance shares.
  double noise_level = 0.08;
  std::uint64_t seed = 42;

  void validate() const {
    if (institutions < 1) throw ConfigError("synth.institutions: must be >= 1");
    if (authors < 1) throw ConfigError("synth.authors: must be >= 1");
    if (conferences < 1) throw ConfigError("synth.conferences: must be >= 1");
    if (papers_per_year < 1) throw ConfigError("synth.papers_per_year: must be >= 1");
    if (first_year > last_year) throw ConfigError("synth.first_year: after last_year");
    if (quality_weight < 0.0) throw ConfigError("synth.quality_weight: must be >= 0");
    if (noise_level < 0.0) throw ConfigError("synth.noise_level: must be >= 0");
  }
};

namespace detail {

// Venue pool the conference editions rotate through.
inline constexpr std::pair<double, double> kVenues[] = {
    {37.77, -122.42}, {40.71, -74.01}, {51.51, -0.13},  {48.86, 2.35},
    {35.68, 139.69},  {22.28, 114.16}, {-33.87, 151.21}, {41.89, 12.49},
    {52.52, 13.41},   {59.33, 18.07},  {43.65, -79.38},  {1.35, 103.82},
    {39.90, 116.40},  {19.08, 72.88},  {-23.55, -46.63}, {34.05, -118.24},
};

inline std::string padded_id(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

}  // namespace detail

inline CorpusPaths synthetic_paths(const std::string& dir) {
  namespace fs = std::filesystem;
  return {(fs::path(dir) / "papers.jsonl").string(),
          (fs::path(dir) / "institutions.csv").string(),
          (fs::path(dir) / "editions.csv").string(),
          (fs::path(dir) / "gdp.csv").string()};
}

/// Writes a four-file corpus with a planted signal: every institution follows
/// a latent strength random walk; citations of its papers reflect the current
/// strength, while its share of next year's accepted papers follows the
/// current strength too. Author-level indicators therefore lead the
/// acceptance counts by one year, which is exactly what the feature set is
/// supposed to pick up.
inline CorpusPaths generate_synthetic(const SyntheticSpec& spec,
                                      const std::string& out_dir) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const CorpusPaths paths = synthetic_paths(out_dir);

  // Model constants; SyntheticSpec's quality_weight and noise_level steer how
  // sharply acceptance follows strength and how noisy the yearly shares are.
  // Strength follows a stationary AR(1), so train and test years share one
  // label distribution while institutions still rise and fall.
  constexpr double kStrengthSigma = 0.8;
  constexpr double kStrengthRho = 0.9;
  constexpr double kAuthorSigma = 0.15;
  constexpr double kCitationBase = 10.0;
  constexpr double kCitationAmp = 1.6;
  constexpr double kCitationSigma = 0.2;
  constexpr double kSecondaryAffiliationRate = 0.08;
  constexpr double kMissingInstitutionRate = 0.05;
  constexpr int kCountries = 12;

  Rng rng(spec.seed);
  const int n_years = spec.last_year - spec.first_year + 1;

  struct Country {
    std::string code;
    double base_gdp;
    double growth;
  };
  std::vector<Country> countries;
  for (int c = 0; c < kCountries; ++c)
    countries.push_back({detail::padded_id("C", c, 2), std::exp(rng.uniform(8.8, 11.2)),
                         rng.uniform(0.0, 0.05)});

  struct Inst {
    std::string id;
    double lat, lon;
    int country;
    std::vector<int> authors;
  };
  std::vector<Inst> insts;
  for (int i = 0; i < spec.institutions; ++i)
    insts.push_back({detail::padded_id("inst", i, 3), rng.uniform(-55.0, 65.0),
                     rng.uniform(-175.0, 175.0), i % kCountries, {}});

  std::vector<std::string> author_ids;
  std::vector<int> author_home(spec.authors);
  for (int a = 0; a < spec.authors; ++a) {
    author_ids.push_back(detail::padded_id("auth", a, 4));
    author_home[a] = a % spec.institutions;
    insts[author_home[a]].authors.push_back(a);
  }

  // Latent strength paths, one extra step before first_year for the
  // allocation of the first year.
  std::vector<std::vector<double>> log_strength(
      insts.size(), std::vector<double>(n_years + 1, 0.0));
  const double innovation = kStrengthSigma * std::sqrt(1.0 - kStrengthRho * kStrengthRho);
  for (std::size_t i = 0; i < insts.size(); ++i) {
    log_strength[i][0] = kStrengthSigma * rng.normal();
    for (int t = 1; t <= n_years; ++t)
      log_strength[i][t] =
          kStrengthRho * log_strength[i][t - 1] + innovation * rng.normal();
  }

  // Per-author yearly quality in log space.
  std::vector<std::vector<double>> author_log_q(spec.authors,
                                                std::vector<double>(n_years, 0.0));
  for (int a = 0; a < spec.authors; ++a)
    for (int t = 0; t < n_years; ++t)
      author_log_q[a][t] =
          log_strength[author_home[a]][t + 1] + kAuthorSigma * rng.normal();

  std::vector<int> publishing;  // institutions that can actually author papers
  for (std::size_t i = 0; i < insts.size(); ++i)
    if (!insts[i].authors.empty()) publishing.push_back(static_cast<int>(i));

  auto out_papers = detail::open_output(paths.papers);
  std::map<std::string, int> last_complete_year;
  long long paper_seq = 0;

  for (int t = 0; t < n_years; ++t) {
    const int year = spec.first_year + t;
    for (int c = 0; c < spec.conferences; ++c) {
      // Acceptance shares follow last year's strength plus jitter.
      std::vector<double> weight(publishing.size());
      double total = 0.0;
      for (std::size_t k = 0; k < publishing.size(); ++k) {
        weight[k] = std::exp(spec.quality_weight * log_strength[publishing[k]][t] +
                             spec.noise_level * rng.normal());
        total += weight[k];
      }
      // Largest-remainder allocation of papers_per_year over institutions.
      std::vector<int> count(publishing.size(), 0);
      std::vector<std::pair<double, std::size_t>> remainder;
      int assigned = 0;
      for (std::size_t k = 0; k < publishing.size(); ++k) {
        const double target =
            static_cast<double>(spec.papers_per_year) * weight[k] / total;
        count[k] = static_cast<int>(std::floor(target));
        assigned += count[k];
        remainder.push_back({target - std::floor(target), k});
      }
      std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (int extra = 0; extra < spec.papers_per_year - assigned; ++extra)
        ++count[remainder[static_cast<std::size_t>(extra) % remainder.size()].second];

      for (std::size_t k = 0; k < publishing.size(); ++k) {
        const Inst& inst = insts[static_cast<std::size_t>(publishing[k])];
        for (int p = 0; p < count[k]; ++p) {
          const double u = rng.uniform();
          std::size_t team = u < 0.35 ? 1 : (u < 0.75 ? 2 : 3);
          team = std::min(team, inst.authors.size());

          std::vector<int> pool = inst.authors;
          for (std::size_t s = 0; s < team; ++s)
            std::swap(pool[s], pool[s + static_cast<std::size_t>(
                                            rng.below(pool.size() - s))]);

          double mean_log_q = 0.0;
          for (std::size_t s = 0; s < team; ++s)
            mean_log_q += author_log_q[static_cast<std::size_t>(pool[s])][t];
          mean_log_q /= static_cast<double>(team);
          const long long citations = std::llround(
              kCitationBase *
              std::exp(kCitationAmp * mean_log_q + kCitationSigma * rng.normal()));

          nlohmann::json j;
          j["paper_id"] = detail::padded_id("p", static_cast<int>(paper_seq++), 6);
          j["year"] = year;
          j["conference_id"] = detail::padded_id("conf", c, 2);
          j["citation_count"] = std::max(0ll, citations);
          nlohmann::json auths = nlohmann::json::array();
          for (std::size_t s = 0; s < team; ++s) {
            const int a = pool[s];
            const std::string& author = author_ids[static_cast<std::size_t>(a)];
            std::vector<std::string> affiliation = {inst.id};
            if (insts.size() > 1 && rng.uniform() < kSecondaryAffiliationRate) {
              std::size_t other = static_cast<std::size_t>(rng.below(insts.size()));
              while (static_cast<int>(other) == publishing[k])
                other = static_cast<std::size_t>(rng.below(insts.size()));
              affiliation.push_back(insts[other].id);
            }
            // Occasionally drop the affiliation when the author has an
            // earlier complete paper; loading is expected to backfill it.
            auto seen = last_complete_year.find(author);
            const bool omit = seen != last_complete_year.end() &&
                              seen->second < year &&
                              rng.uniform() < kMissingInstitutionRate;
            nlohmann::json ja;
            ja["author_id"] = author;
            if (omit) {
              ja["institution_ids"] = nlohmann::json::array();
            } else {
              ja["institution_ids"] = affiliation;
              auto [it, inserted] = last_complete_year.try_emplace(author, year);
              if (!inserted) it->second = std::max(it->second, year);
            }
            auths.push_back(std::move(ja));
          }
          j["authorships"] = std::move(auths);
          out_papers << j.dump() << "\n";
        }
      }
    }
  }
  out_papers.close();

  {
    auto out = detail::open_output(paths.institutions);
    out << "institution_id,latitude,longitude,country_code\n";
    for (const auto& inst : insts)
      out << inst.id << ',' << format_exact(inst.lat) << ',' << format_exact(inst.lon)
          << ',' << countries[static_cast<std::size_t>(inst.country)].code << "\n";
  }
  {
    auto out = detail::open_output(paths.editions);
    out << "conference_id,year,latitude,longitude\n";
    constexpr int n_venues =
        static_cast<int>(sizeof(detail::kVenues) / sizeof(detail::kVenues[0]));
    for (int c = 0; c < spec.conferences; ++c)
      for (int t = 0; t < n_years; ++t) {
        const auto& venue = detail::kVenues[(c * 3 + t) % n_venues];
        out << detail::padded_id("conf", c, 2) << ',' << (spec.first_year + t) << ','
            << format_exact(venue.first) << ',' << format_exact(venue.second) << "\n";
      }
  }
  {
    auto out = detail::open_output(paths.gdp);
    out << "country_code,year,gdp_per_capita\n";
    for (const auto& country : countries)
      for (int t = 0; t < n_years; ++t)
        out << country.code << ',' << (spec.first_year + t) << ','
            << format_exact(country.base_gdp *
                            std::pow(1.0 + country.growth, static_cast<double>(t)))
            << "\n";
  }
  return paths;
}

}  // namespace instimpact
