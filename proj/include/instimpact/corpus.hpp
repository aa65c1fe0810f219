#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "json.hpp"

#include "instimpact/common.hpp"

namespace instimpact {

struct Authorship {
  std::string author_id;
  std::vector<std::string> institution_ids;

  bool operator==(const Authorship&) const = default;
};

/// One accepted paper. `authorships` keeps the author order of the input record.
struct PaperRecord {
  std::string paper_id;
  int year = 0;
  std::string conference_id;
  long long citation_count = 0;
  std::vector<Authorship> authorships;

  bool operator==(const PaperRecord&) const = default;
};

struct ConferenceEdition {
  std::string conference_id;
  int year = 0;
  double latitude = 0.0;
  double longitude = 0.0;
};

struct InstitutionRecord {
  std::string institution_id;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string country_code;
};

/// (country, year) -> GDP per capita. Values are strictly positive where present.
struct GdpTable {
  std::map<std::pair<std::string, int>, double> values;

  std::optional<double> lookup(const std::string& country, int year) const {
    auto it = values.find({country, year});
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
};

struct CleaningConfig {
  int min_year = 2000;
  int max_year = 2015;
};

struct CorpusPaths {
  std::string papers;
  std::string institutions;
  std::string editions;
  std::string gdp;
};

struct LoadReport {
  long long papers_read = 0;
  long long kept = 0;
  long long backfilled = 0;  // kept papers with at least one backfilled authorship
  long long dropped_incomplete = 0;
  long long dropped_out_of_range = 0;
  long long institutions_deduplicated = 0;

  std::string summary() const {
    std::ostringstream os;
    os << "papers read: " << papers_read << "\n"
       << "papers kept: " << kept << "\n"
       << "papers backfilled: " << backfilled << "\n"
       << "papers dropped (incomplete): " << dropped_incomplete << "\n"
       << "papers dropped (out of year range): " << dropped_out_of_range << "\n"
       << "institution rows deduplicated: " << institutions_deduplicated << "\n";
    return os.str();
  }
};

/// Immutable, fully indexed view of the cleaned corpus. Safe to share across
/// threads once built.
class Corpus {
 public:
  static Corpus build(std::vector<PaperRecord> papers,
                      std::vector<InstitutionRecord> institutions,
                      std::vector<ConferenceEdition> editions, GdpTable gdp,
                      const CleaningConfig& config, LoadReport* report = nullptr);

  const std::vector<PaperRecord>& papers() const { return papers_; }
  const std::map<std::string, InstitutionRecord>& institutions() const {
    return institutions_;
  }
  const std::map<std::pair<std::string, int>, ConferenceEdition>& editions() const {
    return editions_;
  }
  const GdpTable& gdp() const { return gdp_; }
  const CleaningConfig& years() const { return config_; }

  bool has_conference(const std::string& conference_id) const {
    return conference_ids_.count(conference_id) > 0;
  }

  const std::set<std::string>& conference_ids() const { return conference_ids_; }

  const ConferenceEdition* edition(const std::string& conference_id, int year) const {
    auto it = editions_.find({conference_id, year});
    return it == editions_.end() ? nullptr : &it->second;
  }

  const InstitutionRecord& institution(const std::string& institution_id) const {
    auto it = institutions_.find(institution_id);
    if (it == institutions_.end())
      throw DataError("unknown institution '" + institution_id + "'");
    return it->second;
  }

  /// All papers at (conference, year), ordered by paper_id. The conference must
  /// be known; a year without papers yields an empty list.
  std::vector<const PaperRecord*> papers_of(const std::string& conference_id,
                                            int year) const {
    if (!has_conference(conference_id))
      throw DataError("unknown conference '" + conference_id + "'");
    std::vector<const PaperRecord*> out;
    auto it = by_conference_year_.find({conference_id, year});
    if (it == by_conference_year_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(&papers_[idx]);
    return out;
  }

  /// Indices into papers() for one author, ordered by (year, paper_id).
  /// Unknown authors yield an empty span.
  std::span<const std::size_t> author_papers(const std::string& author_id) const {
    auto it = by_author_.find(author_id);
    if (it == by_author_.end()) return {};
    return it->second;
  }

  bool has_author(const std::string& author_id) const {
    return by_author_.count(author_id) > 0;
  }

  /// Corpus-wide mean of log(citations + 1), the potential-impact baseline
  /// shared by every Q-value computation on this corpus.
  double mean_log_impact() const { return mean_log_impact_; }

 private:
  std::vector<PaperRecord> papers_;
  std::map<std::string, InstitutionRecord> institutions_;
  std::map<std::pair<std::string, int>, ConferenceEdition> editions_;
  GdpTable gdp_;
  CleaningConfig config_;
  std::set<std::string> conference_ids_;
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> by_conference_year_;
  std::map<std::string, std::vector<std::size_t>> by_author_;
  double mean_log_impact_ = 0.0;
};

namespace detail {

inline void dedup_institution_ids(std::vector<std::string>& ids) {
  std::vector<std::string> out;
  for (auto& id : ids)
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  ids = std::move(out);
}

struct BackfillSource {
  int year;
  std::string paper_id;
  const std::vector<std::string>* institution_ids;
};

}  // namespace detail

inline Corpus Corpus::build(std::vector<PaperRecord> papers,
                            std::vector<InstitutionRecord> institutions,
                            std::vector<ConferenceEdition> editions, GdpTable gdp,
                            const CleaningConfig& config, LoadReport* report) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep.papers_read += static_cast<long long>(papers.size());

  Corpus corpus;
  corpus.config_ = config;

  // Year-range filter first, then backfill within the retained range.
  std::vector<PaperRecord> in_range;
  in_range.reserve(papers.size());
  for (auto& p : papers) {
    if (p.year < config.min_year || p.year > config.max_year) {
      ++rep.dropped_out_of_range;
      continue;
    }
    if (p.citation_count < 0)
      throw DataError("paper '" + p.paper_id + "': negative citation_count");
    for (auto& a : p.authorships) detail::dedup_institution_ids(a.institution_ids);
    in_range.push_back(std::move(p));
  }

  {
    std::set<std::string> seen;
    for (const auto& p : in_range)
      if (!seen.insert(p.paper_id).second)
        throw DataError("duplicate paper_id '" + p.paper_id + "'");
  }

  // Backfill sources: every authorship of the input that already carries
  // institutions, keyed by author, ordered by (year, paper_id).
  std::map<std::string, std::vector<detail::BackfillSource>> sources;
  for (const auto& p : in_range)
    for (const auto& a : p.authorships)
      if (!a.institution_ids.empty())
        sources[a.author_id].push_back({p.year, p.paper_id, &a.institution_ids});
  for (auto& [author, list] : sources)
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return std::tie(a.year, a.paper_id) < std::tie(b.year, b.paper_id);
    });

  // Missing institutions come from the author's most recent strictly-earlier
  // paper; ties within that year resolve to the smallest paper_id. Backfill
  // runs fully in place before any paper moves, so the source pointers stay
  // valid; backfilled authorships were empty and are never sources themselves.
  std::vector<bool> keep(in_range.size(), false);
  for (std::size_t i = 0; i < in_range.size(); ++i) {
    PaperRecord& p = in_range[i];
    bool paper_backfilled = false;
    bool incomplete = p.authorships.empty();
    for (auto& a : p.authorships) {
      if (!a.institution_ids.empty()) continue;
      const std::vector<std::string>* found = nullptr;
      auto it = sources.find(a.author_id);
      if (it != sources.end()) {
        int best_year = 0;
        // Sources are sorted by (year, paper_id); the first entry of each year
        // already carries the smallest paper_id.
        for (const auto& src : it->second) {
          if (src.year >= p.year) break;
          if (!found || src.year > best_year) {
            best_year = src.year;
            found = src.institution_ids;
          }
        }
      }
      if (found) {
        a.institution_ids = *found;
        paper_backfilled = true;
      } else {
        incomplete = true;
      }
    }
    if (incomplete) {
      ++rep.dropped_incomplete;
      continue;
    }
    if (paper_backfilled) ++rep.backfilled;
    ++rep.kept;
    keep[i] = true;
  }
  for (std::size_t i = 0; i < in_range.size(); ++i)
    if (keep[i]) corpus.papers_.push_back(std::move(in_range[i]));

  // Institutions: duplicate ids collapse to one record. Conflicting duplicates
  // resolve to the smallest (latitude, longitude, country) so the result does
  // not depend on input row order.
  for (auto& inst : institutions) {
    if (inst.latitude < -90.0 || inst.latitude > 90.0 || inst.longitude < -180.0 ||
        inst.longitude > 180.0)
      throw DataError("institution '" + inst.institution_id +
                      "': coordinates out of range");
    auto [it, inserted] = corpus.institutions_.try_emplace(inst.institution_id, inst);
    if (!inserted) {
      ++rep.institutions_deduplicated;
      auto key = [](const InstitutionRecord& r) {
        return std::tie(r.latitude, r.longitude, r.country_code);
      };
      if (key(inst) < key(it->second)) it->second = inst;
    }
  }

  for (auto& ed : editions) {
    if (ed.latitude < -90.0 || ed.latitude > 90.0 || ed.longitude < -180.0 ||
        ed.longitude > 180.0)
      throw DataError("edition '" + ed.conference_id + "' year " +
                      std::to_string(ed.year) + ": coordinates out of range");
    if (!corpus.editions_.emplace(std::make_pair(ed.conference_id, ed.year), ed).second)
      throw DataError("duplicate ConferenceEdition '" + ed.conference_id +
                      "' year " + std::to_string(ed.year));
    corpus.conference_ids_.insert(ed.conference_id);
  }

  for (auto& [key, value] : gdp.values) {
    if (!(value > 0.0))
      throw DataError("gdp for '" + key.first + "' year " +
                      std::to_string(key.second) + ": value must be > 0");
  }
  corpus.gdp_ = std::move(gdp);

  // Referential integrity of the kept papers.
  for (const auto& p : corpus.papers_) {
    if (!corpus.conference_ids_.count(p.conference_id))
      throw DataError("paper '" + p.paper_id + "': dangling conference '" +
                      p.conference_id + "'");
    for (const auto& a : p.authorships) {
      if (a.institution_ids.empty())
        throw InternalError("cleaning left an empty institution list");
      for (const auto& inst : a.institution_ids)
        if (!corpus.institutions_.count(inst))
          throw DataError("paper '" + p.paper_id + "': dangling institution '" +
                          inst + "'");
    }
    if (p.authorships.empty()) throw InternalError("cleaning kept an authorless paper");
  }

  std::sort(corpus.papers_.begin(), corpus.papers_.end(),
            [](const PaperRecord& a, const PaperRecord& b) {
              return a.paper_id < b.paper_id;
            });

  for (std::size_t i = 0; i < corpus.papers_.size(); ++i) {
    const auto& p = corpus.papers_[i];
    corpus.by_conference_year_[{p.conference_id, p.year}].push_back(i);
    std::set<std::string> authors_seen;
    for (const auto& a : p.authorships)
      if (authors_seen.insert(a.author_id).second)
        corpus.by_author_[a.author_id].push_back(i);
  }
  for (auto& [author, idxs] : corpus.by_author_)
    std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
      const auto& pa = corpus.papers_[a];
      const auto& pb = corpus.papers_[b];
      return std::tie(pa.year, pa.paper_id) < std::tie(pb.year, pb.paper_id);
    });

  if (!corpus.papers_.empty()) {
    std::vector<double> logs;
    logs.reserve(corpus.papers_.size());
    for (const auto& p : corpus.papers_)
      logs.push_back(std::log(static_cast<double>(p.citation_count) + 1.0));
    corpus.mean_log_impact_ =
        ordered_sum(std::move(logs)) / static_cast<double>(corpus.papers_.size());
  }

  return corpus;
}

// ---------------------------------------------------------------------------
// File formats
//
//   papers:       JSON lines {paper_id, year, conference_id, citation_count,
//                 authorships:[{author_id, institution_ids:[...]}]}
//   institutions: CSV institution_id,latitude,longitude,country_code
//   editions:     CSV conference_id,year,latitude,longitude
//   gdp:          CSV country_code,year,gdp_per_capita
// ---------------------------------------------------------------------------

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

inline std::string csv_context(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

inline double csv_double(const std::string& raw, const std::string& field,
                         const std::string& ctx) {
  bool ok = false;
  double v = parse_double_exact(trim(raw), ok);
  if (!ok) throw DataError(ctx + ": field '" + field + "': not a number: '" + raw + "'");
  return v;
}

inline int csv_int(const std::string& raw, const std::string& field,
                   const std::string& ctx) {
  auto t = trim(raw);
  int v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw DataError(ctx + ": field '" + field + "': not an integer: '" + raw + "'");
  return v;
}

/// Strict comma-separated reader: exact header, fixed column count, no quoting.
template <typename RowFn>
void read_csv(const std::string& path, const std::vector<std::string>& header,
              RowFn&& row_fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (!saw_header) {
      std::vector<std::string> got;
      for (auto& f : fields) got.emplace_back(trim(f));
      if (got != header)
        throw DataError(csv_context(path, line_no) + ": bad header, expected '" +
                        [&] {
                          std::string h;
                          for (std::size_t i = 0; i < header.size(); ++i)
                            h += (i ? "," : "") + header[i];
                          return h;
                        }() +
                        "'");
      saw_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw DataError(csv_context(path, line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    row_fn(fields, csv_context(path, line_no));
  }
  if (!saw_header) throw DataError(path + ": empty file (missing header)");
}

}  // namespace detail

inline std::vector<PaperRecord> read_papers_file(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<PaperRecord> papers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string ctx = detail::csv_context(path, line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(ctx + ": invalid JSON record: " + e.what());
    }
    auto require = [&](const char* field) -> const nlohmann::json& {
      if (!j.contains(field))
        throw DataError(ctx + ": field '" + field + "' missing");
      return j.at(field);
    };
    PaperRecord p;
    try {
      p.paper_id = require("paper_id").get<std::string>();
      p.year = require("year").get<int>();
      p.conference_id = require("conference_id").get<std::string>();
      // Papers sometimes lack a citation count; they count as uncited.
      p.citation_count = j.value("citation_count", 0ll);
      for (const auto& ja : require("authorships")) {
        Authorship a;
        if (!ja.contains("author_id"))
          throw DataError(ctx + ": field 'author_id' missing");
        a.author_id = ja.at("author_id").get<std::string>();
        if (ja.contains("institution_ids"))
          a.institution_ids = ja.at("institution_ids").get<std::vector<std::string>>();
        p.authorships.push_back(std::move(a));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(ctx + ": bad field type: " + e.what());
    }
    papers.push_back(std::move(p));
  }
  return papers;
}

inline Corpus load_corpus(const CorpusPaths& paths, const CleaningConfig& config,
                          LoadReport* report = nullptr) {
  std::vector<PaperRecord> papers = read_papers_file(paths.papers);

  std::vector<InstitutionRecord> institutions;
  detail::read_csv(paths.institutions,
                   {"institution_id", "latitude", "longitude", "country_code"},
                   [&](const std::vector<std::string>& f, const std::string& ctx) {
                     InstitutionRecord r;
                     r.institution_id = trim(f[0]);
                     r.latitude = detail::csv_double(f[1], "latitude", ctx);
                     r.longitude = detail::csv_double(f[2], "longitude", ctx);
                     r.country_code = trim(f[3]);
                     if (r.institution_id.empty())
                       throw DataError(ctx + ": field 'institution_id': empty");
                     institutions.push_back(std::move(r));
                   });

  std::vector<ConferenceEdition> editions;
  detail::read_csv(paths.editions, {"conference_id", "year", "latitude", "longitude"},
                   [&](const std::vector<std::string>& f, const std::string& ctx) {
                     ConferenceEdition e;
                     e.conference_id = trim(f[0]);
                     e.year = detail::csv_int(f[1], "year", ctx);
                     e.latitude = detail::csv_double(f[2], "latitude", ctx);
                     e.longitude = detail::csv_double(f[3], "longitude", ctx);
                     if (e.conference_id.empty())
                       throw DataError(ctx + ": field 'conference_id': empty");
                     editions.push_back(std::move(e));
                   });

  GdpTable gdp;
  detail::read_csv(paths.gdp, {"country_code", "year", "gdp_per_capita"},
                   [&](const std::vector<std::string>& f, const std::string& ctx) {
                     std::string country{trim(f[0])};
                     int year = detail::csv_int(f[1], "year", ctx);
                     double value = detail::csv_double(f[2], "gdp_per_capita", ctx);
                     auto [it, inserted] = gdp.values.try_emplace({country, year}, value);
                     if (!inserted && it->second != value)
                       throw DataError(ctx + ": field 'gdp_per_capita': conflicting "
                                             "duplicate for (" +
                                       country + ", " + std::to_string(year) + ")");
                   });

  return Corpus::build(std::move(papers), std::move(institutions), std::move(editions),
                       std::move(gdp), config, report);
}

inline void save_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  {
    auto out = detail::open_output(paths.papers);
    for (const auto& p : corpus.papers()) {
      nlohmann::json j;
      j["paper_id"] = p.paper_id;
      j["year"] = p.year;
      j["conference_id"] = p.conference_id;
      j["citation_count"] = p.citation_count;
      nlohmann::json auths = nlohmann::json::array();
      for (const auto& a : p.authorships) {
        nlohmann::json ja;
        ja["author_id"] = a.author_id;
        ja["institution_ids"] = a.institution_ids;
        auths.push_back(std::move(ja));
      }
      j["authorships"] = std::move(auths);
      out << j.dump() << "\n";
    }
  }
  {
    auto out = detail::open_output(paths.institutions);
    out << "institution_id,latitude,longitude,country_code\n";
    for (const auto& [id, r] : corpus.institutions())
      out << id << ',' << format_exact(r.latitude) << ',' << format_exact(r.longitude)
          << ',' << r.country_code << "\n";
  }
  {
    auto out = detail::open_output(paths.editions);
    out << "conference_id,year,latitude,longitude\n";
    for (const auto& [key, e] : corpus.editions())
      out << key.first << ',' << key.second << ',' << format_exact(e.latitude) << ','
          << format_exact(e.longitude) << "\n";
  }
  {
    auto out = detail::open_output(paths.gdp);
    out << "country_code,year,gdp_per_capita\n";
    for (const auto& [key, v] : corpus.gdp().values)
      out << key.first << ',' << key.second << ',' << format_exact(v) << "\n";
  }
}

struct CoordinateRow {
  std::string kind;  // "venue" or "institution"
  std::string id;
  double latitude = 0.0;
  double longitude = 0.0;
};

/// One row per distinct institution with a paper at the edition, preceded by
/// the venue itself.
inline std::vector<CoordinateRow> export_coordinates(const Corpus& corpus,
                                                     const std::string& conference_id,
                                                     int year) {
  const ConferenceEdition* ed = corpus.edition(conference_id, year);
  if (!ed)
    throw DataError("unknown edition '" + conference_id + "' year " +
                    std::to_string(year));
  std::vector<CoordinateRow> rows;
  rows.push_back({"venue", conference_id, ed->latitude, ed->longitude});
  std::set<std::string> seen;
  for (const PaperRecord* p : corpus.papers_of(conference_id, year))
    for (const auto& a : p->authorships)
      for (const auto& inst : a.institution_ids) seen.insert(inst);
  for (const auto& inst : seen) {
    const auto& r = corpus.institution(inst);
    rows.push_back({"institution", inst, r.latitude, r.longitude});
  }
  return rows;
}

inline void write_coordinates_csv(const std::vector<CoordinateRow>& rows,
                                  std::ostream& out) {
  out << "kind,id,latitude,longitude\n";
  for (const auto& r : rows)
    out << r.kind << ',' << r.id << ',' << format_fixed(r.latitude, 6) << ','
        << format_fixed(r.longitude, 6) << "\n";
}

}  // namespace instimpact
