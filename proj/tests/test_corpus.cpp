#include "catch2/catch_amalgamated.hpp"

#include "fixtures.hpp"

#include "instimpact/corpus.hpp"

using namespace instimpact;
using fixtures::by;
using fixtures::paper;

namespace {

const char* kInstitutionsCsv =
    "institution_id,latitude,longitude,country_code\n"
    "mit,42.36,-71.09,US\n"
    "eth,47.38,8.55,CH\n";

const char* kEditionsCsv =
    "conference_id,year,latitude,longitude\n"
    "kdd,2000,40.7,-74.0\n"
    "kdd,2001,48.8,2.3\n"
    "kdd,2002,35.6,139.7\n"
    "kdd,2003,37.7,-122.4\n";

const char* kGdpCsv =
    "country_code,year,gdp_per_capita\n"
    "US,2001,45000\n"
    "CH,2001,60000\n";

fixtures::TempDir write_fixture(const std::string& tag, const std::string& papers,
                                const std::string& institutions = kInstitutionsCsv,
                                const std::string& editions = kEditionsCsv,
                                const std::string& gdp = kGdpCsv) {
  fixtures::TempDir dir(tag);
  fixtures::write_text(dir.file("papers.jsonl"), papers);
  fixtures::write_text(dir.file("institutions.csv"), institutions);
  fixtures::write_text(dir.file("editions.csv"), editions);
  fixtures::write_text(dir.file("gdp.csv"), gdp);
  return dir;
}

}  // namespace

TEST_CASE("backfill pulls institutions from the most recent earlier paper") {
  const std::string papers =
      R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":3,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
      "\n"
      R"({"paper_id":"p2","year":2002,"conference_id":"kdd","citation_count":1,"authorships":[{"author_id":"a","institution_ids":["eth"]}]})"
      "\n"
      R"({"paper_id":"p3","year":2003,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":[]}]})"
      "\n";
  auto dir = write_fixture("backfill", papers);
  LoadReport report;
  const Corpus corpus = load_corpus(fixtures::paths_in(dir), {2000, 2003}, &report);

  CHECK(report.kept == 3);
  CHECK(report.backfilled == 1);
  CHECK(report.dropped_incomplete == 0);
  // Most recent earlier year is 2002 -> eth, not 2001's mit.
  const auto papers_2003 = corpus.papers_of("kdd", 2003);
  REQUIRE(papers_2003.size() == 1);
  CHECK(papers_2003[0]->authorships[0].institution_ids ==
        std::vector<std::string>{"eth"});
}

TEST_CASE("backfill ties within a year resolve to the smallest paper_id") {
  const std::string papers =
      R"({"paper_id":"p2","year":2001,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["eth"]}]})"
      "\n"
      R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
      "\n"
      R"({"paper_id":"p3","year":2002,"conference_id":"kdd","authorships":[{"author_id":"a"}]})"
      "\n";
  auto dir = write_fixture("backfill_tie", papers);
  const Corpus corpus = load_corpus(fixtures::paths_in(dir), {2000, 2003});
  const auto papers_2002 = corpus.papers_of("kdd", 2002);
  REQUIRE(papers_2002.size() == 1);
  CHECK(papers_2002[0]->authorships[0].institution_ids ==
        std::vector<std::string>{"mit"});
  // Missing citation_count fields load as zero rather than dropping the paper.
  CHECK(papers_2002[0]->citation_count == 0);
}

TEST_CASE("backfill never reads the same or a later year") {
  const std::string papers =
      R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":[]}]})"
      "\n"
      R"({"paper_id":"p2","year":2001,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
      "\n"
      R"({"paper_id":"p3","year":2002,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["eth"]}]})"
      "\n";
  auto dir = write_fixture("backfill_strict", papers);
  LoadReport report;
  const Corpus corpus = load_corpus(fixtures::paths_in(dir), {2000, 2003}, &report);
  // p1 has no strictly-earlier source, so it is dropped despite the same-year
  // and later-year papers carrying institutions.
  CHECK(report.kept == 2);
  CHECK(report.dropped_incomplete == 1);
  CHECK(corpus.papers_of("kdd", 2001).size() == 1);
}

TEST_CASE("clean corpus loads unchanged") {
  const std::string papers =
      R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":3,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
      "\n"
      R"({"paper_id":"p2","year":2002,"conference_id":"kdd","citation_count":1,"authorships":[{"author_id":"b","institution_ids":["eth"]},{"author_id":"a","institution_ids":["mit"]}]})"
      "\n";
  auto dir = write_fixture("identity", papers);
  LoadReport report;
  const Corpus corpus = load_corpus(fixtures::paths_in(dir), {2000, 2003}, &report);
  CHECK(report.papers_read == 2);
  CHECK(report.kept == 2);
  CHECK(report.backfilled == 0);
  CHECK(report.dropped_incomplete == 0);
  CHECK(report.dropped_out_of_range == 0);
  REQUIRE(corpus.papers().size() == 2);
  CHECK(corpus.papers()[0].paper_id == "p1");
  CHECK(corpus.papers()[1].authorships[0].author_id == "b");
}

TEST_CASE("unresolvable author institutions drop the paper") {
  const std::string papers =
      R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":3,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
      "\n"
      R"({"paper_id":"p2","year":2002,"conference_id":"kdd","citation_count":1,"authorships":[{"author_id":"b","institution_ids":["eth"]}]})"
      "\n"
      R"({"paper_id":"p3","year":2002,"conference_id":"kdd","citation_count":1,"authorships":[{"author_id":"c","institution_ids":[]}]})"
      "\n";
  auto dir = write_fixture("drop", papers);
  LoadReport report;
  const Corpus corpus = load_corpus(fixtures::paths_in(dir), {2000, 2003}, &report);
  CHECK(report.kept == 2);
  CHECK(report.dropped_incomplete == 1);
  CHECK(corpus.papers().size() == 2);
}

TEST_CASE("papers outside the configured year range are filtered") {
  const std::string papers =
      R"({"paper_id":"p1","year":1999,"conference_id":"kdd","citation_count":3,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
      "\n"
      R"({"paper_id":"p2","year":2002,"conference_id":"kdd","citation_count":1,"authorships":[{"author_id":"b","institution_ids":["eth"]}]})"
      "\n";
  auto dir = write_fixture("range", papers);
  LoadReport report;
  const Corpus corpus = load_corpus(fixtures::paths_in(dir), {2000, 2003}, &report);
  CHECK(report.dropped_out_of_range == 1);
  CHECK(report.kept == 1);
  CHECK(corpus.papers().size() == 1);
}

TEST_CASE("malformed records are reported with line and field") {
  SECTION("bad JSON") {
    auto dir = write_fixture("badjson", "{not json}\n");
    CHECK_THROWS_WITH(load_corpus(fixtures::paths_in(dir), {2000, 2003}),
                      Catch::Matchers::ContainsSubstring(":1:"));
  }
  SECTION("missing field") {
    auto dir = write_fixture(
        "missingfield",
        R"({"paper_id":"p1","conference_id":"kdd","authorships":[]})" "\n");
    CHECK_THROWS_WITH(load_corpus(fixtures::paths_in(dir), {2000, 2003}),
                      Catch::Matchers::ContainsSubstring("year"));
  }
  SECTION("negative citations") {
    auto dir = write_fixture(
        "negcite",
        R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":-2,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
        "\n");
    CHECK_THROWS_AS(load_corpus(fixtures::paths_in(dir), {2000, 2003}), DataError);
  }
  SECTION("bad institution latitude") {
    auto dir = write_fixture("badlat", "",
                             "institution_id,latitude,longitude,country_code\n"
                             "mit,x,-71.09,US\n");
    CHECK_THROWS_WITH(load_corpus(fixtures::paths_in(dir), {2000, 2003}),
                      Catch::Matchers::ContainsSubstring("latitude"));
  }
  SECTION("wrong CSV header") {
    auto dir = write_fixture("badheader", "", "id,lat,lon,country\n");
    CHECK_THROWS_AS(load_corpus(fixtures::paths_in(dir), {2000, 2003}), DataError);
  }
  SECTION("missing file") {
    fixtures::TempDir dir("missingfile");
    CHECK_THROWS_AS(load_corpus(fixtures::paths_in(dir), {2000, 2003}), DataError);
  }
}

TEST_CASE("referential and uniqueness violations are rejected") {
  SECTION("dangling institution") {
    auto dir = write_fixture(
        "dangling_inst",
        R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["unknown"]}]})"
        "\n");
    CHECK_THROWS_WITH(load_corpus(fixtures::paths_in(dir), {2000, 2003}),
                      Catch::Matchers::ContainsSubstring("unknown"));
  }
  SECTION("dangling conference") {
    auto dir = write_fixture(
        "dangling_conf",
        R"({"paper_id":"p1","year":2001,"conference_id":"icml","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
        "\n");
    CHECK_THROWS_AS(load_corpus(fixtures::paths_in(dir), {2000, 2003}), DataError);
  }
  SECTION("duplicate edition") {
    auto dir = write_fixture("dup_edition", "", kInstitutionsCsv,
                             "conference_id,year,latitude,longitude\n"
                             "kdd,2001,40.7,-74.0\n"
                             "kdd,2001,40.7,-74.0\n");
    CHECK_THROWS_WITH(load_corpus(fixtures::paths_in(dir), {2000, 2003}),
                      Catch::Matchers::ContainsSubstring("duplicate ConferenceEdition"));
  }
  SECTION("duplicate paper id") {
    const std::string papers =
        R"({"paper_id":"p1","year":2001,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
        "\n"
        R"({"paper_id":"p1","year":2002,"conference_id":"kdd","citation_count":0,"authorships":[{"author_id":"a","institution_ids":["mit"]}]})"
        "\n";
    auto dir = write_fixture("dup_paper", papers);
    CHECK_THROWS_WITH(load_corpus(fixtures::paths_in(dir), {2000, 2003}),
                      Catch::Matchers::ContainsSubstring("duplicate paper_id"));
  }
  SECTION("conflicting GDP duplicate") {
    auto dir = write_fixture("dup_gdp", "", kInstitutionsCsv, kEditionsCsv,
                             "country_code,year,gdp_per_capita\n"
                             "US,2001,45000\n"
                             "US,2001,46000\n");
    CHECK_THROWS_AS(load_corpus(fixtures::paths_in(dir), {2000, 2003}), DataError);
  }
  SECTION("non-positive GDP") {
    auto dir = write_fixture("bad_gdp", "", kInstitutionsCsv, kEditionsCsv,
                             "country_code,year,gdp_per_capita\n"
                             "US,2001,0\n");
    CHECK_THROWS_AS(load_corpus(fixtures::paths_in(dir), {2000, 2003}), DataError);
  }
}

TEST_CASE("duplicate institutions deduplicate order-independently") {
  const std::string base =
      "institution_id,latitude,longitude,country_code\n"
      "mit,42.36,-71.09,US\n";
  const std::string dup_a = base + "mit,42.36,-71.09,US\n";
  const std::string reversed =
      "institution_id,latitude,longitude,country_code\n"
      "mit,43.00,-71.09,US\n"
      "mit,42.36,-71.09,US\n";
  const std::string forward =
      "institution_id,latitude,longitude,country_code\n"
      "mit,42.36,-71.09,US\n"
      "mit,43.00,-71.09,US\n";

  auto dir1 = write_fixture("dedup1", "", dup_a);
  LoadReport report;
  const Corpus c1 = load_corpus(fixtures::paths_in(dir1), {2000, 2003}, &report);
  CHECK(report.institutions_deduplicated == 1);
  CHECK(c1.institutions().size() == 1);

  auto dir2 = write_fixture("dedup2", "", forward);
  auto dir3 = write_fixture("dedup3", "", reversed);
  const Corpus c2 = load_corpus(fixtures::paths_in(dir2), {2000, 2003});
  const Corpus c3 = load_corpus(fixtures::paths_in(dir3), {2000, 2003});
  CHECK(c2.institution("mit").latitude == c3.institution("mit").latitude);
  CHECK(c2.institution("mit").latitude == 42.36);
}

TEST_CASE("cleaning never invents identifiers") {
  const Corpus corpus = fixtures::small_corpus();
  const std::set<std::string> input_institutions = {"mit", "eth", "nus"};
  for (const auto& p : corpus.papers())
    for (const auto& a : p.authorships)
      for (const auto& inst : a.institution_ids)
        CHECK(input_institutions.count(inst) == 1);
}

TEST_CASE("kept papers satisfy the credit-conservation prerequisites") {
  const Corpus corpus = fixtures::small_corpus();
  for (const auto& p : corpus.papers()) {
    CHECK(!p.authorships.empty());
    for (const auto& a : p.authorships) CHECK(!a.institution_ids.empty());
  }
}

TEST_CASE("load is idempotent over save_corpus") {
  auto spec = SyntheticSpec{};
  spec.institutions = 12;
  spec.authors = 30;
  spec.conferences = 2;
  spec.papers_per_year = 8;
  spec.first_year = 2000;
  spec.last_year = 2006;
  spec.seed = 5;
  fixtures::TempDir dir("idempotent");
  const CorpusPaths generated = generate_synthetic(spec, dir.path.string());
  const Corpus first = load_corpus(generated, {2000, 2006});

  fixtures::TempDir save1("idempotent_s1");
  save_corpus(first, fixtures::paths_in(save1));
  const Corpus second = load_corpus(fixtures::paths_in(save1), {2000, 2006});

  fixtures::TempDir save2("idempotent_s2");
  save_corpus(second, fixtures::paths_in(save2));
  for (const char* name :
       {"papers.jsonl", "institutions.csv", "editions.csv", "gdp.csv"})
    CHECK(fixtures::read_text(save1.file(name)) == fixtures::read_text(save2.file(name)));
}

TEST_CASE("papers_of") {
  std::vector<PaperRecord> papers;
  for (int i = 5; i >= 1; --i)
    papers.push_back(paper("p" + std::to_string(i), 2013, "kdd", 0,
                           {by("a" + std::to_string(i), {"mit"})}));
  papers.push_back(paper("q1", 2013, "icml", 0, {by("z", {"mit"})}));
  std::vector<ConferenceEdition> editions = fixtures::editions_for("kdd", 2012, 2014);
  const auto icml = fixtures::editions_for("icml", 2012, 2014);
  editions.insert(editions.end(), icml.begin(), icml.end());
  const Corpus corpus = Corpus::build(std::move(papers),
                                      {fixtures::inst("mit", 42.36, -71.09, "US")},
                                      std::move(editions),
                                      fixtures::gdp_for({"US"}, 2012, 2014),
                                      {2012, 2014});

  SECTION("empty year") { CHECK(corpus.papers_of("kdd", 2012).empty()); }
  SECTION("exactly the edition's papers, sorted by paper_id") {
    const auto result = corpus.papers_of("kdd", 2013);
    REQUIRE(result.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
      CHECK(result[i]->paper_id == "p" + std::to_string(i + 1));
  }
  SECTION("no cross-conference leakage") {
    for (const auto* p : corpus.papers_of("kdd", 2013))
      CHECK(p->conference_id == "kdd");
    CHECK(corpus.papers_of("icml", 2013).size() == 1);
  }
  SECTION("unknown conference") {
    CHECK_THROWS_AS(corpus.papers_of("nips", 2013), DataError);
  }
}

TEST_CASE("export_coordinates") {
  const Corpus corpus = fixtures::small_corpus();

  SECTION("venue row plus one row per distinct institution") {
    // 2005 has p005 (carol at nus) and p006 (bob at eth, alice at mit).
    const auto rows = export_coordinates(corpus, "kdd", 2005);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].kind == "venue");
    CHECK(rows[0].id == "kdd");
    CHECK(rows[1].kind == "institution");
    CHECK(rows[1].id == "eth");
    CHECK(rows[2].id == "mit");
    CHECK(rows[3].id == "nus");
  }
  SECTION("edition without papers yields only the venue") {
    const auto rows = export_coordinates(corpus, "kdd", 2000);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].kind == "venue");
  }
  SECTION("institutions on several papers appear once") {
    // 2004: p004 credits mit twice (alice, carol) and nus once.
    const auto rows = export_coordinates(corpus, "kdd", 2004);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].id == "mit");
    CHECK(rows[2].id == "nus");
  }
  SECTION("an institution with two papers at one edition is listed once") {
    std::vector<PaperRecord> papers = {
        paper("p1", 2005, "kdd", 0, {by("a", {"mit"})}),
        paper("p2", 2005, "kdd", 0, {by("b", {"mit"})}),
    };
    const Corpus two = Corpus::build(std::move(papers),
                                     {fixtures::inst("mit", 42.36, -71.09, "US")},
                                     fixtures::editions_for("kdd", 2000, 2010),
                                     fixtures::gdp_for({"US"}, 2000, 2010),
                                     {2000, 2010});
    const auto rows = export_coordinates(two, "kdd", 2005);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].id == "mit");
  }
  SECTION("unknown edition") {
    CHECK_THROWS_AS(export_coordinates(corpus, "kdd", 2050), DataError);
  }
  SECTION("csv shape") {
    std::ostringstream os;
    write_coordinates_csv(export_coordinates(corpus, "kdd", 2000), os);
    CHECK(os.str().substr(0, 26) == "kind,id,latitude,longitude");
  }
}
