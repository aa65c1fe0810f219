#include "catch2/catch_amalgamated.hpp"

#include "fixtures.hpp"

#include "instimpact/experiment.hpp"

using namespace instimpact;
using Catch::Approx;

namespace {

const char* kFullConfig = R"(
# experiment description
[corpus]
papers = data/papers.jsonl
institutions = data/institutions.csv
editions = data/editions.csv
gdp = data/gdp.csv
min_year = 2000
max_year = 2015

[experiment]
conferences = kdd, icml
train_years = 2004..2010
test_year = 2015
aif_delta_t = 3
author_scope = conference
ndcg_n = 10
percents = 10,50,100
learners = second_order
variants = with_relevance
out = reports

[boost]
rounds = 25
max_depth = 3
learning_rate = 0.2
lambda = 0.5
gamma = 0.1
min_child_weight = 2

[synth]
institutions = 9
seed = 123
)";

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_config(in, "test.ini");
}

}  // namespace

TEST_CASE("config parsing") {
  SECTION("all sections round into the config struct") {
    const ExperimentConfig cfg = parse(kFullConfig);
    CHECK(cfg.paths.papers == "data/papers.jsonl");
    CHECK(cfg.years.min_year == 2000);
    CHECK(cfg.conferences == std::vector<std::string>{"kdd", "icml"});
    CHECK(cfg.train_years.first == 2004);
    CHECK(cfg.train_years.last == 2010);
    CHECK(cfg.test_year == 2015);
    CHECK(cfg.aif_delta_t == 3);
    CHECK(cfg.author_scope == AuthorMetricScope::conference);
    CHECK(cfg.ndcg_n == 10);
    CHECK(cfg.percents == std::vector<int>{10, 50, 100});
    CHECK(cfg.learners == std::vector<BoostParams::Learner>{
                              BoostParams::Learner::second_order});
    CHECK(cfg.variants == std::vector<Variant>{Variant::with_relevance});
    CHECK(cfg.out_dir == "reports");
    CHECK(cfg.boost.rounds == 25);
    CHECK(cfg.boost.max_depth == 3);
    CHECK(cfg.boost.learning_rate == Approx(0.2));
    CHECK(cfg.boost.lambda == Approx(0.5));
    CHECK(cfg.boost.gamma == Approx(0.1));
    CHECK(cfg.boost.min_child_weight == Approx(2.0));
    CHECK(cfg.synth.institutions == 9);
    CHECK(cfg.synth.seed == 123);
    CHECK_NOTHROW(cfg.validate());
  }
  SECTION("defaults cover every omitted key") {
    const ExperimentConfig cfg = parse("[experiment]\nconferences = kdd\n");
    CHECK(cfg.train_years.first == 2004);
    CHECK(cfg.percents.size() == 10);
    CHECK(cfg.learners.size() == 2);
    CHECK(cfg.variants.size() == 2);
    CHECK(cfg.boost.rounds == 100);
    CHECK(cfg.boost.learning_rate == Approx(0.1));
    CHECK_NOTHROW(cfg.validate());
  }
  SECTION("percents accept the 'all' shorthand") {
    const ExperimentConfig cfg =
        parse("[experiment]\nconferences = kdd\npercents = all\n");
    CHECK(cfg.percents == std::vector<int>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
  }
  SECTION("unknown keys are named in the error") {
    CHECK_THROWS_WITH(parse("[experiment]\nconference_list = kdd\n"),
                      Catch::Matchers::ContainsSubstring("conference_list"));
    CHECK_THROWS_WITH(parse("[nonsense]\nx = 1\n"),
                      Catch::Matchers::ContainsSubstring("nonsense"));
  }
  SECTION("malformed values are named") {
    CHECK_THROWS_WITH(parse("[experiment]\ntrain_years = 2004-2010\n"),
                      Catch::Matchers::ContainsSubstring("train_years"));
    CHECK_THROWS_WITH(parse("[boost]\nrounds = many\n"),
                      Catch::Matchers::ContainsSubstring("rounds"));
    CHECK_THROWS_WITH(parse("[experiment]\nlearners = magic\n"),
                      Catch::Matchers::ContainsSubstring("magic"));
    CHECK_THROWS_AS(parse("[experiment]\nconferences = kdd\nconferences = x\n"),
                    ConfigError);
  }
  SECTION("validation catches bad ranges and names the field") {
    ExperimentConfig cfg = parse(kFullConfig);
    cfg.percents = {15};
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("percents"));

    cfg = parse(kFullConfig);
    cfg.train_years.first = 2002;
    CHECK_THROWS_WITH(cfg.validate(),
                      Catch::Matchers::ContainsSubstring("train_years"));

    cfg = parse(kFullConfig);
    cfg.test_year = 2016;
    CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("test_year"));

    cfg = parse(kFullConfig);
    cfg.boost.learning_rate = 1.5;
    CHECK_THROWS_WITH(cfg.validate(),
                      Catch::Matchers::ContainsSubstring("learning_rate"));

    cfg = parse(kFullConfig);
    cfg.conferences = {"kdd", "kdd"};
    CHECK_THROWS_WITH(cfg.validate(),
                      Catch::Matchers::ContainsSubstring("conferences"));
  }
  SECTION("the config hash tracks experiment-relevant fields") {
    const ExperimentConfig a = parse(kFullConfig);
    ExperimentConfig b = parse(kFullConfig);
    CHECK(a.config_hash() == b.config_hash());
    b.boost.lambda = 0.75;
    CHECK(a.config_hash() != b.config_hash());
    ExperimentConfig c = parse(kFullConfig);
    c.out_dir = "elsewhere";  // output location is not part of the experiment
    CHECK(a.config_hash() == c.config_hash());
  }
}

namespace {

ExperimentConfig small_experiment(const fixtures::TempDir& dir) {
  SyntheticSpec spec;
  spec.institutions = 12;
  spec.authors = 48;
  spec.conferences = 2;
  spec.papers_per_year = 8;
  spec.first_year = 2000;
  spec.last_year = 2011;
  spec.seed = 21;
  const CorpusPaths paths = generate_synthetic(spec, (dir.path / "data").string());

  ExperimentConfig cfg;
  cfg.paths = paths;
  cfg.years = {2000, 2011};
  cfg.conferences = {"conf00", "conf01"};
  cfg.train_years = {2004, 2010};
  cfg.test_year = 2011;
  cfg.percents = {50, 100};
  cfg.learners = {BoostParams::Learner::second_order, BoostParams::Learner::gbdt};
  cfg.variants = {Variant::with_relevance, Variant::without_relevance};
  cfg.boost.rounds = 20;
  cfg.synth = spec;
  cfg.out_dir = (dir.path / "out").string();
  return cfg;
}

}  // namespace

TEST_CASE("run_experiment") {
  fixtures::TempDir dir("experiment");
  ExperimentConfig cfg = small_experiment(dir);
  const ExperimentResult result = run_experiment(cfg);

  SECTION("one cell per conference x learner x variant x percent") {
    CHECK(result.cells.size() == 2u * 2u * 2u * 2u);
  }
  SECTION("report files exist") {
    namespace fs = std::filesystem;
    for (const char* name :
         {"ndcg_cells.tsv", "manifest.tsv",
          "ndcg_table_second_order_with_relevance.tsv",
          "ndcg_table_gbdt_without_relevance.tsv",
          "importance_groups_conf00_second_order_with_relevance.tsv",
          "importance_features_conf01_gbdt_without_relevance.tsv"})
      CHECK(fs::exists(dir.path / "out" / name));
  }
  SECTION("every cell's model file exists and loads") {
    for (const auto& cell : result.cells) {
      std::ifstream in((dir.path / "out" / cell.model_file).string());
      REQUIRE(in.good());
      const BoostedModel model = load_model(in);
      CHECK(model.params.learner == cell.learner);
      const std::size_t expected_features =
          cell.variant == Variant::without_relevance
              ? (cell.percent == 50 ? 13 : 26)
              : (cell.percent == 50 ? 19 : 38);
      CHECK(model.feature_names.size() == expected_features);
    }
  }
  SECTION("the manifest ties cells to model files") {
    const std::string manifest = fixtures::read_text(result.manifest_file);
    CHECK_THAT(manifest, Catch::Matchers::ContainsSubstring("config_hash\t"));
    for (const auto& cell : result.cells)
      CHECK_THAT(manifest, Catch::Matchers::ContainsSubstring(cell.model_file));
  }
  SECTION("rerunning reproduces every report byte for byte") {
    std::map<std::string, std::string> before;
    namespace fs = std::filesystem;
    for (const auto& entry : fs::recursive_directory_iterator(dir.path / "out"))
      if (entry.is_regular_file())
        before[entry.path().string()] = fixtures::read_text(entry.path().string());
    const ExperimentResult again = run_experiment(cfg);
    CHECK(again.cells.size() == result.cells.size());
    for (const auto& [path, content] : before)
      CHECK(content == fixtures::read_text(path));
  }
  SECTION("unknown conferences are named") {
    cfg.conferences = {"conf99"};
    CHECK_THROWS_WITH(run_experiment(cfg),
                      Catch::Matchers::ContainsSubstring("conf99"));
  }
}
