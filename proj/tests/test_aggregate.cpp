#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "percept/aggregate.hpp"
#include "percept/error.hpp"
#include "percept/rng.hpp"
#include "percept/synthetic.hpp"
#include "percept/util.hpp"
#include "test_support.hpp"

using namespace percept;
using testing::record;

namespace {

AnnotationRecord random_record(Rng& rng, const StatementCatalog& catalog, const std::string& doc) {
  AnnotationRecord r;
  r.annotator_id = "a" + std::to_string(rng.below(1000));
  r.doc_id = doc;
  for (const auto& s : catalog.statements()) {
    if (rng.bernoulli(0.85)) r.ratings[s.id] = 1 + static_cast<int>(rng.below(5));
  }
  if (r.ratings.empty()) r.ratings["fun_to_read"] = 3;
  return r;
}

// Independent win-rate oracle: each annotator compares every pair of the
// documents they rated; a doc's score is its share of wins (ties = half).
std::map<std::string, double> win_rates(const std::vector<AnnotationRecord>& records,
                                        const std::string& statement) {
  std::map<std::string, std::vector<std::pair<std::string, int>>> by_annotator;
  for (const auto& r : records) by_annotator[r.annotator_id].emplace_back(r.doc_id, r.ratings.at(statement));
  std::map<std::string, double> wins;
  std::map<std::string, double> games;
  for (const auto& [annotator, rated] : by_annotator) {
    for (std::size_t i = 0; i < rated.size(); ++i) {
      for (std::size_t j = 0; j < rated.size(); ++j) {
        if (i == j) continue;
        const int a = rated[i].second;
        const int b = rated[j].second;
        wins[rated[i].first] += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
        games[rated[i].first] += 1.0;
      }
    }
  }
  for (auto& [doc, w] : wins) w /= games[doc];
  return wins;
}

}  // namespace

TEST_CASE("annotator profile worked examples") {
  const auto catalog = default_catalog();
  std::map<std::string, int> all_three;
  for (const auto& id : catalog.statement_ids()) all_three[id] = 3;
  const auto mid = annotator_profile(record("a", "d", all_three), catalog);
  CHECK(mid.scores.size() == 12);
  for (const auto& [dim, score] : mid.scores) CHECK(score == 3.0);

  const auto sharing = annotator_profile(
      record("a", "d", {{"share_direct", 4}, {"share_forum", 2}, {"share_unlikely", 1}}), catalog);
  CHECK(sharing.scores.at(DimensionId::kSharing) == doctest::Approx(11.0 / 3.0));
  CHECK(sharing.scores.size() == 1);

  const auto news = annotator_profile(record("a", "d", {{"newsworthy_publish", 5}}), catalog);
  CHECK(news.scores.at(DimensionId::kNewsworthiness) == 5.0);

  const auto raw = annotator_profile(
      record("a", "d", {{"share_direct", 4}, {"share_forum", 2}, {"share_unlikely", 1}}), catalog,
      false);
  CHECK(raw.scores.at(DimensionId::kSharing) == doctest::Approx(7.0 / 3.0));
  CHECK_FALSE(raw.reverse_coded);
}

TEST_CASE("annotator profile errors") {
  const auto catalog = default_catalog();
  CHECK_THROWS_AS(annotator_profile(record("a", "d", {}), catalog), Error);
  try {
    annotator_profile(record("a", "d", {{"bogus", 3}}), catalog);
    FAIL("expected unknown statement");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownStatement);
  }
}

TEST_CASE("article profile worked examples") {
  const auto catalog = default_catalog();
  const auto p1 = annotator_profile(record("a", "d", {{"newsworthy_publish", 2}}), catalog);
  const auto p2 = annotator_profile(record("b", "d", {{"newsworthy_publish", 4}}), catalog);
  const std::vector<PerceptionProfile> one{p1};
  CHECK(article_profile(one).scores == p1.scores);
  const std::vector<PerceptionProfile> two{p1, p2};
  const auto merged = article_profile(two);
  CHECK(merged.scores.at(DimensionId::kNewsworthiness) == 3.0);
  CHECK(merged.n_annotators == 2);

  auto other = p2;
  other.doc_id = "e";
  const std::vector<PerceptionProfile> mixed{p1, other};
  try {
    article_profile(mixed);
    FAIL("expected mixed doc error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMixedDoc);
  }
  CHECK_THROWS_AS(article_profile(std::vector<PerceptionProfile>{}), Error);
}

TEST_CASE("aggregation properties over 1000 random records") {
  const auto catalog = default_catalog();
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const AnnotationRecord r = random_record(rng, catalog, "d");
    const auto profile = annotator_profile(r, catalog);

    // Boundedness.
    for (const auto& [dim, score] : profile.scores) {
      CHECK(score >= 1.0);
      CHECK(score <= 5.0);
    }

    // Reversal consistency: pre-reversing the negative items and reading them
    // as plain statements gives the same profile.
    std::map<std::string, double> flipped;
    for (const auto& [id, v] : r.ratings) {
      flipped[id] = catalog.at(id).reverse_coded ? 6.0 - v : v;
    }
    const auto manual = profile_from_statement_values("d", flipped, catalog, false);
    for (const auto& [dim, score] : profile.scores) {
      CHECK(manual.scores.at(dim) == doctest::Approx(score).epsilon(1e-12));
    }

    // Midpoint fixed point.
    AnnotationRecord mid = r;
    for (auto& [id, v] : mid.ratings) v = 3;
    for (const auto& [dim, score] : annotator_profile(mid, catalog).scores) CHECK(score == 3.0);

    // Permutation invariance and bounds of the article mean.
    std::vector<PerceptionProfile> group{profile};
    const int extra = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < extra; ++k) group.push_back(annotator_profile(random_record(rng, catalog, "d"), catalog));
    const auto merged = article_profile(group);
    rng.shuffle(group);
    const auto shuffled = article_profile(group);
    for (const auto& [dim, score] : merged.scores) {
      CHECK(shuffled.scores.at(dim) == doctest::Approx(score).epsilon(1e-12));
      double lo = 5.0;
      double hi = 1.0;
      for (const auto& p : group) {
        if (auto it = p.scores.find(dim); it != p.scores.end()) {
          lo = std::min(lo, it->second);
          hi = std::max(hi, it->second);
        }
      }
      CHECK(score >= lo - 1e-12);
      CHECK(score <= hi + 1e-12);
    }
  }
}

TEST_CASE("single judge transitive ordering") {
  const auto catalog = default_catalog();
  const std::vector<AnnotationRecord> records = {
      record("j", "doc1", {{"fun_to_read", 5}}),
      record("j", "doc2", {{"fun_to_read", 3}}),
      record("j", "doc3", {{"fun_to_read", 1}})};
  const auto table = rank_scores(records, catalog, DimensionId::kFun);
  CHECK(table.iterations <= 1000);
  CHECK(table.worths.at("doc1") > table.worths.at("doc2"));
  CHECK(table.worths.at("doc2") > table.worths.at("doc3"));
}

TEST_CASE("all ties give equal worths") {
  const auto catalog = default_catalog();
  std::vector<AnnotationRecord> records;
  for (int a = 0; a < 4; ++a) {
    for (int d = 0; d < 5; ++d) {
      records.push_back(record("a" + std::to_string(a), "d" + std::to_string(d), {{"fun_to_read", 4}}));
    }
  }
  const auto table = rank_scores(records, catalog, DimensionId::kFun);
  for (const auto& [doc, worth] : table.worths) CHECK(worth == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rank scores against the brute-force win-rate oracle") {
  const auto catalog = default_catalog();
  Rng rng(10);
  std::vector<double> latent;
  std::vector<AnnotationRecord> records;
  for (int d = 0; d < 10; ++d) latent.push_back(1.0 + 0.4 * d + rng.normal(0.0, 0.2));
  for (int a = 0; a < 20; ++a) {
    for (int d = 0; d < 10; ++d) {
      const int v = static_cast<int>(std::clamp(std::lround(latent[static_cast<std::size_t>(d)] + rng.normal(0.0, 1.0)), 1L, 5L));
      records.push_back(record("a" + std::to_string(a), "d" + std::to_string(d), {{"fun_to_read", v}}));
    }
  }
  const auto rates = win_rates(records, "fun_to_read");
  const auto table = rank_scores(records, catalog, DimensionId::kFun);
  std::vector<double> oracle;
  std::vector<double> fitted;
  for (int d = 0; d < 10; ++d) {
    oracle.push_back(rates.at("d" + std::to_string(d)));
    fitted.push_back(table.worths.at("d" + std::to_string(d)));
  }
  const double golden = *spearman(oracle, latent);
  CHECK(golden == doctest::Approx(0.9636363636363636).epsilon(1e-12));
  CHECK(std::abs(*spearman(fitted, latent) - golden) <= 0.02);
}

TEST_CASE("rank scores are invariant to duplicating every comparison") {
  const auto catalog = default_catalog();
  GeneratorParams params;
  std::vector<NewsDocument> docs(30);
  Rng rng(4);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    docs[i].doc_id = "d" + std::to_string(i);
    params.latent_means[docs[i].doc_id].fill(1.5 + 2.0 * rng.uniform());
  }
  const auto sim = simulate_annotations(docs, 20, 2, params, 8);
  const auto comparisons = paired_comparisons(sim.records, catalog, DimensionId::kImportance);
  auto doubled = comparisons;
  doubled.insert(doubled.end(), comparisons.begin(), comparisons.end());
  const auto a = fit_paired_comparisons(comparisons, DimensionId::kImportance);
  const auto b = fit_paired_comparisons(doubled, DimensionId::kImportance);
  for (const auto& [doc, w] : a.worths) CHECK(b.worths.at(doc) == doctest::Approx(w).epsilon(1e-6));
}

TEST_CASE("shifting one dimension's ratings preserves the rank order") {
  const auto catalog = default_catalog();
  std::vector<AnnotationRecord> records;
  Rng rng(6);
  for (int a = 0; a < 10; ++a) {
    for (int d = 0; d < 8; ++d) {
      records.push_back(record("a" + std::to_string(a), "d" + std::to_string(d),
                               {{"fun_to_read", 1 + static_cast<int>(rng.below(4))}}));
    }
  }
  auto shifted = records;
  for (auto& r : shifted) r.ratings["fun_to_read"] += 1;
  const auto a = rank_scores(records, catalog, DimensionId::kFun);
  const auto b = rank_scores(shifted, catalog, DimensionId::kFun);
  for (const auto& [x, wx] : a.worths) {
    for (const auto& [y, wy] : a.worths) {
      if (wx > wy + 1e-9) CHECK(b.worths.at(x) > b.worths.at(y));
    }
  }
}

TEST_CASE("disconnected documents are excluded and reported") {
  const auto catalog = default_catalog();
  const std::vector<AnnotationRecord> records = {
      record("a", "d1", {{"fun_to_read", 5}}), record("a", "d2", {{"fun_to_read", 2}}),
      record("a", "d3", {{"fun_to_read", 3}}), record("b", "d4", {{"fun_to_read", 4}}),
      record("b", "d5", {{"fun_to_read", 1}})};
  const auto table = rank_scores(records, catalog, DimensionId::kFun);
  CHECK(table.worths.size() == 3);
  CHECK(table.excluded_docs == std::vector<std::string>{"d4", "d5"});
}

TEST_CASE("rating rank agreement") {
  const auto catalog = default_catalog();
  std::vector<PerceptionProfile> profiles;
  RankScoreTable table;
  table.dimension = DimensionId::kFun;
  Rng rng(1);
  for (int d = 0; d < 12; ++d) {
    PerceptionProfile p;
    p.doc_id = "d" + std::to_string(d);
    p.scores[DimensionId::kFun] = 1.0 + 4.0 * rng.uniform();
    table.worths[p.doc_id] = std::exp(p.scores[DimensionId::kFun]);
    profiles.push_back(p);
  }
  CHECK(rating_rank_agreement(profiles, {table}).at(DimensionId::kFun) ==
        doctest::Approx(1.0).epsilon(1e-9));

  for (auto& p : profiles) p.scores[DimensionId::kFun] = 3.0;
  try {
    rating_rank_agreement(profiles, {table});
    FAIL("expected undefined correlation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUndefinedCorrelation);
  }
}

TEST_CASE("moderate-noise corpus: mean rating vs rank agreement is high") {
  const auto catalog = default_catalog();
  SyntheticPoolConfig pool_config;
  pool_config.papers_per_setting = 30;
  pool_config.other_papers = 60;
  const auto pool = synthetic_pool(pool_config, 12);
  std::vector<NewsDocument> docs;
  for (std::size_t i = 0; i < 300 && i < pool.articles.size(); ++i) docs.push_back(clean_document(pool.articles[i]));
  GeneratorParams params;
  params.latent_means = pool.latent_means;
  const auto sim = simulate_annotations(docs, 60, 2, params, 12);
  const auto profiles = article_profiles(sim.records, catalog);
  std::vector<RankScoreTable> tables;
  for (DimensionId dim : all_dimensions()) tables.push_back(rank_scores(sim.records, catalog, dim));
  const auto agreement = rating_rank_agreement(profiles, tables);
  double mean = 0;
  for (const auto& [dim, r] : agreement) mean += r;
  mean /= static_cast<double>(agreement.size());
  MESSAGE("mean rating-rank r = " << mean);
  CHECK(mean >= 0.8);
}

TEST_CASE("rank table csv") {
  RankScoreTable table;
  table.worths = {{"a", 1.0}};
  CHECK(rank_table_csv(table) == "doc_id,worth,log_worth\na,1,0\n");
}
