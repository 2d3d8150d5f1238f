// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit when any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "percept/aggregate.hpp"
#include "percept/analysis.hpp"
#include "percept/catalog.hpp"
#include "percept/corpus.hpp"
#include "percept/error.hpp"
#include "percept/perceiver.hpp"
#include "percept/reliability.hpp"
#include "percept/rng.hpp"
#include "percept/service.hpp"
#include "percept/stats.hpp"
#include "percept/synthetic.hpp"
#include "percept/util.hpp"
#include "test_support.hpp"

#include <httplib.h>

using namespace percept;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < failures_.size(); ++i) out << (i ? "; " : "") << failures_[i];
    if (count_ > failures_.size()) out << " (+" << count_ - failures_.size() << " more)";
    return out.str();
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

int g_failed = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Checker&)>& body) {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("threw: ") + e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(seconds <= budget_seconds, "took " + format_double(seconds) + " s, budget " +
                                          format_double(budget_seconds) + " s");
  std::ostringstream time;
  time.precision(2);
  time << std::fixed << seconds;
  if (c.ok()) {
    std::cout << "[PASS] " << name << " (" << time.str() << " s)" << std::endl;
  } else {
    ++g_failed;
    std::cout << "[FAIL] " << name << " (" << time.str() << " s): " << c.summary() << std::endl;
  }
}

AnnotationRecord record(const std::string& annotator, const std::string& doc,
                        std::map<std::string, int> ratings) {
  return testing::record(annotator, doc, std::move(ratings));
}

// Pairwise Krippendorff alpha straight from the definition.
std::optional<double> brute_alpha(const std::vector<std::vector<std::optional<int>>>& grid, bool ordinal) {
  std::vector<std::vector<int>> units;
  for (const auto& row : grid) {
    std::vector<int> vals;
    for (const auto& v : row) {
      if (v) vals.push_back(*v);
    }
    if (vals.size() >= 2) units.push_back(vals);
  }
  std::vector<int> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  const double n = static_cast<double>(all.size());
  std::vector<double> counts(6, 0.0);
  for (int v : all) counts[static_cast<std::size_t>(v)] += 1.0;
  auto delta = [&](int c, int k) {
    if (!ordinal) return static_cast<double>((c - k) * (c - k));
    const int lo = std::min(c, k);
    const int hi = std::max(c, k);
    double s = 0.0;
    for (int g = lo; g <= hi; ++g) s += counts[static_cast<std::size_t>(g)];
    s -= (counts[static_cast<std::size_t>(lo)] + counts[static_cast<std::size_t>(hi)]) / 2.0;
    return s * s;
  };
  double observed = 0.0;
  for (const auto& u : units) {
    double within = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (i != j) within += delta(u[i], u[j]);
      }
    }
    observed += within / static_cast<double>(u.size() - 1);
  }
  observed /= n;
  double expected = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i != j) expected += delta(all[i], all[j]);
    }
  }
  expected /= n * (n - 1.0);
  if (expected == 0.0) return std::nullopt;
  return 1.0 - observed / expected;
}

ReliabilityMatrix matrix(const std::vector<std::vector<std::optional<int>>>& grid) {
  ReliabilityMatrix m;
  m.values = grid;
  for (std::size_t u = 0; u < grid.size(); ++u) m.units.push_back("u" + std::to_string(u));
  for (std::size_t r = 0; r < grid.front().size(); ++r) m.raters.push_back("r" + std::to_string(r));
  return m;
}

DesignMatrix with_intercept(const std::vector<std::string>& names, const Eigen::MatrixXd& x) {
  DesignMatrix d;
  d.has_intercept = true;
  d.names.push_back(kInterceptName);
  d.names.insert(d.names.end(), names.begin(), names.end());
  d.values.resize(x.rows(), x.cols() + 1);
  d.values.col(0).setOnes();
  d.values.rightCols(x.cols()) = x;
  return d;
}

struct Grouped {
  DesignMatrix design;
  Eigen::VectorXd y;
  std::vector<std::string> groups;
};

Grouped grouped(std::uint64_t seed, int n_groups, int per_group, double sigma_u, bool center) {
  Rng rng(seed);
  const int n = n_groups * per_group;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  Grouped out;
  for (int g = 0; g < n_groups; ++g) {
    const double u = rng.normal(0.0, sigma_u);
    std::vector<double> e(static_cast<std::size_t>(per_group));
    double mean = 0.0;
    for (auto& v : e) {
      v = rng.normal();
      mean += v / per_group;
    }
    for (int r = 0; r < per_group; ++r) {
      const int i = g * per_group + r;
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();
      y[i] = 0.5 * x(i, 0) - 0.3 * x(i, 1) + u + e[static_cast<std::size_t>(r)] - (center ? mean : 0.0);
      out.groups.push_back("g" + std::to_string(g));
    }
  }
  out.design = with_intercept({"x1", "x2"}, x);
  out.y = y;
  return out;
}

std::vector<LabeledDocument> random_labeled(std::size_t n, std::uint64_t seed) {
  static const char* kWords[] = {"cells", "galaxy", "vaccine", "climate", "brain", "ocean", "robot",
                                 "protein", "forest", "quantum", "diet", "sleep", "virus", "planet",
                                 "genome", "memory", "coral", "battery", "fossil", "insect"};
  Rng rng(seed);
  const std::size_t k = default_catalog().size();
  std::vector<LabeledDocument> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    docs[i].doc.doc_id = "doc" + std::to_string(1000 + i);
    for (int w = 0; w < 4; ++w) docs[i].doc.title += std::string(w ? " " : "") + kWords[rng.below(20)];
    for (int w = 0; w < 20; ++w) docs[i].doc.body += std::string(w ? " " : "") + kWords[rng.below(20)];
    docs[i].labels.values.resize(k);
    docs[i].labels.mask.assign(k, true);
    for (auto& v : docs[i].labels.values) v = 1.0 + 4.0 * rng.uniform();
  }
  return docs;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PERCEPT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void catalog_integrity(Checker& c) {
  const auto catalog = default_catalog();
  c.expect(validate_catalog(catalog).ok(), "validate_catalog reports violations");
  c.expect(catalog.size() == 25, "statement count");
  std::map<std::size_t, int> sizes;
  int reversed = 0;
  for (DimensionId dim : all_dimensions()) ++sizes[catalog.statements_of(dim).size()];
  for (const auto& s : catalog.statements()) reversed += s.reverse_coded ? 1 : 0;
  c.expect(sizes[1] == 8 && sizes[2] == 1 && sizes[3] == 1 && sizes[6] == 2, "group sizes");
  c.expect(catalog.statements_of(DimensionId::kInterestingness).size() == 2, "Interestingness size");
  c.expect(catalog.statements_of(DimensionId::kBenefit).size() == 6, "Benefit size");
  c.expect(catalog.statements_of(DimensionId::kSharing).size() == 3, "Sharing size");
  c.expect(catalog.statements_of(DimensionId::kReading).size() == 6, "Reading size");
  c.expect(reversed == 2, "reverse-coded count");
}

void krippendorff(Checker& c) {
  Rng rng(4242);
  int compared = 0;
  while (compared < 100) {
    const std::size_t units = 2 + rng.below(5);
    const std::size_t raters = 2 + rng.below(4);
    const double missing = 0.3 * rng.uniform();
    std::vector<std::vector<std::optional<int>>> grid(units, std::vector<std::optional<int>>(raters));
    for (auto& row : grid) {
      for (auto& cell : row) {
        if (!rng.bernoulli(missing)) cell = 1 + static_cast<int>(rng.below(5));
      }
    }
    const auto m = matrix(grid);
    if (pairable_value_count(m) == 0) continue;
    ++compared;
    for (bool ordinal : {false, true}) {
      const auto want = brute_alpha(grid, ordinal);
      const auto got = krippendorff_alpha(m, ordinal ? DifferenceMetric::kOrdinal : DifferenceMetric::kInterval);
      c.expect(want.has_value() == got.has_value(), "definedness differs");
      if (want && got) c.expect(std::abs(*want - *got) <= 1e-9, "alpha differs from brute force");
    }
  }
  const auto perfect = krippendorff_alpha(matrix({{1, 1}, {5, 5}, {3, 3}}));
  c.expect(perfect && std::abs(*perfect - 1.0) <= 1e-12, "perfect agreement");
  c.expect(!krippendorff_alpha(matrix({{3, 3}, {3, 3}})).has_value(), "constant data should be undefined");
}

void cronbach(Checker& c) {
  c.expect(std::abs(cronbach_alpha({{1, 1, 1}, {2, 2, 2}, {4, 4, 4}, {5, 5, 5}}) - 1.0) <= 1e-12, "correlated items");
  c.expect(std::abs(cronbach_alpha({{1, 1}, {1, 2}, {2, 1}, {2, 2}})) <= 1e-12, "uncorrelated pair");
  const double fixture = cronbach_alpha({{2, 3, 3}, {4, 4, 5}, {3, 2, 3}, {5, 5, 4}, {1, 2, 2}});
  c.expect(std::abs(fixture - 12.0 / 13.0) <= 1e-9, "fixture grid");
}

void aggregation(Checker& c) {
  const auto catalog = default_catalog();
  Rng rng(77);
  auto random_record = [&](const std::string& annotator) {
    AnnotationRecord r;
    r.annotator_id = annotator;
    r.doc_id = "d";
    for (const auto& s : catalog.statements()) {
      if (rng.bernoulli(0.85)) r.ratings[s.id] = 1 + static_cast<int>(rng.below(5));
    }
    if (r.ratings.empty()) r.ratings["fun_to_read"] = 1 + static_cast<int>(rng.below(5));
    return r;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto r = random_record("a");
    const auto p = annotator_profile(r, catalog);
    std::map<std::string, double> flipped;
    for (const auto& [id, v] : r.ratings) flipped[id] = catalog.at(id).reverse_coded ? 6.0 - v : v;
    const auto manual = profile_from_statement_values("d", flipped, catalog, false);
    auto mid = r;
    for (auto& [id, v] : mid.ratings) v = 3;
    for (const auto& [dim, s] : annotator_profile(mid, catalog).scores) c.expect(s == 3.0, "midpoint");
    for (const auto& [dim, s] : p.scores) {
      c.expect(s >= 1.0 && s <= 5.0, "bounds");
      c.expect(std::abs(manual.scores.at(dim) - s) <= 1e-12, "reversal consistency");
    }
    std::vector<PerceptionProfile> group{p, annotator_profile(random_record("b"), catalog),
                                         annotator_profile(random_record("c"), catalog)};
    const auto merged = article_profile(group);
    rng.shuffle(group);
    const auto shuffled = article_profile(group);
    for (const auto& [dim, s] : merged.scores) {
      c.expect(std::abs(shuffled.scores.at(dim) - s) <= 1e-12, "permutation invariance");
      c.expect(s >= 1.0 && s <= 5.0, "article bounds");
    }
  }
}

void sampling(Checker& c) {
  const auto pool = synthetic_pool({}, 3);
  std::vector<NewsDocument> docs;
  for (const auto& a : pool.articles) docs.push_back(clean_document(a));
  SampleConfig config;
  config.seed = 9;
  const auto result = sample_batch(docs, config);
  c.expect(result.warnings.empty(), "deficit warnings present");
  c.expect(result.step_counts.size() == 4 && result.step_counts[0] == 560 && result.step_counts[1] == 150 &&
               result.step_counts[2] == 200 && result.step_counts[3] == 30,
           "step counts");
  c.expect(sample_batch(docs, config).docs == result.docs, "not deterministic");
}

void rank_conversion(Checker& c) {
  const auto catalog = default_catalog();
  const auto single = rank_scores({record("j", "doc1", {{"fun_to_read", 5}}), record("j", "doc2", {{"fun_to_read", 3}}),
                                   record("j", "doc3", {{"fun_to_read", 1}})},
                                  catalog, DimensionId::kFun);
  c.expect(single.worths.at("doc1") > single.worths.at("doc2") && single.worths.at("doc2") > single.worths.at("doc3"),
           "single-judge order");

  std::vector<AnnotationRecord> ties;
  for (int a = 0; a < 3; ++a) {
    for (int d = 0; d < 4; ++d) ties.push_back(record("a" + std::to_string(a), "d" + std::to_string(d), {{"fun_to_read", 2}}));
  }
  for (const auto& [doc, w] : rank_scores(ties, catalog, DimensionId::kFun).worths) {
    c.expect(std::abs(w - 1.0) <= 1e-9, "all-ties symmetry");
  }

  // Same generator as the unit test whose win-rate oracle value was frozen.
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
  const auto table = rank_scores(records, catalog, DimensionId::kFun);
  std::vector<double> fitted;
  for (int d = 0; d < 10; ++d) fitted.push_back(table.worths.at("d" + std::to_string(d)));
  const double golden = 0.9636363636363636;
  c.expect(std::abs(*spearman(fitted, latent) - golden) <= 0.02, "spearman vs win-rate golden");

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
  double mean = 0.0;
  for (const auto& [dim, r] : rating_rank_agreement(profiles, tables)) mean += r / 12.0;
  c.expect(mean >= 0.8, "rating-vs-rank mean r " + format_double(mean));
}

void scorer(Checker& c) {
  const auto catalog = default_catalog();
  const auto split = split_dataset(random_labeled(100, 1), {0.7, 0.1, 0.2}, 42);
  c.expect(split.train.size() == 70 && split.validation.size() == 10 && split.test.size() == 20, "7:1:2 split");

  auto encoder = std::make_shared<HashedNgramEncoder>();
  TrainConfig config;
  config.seed = 3;
  config.epochs = 3;
  const auto a = train(split.train, split.validation, config, encoder, catalog);
  const auto b = train(split.train, split.validation, config, encoder, catalog);
  c.expect(a.weights_blob() == b.weights_blob(), "training not deterministic");

  // Labels as a fixed linear map of the featurizer output.
  auto docs = random_labeled(16, 21);
  Rng rng(22);
  Eigen::MatrixXd map(static_cast<Eigen::Index>(catalog.size()), static_cast<Eigen::Index>(encoder->width()));
  for (Eigen::Index i = 0; i < map.size(); ++i) map.data()[i] = rng.normal(0.0, 0.6);
  for (auto& d : docs) {
    const Eigen::VectorXd y = (map * encoder->encode(model_input_text(d.doc.title, d.doc.body, 512))).array() + 3.0;
    for (std::size_t i = 0; i < catalog.size(); ++i) d.labels.values[i] = y[static_cast<Eigen::Index>(i)];
  }
  TrainConfig overfit;
  overfit.seed = 11;
  const auto model = train(docs, docs, overfit, encoder, catalog);
  std::vector<PerceptionProfile> predicted;
  std::vector<PerceptionProfile> reference;
  for (const auto& d : docs) {
    const auto p = predict(model, d.doc, catalog);
    for (const auto& [id, s] : p.statements.scores) c.expect(s >= 1.0 && s <= 5.0, "prediction out of range");
    predicted.push_back(p.profile);
    reference.push_back(label_profile(d.doc.doc_id, d.labels, catalog));
  }
  const auto overall = evaluate_profiles(predicted, reference).overall;
  c.expect(overall && *overall >= 0.95, "overfit mean r " + format_double(overall.value_or(0.0)));

  testing::TempDir dir;
  save_model(model, dir.path() / "model");
  const auto loaded = load_model(dir.path() / "model", catalog);
  for (const auto& d : split.test) {
    const auto x = predict(model, d.doc, catalog);
    const auto y = predict(loaded, d.doc, catalog);
    for (const auto& [id, s] : x.statements.scores) {
      c.expect(std::abs(s - y.statements.scores.at(id)) <= 1e-6, "save/load mismatch");
    }
  }
}

void lmm(Checker& c) {
  const auto zero = grouped(5, 100, 5, 0.0, true);
  const auto ols = fit_ols(zero.design, zero.y);
  const auto fit = fit_random_intercept_lmm(zero.design, zero.y, zero.groups);
  c.expect((fit.coefficients - ols.coefficients).cwiseAbs().maxCoeff() <= 1e-6, "OLS agreement");
  c.expect(fit.random_intercept_variance <= 1e-6, "zero-variance estimate");

  double b1 = 0.0;
  double b2 = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto data = grouped(1000 + seed, 400, 5, 0.5, false);
    const auto m = fit_random_intercept_lmm(data.design, data.y, data.groups);
    b1 += m.coefficient("x1") / 20.0;
    b2 += m.coefficient("x2") / 20.0;
  }
  c.expect(std::abs(b1 - 0.5) <= 0.05 && std::abs(b2 + 0.3) <= 0.05, "planted coefficient recovery");

  const auto probe = grouped(77, 60, 4, 0.4, false);
  const auto best = fit_random_intercept_lmm(probe.design, probe.y, probe.groups);
  Rng rng(78);
  const LmmOptions options;
  for (int i = 0; i < 100; ++i) {
    const double ratio = std::exp(rng.uniform(options.log_ratio_min, options.log_ratio_max));
    c.expect(best.log_likelihood >= lmm_profiled_log_likelihood(probe.design, probe.y, probe.groups, ratio) - 1e-9,
             "optimizer dominance");
  }
}

void vif_pruning(Checker& c) {
  Rng rng(4);
  Eigen::MatrixXd x(200, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  c.expect(stepwise_vif_prune(with_intercept({"a", "b", "c"}, x)).removals.empty(), "orthogonal no-op");

  Eigen::MatrixXd dup(200, 4);
  dup.leftCols(3) = x;
  dup.col(3) = x.col(1);
  const auto design = with_intercept({"a", "b", "c", "b2"}, dup);
  const auto pruned = stepwise_vif_prune(design);
  c.expect(pruned.removals.size() == 1 && pruned.removals[0].column == "b", "duplicate removal with earlier-column tie-break");
  c.expect(stepwise_vif_prune(design).retained == pruned.retained, "deterministic");

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(6));
    Eigen::MatrixXd m(100, p);
    const Eigen::VectorXd common = Eigen::VectorXd::NullaryExpr(100, [&] { return rng.normal(); });
    for (Eigen::Index j = 0; j < p; ++j) {
      const double load = rng.uniform(0.0, 3.0);
      for (Eigen::Index i = 0; i < 100; ++i) m(i, j) = load * common[i] + rng.normal();
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("c" + std::to_string(j));
    const auto result = stepwise_vif_prune(with_intercept(names, m), 2.0);
    c.expect(result.removals.size() <= static_cast<std::size_t>(p), "terminates within p steps");
  }
}

void engagement(Checker& c) {
  const auto dataset = simulate_engagement_dataset(EngagementSimConfig{}, 7);
  const auto study = engagement_study(dataset, 5.0);
  const double pct = percent_change(study.outcomes.at(kLogScore).model.coefficient("Importance"));
  c.expect(std::abs(pct - 0.68) <= 0.07, "Importance percent change " + format_double(pct));

  auto make = [](const std::string& id, const std::string& url, const std::string& sub, std::int64_t t) {
    SocialPost p;
    p.post_id = id;
    p.url = url;
    p.subreddit = sub;
    p.created_at = t;
    p.title_text = "t";
    return p;
  };
  const auto groups = build_url_groups({make("p1", "https://a.org/x", "science", 100),
                                        make("p2", "a.org/x/", "science", 50), make("p3", "a.org/x", "space", 70),
                                        make("p4", "b.org/y", "science", 10)});
  c.expect(groups.rows.size() == 3, "singleton url excluded");
  std::map<std::string, bool> first;
  for (const auto& r : groups.rows) first[r.post.post_id] = r.post.first_share_of_url_in_subreddit;
  c.expect(!first["p1"] && first["p2"] && first["p3"], "first-share flags");
}

void pipeline(Checker& c) {
  testing::TempDir dir;
  std::vector<std::string> manifests;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir.path() / ("run" + std::to_string(run));
    const auto start = std::chrono::steady_clock::now();
    const int status = run_cli("pipeline --synthetic --seed 7 --output " + out.string());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(status == 0, "pipeline exit status " + std::to_string(status));
    c.expect(seconds < 300.0, "pipeline took " + format_double(seconds) + " s");
    for (const char* artifact : {"corpus/cleaned.jsonl", "sample/sampled.jsonl", "annotations/annotations.jsonl",
                                 "aggregate/profiles.jsonl", "reliability/reliability.csv", "model/weights.bin",
                                 "evaluation/evaluation.csv", "study-perception/perception_study.json",
                                 "study-engagement/engagement_study.json"}) {
      c.expect(fs::exists(out / artifact), std::string("missing ") + artifact);
    }
    manifests.push_back(fs::exists(out / "manifest.json") ? read_text_file(out / "manifest.json") : "");
  }
  c.expect(!manifests[0].empty() && manifests[0] == manifests[1], "manifests differ between runs");
}

void service_contract(Checker& c) {
  const auto catalog = default_catalog();
  auto encoder = std::make_shared<HashedNgramEncoder>(1024);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(catalog.size()), 1024);
  const Eigen::VectorXd cue = encoder->encode("crucial");
  for (const Statement* s : catalog.statements_of(DimensionId::kImportance)) {
    w.row(static_cast<Eigen::Index>(*catalog.index_of(s->id))) = 3.0 * cue.transpose();
  }
  const auto model = std::make_shared<const ScorerModel>(encoder, w, Eigen::VectorXd::Constant(w.rows(), 2.5),
                                                         catalog.statement_ids(), catalog.hash(), catalog.version(),
                                                         TrainingMetadata{});
  EngagementPredictor predictor;
  predictor.outcome = kLogScore;
  predictor.intercept = 3.0;
  predictor.coefficients = {{DimensionId::kImportance, 0.5}};
  predictor.residual_scale = 0.7;

  ServiceConfig config;
  config.port = 0;
  config.max_text_bytes = 1000;
  ScoringService service(config);
  auto post = [&](const std::string& path, const json& body) { return service.handle("POST", path, body.dump()); };

  c.expect(service.handle("GET", "/v1/health", "").body["model_loaded"] == false, "health before load");
  c.expect(post("/v1/score", {{"text", "x"}}).status == 503, "503 before load");
  service.set_model(model);
  c.expect(service.handle("GET", "/v1/health", "").body["model_loaded"] == true, "health after load");
  const auto ok = post("/v1/score", {{"text", "a crucial result"}});
  c.expect(ok.status == 200 && ok.body["statement_scores"].size() == 25 && ok.body["profile"].size() == 12,
           "score contract");
  c.expect(post("/v1/score", {{"text", ""}}).status == 400, "400 on empty text");
  c.expect(post("/v1/score", {{"text", std::string(1001, 'a')}}).status == 413, "413 on oversize text");
  const json variants = {{"variants", {{{"label", "a"}, {"text", "result"}}, {{"label", "b"}, {"text", "crucial result"}}}}};
  c.expect(post("/v1/compare", variants).status == 503, "503 without predictor");
  service.set_model(model, {predictor});
  const auto cmp = post("/v1/compare", variants);
  c.expect(cmp.status == 200 && cmp.body["deltas"][0]["engagement"][kLogScore]["delta"].get<double>() > 0.0,
           "compare delta sign");
  const auto same = post("/v1/compare", {{"variants", {{{"label", "a"}, {"text", "same"}}, {{"label", "b"}, {"text", "same"}}}}});
  for (const auto& [k, v] : same.body["deltas"][0]["profile"].items()) c.expect(v.get<double>() == 0.0, "zero deltas");
  c.expect(post("/v1/compare", {{"variants", {{{"label", "a"}, {"text", "x"}}}}}).status == 400, "400 on one variant");

  const int port = service.start();
  std::vector<std::string> expected;
  for (int i = 0; i < 100; ++i) {
    expected.push_back(post("/v1/score", {{"text", "text " + std::to_string(i) + (i % 2 ? " crucial" : "")}}).body.dump());
  }
  std::vector<std::string> got(100);
  std::vector<std::thread> threads;
  for (int i = 0; i < 100; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client client("127.0.0.1", port);
      client.set_read_timeout(30, 0);
      const auto res = client.Post("/v1/score", json{{"text", "text " + std::to_string(i) + (i % 2 ? " crucial" : "")}}.dump(),
                                   "application/json");
      if (res && res->status == 200) got[static_cast<std::size_t>(i)] = json::parse(res->body).dump();
    });
  }
  for (auto& t : threads) t.join();
  service.stop();
  int mismatched = 0;
  for (int i = 0; i < 100; ++i) mismatched += got[static_cast<std::size_t>(i)] == expected[static_cast<std::size_t>(i)] ? 0 : 1;
  c.expect(mismatched == 0, std::to_string(mismatched) + " concurrent responses differ from sequential");
}

}  // namespace

int main() {
  criterion("catalog integrity", 1.0, catalog_integrity);
  criterion("krippendorff oracle equivalence", 10.0, krippendorff);
  criterion("cronbach golden values", 1.0, cronbach);
  criterion("aggregation invariants", 30.0, aggregation);
  criterion("sampling counts", 30.0, sampling);
  criterion("rank conversion", 30.0, rank_conversion);
  criterion("scorer (light backend)", 120.0, scorer);
  criterion("mixed model", 60.0, lmm);
  criterion("vif pruning", 10.0, vif_pruning);
  criterion("engagement study end-to-end", 60.0, engagement);
  criterion("pipeline smoke", 600.0, pipeline);
  criterion("service contract", 60.0, service_contract);
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criteria failed") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
