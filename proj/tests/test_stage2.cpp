// Copyright 2026-present the lir project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "lir/error.hpp"
#include "lir/eval.hpp"
#include "lir/stage1.hpp"
#include "lir/stage2.hpp"
#include "support.hpp"

using namespace lir;

#define CHECK_ERROR_KIND(expr, expected)            \
  do {                                              \
    try {                                           \
      (void)(expr);                                 \
      FAIL("expected an Error of kind " #expected); \
    } catch (const Error& e) {                      \
      CHECK(e.kind() == ErrorKind::expected);       \
    }                                               \
  } while (0)

namespace {

ChildMatrix matrix_of(const std::vector<Vector>& rows) {
  ChildMatrix m;
  m.rows = rows.size();
  m.dim = rows.empty() ? 0 : rows[0].size();
  for (size_t i = 0; i < rows.size(); ++i) {
    m.child_ids.push_back(testsupport::padded_id("c", i));
    m.modalities.push_back(Modality::text);
    m.data.insert(m.data.end(), rows[i].begin(), rows[i].end());
  }
  return m;
}

QueryEmbedding query_of(const std::vector<Vector>& tokens) {
  QueryEmbedding q;
  q.query_id = "q";
  q.tokens = tokens;
  return q;
}

std::vector<ScoredParent> all_parents(const Corpus& corpus) {
  std::vector<ScoredParent> shortlist;
  for (const ParentDoc& p : corpus.parents) {
    shortlist.push_back({p.parent_id, 0.0, Stage::stage1});
  }
  return shortlist;
}

}  // namespace

TEST_CASE("exact scoring sums per-token best matches") {
  // Token 1 matches the first row exactly (1.0); token 2's best match is the
  // second row's 0.8 component: total 1.8.
  ChildMatrix m = matrix_of({{1, 0}, {0.6f, 0.8f}});
  QueryEmbedding q = query_of({{1, 0}, {0, 1}});
  CHECK(exact_maxsim(q, m) == doctest::Approx(1.8).epsilon(1e-6));
}

TEST_CASE("a single token scores its single best child") {
  ChildMatrix m = matrix_of({{0, 1}, {1, 0}});
  CHECK(exact_maxsim(query_of({{1, 0}}), m) == doctest::Approx(1.0));
}

TEST_CASE("duplicate children cannot change the score") {
  ChildMatrix base = matrix_of({{1, 0}, {0, 1}});
  ChildMatrix doubled = matrix_of({{1, 0}, {0, 1}, {1, 0}, {0, 1}});
  QueryEmbedding q = query_of({{0.6f, 0.8f}, {1, 0}});
  CHECK(exact_maxsim(q, base) == doctest::Approx(exact_maxsim(q, doubled)));
}

TEST_CASE("scoring an empty child matrix is an error") {
  ChildMatrix empty;
  CHECK_ERROR_KIND(exact_maxsim(query_of({{1, 0}}), empty), EmptyParent);
  ChildMatrix m = matrix_of({{1, 0}});
  QueryEmbedding no_tokens;
  no_tokens.query_id = "q";
  CHECK_ERROR_KIND(exact_maxsim(no_tokens, m), EmptyQuery);
}

TEST_CASE("exact scoring agrees with an independent reference") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    size_t dim = trial % 2 ? 16 : 48;
    std::vector<Vector> rows, tokens;
    std::uniform_int_distribution<size_t> n_rows(1, 12), n_tokens(1, 6);
    for (size_t i = n_rows(rng); i > 0; --i) {
      rows.push_back(testsupport::random_unit(rng, dim));
    }
    for (size_t i = n_tokens(rng); i > 0; --i) {
      tokens.push_back(testsupport::random_unit(rng, dim));
    }
    double lib = exact_maxsim(query_of(tokens), matrix_of(rows));
    double ref = testsupport::reference_maxsim(tokens, rows);
    CHECK(std::abs(lib - ref) <= 1e-5);
  }
}

TEST_CASE("late-interaction scores never exceed the token count") {
  std::mt19937 rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vector> rows, tokens;
    for (int i = 0; i < 6; ++i) rows.push_back(testsupport::random_unit(rng, 16));
    for (int i = 0; i < 4; ++i) tokens.push_back(testsupport::random_unit(rng, 16));
    CHECK(exact_maxsim(query_of(tokens), matrix_of(rows)) <=
          double(tokens.size()) + 1e-6);
  }
}

TEST_CASE("reranking returns exactly the shortlisted parents, reordered") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 30, .dim = 16, .seed = 63});
  Index index = build_index(corpus, {});
  QueryEmbedding query = testsupport::make_random_queries(1, 3, 5, 16, 64)[0];
  std::vector<ScoredParent> shortlist = all_parents(corpus);
  shortlist.resize(12);
  RerankResult result = rerank(index, query, shortlist, {});
  REQUIRE(result.ranking.size() == shortlist.size());
  std::set<std::string> in, out;
  for (const ScoredParent& p : shortlist) in.insert(p.parent_id);
  for (const ScoredParent& p : result.ranking) {
    out.insert(p.parent_id);
    CHECK(p.stage == Stage::stage2);
  }
  CHECK(in == out);
  for (size_t i = 1; i < result.ranking.size(); ++i) {
    CHECK(scored_before(result.ranking[i - 1], result.ranking[i]));
  }
}

TEST_CASE("reranking the whole corpus reproduces the oracle") {
  for (uint64_t seed : {71, 72}) {
    Corpus corpus = testsupport::make_random_corpus(
        {.parents = 40,
         .min_children = 1,
         .max_children = 7,
         .dim = 16,
         .modalities = {Modality::text, Modality::image},
         .seed = seed});
    Index index = build_index(corpus, {});
    QueryEmbedding query =
        testsupport::make_random_queries(1, 2, 6, 16, seed)[0];
    RerankResult full = rerank(index, query, all_parents(corpus), {});
    std::vector<ScoredParent> oracle = oracle_rank(index, query);
    REQUIRE(full.ranking.size() == oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
      CHECK(full.ranking[i].parent_id == oracle[i].parent_id);
      CHECK(std::abs(full.ranking[i].score - oracle[i].score) <= 1e-6);
    }
  }
}

TEST_CASE("grouped and one-by-one scoring give identical results") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 50,
       .min_children = 1,
       .max_children = 16,
       .dim = 16,
       .seed = 73});
  Index index = build_index(corpus, {});
  QueryEmbedding query = testsupport::make_random_queries(1, 4, 4, 16, 74)[0];
  RerankOptions grouped, single;
  grouped.enable_batching = true;
  single.enable_batching = false;
  RerankResult a = rerank(index, query, all_parents(corpus), {}, grouped);
  RerankResult b = rerank(index, query, all_parents(corpus), {}, single);
  REQUIRE(a.ranking.size() == b.ranking.size());
  for (size_t i = 0; i < a.ranking.size(); ++i) {
    CHECK(a.ranking[i].parent_id == b.ranking[i].parent_id);
    CHECK(std::abs(a.ranking[i].score - b.ranking[i].score) <= 1e-6);
  }
  CHECK(a.stats.batched_groups > 0);
  CHECK(b.stats.batched_groups == 0);
  CHECK(b.stats.single_parents == corpus.parents.size());
}

TEST_CASE("the similarity counter equals tokens times children, exactly") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 25,
       .min_children = 1,
       .max_children = 9,
       .dim = 8,
       .seed = 75});
  Index index = build_index(corpus, {});
  QueryEmbedding query = testsupport::make_random_queries(1, 3, 3, 8, 76)[0];
  std::vector<ScoredParent> shortlist = all_parents(corpus);
  shortlist.resize(10);
  uint64_t expected = 0;
  for (const ScoredParent& p : shortlist) {
    expected += query.tokens.size() *
                corpus.children_by_parent.at(p.parent_id).size();
  }
  for (bool batching : {true, false}) {
    RerankOptions options;
    options.enable_batching = batching;
    RerankResult result = rerank(index, query, shortlist, {}, options);
    CHECK(result.stats.similarity_count == expected);
  }
}

TEST_CASE("exact rescoring dominates the truncated first-pass score") {
  // On non-negative embeddings every similarity is >= 0, so summing the
  // best match of every token (exact) can only add mass relative to
  // summing the best top_m <= |Q| of them (first pass).
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 20,
       .min_children = 2,
       .max_children = 6,
       .dim = 12,
       .nonneg = true,
       .seed = 77});
  Index index = build_index(corpus, {});
  std::mt19937 rng(78);
  QueryEmbedding query;
  query.query_id = "q";
  for (int t = 0; t < 5; ++t) {
    query.tokens.push_back(testsupport::random_unit_nonneg(rng, 12));
  }
  RetrievalConfig config;
  config.top_m = 4;  // strictly fewer than |Q| = 5
  std::vector<ScoredParent> stage1 = stage1_run(index, query, config);
  RerankResult reranked = rerank(index, query, stage1, config);
  std::map<std::string, double> first_pass;
  for (const ScoredParent& p : stage1) first_pass[p.parent_id] = p.score;
  REQUIRE(!reranked.ranking.empty());
  for (const ScoredParent& p : reranked.ranking) {
    CHECK(p.score >= first_pass.at(p.parent_id) - 1e-9);
  }
}

TEST_CASE("token maxima diagnostics decompose the score") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 8, .dim = 8, .seed = 79});
  Index index = build_index(corpus, {});
  QueryEmbedding query = testsupport::make_random_queries(1, 3, 3, 8, 80)[0];
  RerankOptions options;
  options.collect_token_maxima = true;
  RerankResult result = rerank(index, query, all_parents(corpus), {}, options);
  REQUIRE(result.per_parent_token_maxima.size() == corpus.parents.size());
  for (const ScoredParent& p : result.ranking) {
    const std::vector<double>& maxima =
        result.per_parent_token_maxima.at(p.parent_id);
    REQUIRE(maxima.size() == query.tokens.size());
    double sum = 0.0;
    for (double m : maxima) sum += m;
    CHECK(p.score == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("reduced precision stays close to full precision") {
  SUBCASE("hand case") {
    ChildMatrix m = matrix_of({{0.6f, 0.8f}});
    QueryEmbedding q = query_of({{1, 0}});
    double full = exact_maxsim(q, m);
    double reduced = exact_maxsim_reduced(q, m);
    CHECK(std::abs(full - reduced) < 0.01);
  }
  SUBCASE("values exactly representable in half precision are unchanged") {
    ChildMatrix m = matrix_of({{1, 0}, {0, 1}});
    QueryEmbedding q = query_of({{1, 0}, {0, 1}});
    CHECK(exact_maxsim_reduced(q, m) == exact_maxsim(q, m));
  }
  SUBCASE("random 128-dimensional pairs stay within the documented bound") {
    std::mt19937 rng(81);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Vector> rows, tokens;
      for (int i = 0; i < 8; ++i) {
        rows.push_back(testsupport::random_unit(rng, 128));
      }
      for (int i = 0; i < 4; ++i) {
        tokens.push_back(testsupport::random_unit(rng, 128));
      }
      QueryEmbedding q = query_of(tokens);
      ChildMatrix m = matrix_of(rows);
      double gap = std::abs(exact_maxsim(q, m) - exact_maxsim_reduced(q, m));
      CHECK(gap <= 5e-3 * double(tokens.size()));
    }
  }
}

TEST_CASE("reduced-precision reranking matches the reduced scorer") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 15,
       .min_children = 1,
       .max_children = 6,
       .dim = 16,
       .seed = 82});
  Index index = build_index(corpus, {});
  QueryEmbedding query = testsupport::make_random_queries(1, 3, 3, 16, 83)[0];
  RetrievalConfig config;
  config.precision_mode = PrecisionMode::mixed16;
  RerankResult result = rerank(index, query, all_parents(corpus), config);
  for (const ScoredParent& p : result.ranking) {
    double expected = exact_maxsim_reduced(query, index.children_of(p.parent_id));
    CHECK(p.score == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("reranking validates the shortlist") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 5, .dim = 8, .seed = 84});
  Index index = build_index(corpus, {});
  QueryEmbedding query = testsupport::make_random_queries(1, 2, 2, 8, 85)[0];
  std::vector<ScoredParent> ghost = {{"not-a-parent", 0.0, Stage::stage1}};
  CHECK_ERROR_KIND(rerank(index, query, ghost, {}), UnknownParent);
  CHECK(rerank(index, query, {}, {}).ranking.empty());
}
