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
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "lir/error.hpp"
#include "lir/index.hpp"
#include "support.hpp"

using namespace lir;
using testsupport::TempDir;

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

Corpus axes_corpus() {
  Corpus c;
  c.dimension = 2;
  ParentDoc a, b;
  a.parent_id = "a";
  b.parent_id = "b";
  b.kind = ParentKind::image;
  c.parents = {a, b};
  ChildEmbedding c0, c1, c2;
  c0.child_id = "a/0";
  c0.parent_id = "a";
  c0.vector = {1, 0};
  c1.child_id = "a/1";
  c1.parent_id = "a";
  c1.vector = {0, 1};
  c2.child_id = "b/0";
  c2.parent_id = "b";
  c2.modality = Modality::image;
  c2.vector = {0.6f, 0.8f};
  c.children = {c0, c1, c2};
  c.finalize();
  return c;
}

bool same_hits(const std::vector<ChildHit>& a, const std::vector<ChildHit>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].child_id != b[i].child_id) return false;
    if (a[i].similarity != b[i].similarity) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("knn returns the true nearest children with scores") {
  Index index = build_index(axes_corpus(), {});
  Vector q = {1, 0};
  std::vector<ChildHit> hits = index.knn(q, 2, {}, 250);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].child_id == "a/0");
  CHECK(hits[0].parent_id == "a");
  CHECK(hits[0].similarity == doctest::Approx(1.0));
  CHECK(hits[1].child_id == "b/0");
  CHECK(hits[1].similarity == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(index.num_rows() == 3);
}

TEST_CASE("asking for more hits than matches returns all matches") {
  Index index = build_index(axes_corpus(), {});
  Vector q = {0, 1};
  std::vector<ChildHit> hits = index.knn(q, 50, {}, 250);
  CHECK(hits.size() == 3);
}

TEST_CASE("a filter on a modality with no children yields an empty table") {
  Index index = build_index(axes_corpus(), {});
  FilterSpec filter;
  filter.modality = Modality::video_frame;
  Vector q = {1, 0};
  CHECK(index.knn(q, 2, filter, 250).empty());
}

TEST_CASE("every hit satisfies the filter it was searched with") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 40,
       .min_children = 1,
       .max_children = 6,
       .dim = 16,
       .modalities = {Modality::text, Modality::image},
       .with_metadata = true,
       .seed = 5});
  Index index = build_index(corpus, {});
  std::mt19937 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    FilterSpec filter;
    if (trial % 2) filter.modality = Modality::image;
    if (trial % 3 == 0) filter.metadata_equals["lang"] = "en";
    Vector q = testsupport::random_unit(rng, 16);
    for (const ChildHit& hit : index.knn(q, 10, filter, 250)) {
      if (filter.modality) CHECK(hit.modality == *filter.modality);
      if (!filter.metadata_equals.empty()) {
        // Recover the effective metadata through the public row accessors.
        auto [first, last] = index.parent_row_range(hit.parent_id);
        bool found = false;
        for (uint32_t r = first; r < last; ++r) {
          if (index.row_child(r).child_id != hit.child_id) continue;
          found = true;
          Metadata eff = index.corpus().parent(hit.parent_id).metadata;
          for (const auto& [k, v] : index.row_child(r).metadata) eff[k] = v;
          for (const auto& [k, v] : filter.metadata_equals) {
            auto it = eff.find(k);
            REQUIRE(it != eff.end());
            CHECK(it->second == v);
          }
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("flat-mode knn equals the exhaustive scan") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 60, .dim = 16, .modalities = {Modality::text,
                                                Modality::image},
       .seed = 6});
  Index index = build_index(corpus, {});
  std::mt19937 rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    Vector q = testsupport::random_unit(rng, 16);
    CHECK(same_hits(index.knn(q, 15, {}, 250), index.exact_knn(q, 15, {})));
  }
}

TEST_CASE("equal similarities break ties by ascending child_id") {
  Corpus c;
  c.dimension = 2;
  ParentDoc p;
  p.parent_id = "p";
  c.parents = {p};
  for (const char* id : {"p/c", "p/a", "p/b"}) {
    ChildEmbedding e;
    e.child_id = id;
    e.parent_id = "p";
    e.vector = {1, 0};  // identical vectors, identical similarity
    c.children.push_back(e);
  }
  c.finalize();
  Index index = build_index(c, {});
  Vector q = {1, 0};
  std::vector<ChildHit> hits = index.knn(q, 3, {}, 250);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].child_id == "p/a");
  CHECK(hits[1].child_id == "p/b");
  CHECK(hits[2].child_id == "p/c");
}

TEST_CASE("a graph wide enough to cover the corpus reproduces flat search") {
  RetrievalConfig config;
  config.ann_mode = AnnMode::approximate_graph;
  Index graph = build_index(axes_corpus(), config);
  Index flat = build_index(axes_corpus(), {});
  std::mt19937 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Vector q = testsupport::random_unit(rng, 2);
    // Beam >= corpus size means traversal can reach every row.
    CHECK(same_hits(graph.knn(q, 3, {}, 3), flat.knn(q, 3, {}, 3)));
  }
}

TEST_CASE("graph recall improves monotonically with the candidate beam") {
  testsupport::ClusteredCorpus cc =
      testsupport::make_clustered_corpus({.parents = 300,
                                          .min_children = 2,
                                          .max_children = 5,
                                          .dim = 16,
                                          .clusters = 6,
                                          .seed = 8});
  RetrievalConfig config;
  config.ann_mode = AnnMode::approximate_graph;
  Index index = build_index(cc.corpus, config);

  const int k = 10;
  const std::vector<int> beams = {10, 20, 40, 80};
  std::mt19937 rng(88);
  std::vector<double> recall_sum(beams.size(), 0.0);
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Vector q = testsupport::near(rng, cc.centers[size_t(t) % cc.centers.size()],
                                 0.3f);
    std::set<std::string> truth;
    for (const ChildHit& h : index.exact_knn(q, k, {})) {
      truth.insert(h.child_id);
    }
    for (size_t b = 0; b < beams.size(); ++b) {
      size_t found = 0;
      for (const ChildHit& h : index.knn(q, k, {}, beams[b])) {
        found += truth.count(h.child_id);
      }
      recall_sum[b] += double(found) / double(truth.size());
    }
  }
  for (size_t b = 1; b < beams.size(); ++b) {
    CHECK(recall_sum[b] / trials >= recall_sum[b - 1] / trials - 0.02);
  }
  // Sanity: a wide beam on a 300-parent corpus should be nearly exact.
  CHECK(recall_sum.back() / trials > 0.9);
}

TEST_CASE("graph construction is deterministic for a fixed seed") {
  testsupport::RandomCorpusSpec spec{.parents = 80, .dim = 16, .seed = 9};
  RetrievalConfig config;
  config.ann_mode = AnnMode::approximate_graph;
  Index first = build_index(testsupport::make_random_corpus(spec), config);
  Index second = build_index(testsupport::make_random_corpus(spec), config);
  std::mt19937 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    Vector q = testsupport::random_unit(rng, 16);
    CHECK(same_hits(first.knn(q, 10, {}, 50), second.knn(q, 10, {}, 50)));
  }
}

TEST_CASE("children_of returns a parent's rows in child_id order") {
  Index index = build_index(axes_corpus(), {});
  ChildMatrix m = index.children_of("a");
  REQUIRE(m.rows == 2);
  CHECK(m.dim == 2);
  CHECK(m.child_ids == std::vector<std::string>{"a/0", "a/1"});
  CHECK(m.row(0)[0] == 1.0f);
  CHECK(m.row(1)[1] == 1.0f);

  ChildMatrix image_only = index.children_of("b", Modality::image);
  CHECK(image_only.rows == 1);
  CHECK(image_only.modalities[0] == Modality::image);
  CHECK(index.children_of("b", Modality::text).rows == 0);

  CHECK_ERROR_KIND(index.children_of("nope"), UnknownParent);
}

TEST_CASE("indexes survive a save-load round trip in both modes") {
  Corpus corpus = testsupport::make_random_corpus(
      {.parents = 50,
       .dim = 16,
       .modalities = {Modality::text, Modality::image},
       .with_metadata = true,
       .seed = 10});
  std::mt19937 rng(101);
  std::vector<Vector> queries;
  for (int i = 0; i < 10; ++i) queries.push_back(testsupport::random_unit(rng, 16));

  for (AnnMode mode : {AnnMode::exact_flat, AnnMode::approximate_graph}) {
    RetrievalConfig config;
    config.ann_mode = mode;
    Index built = build_index(corpus, config);
    TempDir dir;
    std::string path = dir.file("index.bin");
    save_index(built, path);
    Index loaded = load_index(path);
    CHECK(loaded.ann_mode() == mode);
    CHECK(loaded.num_rows() == built.num_rows());
    CHECK(loaded.dim() == built.dim());
    for (const Vector& q : queries) {
      CHECK(same_hits(built.knn(q, 8, {}, 40), loaded.knn(q, 8, {}, 40)));
    }
  }
}

TEST_CASE("corrupt index files are rejected") {
  Index index = build_index(axes_corpus(), {});
  TempDir dir;
  std::string path = dir.file("index.bin");
  save_index(index, path);

  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOPE", 4);
    f.close();
    CHECK_ERROR_KIND(load_index(path), BadIndexFile);
  }
  SUBCASE("unsupported version") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);  // version field follows the 8-byte magic
    uint32_t version = 999;
    f.write(reinterpret_cast<const char*>(&version), sizeof version);
    f.close();
    CHECK_ERROR_KIND(load_index(path), BadIndexFile);
  }
  SUBCASE("truncated payload") {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size() / 2));
    out.close();
    CHECK_ERROR_KIND(load_index(path), BadIndexFile);
  }
  SUBCASE("missing file") {
    CHECK_ERROR_KIND(load_index(dir.file("absent.bin")), IoError);
  }
}

TEST_CASE("knn validates its arguments") {
  Index index = build_index(axes_corpus(), {});
  Vector q = {1, 0};
  CHECK_ERROR_KIND(index.knn(q, 0, {}, 250), BadArgument);
  CHECK_ERROR_KIND(index.knn(q, 10, {}, 5), BadArgument);
  Vector wrong_dim = {1, 0, 0};
  CHECK_ERROR_KIND(index.knn(wrong_dim, 2, {}, 250), DimensionMismatch);
  Vector zero = {0, 0};
  CHECK_ERROR_KIND(index.knn(zero, 2, {}, 250), ZeroVector);
  Vector long_vec = {3, 4};
  CHECK_ERROR_KIND(index.knn(long_vec, 2, {}, 250), BadArgument);
}

TEST_CASE("an index over an empty corpus returns empty tables") {
  Corpus empty;
  empty.dimension = 4;
  Index index = build_index(std::move(empty), {});
  Vector q = {1, 0, 0, 0};
  CHECK(index.knn(q, 5, {}, 250).empty());
  CHECK(index.exact_knn(q, 5, {}).empty());
}
