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

// Shared test helpers: an independently written reference scorer plus
// synthetic corpus/query generators. The reference scorer deliberately
// avoids the library's code paths so structural bugs can't cancel out.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lir/corpus.hpp"
#include "lir/types.hpp"

namespace testsupport {

// Reference late-interaction score: plain index loops, no library calls.
// Dots accumulate in float (the library's storage precision), token maxima
// and their sum in double.
inline double reference_maxsim(const std::vector<lir::Vector>& tokens,
                               const std::vector<lir::Vector>& children) {
  double total = 0.0;
  for (const lir::Vector& q : tokens) {
    double best = -1e300;
    for (const lir::Vector& d : children) {
      float s = 0.0f;
      for (size_t i = 0; i < q.size(); ++i) s += q[i] * d[i];
      if (double(s) > best) best = double(s);
    }
    total += best;
  }
  return total;
}

inline lir::Vector random_unit(std::mt19937& rng, size_t dim) {
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  for (;;) {
    lir::Vector v(dim);
    double sq = 0.0;
    for (float& x : v) {
      x = gauss(rng);
      sq += double(x) * double(x);
    }
    if (sq < 1e-12) continue;
    float inv = float(1.0 / std::sqrt(sq));
    for (float& x : v) x *= inv;
    return v;
  }
}

// Unit vector with all components >= 0, so every dot product is >= 0.
inline lir::Vector random_unit_nonneg(std::mt19937& rng, size_t dim) {
  std::uniform_real_distribution<float> uni(0.01f, 1.0f);
  lir::Vector v(dim);
  double sq = 0.0;
  for (float& x : v) {
    x = uni(rng);
    sq += double(x) * double(x);
  }
  float inv = float(1.0 / std::sqrt(sq));
  for (float& x : v) x *= inv;
  return v;
}

// Unit vector near `center`: center + noise*spread, renormalized.
inline lir::Vector near(std::mt19937& rng, const lir::Vector& center,
                        float spread) {
  std::normal_distribution<float> gauss(0.0f, spread);
  lir::Vector v(center.size());
  double sq = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    v[i] = center[i] + gauss(rng);
    sq += double(v[i]) * double(v[i]);
  }
  float inv = float(1.0 / std::sqrt(sq));
  for (float& x : v) x *= inv;
  return v;
}

inline std::string padded_id(const char* prefix, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%05zu", prefix, i);
  return buf;
}

struct RandomCorpusSpec {
  size_t parents = 50;
  size_t min_children = 2;
  size_t max_children = 8;
  size_t dim = 16;
  std::vector<lir::Modality> modalities = {lir::Modality::text};
  bool with_metadata = false;
  bool nonneg = false;  // sample children in the positive orthant
  uint64_t seed = 1;
};

inline lir::Corpus make_random_corpus(const RandomCorpusSpec& spec) {
  std::mt19937 rng{uint32_t(spec.seed)};
  std::uniform_int_distribution<size_t> n_children(spec.min_children,
                                                   spec.max_children);
  std::uniform_int_distribution<int> coin(0, 1);
  lir::Corpus corpus;
  corpus.dimension = spec.dim;
  for (size_t p = 0; p < spec.parents; ++p) {
    lir::ParentDoc parent;
    parent.parent_id = padded_id("p", p);
    parent.kind = static_cast<lir::ParentKind>(p % 3);
    if (spec.with_metadata) {
      parent.metadata["lang"] = coin(rng) ? "en" : "de";
    }
    size_t count = n_children(rng);
    for (size_t c = 0; c < count; ++c) {
      lir::ChildEmbedding child;
      child.child_id = parent.parent_id + "/" + padded_id("c", c);
      child.parent_id = parent.parent_id;
      child.modality = spec.modalities[c % spec.modalities.size()];
      if (spec.with_metadata && coin(rng)) {
        child.metadata["section"] = coin(rng) ? "body" : "header";
      }
      child.vector = spec.nonneg ? random_unit_nonneg(rng, spec.dim)
                                 : random_unit(rng, spec.dim);
      corpus.children.push_back(std::move(child));
    }
    corpus.parents.push_back(std::move(parent));
  }
  corpus.finalize();
  return corpus;
}

struct ClusteredCorpusSpec {
  size_t parents = 1000;
  size_t min_children = 4;
  size_t max_children = 10;
  size_t dim = 32;
  size_t clusters = 8;
  float spread = 0.35f;
  uint64_t seed = 7;
};

struct ClusteredCorpus {
  lir::Corpus corpus;
  std::vector<lir::Vector> centers;
};

// Parents whose children scatter around one of a few shared directions, so
// queries aimed at a center have a well-separated true top ranking.
inline ClusteredCorpus make_clustered_corpus(const ClusteredCorpusSpec& spec) {
  std::mt19937 rng{uint32_t(spec.seed)};
  ClusteredCorpus out;
  out.centers.reserve(spec.clusters);
  for (size_t c = 0; c < spec.clusters; ++c) {
    out.centers.push_back(random_unit(rng, spec.dim));
  }
  std::uniform_int_distribution<size_t> pick_cluster(0, spec.clusters - 1);
  std::uniform_int_distribution<size_t> n_children(spec.min_children,
                                                   spec.max_children);
  out.corpus.dimension = spec.dim;
  for (size_t p = 0; p < spec.parents; ++p) {
    lir::ParentDoc parent;
    parent.parent_id = padded_id("p", p);
    const lir::Vector& center = out.centers[pick_cluster(rng)];
    size_t count = n_children(rng);
    for (size_t c = 0; c < count; ++c) {
      lir::ChildEmbedding child;
      child.child_id = parent.parent_id + "/" + padded_id("c", c);
      child.parent_id = parent.parent_id;
      child.vector = near(rng, center, spec.spread);
      out.corpus.children.push_back(std::move(child));
    }
    out.corpus.parents.push_back(std::move(parent));
  }
  out.corpus.finalize();
  return out;
}

inline std::vector<lir::QueryEmbedding> make_random_queries(size_t n,
                                                            size_t min_tokens,
                                                            size_t max_tokens,
                                                            size_t dim,
                                                            uint64_t seed) {
  std::mt19937 rng{uint32_t(seed)};
  std::uniform_int_distribution<size_t> n_tokens(min_tokens, max_tokens);
  std::vector<lir::QueryEmbedding> queries;
  for (size_t q = 0; q < n; ++q) {
    lir::QueryEmbedding query;
    query.query_id = padded_id("q", q);
    size_t count = n_tokens(rng);
    for (size_t t = 0; t < count; ++t) {
      query.tokens.push_back(random_unit(rng, dim));
    }
    queries.push_back(std::move(query));
  }
  return queries;
}

// Queries whose tokens hover near corpus cluster centers.
inline std::vector<lir::QueryEmbedding> make_clustered_queries(
    size_t n, size_t min_tokens, size_t max_tokens,
    const std::vector<lir::Vector>& centers, float spread, uint64_t seed) {
  std::mt19937 rng{uint32_t(seed)};
  std::uniform_int_distribution<size_t> n_tokens(min_tokens, max_tokens);
  std::uniform_int_distribution<size_t> pick_center(0, centers.size() - 1);
  std::vector<lir::QueryEmbedding> queries;
  for (size_t q = 0; q < n; ++q) {
    lir::QueryEmbedding query;
    query.query_id = padded_id("q", q);
    const lir::Vector& center = centers[pick_center(rng)];
    size_t count = n_tokens(rng);
    for (size_t t = 0; t < count; ++t) {
      query.tokens.push_back(near(rng, center, spread));
    }
    queries.push_back(std::move(query));
  }
  return queries;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<uint64_t> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path = std::filesystem::temp_directory_path() /
           ("lir_test_" + std::to_string(stamp) + "_" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace testsupport
