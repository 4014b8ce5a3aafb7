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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace lir {

/// Hierarchical small-world graph over externally owned packed vectors,
/// specialized for inner-product similarity on unit-norm data (higher is
/// better). Rows must be inserted in order 0, 1, 2, ...; the vector of row i
/// lives at data + i * dim in the buffer handed to set_data().
///
/// Construction is deterministic for a fixed seed and insertion order: level
/// draws come from a seeded mt19937_64 mapped to (0, 1] explicitly, and every
/// heap and neighbor list breaks similarity ties by row id.
///
/// Searches take a row predicate. Traversal expands non-matching rows like
/// any other (they keep the graph connected across a filter), but only
/// matching rows enter the bounded result set, so the beam is spent entirely
/// on rows the caller can use.
class HnswGraph {
 public:
  HnswGraph() = default;
  HnswGraph(size_t dim, int neighbors, int build_beam, uint64_t seed);

  /// Points the graph at the packed row buffer. The buffer must stay alive
  /// and fixed for the lifetime of the graph (loaded graphs too).
  void set_data(const float* data) { data_ = data; }

  void reserve(size_t n);

  /// Inserts the next row. `row` must equal size().
  void add(uint32_t row);

  /// Returns up to `beam` rows matching `passes`, ordered by similarity
  /// descending with ties by ascending row id. An empty graph yields {}.
  /// Pass a null function to match every row.
  std::vector<std::pair<float, uint32_t>> search(
      std::span<const float> query, size_t beam,
      const std::function<bool(uint32_t)>& passes = nullptr) const;

  size_t size() const { return nodes_.size(); }
  size_t dim() const { return dim_; }
  int neighbors() const { return neighbors_; }
  int build_beam() const { return build_beam_; }
  uint64_t seed() const { return seed_; }

  /// Binary (de)serialization of the link structure. The caller re-attaches
  /// the data buffer after load(); adding to a loaded graph is not supported.
  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  struct Node {
    int level = 0;
    // links[l] = neighbor rows at layer l, 0 <= l <= level
    std::vector<std::vector<uint32_t>> links;
  };

  int draw_level();
  float sim(std::span<const float> query, uint32_t row) const;
  float sim_rows(uint32_t a, uint32_t b) const;
  uint32_t greedy_step(std::span<const float> query, uint32_t start,
                       int layer) const;
  // Beam search within one layer; collects rows satisfying `passes` (null =
  // all), returns them sorted best-first.
  std::vector<std::pair<float, uint32_t>> search_layer(
      std::span<const float> query, uint32_t entry, size_t beam, int layer,
      const std::function<bool(uint32_t)>& passes) const;
  // Diversity pruning: keeps candidates at least as close to the query as to
  // anything already kept, capped at max_links.
  std::vector<uint32_t> select_neighbors(
      std::vector<std::pair<float, uint32_t>> candidates,
      size_t max_links) const;
  size_t layer_cap(int layer) const;

  size_t dim_ = 0;
  int neighbors_ = 16;
  int build_beam_ = 200;
  uint64_t seed_ = 0;
  double level_mult_ = 0.0;
  std::mt19937_64 rng_;
  const float* data_ = nullptr;
  std::vector<Node> nodes_;
  int32_t entry_ = -1;
  int max_level_ = -1;
};

}  // namespace lir
