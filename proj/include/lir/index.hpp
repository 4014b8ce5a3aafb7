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

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lir/corpus.hpp"
#include "lir/hnsw.hpp"
#include "lir/types.hpp"

namespace lir {

/// One nearest-neighbor search result.
struct ChildHit {
  std::string child_id;
  std::string parent_id;
  Modality modality = Modality::text;
  float similarity = 0.0f;
};

/// Search-time restriction: an optional modality plus an exact-match
/// conjunction over effective metadata (parent metadata overlaid by the
/// child's own, child winning on shared keys).
struct FilterSpec {
  std::optional<Modality> modality;
  Metadata metadata_equals;

  bool matches(Modality m, const Metadata& effective) const;
  bool empty() const { return !modality && metadata_equals.empty(); }
};

/// Dense row block for one parent: all (or one modality's) children, rows in
/// ascending child_id order, one vector per row.
struct ChildMatrix {
  std::vector<std::string> child_ids;
  std::vector<Modality> modalities;
  size_t rows = 0;
  size_t dim = 0;
  std::vector<float> data;  // rows * dim, row-major

  std::span<const float> row(size_t i) const {
    return std::span<const float>(data.data() + i * dim, dim);
  }
};

/// Immutable child-level KNN index over a validated corpus. Children are
/// packed into one row-major matrix — parents in corpus order, children in
/// ascending child_id within a parent, so each parent owns a contiguous row
/// range. exact_flat mode scans rows; approximate_graph mode searches a
/// small-world graph built over the same rows with filters applied during
/// traversal. Safe for unlimited concurrent readers.
class Index {
 public:
  Index(const Index&) = delete;
  Index& operator=(const Index&) = delete;
  Index(Index&&) = default;
  Index& operator=(Index&&) = default;

  /// Top-k children matching `filter`, per the configured mode. Hits are
  /// sorted by (similarity descending, child_id ascending). In exact_flat
  /// mode the result is the true filtered top-k; in approximate_graph mode
  /// `num_candidates` bounds the filtered traversal beam the k hits are
  /// drawn from.
  std::vector<ChildHit> knn(std::span<const float> query, int k,
                            const FilterSpec& filter, int num_candidates) const;

  /// Exhaustive scan regardless of the configured mode (the oracle path).
  std::vector<ChildHit> exact_knn(std::span<const float> query, int k,
                                  const FilterSpec& filter) const;

  /// All children of one parent (optionally one modality), rows in ascending
  /// child_id order. Throws UnknownParent.
  ChildMatrix children_of(const std::string& parent_id,
                          std::optional<Modality> modality = {}) const;

  const Corpus& corpus() const { return *corpus_; }
  std::shared_ptr<const Corpus> corpus_ptr() const { return corpus_; }
  size_t dim() const { return corpus_->dimension; }
  size_t num_rows() const { return row_child_.size(); }
  AnnMode ann_mode() const { return ann_mode_; }
  uint64_t seed() const { return seed_; }

  /// Contiguous packed row range [first, last) for a parent's children.
  std::pair<uint32_t, uint32_t> parent_row_range(
      const std::string& parent_id) const;
  std::span<const float> row_vector(uint32_t row) const {
    return std::span<const float>(packed_.data() + size_t(row) * dim(), dim());
  }
  const ChildEmbedding& row_child(uint32_t row) const {
    return corpus_->children[row_child_[row]];
  }

  friend Index build_index(Corpus corpus, const RetrievalConfig& config);
  friend void save_index(const Index& index, const std::string& path);
  friend Index load_index(const std::string& path);

 private:
  Index() = default;
  void pack_rows();
  bool row_matches(uint32_t row, const FilterSpec& filter) const;
  std::vector<ChildHit> rows_to_hits(
      std::vector<std::pair<float, uint32_t>> scored, size_t k) const;

  std::shared_ptr<const Corpus> corpus_;
  AnnMode ann_mode_ = AnnMode::exact_flat;
  int graph_neighbors_ = 16;
  int graph_build_beam_ = 200;
  uint64_t seed_ = 0;

  std::vector<float> packed_;          // num_rows * dim
  std::vector<size_t> row_child_;      // row -> index into corpus_->children
  std::vector<Metadata> row_meta_;     // row -> effective metadata
  std::map<Modality, std::vector<uint32_t>> rows_by_modality_;
  std::map<std::string, std::pair<uint32_t, uint32_t>> parent_rows_;
  HnswGraph graph_;  // populated only in approximate_graph mode
};

/// Builds an index; in approximate_graph mode constructs the graph with the
/// config's neighbors/beam/seed. The corpus must be finalized.
Index build_index(Corpus corpus, const RetrievalConfig& config);

/// Single-file binary persistence (magic, format version, build parameters,
/// full corpus, graph). load_index rejects bad magic and version mismatches.
void save_index(const Index& index, const std::string& path);
Index load_index(const std::string& path);

}  // namespace lir
