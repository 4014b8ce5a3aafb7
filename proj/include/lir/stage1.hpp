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
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lir/index.hpp"
#include "lir/types.hpp"

namespace lir {

/// Sparse running-max table built by the per-token fan-out: for each
/// (modality, parent, query token) the best similarity seen across that
/// token's ANN hits. A token that produced no hit for a parent stays absent
/// (the sentinel), not zero — downstream aggregation only sums retrieved
/// evidence.
struct Stage1Table {
  static constexpr float kAbsent = -std::numeric_limits<float>::infinity();

  // modality -> parent_id -> one slot per query token (kAbsent when unseen)
  std::map<Modality, std::map<std::string, std::vector<float>>> entries;
  size_t token_count = 0;

  /// Max-merges one hit; creates the row on first contact.
  void fold(Modality m, const std::string& parent_id, size_t token_index,
            float similarity);
};

/// Per-(parent, modality) Top-M aggregate A_m(d).
struct ModalityScore {
  std::string parent_id;
  Modality modality = Modality::text;
  double approx_score = 0.0;
  int contributing_token_count = 0;  // = min(top_m, tokens with evidence)
};

/// Per-parent normalized scores and their weighted combination.
struct FusedScore {
  std::string parent_id;
  std::map<Modality, double> z_by_modality;  // only modalities with evidence
  double fused = 0.0;
};

struct Stage1Stats {
  size_t knn_calls = 0;  // exactly |Q| x |active modalities|
};

/// Everything stage1_run computes on the way to the shortlist, for callers
/// that want to inspect intermediate scores.
struct Stage1Diagnostics {
  Stage1Stats stats;
  std::vector<ModalityScore> modality_scores;
  std::vector<FusedScore> fused;
  bool single_modality_bypass = false;
};

/// Runs one knn per (query token, active modality) — bounded by
/// config.fanout_concurrency — and folds all hits into a Stage1Table.
/// Active modalities are the corpus's, cut down by base_filter.modality.
/// An empty corpus (or a filter excluding every modality) yields an empty
/// table with zero knn calls.
Stage1Table fanout_search(const Index& index, const QueryEmbedding& query,
                          const RetrievalConfig& config,
                          const FilterSpec& base_filter,
                          Stage1Stats* stats = nullptr);

/// Per (parent, modality): sum of the min(top_m, available) largest token
/// maxima. Output ordered by (modality, parent_id).
std::vector<ModalityScore> topm_aggregate(const Stage1Table& table, int top_m);

/// Robust z-scores for one modality's scores: z = (A - median) / MAD, with
/// the denominator replaced by 1 when MAD < 1e-9 (all-equal guard). Throws
/// on empty input or mixed modalities.
std::map<std::string, double> mad_normalize(
    const std::vector<ModalityScore>& scores);

/// Weighted combination of per-modality z maps. A parent absent from a
/// modality contributes z = 0 there (it sits at that modality's median).
/// Weights must cover every active modality and sum to 1 (within 1e-9).
std::vector<FusedScore> fuse(
    const std::map<Modality, std::map<std::string, double>>& z_by_modality,
    const std::map<Modality, double>& weights);

/// Top min(shortlist_n, available) parents by (fused desc, parent_id asc).
std::vector<ScoredParent> select_candidates(const std::vector<FusedScore>& fused,
                                            int shortlist_n);

/// The full Stage-1 pipeline: fan-out, Top-M aggregation, then MAD
/// normalization and fusion — or, when exactly one modality is active, a
/// bypass that ranks directly by the raw aggregate A_m(d). Empty
/// config.modality_weights means uniform weights over active modalities.
std::vector<ScoredParent> stage1_run(const Index& index,
                                     const QueryEmbedding& query,
                                     const RetrievalConfig& config,
                                     const FilterSpec& base_filter = {},
                                     Stage1Diagnostics* diagnostics = nullptr);

}  // namespace lir
