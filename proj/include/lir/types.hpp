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
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lir/vec.hpp"

namespace lir {

/// Source of a child embedding. Each child carries exactly one tag.
enum class Modality : uint8_t { text = 0, image = 1, video_frame = 2 };

/// What kind of retrievable unit a parent is.
enum class ParentKind : uint8_t { page = 0, image = 1, video_segment = 2 };

enum class PrecisionMode : uint8_t { full32 = 0, mixed16 = 1 };
enum class AnnMode : uint8_t { exact_flat = 0, approximate_graph = 1 };

/// Which pipeline stage produced a score.
enum class Stage : uint8_t { stage1 = 0, stage2 = 1, oracle = 2 };

const char* to_string(Modality m);
const char* to_string(ParentKind k);
const char* to_string(PrecisionMode p);
const char* to_string(AnnMode a);
const char* to_string(Stage s);
Modality modality_from_string(const std::string& s);
ParentKind parent_kind_from_string(const std::string& s);
PrecisionMode precision_from_string(const std::string& s);
AnnMode ann_mode_from_string(const std::string& s);

/// Flat string metadata. Filters are exact-match conjunctions over it.
/// Ordered map so every serialization of a record is deterministic.
using Metadata = std::map<std::string, std::string>;

/// One dense vector (text token, image patch, or video frame region) owned
/// by a parent document.
struct ChildEmbedding {
  std::string child_id;
  std::string parent_id;
  Modality modality = Modality::text;
  Metadata metadata;
  Vector vector;  // L2-normalized at ingestion
};

/// The atomic retrievable unit (page, image, or video segment). Parents own
/// children but never participate in vector search themselves.
struct ParentDoc {
  std::string parent_id;
  ParentKind kind = ParentKind::page;
  Metadata metadata;
  std::map<Modality, int> child_count_by_modality;  // derived
};

/// Ordered set of L2-normalized query token vectors.
struct QueryEmbedding {
  std::string query_id;
  std::vector<Vector> tokens;
};

/// Every retrieval hyperparameter in one record.
struct RetrievalConfig {
  int k_per_token = 10;      // ANN hits per (token, modality) search
  int num_candidates = 250;  // filtered candidate beam width per ANN search
  int top_m = 12;            // token maxima summed per (parent, modality)
  int shortlist_n = 80;      // parents passed to exact re-ranking
  // Per-modality fusion weights. Empty means uniform over the modalities
  // active for the query; when set, the weights of active modalities must
  // sum to 1.
  std::map<Modality, double> modality_weights;
  int fanout_concurrency = default_concurrency();
  PrecisionMode precision_mode = PrecisionMode::full32;
  AnnMode ann_mode = AnnMode::exact_flat;
  int graph_neighbors = 16;    // graph degree bound per layer
  int graph_build_beam = 200;  // construction-time search beam
  uint64_t seed = 42;          // graph level assignment
  // Parent-count ceiling above which brute-force oracle runs are refused.
  int oracle_parent_ceiling = 5000;

  static int default_concurrency();

  /// Throws BadConfig on any out-of-range field.
  void validate() const;
};

/// One (parent, score) entry of a ranked list.
struct ScoredParent {
  std::string parent_id;
  double score = 0.0;
  Stage stage = Stage::stage1;
};

/// Global result order: score descending, ties by ascending parent_id.
inline bool scored_before(const ScoredParent& a, const ScoredParent& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.parent_id < b.parent_id;
}

void sort_ranking(std::vector<ScoredParent>& ranking);

}  // namespace lir
