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
#include <string>
#include <vector>

#include "lir/index.hpp"
#include "lir/types.hpp"

namespace lir {

struct RerankStats {
  // Query-token x child similarity computations actually performed; equals
  // sum over scored parents of |Q| * |children of parent|.
  uint64_t similarity_count = 0;
  size_t batched_groups = 0;   // padded multi-parent blocks formed
  size_t single_parents = 0;   // parents scored through the fallback path
};

struct RerankOptions {
  bool collect_token_maxima = false;
  // Group parents of similar size into padded blocks. Scoring is identical
  // either way; this only changes the memory layout the loop walks.
  bool enable_batching = true;
};

struct RerankResult {
  std::vector<ScoredParent> ranking;  // stage=stage2, global sort rule
  // Diagnostics, filled when RerankOptions::collect_token_maxima is set:
  // parent_id -> per-query-token exact maxima.
  std::map<std::string, std::vector<double>> per_parent_token_maxima;
  RerankStats stats;
};

/// Exact late-interaction score: sum over query tokens of the best dot
/// product against any child row. No truncation of any kind. Accumulation
/// is token-major over rows in matrix order (ascending child_id), making
/// full-precision results bit-reproducible. Throws on an empty matrix.
double exact_maxsim(const QueryEmbedding& query, const ChildMatrix& children);

/// Same computation with every input rounded to IEEE binary16 and products
/// accumulated in 32-bit floats. Deviates from exact_maxsim by at most
/// ~5e-3 per query token on unit vectors.
double exact_maxsim_reduced(const QueryEmbedding& query,
                            const ChildMatrix& children);

/// Scores every shortlist parent with exact MaxSim over ALL of its children
/// (every modality) and returns them re-sorted. Parents are scored in
/// parallel (bounded by config.fanout_concurrency) and merged
/// deterministically. config.precision_mode selects full or reduced
/// precision. Throws UnknownParent for shortlist entries not in the index.
RerankResult rerank(const Index& index, const QueryEmbedding& query,
                    const std::vector<ScoredParent>& shortlist,
                    const RetrievalConfig& config,
                    const RerankOptions& options = {});

}  // namespace lir
