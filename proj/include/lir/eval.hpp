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

#include <string>
#include <utility>
#include <vector>

#include "lir/corpus.hpp"
#include "lir/index.hpp"
#include "lir/stage2.hpp"
#include "lir/types.hpp"

namespace lir {

/// Brute-force ground truth: exact MaxSim for EVERY parent in the corpus,
/// fully sorted. Deliberately expensive; guard large corpora with
/// RetrievalConfig::oracle_parent_ceiling at the call sites that accept
/// user-sized inputs.
std::vector<ScoredParent> oracle_rank(const Corpus& corpus,
                                      const QueryEmbedding& query);
std::vector<ScoredParent> oracle_rank(const Index& index,
                                      const QueryEmbedding& query);

/// Exponential-gain nDCG: DCG@k = sum over ranks r=1..k of
/// (2^grade - 1) / log2(r + 1), divided by the ideal DCG@k computed from all
/// judged documents of the query. Linear-gain variants differ — this engine
/// uses the exponential form throughout. A query with no relevant documents
/// scores 0 and sets *no_relevant when provided.
double ndcg_at_k(const std::vector<ScoredParent>& ranking, const Qrels& qrels,
                 const std::string& query_id, int k,
                 bool* no_relevant = nullptr);

/// |top-r of oracle ∩ first n candidates| / r. Throws when r < 1.
double recall_at_n(const std::vector<ScoredParent>& candidates,
                   const std::vector<ScoredParent>& oracle_top, int n, int r);

struct EvalOptions {
  bool with_oracle = false;
  // When set, queries without any relevant document are left out of the
  // nDCG means instead of contributing zeros.
  bool exclude_no_relevant = false;
  std::vector<int> ndcg_cutoffs = {1, 3, 5, 10};
  int recall_r = 10;  // oracle depth for Stage-1 recall
};

/// One structured metric record; means use query_id "mean".
struct MetricRow {
  std::string query_id;
  std::string metric;
  int k = 0;
  double value = 0.0;
};

struct QueryRun {
  std::string query_id;
  std::vector<ScoredParent> stage1;
  std::vector<ScoredParent> stage2;
  std::vector<ScoredParent> oracle;  // filled only with EvalOptions.with_oracle
  bool no_relevant = false;
};

struct RunResult {
  std::vector<QueryRun> runs;
  // Queries that failed with a component error: (query_id, message).
  std::vector<std::pair<std::string, std::string>> skipped;
  std::vector<MetricRow> metrics;
  RetrievalConfig config;  // snapshot of what actually ran
  double elapsed_seconds = 0.0;

  /// Human-readable mean-metric table.
  std::string to_table() const;
};

/// Runs the full two-stage pipeline plus metrics for every query: Stage-1
/// shortlist, Stage-2 rerank, nDCG at the configured cutoffs for both
/// stages, and — with with_oracle — the oracle ranking, oracle nDCG, and
/// Stage-1 recall of the oracle top-r. A query that errors is skipped and
/// reported, not fatal. Oracle runs are refused above
/// config.oracle_parent_ceiling parents.
RunResult evaluate_run(const Index& index,
                       const std::vector<QueryEmbedding>& queries,
                       const Qrels& qrels, const RetrievalConfig& config,
                       const EvalOptions& options = {});

}  // namespace lir
