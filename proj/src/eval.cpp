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

#include "lir/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "lir/error.hpp"
#include "lir/stage1.hpp"

namespace lir {

namespace {

double dcg(const std::vector<int>& grades, size_t k) {
  double sum = 0.0;
  size_t upto = std::min(k, grades.size());
  for (size_t r = 0; r < upto; ++r) {
    double gain = std::exp2(double(grades[r])) - 1.0;
    sum += gain / std::log2(double(r) + 2.0);
  }
  return sum;
}

}  // namespace

std::vector<ScoredParent> oracle_rank(const Corpus& corpus,
                                      const QueryEmbedding& query) {
  if (query.tokens.empty()) {
    throw Error(ErrorKind::EmptyQuery,
                "query '" + query.query_id + "' has no tokens");
  }
  std::vector<ScoredParent> ranking;
  ranking.reserve(corpus.parents.size());
  ChildMatrix m;
  m.dim = corpus.dimension;
  for (const ParentDoc& p : corpus.parents) {
    const std::vector<size_t>& rows = corpus.children_by_parent.at(p.parent_id);
    m.rows = rows.size();
    m.data.resize(rows.size() * m.dim);
    for (size_t i = 0; i < rows.size(); ++i) {
      std::memcpy(m.data.data() + i * m.dim,
                  corpus.children[rows[i]].vector.data(),
                  m.dim * sizeof(float));
    }
    ranking.push_back({p.parent_id, exact_maxsim(query, m), Stage::oracle});
  }
  sort_ranking(ranking);
  return ranking;
}

std::vector<ScoredParent> oracle_rank(const Index& index,
                                      const QueryEmbedding& query) {
  return oracle_rank(index.corpus(), query);
}

double ndcg_at_k(const std::vector<ScoredParent>& ranking, const Qrels& qrels,
                 const std::string& query_id, int k, bool* no_relevant) {
  if (k < 1) throw Error(ErrorKind::BadArgument, "nDCG cutoff must be >= 1");
  if (no_relevant) *no_relevant = false;

  std::vector<int> ideal;
  auto qit = qrels.grades.find(query_id);
  if (qit != qrels.grades.end()) {
    for (const auto& [parent_id, grade] : qit->second) {
      if (grade > 0) ideal.push_back(grade);
    }
  }
  if (ideal.empty()) {
    if (no_relevant) *no_relevant = true;
    return 0.0;
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<int>());

  std::vector<int> observed;
  observed.reserve(std::min<size_t>(size_t(k), ranking.size()));
  for (size_t r = 0; r < ranking.size() && r < size_t(k); ++r) {
    observed.push_back(qrels.grade(query_id, ranking[r].parent_id));
  }
  return dcg(observed, size_t(k)) / dcg(ideal, size_t(k));
}

double recall_at_n(const std::vector<ScoredParent>& candidates,
                   const std::vector<ScoredParent>& oracle_top, int n, int r) {
  if (r < 1) throw Error(ErrorKind::BadArgument, "recall depth r must be >= 1");
  std::set<std::string> kept;
  for (size_t i = 0; i < candidates.size() && i < size_t(n); ++i) {
    kept.insert(candidates[i].parent_id);
  }
  size_t found = 0;
  for (size_t i = 0; i < oracle_top.size() && i < size_t(r); ++i) {
    if (kept.count(oracle_top[i].parent_id)) ++found;
  }
  return double(found) / double(r);
}

RunResult evaluate_run(const Index& index,
                       const std::vector<QueryEmbedding>& queries,
                       const Qrels& qrels, const RetrievalConfig& config,
                       const EvalOptions& options) {
  config.validate();
  for (int k : options.ndcg_cutoffs) {
    if (k < 1) throw Error(ErrorKind::BadArgument, "nDCG cutoff must be >= 1");
  }
  if (options.with_oracle &&
      index.corpus().parents.size() > size_t(config.oracle_parent_ceiling)) {
    throw Error(ErrorKind::BadConfig,
                "oracle run refused: corpus has " +
                    std::to_string(index.corpus().parents.size()) +
                    " parents, above the ceiling of " +
                    std::to_string(config.oracle_parent_ceiling) +
                    " (raise oracle_parent_ceiling to override)");
  }

  auto started = std::chrono::steady_clock::now();
  RunResult result;
  result.config = config;

  for (const QueryEmbedding& query : queries) {
    try {
      QueryRun run;
      run.query_id = query.query_id;
      run.stage1 = stage1_run(index, query, config);
      run.stage2 = rerank(index, query, run.stage1, config).ranking;
      if (options.with_oracle) run.oracle = oracle_rank(index, query);

      for (int k : options.ndcg_cutoffs) {
        bool flag = false;
        double s1 = ndcg_at_k(run.stage1, qrels, query.query_id, k, &flag);
        run.no_relevant = flag;
        result.metrics.push_back({query.query_id, "stage1_ndcg", k, s1});
        result.metrics.push_back(
            {query.query_id, "stage2_ndcg", k,
             ndcg_at_k(run.stage2, qrels, query.query_id, k)});
        if (options.with_oracle) {
          result.metrics.push_back(
              {query.query_id, "oracle_ndcg", k,
               ndcg_at_k(run.oracle, qrels, query.query_id, k)});
        }
      }
      if (options.with_oracle) {
        result.metrics.push_back(
            {query.query_id, "stage1_recall", options.recall_r,
             recall_at_n(run.stage1, run.oracle, config.shortlist_n,
                         options.recall_r)});
      }
      result.runs.push_back(std::move(run));
    } catch (const Error& e) {
      result.skipped.emplace_back(query.query_id, e.what());
    }
  }

  // Means across evaluated queries, in (metric, k) order.
  std::map<std::string, bool> no_relevant_by_query;
  for (const QueryRun& run : result.runs) {
    no_relevant_by_query[run.query_id] = run.no_relevant;
  }
  std::map<std::pair<std::string, int>, std::pair<double, size_t>> sums;
  for (const MetricRow& row : result.metrics) {
    if (options.exclude_no_relevant && row.metric != "stage1_recall" &&
        no_relevant_by_query[row.query_id]) {
      continue;
    }
    auto& [sum, count] = sums[{row.metric, row.k}];
    sum += row.value;
    count += 1;
  }
  for (const auto& [key, agg] : sums) {
    result.metrics.push_back(
        {"mean", key.first, key.second, agg.first / double(agg.second)});
  }

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

std::string RunResult::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "queries evaluated: " << runs.size() << ", skipped: " << skipped.size()
      << ", elapsed: " << std::setprecision(2) << elapsed_seconds << "s\n"
      << std::setprecision(4);
  out << "metric            k      mean\n";
  for (const MetricRow& row : metrics) {
    if (row.query_id != "mean") continue;
    out << std::left << std::setw(18) << row.metric << std::setw(7) << row.k
        << row.value << "\n";
  }
  return out.str();
}

}  // namespace lir
