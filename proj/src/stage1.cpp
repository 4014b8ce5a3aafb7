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

#include "lir/stage1.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lir/error.hpp"

namespace lir {

namespace {

// Median of an unsorted copy; even-sized inputs average the middle pair.
double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

void Stage1Table::fold(Modality m, const std::string& parent_id,
                       size_t token_index, float similarity) {
  std::vector<float>& row = entries[m][parent_id];
  if (row.empty()) row.assign(token_count, kAbsent);
  row[token_index] = std::max(row[token_index], similarity);
}

Stage1Table fanout_search(const Index& index, const QueryEmbedding& query,
                          const RetrievalConfig& config,
                          const FilterSpec& base_filter, Stage1Stats* stats) {
  config.validate();
  if (query.tokens.empty()) {
    throw Error(ErrorKind::EmptyQuery,
                "query '" + query.query_id + "' has no tokens");
  }

  std::vector<Modality> active;
  for (Modality m : index.corpus().modality_set) {
    if (!base_filter.modality || *base_filter.modality == m) active.push_back(m);
  }

  Stage1Table table;
  table.token_count = query.tokens.size();
  if (stats) stats->knn_calls = 0;
  if (active.empty()) return table;

  struct Task {
    size_t token = 0;
    Modality modality = Modality::text;
  };
  std::vector<Task> tasks;
  tasks.reserve(query.tokens.size() * active.size());
  for (size_t i = 0; i < query.tokens.size(); ++i) {
    for (Modality m : active) tasks.push_back({i, m});
  }

  std::vector<std::vector<ChildHit>> hits(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<size_t> cursor{0};

  auto run_tasks = [&]() {
    for (;;) {
      size_t t = cursor.fetch_add(1, std::memory_order_relaxed);
      if (t >= tasks.size()) break;
      try {
        FilterSpec filter = base_filter;
        filter.modality = tasks[t].modality;
        hits[t] = index.knn(query.tokens[tasks[t].token], config.k_per_token,
                            filter, config.num_candidates);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };

  size_t workers = std::min<size_t>(size_t(config.fanout_concurrency),
                                    tasks.size());
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(run_tasks);
  run_tasks();  // the calling thread is one of the bounded workers
  for (std::thread& t : pool) t.join();

  for (const std::exception_ptr& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  // Folding is a commutative max, so sequential task order is just a
  // convenient deterministic choice, not a semantic one.
  for (size_t t = 0; t < tasks.size(); ++t) {
    for (const ChildHit& hit : hits[t]) {
      table.fold(tasks[t].modality, hit.parent_id, tasks[t].token,
                 hit.similarity);
    }
  }
  if (stats) stats->knn_calls = tasks.size();
  return table;
}

std::vector<ModalityScore> topm_aggregate(const Stage1Table& table, int top_m) {
  if (top_m < 1) throw Error(ErrorKind::BadArgument, "top_m must be >= 1");
  std::vector<ModalityScore> out;
  for (const auto& [modality, parents] : table.entries) {
    for (const auto& [parent_id, maxima] : parents) {
      std::vector<double> present;
      present.reserve(maxima.size());
      for (float s : maxima) {
        if (s != Stage1Table::kAbsent) present.push_back(double(s));
      }
      if (present.empty()) continue;
      size_t take = std::min<size_t>(size_t(top_m), present.size());
      std::partial_sort(present.begin(), present.begin() + take, present.end(),
                        std::greater<double>());
      double sum = 0.0;
      for (size_t i = 0; i < take; ++i) sum += present[i];
      out.push_back({parent_id, modality, sum, int(take)});
    }
  }
  return out;
}

std::map<std::string, double> mad_normalize(
    const std::vector<ModalityScore>& scores) {
  if (scores.empty()) {
    throw Error(ErrorKind::BadArgument, "mad_normalize needs at least one score");
  }
  Modality modality = scores.front().modality;
  std::vector<double> values;
  values.reserve(scores.size());
  for (const ModalityScore& s : scores) {
    if (s.modality != modality) {
      throw Error(ErrorKind::BadArgument,
                  "mad_normalize takes scores of a single modality");
    }
    values.push_back(s.approx_score);
  }

  double center = median_of(values);
  std::vector<double> deviations;
  deviations.reserve(values.size());
  for (double v : values) deviations.push_back(std::abs(v - center));
  double mad = median_of(std::move(deviations));
  // All-equal (or near-equal) population: every score IS the median, so
  // z = 0 for everyone; dividing by 1 instead of ~0 encodes exactly that.
  double denom = mad < 1e-9 ? 1.0 : mad;

  std::map<std::string, double> z;
  for (const ModalityScore& s : scores) {
    z[s.parent_id] = (s.approx_score - center) / denom;
  }
  return z;
}

std::vector<FusedScore> fuse(
    const std::map<Modality, std::map<std::string, double>>& z_by_modality,
    const std::map<Modality, double>& weights) {
  double weight_sum = 0.0;
  for (const auto& [modality, z] : z_by_modality) {
    auto it = weights.find(modality);
    if (it == weights.end()) {
      throw Error(ErrorKind::BadConfig,
                  std::string("no fusion weight for active modality '") +
                      to_string(modality) + "'");
    }
    weight_sum += it->second;
  }
  if (!z_by_modality.empty() && std::abs(weight_sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::BadConfig,
                "fusion weights over active modalities sum to " +
                    std::to_string(weight_sum) + ", expected 1");
  }

  std::map<std::string, FusedScore> by_parent;
  for (const auto& [modality, z] : z_by_modality) {
    for (const auto& [parent_id, value] : z) {
      FusedScore& f = by_parent[parent_id];
      f.parent_id = parent_id;
      f.z_by_modality[modality] = value;
    }
  }
  for (auto& [parent_id, f] : by_parent) {
    double fused = 0.0;
    for (const auto& [modality, z] : z_by_modality) {
      auto it = f.z_by_modality.find(modality);
      // Absent parents sit at the modality's median: z = 0 adds nothing.
      double value = it == f.z_by_modality.end() ? 0.0 : it->second;
      fused += weights.at(modality) * value;
    }
    f.fused = fused;
  }

  std::vector<FusedScore> out;
  out.reserve(by_parent.size());
  for (auto& [parent_id, f] : by_parent) out.push_back(std::move(f));
  return out;
}

std::vector<ScoredParent> select_candidates(const std::vector<FusedScore>& fused,
                                            int shortlist_n) {
  if (shortlist_n < 1) {
    throw Error(ErrorKind::BadArgument, "shortlist_n must be >= 1");
  }
  std::vector<ScoredParent> ranking;
  ranking.reserve(fused.size());
  for (const FusedScore& f : fused) {
    ranking.push_back({f.parent_id, f.fused, Stage::stage1});
  }
  sort_ranking(ranking);
  if (ranking.size() > size_t(shortlist_n)) ranking.resize(size_t(shortlist_n));
  return ranking;
}

std::vector<ScoredParent> stage1_run(const Index& index,
                                     const QueryEmbedding& query,
                                     const RetrievalConfig& config,
                                     const FilterSpec& base_filter,
                                     Stage1Diagnostics* diagnostics) {
  Stage1Stats stats;
  Stage1Table table = fanout_search(index, query, config, base_filter, &stats);
  std::vector<ModalityScore> scores = topm_aggregate(table, config.top_m);

  std::map<Modality, std::vector<ModalityScore>> by_modality;
  for (const ModalityScore& s : scores) by_modality[s.modality].push_back(s);

  std::vector<FusedScore> fused_scores;
  bool bypass = by_modality.size() == 1;
  if (bypass) {
    // One active modality: normalization would be rank-preserving anyway,
    // so keep the raw aggregate as the reported score.
    for (const ModalityScore& s : by_modality.begin()->second) {
      FusedScore f;
      f.parent_id = s.parent_id;
      f.z_by_modality[s.modality] = s.approx_score;
      f.fused = s.approx_score;
      fused_scores.push_back(std::move(f));
    }
  } else if (!by_modality.empty()) {
    std::map<Modality, std::map<std::string, double>> z_maps;
    for (const auto& [modality, group] : by_modality) {
      z_maps[modality] = mad_normalize(group);
    }
    std::map<Modality, double> weights = config.modality_weights;
    if (weights.empty()) {
      double uniform = 1.0 / double(z_maps.size());
      for (const auto& [modality, z] : z_maps) weights[modality] = uniform;
    }
    fused_scores = fuse(z_maps, weights);
  }

  std::vector<ScoredParent> shortlist =
      select_candidates(fused_scores, config.shortlist_n);
  if (diagnostics) {
    diagnostics->stats = stats;
    diagnostics->modality_scores = std::move(scores);
    diagnostics->fused = std::move(fused_scores);
    diagnostics->single_modality_bypass = bypass;
  }
  return shortlist;
}

}  // namespace lir
