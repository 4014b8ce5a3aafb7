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

#include "lir/stage2.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include "lir/error.hpp"
#include "lir/vec.hpp"

namespace lir {

namespace {

// Parents whose child counts stay within this factor of the smallest group
// member share one padded block.
constexpr size_t kGroupSizeFactor = 2;
constexpr size_t kMaxGroupMembers = 32;

std::vector<std::span<const float>> token_views(
    const std::vector<Vector>& tokens) {
  std::vector<std::span<const float>> views;
  views.reserve(tokens.size());
  for (const Vector& t : tokens) views.emplace_back(t.data(), t.size());
  return views;
}

std::vector<Vector> rounded_tokens(const std::vector<Vector>& tokens) {
  std::vector<Vector> out(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    out[i].reserve(tokens[i].size());
    for (float x : tokens[i]) out[i].push_back(round_to_half(x));
  }
  return out;
}

// The one scoring loop every Stage-2 and oracle path funnels through:
// token-major, rows in ascending child_id order, per-token max as float,
// token sum in double.
double score_rows(const std::vector<std::span<const float>>& tokens,
                  const float* rows, size_t n_rows, size_t dim,
                  std::vector<double>* maxima_out) {
  double total = 0.0;
  for (const std::span<const float>& token : tokens) {
    float best = -std::numeric_limits<float>::infinity();
    for (size_t j = 0; j < n_rows; ++j) {
      float s = dot(token, std::span<const float>(rows + j * dim, dim));
      if (s > best) best = s;
    }
    total += double(best);
    if (maxima_out) maxima_out->push_back(double(best));
  }
  return total;
}

void check_maxsim_inputs(const QueryEmbedding& query,
                         const ChildMatrix& children) {
  if (query.tokens.empty()) {
    throw Error(ErrorKind::EmptyQuery,
                "query '" + query.query_id + "' has no tokens");
  }
  if (children.rows == 0) {
    throw Error(ErrorKind::EmptyParent, "child matrix is empty");
  }
}

}  // namespace

double exact_maxsim(const QueryEmbedding& query, const ChildMatrix& children) {
  check_maxsim_inputs(query, children);
  return score_rows(token_views(query.tokens), children.data.data(),
                    children.rows, children.dim, nullptr);
}

double exact_maxsim_reduced(const QueryEmbedding& query,
                            const ChildMatrix& children) {
  check_maxsim_inputs(query, children);
  std::vector<Vector> q16 = rounded_tokens(query.tokens);
  std::vector<float> rows16(children.data.size());
  for (size_t i = 0; i < children.data.size(); ++i) {
    rows16[i] = round_to_half(children.data[i]);
  }
  return score_rows(token_views(q16), rows16.data(), children.rows,
                    children.dim, nullptr);
}

RerankResult rerank(const Index& index, const QueryEmbedding& query,
                    const std::vector<ScoredParent>& shortlist,
                    const RetrievalConfig& config,
                    const RerankOptions& options) {
  config.validate();
  RerankResult result;
  if (shortlist.empty()) return result;
  if (query.tokens.empty()) {
    throw Error(ErrorKind::EmptyQuery,
                "query '" + query.query_id + "' has no tokens");
  }

  struct Entry {
    const std::string* parent_id = nullptr;
    uint32_t first = 0;
    uint32_t count = 0;
  };
  std::vector<Entry> entries;
  entries.reserve(shortlist.size());
  for (const ScoredParent& sp : shortlist) {
    auto [first, last] = index.parent_row_range(sp.parent_id);
    entries.push_back({&sp.parent_id, first, last - first});
  }

  // Group parents of comparable size so each group shares one padded block.
  std::vector<size_t> order(entries.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (options.enable_batching) {
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (entries[a].count != entries[b].count) {
        return entries[a].count < entries[b].count;
      }
      return *entries[a].parent_id < *entries[b].parent_id;
    });
  }
  std::vector<std::vector<size_t>> groups;
  for (size_t i = 0; i < order.size();) {
    size_t base = entries[order[i]].count;
    std::vector<size_t> group;
    while (i < order.size() && group.size() < kMaxGroupMembers &&
           (!options.enable_batching ||
            entries[order[i]].count <= base * kGroupSizeFactor)) {
      group.push_back(order[i]);
      ++i;
      if (!options.enable_batching) break;
    }
    groups.push_back(std::move(group));
  }

  const bool reduced = config.precision_mode == PrecisionMode::mixed16;
  std::vector<Vector> q16;
  if (reduced) q16 = rounded_tokens(query.tokens);
  const std::vector<std::span<const float>> tokens =
      token_views(reduced ? q16 : query.tokens);
  const size_t dim = index.dim();

  struct Slot {
    double score = 0.0;
    std::vector<double> maxima;
    uint64_t similarity_count = 0;
  };
  std::vector<Slot> slots(entries.size());
  std::atomic<size_t> cursor{0};
  std::vector<std::exception_ptr> failures(groups.size());

  auto copy_rows = [&](const Entry& e, float* out) {
    const float* src = index.row_vector(e.first).data();
    size_t n = size_t(e.count) * dim;
    if (reduced) {
      for (size_t i = 0; i < n; ++i) out[i] = round_to_half(src[i]);
    } else {
      std::memcpy(out, src, n * sizeof(float));
    }
  };

  auto run_groups = [&]() {
    std::vector<float> block;
    for (;;) {
      size_t g = cursor.fetch_add(1, std::memory_order_relaxed);
      if (g >= groups.size()) break;
      try {
        const std::vector<size_t>& group = groups[g];
        if (group.size() == 1 && !reduced) {
          // Fallback path: score straight off the packed index rows.
          const Entry& e = entries[group[0]];
          Slot& slot = slots[group[0]];
          slot.score = score_rows(
              tokens, index.row_vector(e.first).data(), e.count, dim,
              options.collect_token_maxima ? &slot.maxima : nullptr);
          slot.similarity_count = uint64_t(tokens.size()) * e.count;
          continue;
        }
        size_t max_rows = 0;
        for (size_t member : group) {
          max_rows = std::max<size_t>(max_rows, entries[member].count);
        }
        block.assign(group.size() * max_rows * dim, 0.0f);
        for (size_t m = 0; m < group.size(); ++m) {
          copy_rows(entries[group[m]], block.data() + m * max_rows * dim);
        }
        for (size_t m = 0; m < group.size(); ++m) {
          const Entry& e = entries[group[m]];
          Slot& slot = slots[group[m]];
          // Pad rows beyond e.count are never read, so padding cannot
          // perturb the maxima.
          slot.score = score_rows(
              tokens, block.data() + m * max_rows * dim, e.count, dim,
              options.collect_token_maxima ? &slot.maxima : nullptr);
          slot.similarity_count = uint64_t(tokens.size()) * e.count;
        }
      } catch (...) {
        failures[g] = std::current_exception();
      }
    }
  };

  size_t workers =
      std::min<size_t>(size_t(config.fanout_concurrency), groups.size());
  std::vector<std::thread> pool;
  for (size_t w = 1; w < workers; ++w) pool.emplace_back(run_groups);
  run_groups();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : failures) {
    if (e) std::rethrow_exception(e);
  }

  result.ranking.reserve(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) {
    result.ranking.push_back({*entries[i].parent_id, slots[i].score,
                              Stage::stage2});
    result.stats.similarity_count += slots[i].similarity_count;
    if (options.collect_token_maxima) {
      result.per_parent_token_maxima[*entries[i].parent_id] =
          std::move(slots[i].maxima);
    }
  }
  for (const std::vector<size_t>& group : groups) {
    if (group.size() > 1) {
      result.stats.batched_groups += 1;
    } else {
      result.stats.single_parents += 1;
    }
  }
  sort_ranking(result.ranking);
  return result;
}

}  // namespace lir
