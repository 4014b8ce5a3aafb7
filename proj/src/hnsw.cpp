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

#include "lir/hnsw.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>

#include "lir/error.hpp"
#include "lir/vec.hpp"

namespace lir {

namespace {

using Hit = std::pair<float, uint32_t>;  // (similarity, row)

// Max-heap of open candidates: best similarity on top, ties by lower row.
struct CandidateOrder {
  bool operator()(const Hit& a, const Hit& b) const {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  }
};

// Min-heap of collected results: worst similarity on top; on ties the higher
// row surfaces first so evictions preserve (similarity desc, row asc).
struct ResultOrder {
  bool operator()(const Hit& a, const Hit& b) const {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  }
};

using CandidateHeap = std::priority_queue<Hit, std::vector<Hit>, CandidateOrder>;
using ResultHeap = std::priority_queue<Hit, std::vector<Hit>, ResultOrder>;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::BadIndexFile, "truncated graph section");
}

}  // namespace

HnswGraph::HnswGraph(size_t dim, int neighbors, int build_beam, uint64_t seed)
    : dim_(dim),
      neighbors_(neighbors),
      build_beam_(build_beam),
      seed_(seed),
      level_mult_(1.0 / std::log(static_cast<double>(neighbors))),
      rng_(seed) {
  if (dim == 0) throw Error(ErrorKind::BadConfig, "graph dimension must be > 0");
  if (neighbors < 2) {
    throw Error(ErrorKind::BadConfig, "graph_neighbors must be >= 2");
  }
  if (build_beam < 1) {
    throw Error(ErrorKind::BadConfig, "graph_build_beam must be >= 1");
  }
}

void HnswGraph::reserve(size_t n) { nodes_.reserve(n); }

int HnswGraph::draw_level() {
  // Map the raw 64-bit draw to (0, 1] by hand instead of through
  // uniform_real_distribution, whose output is implementation-defined.
  double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  return static_cast<int>(-std::log(u) * level_mult_);
}

float HnswGraph::sim(std::span<const float> query, uint32_t row) const {
  return dot(query, std::span<const float>(data_ + size_t(row) * dim_, dim_));
}

float HnswGraph::sim_rows(uint32_t a, uint32_t b) const {
  return dot(std::span<const float>(data_ + size_t(a) * dim_, dim_),
             std::span<const float>(data_ + size_t(b) * dim_, dim_));
}

size_t HnswGraph::layer_cap(int layer) const {
  return layer == 0 ? size_t(neighbors_) * 2 : size_t(neighbors_);
}

uint32_t HnswGraph::greedy_step(std::span<const float> query, uint32_t start,
                                int layer) const {
  uint32_t cur = start;
  float cur_sim = sim(query, cur);
  bool improved = true;
  while (improved) {
    improved = false;
    for (uint32_t nbr : nodes_[cur].links[layer]) {
      float s = sim(query, nbr);
      if (s > cur_sim) {
        cur = nbr;
        cur_sim = s;
        improved = true;
      }
    }
  }
  return cur;
}

std::vector<Hit> HnswGraph::search_layer(
    std::span<const float> query, uint32_t entry, size_t beam, int layer,
    const std::function<bool(uint32_t)>& passes) const {
  std::vector<bool> visited(nodes_.size(), false);
  CandidateHeap open;
  ResultHeap results;

  float entry_sim = sim(query, entry);
  visited[entry] = true;
  open.emplace(entry_sim, entry);
  if (!passes || passes(entry)) results.emplace(entry_sim, entry);

  while (!open.empty()) {
    Hit cur = open.top();
    // Everything left to expand is at most cur.first; once the result set is
    // full and its floor beats that, no reachable row can still enter it.
    if (results.size() >= beam && cur.first < results.top().first) break;
    open.pop();

    for (uint32_t nbr : nodes_[cur.second].links[layer]) {
      if (visited[nbr]) continue;
      visited[nbr] = true;
      float s = sim(query, nbr);
      if (results.size() < beam || s > results.top().first) {
        open.emplace(s, nbr);
        if (!passes || passes(nbr)) {
          results.emplace(s, nbr);
          if (results.size() > beam) results.pop();
        }
      }
    }
  }

  std::vector<Hit> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());  // best first
  return out;
}

std::vector<uint32_t> HnswGraph::select_neighbors(
    std::vector<Hit> candidates, size_t max_links) const {
  std::sort(candidates.begin(), candidates.end(), [](const Hit& a, const Hit& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<uint32_t> selected;
  for (const auto& [q_sim, row] : candidates) {
    if (selected.size() >= max_links) break;
    bool keep = true;
    for (uint32_t s : selected) {
      // Drop rows that sit closer to an already kept neighbor than to the
      // query; they add no reach the kept neighbor doesn't provide.
      if (sim_rows(row, s) > q_sim) {
        keep = false;
        break;
      }
    }
    if (keep) selected.push_back(row);
  }
  return selected;
}

void HnswGraph::add(uint32_t row) {
  if (!data_) throw Error(ErrorKind::BadConfig, "graph has no data buffer");
  if (row != nodes_.size()) {
    throw Error(ErrorKind::BadArgument, "graph rows must be added in order");
  }

  Node node;
  node.level = draw_level();
  node.links.resize(size_t(node.level) + 1);
  nodes_.push_back(std::move(node));

  if (entry_ < 0) {
    entry_ = static_cast<int32_t>(row);
    max_level_ = nodes_[row].level;
    return;
  }

  std::span<const float> query(data_ + size_t(row) * dim_, dim_);
  uint32_t cur = static_cast<uint32_t>(entry_);
  for (int layer = max_level_; layer > nodes_[row].level; --layer) {
    cur = greedy_step(query, cur, layer);
  }

  int top = std::min(nodes_[row].level, max_level_);
  for (int layer = top; layer >= 0; --layer) {
    auto found = search_layer(query, cur, size_t(build_beam_), layer, nullptr);
    std::vector<uint32_t> chosen = select_neighbors(found, size_t(neighbors_));
    nodes_[row].links[layer] = chosen;
    if (!found.empty()) cur = found.front().second;

    for (uint32_t nbr : chosen) {
      std::vector<uint32_t>& back = nodes_[nbr].links[layer];
      back.push_back(row);
      size_t cap = layer_cap(layer);
      if (back.size() > cap) {
        std::vector<Hit> pool;
        pool.reserve(back.size());
        for (uint32_t b : back) pool.emplace_back(sim_rows(nbr, b), b);
        back = select_neighbors(std::move(pool), cap);
      }
    }
  }

  if (nodes_[row].level > max_level_) {
    max_level_ = nodes_[row].level;
    entry_ = static_cast<int32_t>(row);
  }
}

std::vector<Hit> HnswGraph::search(
    std::span<const float> query, size_t beam,
    const std::function<bool(uint32_t)>& passes) const {
  if (nodes_.empty() || beam == 0) return {};
  if (query.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch,
                "query dimension " + std::to_string(query.size()) +
                    " does not match graph dimension " + std::to_string(dim_));
  }
  uint32_t cur = static_cast<uint32_t>(entry_);
  for (int layer = max_level_; layer > 0; --layer) {
    cur = greedy_step(query, cur, layer);
  }
  return search_layer(query, cur, beam, 0, passes);
}

void HnswGraph::save(std::ostream& out) const {
  write_pod(out, static_cast<uint64_t>(dim_));
  write_pod(out, static_cast<int32_t>(neighbors_));
  write_pod(out, static_cast<int32_t>(build_beam_));
  write_pod(out, seed_);
  write_pod(out, entry_);
  write_pod(out, static_cast<int32_t>(max_level_));
  write_pod(out, static_cast<uint64_t>(nodes_.size()));
  for (const Node& node : nodes_) {
    write_pod(out, static_cast<int32_t>(node.level));
    for (const std::vector<uint32_t>& layer : node.links) {
      write_pod(out, static_cast<uint32_t>(layer.size()));
      for (uint32_t nbr : layer) write_pod(out, nbr);
    }
  }
}

void HnswGraph::load(std::istream& in) {
  uint64_t dim = 0, count = 0;
  int32_t neighbors = 0, beam = 0, max_level = 0;
  read_pod(in, dim);
  read_pod(in, neighbors);
  read_pod(in, beam);
  read_pod(in, seed_);
  read_pod(in, entry_);
  read_pod(in, max_level);
  read_pod(in, count);
  if (dim == 0 || neighbors < 2 || beam < 1) {
    throw Error(ErrorKind::BadIndexFile, "corrupt graph header");
  }
  dim_ = static_cast<size_t>(dim);
  neighbors_ = neighbors;
  build_beam_ = beam;
  max_level_ = max_level;
  level_mult_ = 1.0 / std::log(static_cast<double>(neighbors_));
  nodes_.clear();
  nodes_.resize(count);
  for (Node& node : nodes_) {
    int32_t level = 0;
    read_pod(in, level);
    if (level < 0) throw Error(ErrorKind::BadIndexFile, "negative node level");
    node.level = level;
    node.links.resize(size_t(level) + 1);
    for (std::vector<uint32_t>& layer : node.links) {
      uint32_t n = 0;
      read_pod(in, n);
      layer.resize(n);
      for (uint32_t& nbr : layer) {
        read_pod(in, nbr);
        if (nbr >= count) {
          throw Error(ErrorKind::BadIndexFile, "neighbor row out of range");
        }
      }
    }
  }
  if (count > 0 && (entry_ < 0 || static_cast<uint64_t>(entry_) >= count)) {
    throw Error(ErrorKind::BadIndexFile, "entry point out of range");
  }
}

}  // namespace lir
