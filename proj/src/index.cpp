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

#include "lir/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>

#include "lir/error.hpp"
#include "lir/vec.hpp"

namespace lir {

namespace {

constexpr char kMagic[8] = {'L', 'I', 'R', 'I', 'N', 'D', 'E', 'X'};
constexpr uint32_t kFormatVersion = 1;
constexpr double kNormSlack = 1e-3;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::BadIndexFile, "truncated index file");
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t n = 0;
  read_pod(in, n);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error(ErrorKind::BadIndexFile, "truncated index file");
  return s;
}

void write_metadata(std::ostream& out, const Metadata& meta) {
  write_pod(out, static_cast<uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    write_string(out, k);
    write_string(out, v);
  }
}

Metadata read_metadata(std::istream& in) {
  uint32_t n = 0;
  read_pod(in, n);
  Metadata meta;
  for (uint32_t i = 0; i < n; ++i) {
    std::string k = read_string(in);
    meta[k] = read_string(in);
  }
  return meta;
}

void check_query(std::span<const float> query, size_t dim) {
  if (query.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "query dimension " + std::to_string(query.size()) +
                    " does not match index dimension " + std::to_string(dim));
  }
  double n = norm(query);
  if (n == 0.0) {
    throw Error(ErrorKind::ZeroVector, "query vector is all zeros");
  }
  if (std::abs(n - 1.0) > kNormSlack) {
    throw Error(ErrorKind::BadArgument,
                "query vector has norm " + std::to_string(n) +
                    "; normalize it before searching");
  }
}

}  // namespace

bool FilterSpec::matches(Modality m, const Metadata& effective) const {
  if (modality && *modality != m) return false;
  for (const auto& [key, want] : metadata_equals) {
    auto it = effective.find(key);
    if (it == effective.end() || it->second != want) return false;
  }
  return true;
}

void Index::pack_rows() {
  size_t dim = corpus_->dimension;
  size_t n = corpus_->children.size();
  packed_.resize(n * dim);
  row_child_.reserve(n);
  row_meta_.reserve(n);

  for (const ParentDoc& p : corpus_->parents) {
    uint32_t first = static_cast<uint32_t>(row_child_.size());
    for (size_t child_index : corpus_->children_by_parent.at(p.parent_id)) {
      const ChildEmbedding& c = corpus_->children[child_index];
      uint32_t row = static_cast<uint32_t>(row_child_.size());
      std::memcpy(packed_.data() + size_t(row) * dim, c.vector.data(),
                  dim * sizeof(float));
      row_child_.push_back(child_index);
      Metadata effective = p.metadata;
      for (const auto& [k, v] : c.metadata) effective[k] = v;
      row_meta_.push_back(std::move(effective));
      rows_by_modality_[c.modality].push_back(row);
    }
    parent_rows_[p.parent_id] = {first,
                                 static_cast<uint32_t>(row_child_.size())};
  }
}

bool Index::row_matches(uint32_t row, const FilterSpec& filter) const {
  return filter.matches(row_child(row).modality, row_meta_[row]);
}

std::vector<ChildHit> Index::rows_to_hits(
    std::vector<std::pair<float, uint32_t>> scored, size_t k) const {
  // Re-sort under the public tie-break (similarity desc, child_id asc);
  // graph results arrive tie-broken by row id instead.
  std::sort(scored.begin(), scored.end(),
            [this](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return row_child(a.second).child_id < row_child(b.second).child_id;
            });
  if (scored.size() > k) scored.resize(k);
  std::vector<ChildHit> hits;
  hits.reserve(scored.size());
  for (const auto& [sim, row] : scored) {
    const ChildEmbedding& c = row_child(row);
    hits.push_back({c.child_id, c.parent_id, c.modality, sim});
  }
  return hits;
}

std::vector<ChildHit> Index::exact_knn(std::span<const float> query, int k,
                                       const FilterSpec& filter) const {
  if (k < 1) throw Error(ErrorKind::BadArgument, "k must be >= 1");
  if (num_rows() == 0) return {};
  check_query(query, dim());

  // Bounded worst-on-top heap; "better" means (sim desc, child_id asc).
  auto better = [this](const std::pair<float, uint32_t>& a,
                       const std::pair<float, uint32_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return row_child(a.second).child_id < row_child(b.second).child_id;
  };
  std::priority_queue<std::pair<float, uint32_t>,
                      std::vector<std::pair<float, uint32_t>>, decltype(better)>
      worst_on_top(better);

  auto consider = [&](uint32_t row) {
    if (!row_matches(row, filter)) return;
    float s = dot(query, row_vector(row));
    std::pair<float, uint32_t> cand{s, row};
    if (worst_on_top.size() < size_t(k)) {
      worst_on_top.push(cand);
    } else if (better(cand, worst_on_top.top())) {
      worst_on_top.pop();
      worst_on_top.push(cand);
    }
  };

  if (filter.modality) {
    auto it = rows_by_modality_.find(*filter.modality);
    if (it != rows_by_modality_.end()) {
      for (uint32_t row : it->second) consider(row);
    }
  } else {
    for (uint32_t row = 0; row < num_rows(); ++row) consider(row);
  }

  std::vector<std::pair<float, uint32_t>> scored;
  scored.reserve(worst_on_top.size());
  while (!worst_on_top.empty()) {
    scored.push_back(worst_on_top.top());
    worst_on_top.pop();
  }
  return rows_to_hits(std::move(scored), size_t(k));
}

std::vector<ChildHit> Index::knn(std::span<const float> query, int k,
                                 const FilterSpec& filter,
                                 int num_candidates) const {
  if (k < 1) throw Error(ErrorKind::BadArgument, "k must be >= 1");
  if (num_candidates < k) {
    throw Error(ErrorKind::BadArgument,
                "num_candidates must be >= k (got " +
                    std::to_string(num_candidates) + " < " + std::to_string(k) +
                    ")");
  }
  if (ann_mode_ == AnnMode::exact_flat) return exact_knn(query, k, filter);

  if (num_rows() == 0) return {};
  check_query(query, dim());
  auto passes = [this, &filter](uint32_t row) {
    return row_matches(row, filter);
  };
  auto scored = graph_.search(query, size_t(num_candidates), passes);
  return rows_to_hits(std::move(scored), size_t(k));
}

ChildMatrix Index::children_of(const std::string& parent_id,
                               std::optional<Modality> modality) const {
  auto [first, last] = parent_row_range(parent_id);
  ChildMatrix m;
  m.dim = dim();
  for (uint32_t row = first; row < last; ++row) {
    const ChildEmbedding& c = row_child(row);
    if (modality && c.modality != *modality) continue;
    m.child_ids.push_back(c.child_id);
    m.modalities.push_back(c.modality);
    auto v = row_vector(row);
    m.data.insert(m.data.end(), v.begin(), v.end());
  }
  m.rows = m.child_ids.size();
  return m;
}

std::pair<uint32_t, uint32_t> Index::parent_row_range(
    const std::string& parent_id) const {
  auto it = parent_rows_.find(parent_id);
  if (it == parent_rows_.end()) {
    throw Error(ErrorKind::UnknownParent, "no parent '" + parent_id + "'");
  }
  return it->second;
}

Index build_index(Corpus corpus, const RetrievalConfig& config) {
  config.validate();
  corpus.finalize();
  Index index;
  index.corpus_ = std::make_shared<const Corpus>(std::move(corpus));
  index.ann_mode_ = config.ann_mode;
  index.graph_neighbors_ = config.graph_neighbors;
  index.graph_build_beam_ = config.graph_build_beam;
  index.seed_ = config.seed;
  index.pack_rows();

  if (index.ann_mode_ == AnnMode::approximate_graph) {
    index.graph_ = HnswGraph(index.dim(), config.graph_neighbors,
                             config.graph_build_beam, config.seed);
    index.graph_.set_data(index.packed_.data());
    index.graph_.reserve(index.num_rows());
    for (uint32_t row = 0; row < index.num_rows(); ++row) index.graph_.add(row);
  }
  return index;
}

void save_index(const Index& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write index file '" + path + "'");
  }
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<uint8_t>(index.ann_mode_));
  write_pod(out, static_cast<int32_t>(index.graph_neighbors_));
  write_pod(out, static_cast<int32_t>(index.graph_build_beam_));
  write_pod(out, index.seed_);

  const Corpus& corpus = *index.corpus_;
  write_pod(out, static_cast<uint64_t>(corpus.dimension));
  write_pod(out, static_cast<uint64_t>(corpus.parents.size()));
  for (const ParentDoc& p : corpus.parents) {
    write_string(out, p.parent_id);
    write_pod(out, static_cast<uint8_t>(p.kind));
    write_metadata(out, p.metadata);
  }
  write_pod(out, static_cast<uint64_t>(corpus.children.size()));
  for (const ChildEmbedding& c : corpus.children) {
    write_string(out, c.child_id);
    write_string(out, c.parent_id);
    write_pod(out, static_cast<uint8_t>(c.modality));
    write_metadata(out, c.metadata);
    out.write(reinterpret_cast<const char*>(c.vector.data()),
              static_cast<std::streamsize>(c.vector.size() * sizeof(float)));
  }

  uint8_t has_graph = index.ann_mode_ == AnnMode::approximate_graph ? 1 : 0;
  write_pod(out, has_graph);
  if (has_graph) index.graph_.save(out);
  if (!out) throw Error(ErrorKind::IoError, "short write to '" + path + "'");
}

Index load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open index file '" + path + "'");
  }
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::BadIndexFile, "'" + path + "' is not an index file");
  }
  uint32_t version = 0;
  read_pod(in, version);
  if (version != kFormatVersion) {
    throw Error(ErrorKind::BadIndexFile,
                "index format version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kFormatVersion) + ")");
  }

  Index index;
  uint8_t mode = 0;
  int32_t neighbors = 0, beam = 0;
  read_pod(in, mode);
  read_pod(in, neighbors);
  read_pod(in, beam);
  read_pod(in, index.seed_);
  if (mode > static_cast<uint8_t>(AnnMode::approximate_graph)) {
    throw Error(ErrorKind::BadIndexFile, "corrupt ann_mode field");
  }
  index.ann_mode_ = static_cast<AnnMode>(mode);
  index.graph_neighbors_ = neighbors;
  index.graph_build_beam_ = beam;

  Corpus corpus;
  uint64_t dim = 0, parent_count = 0, child_count = 0;
  read_pod(in, dim);
  read_pod(in, parent_count);
  corpus.dimension = static_cast<size_t>(dim);
  for (uint64_t i = 0; i < parent_count; ++i) {
    ParentDoc p;
    p.parent_id = read_string(in);
    uint8_t kind = 0;
    read_pod(in, kind);
    if (kind > static_cast<uint8_t>(ParentKind::video_segment)) {
      throw Error(ErrorKind::BadIndexFile, "corrupt parent kind");
    }
    p.kind = static_cast<ParentKind>(kind);
    p.metadata = read_metadata(in);
    corpus.parents.push_back(std::move(p));
  }
  read_pod(in, child_count);
  for (uint64_t i = 0; i < child_count; ++i) {
    ChildEmbedding c;
    c.child_id = read_string(in);
    c.parent_id = read_string(in);
    uint8_t modality = 0;
    read_pod(in, modality);
    if (modality > static_cast<uint8_t>(Modality::video_frame)) {
      throw Error(ErrorKind::BadIndexFile, "corrupt child modality");
    }
    c.modality = static_cast<Modality>(modality);
    c.metadata = read_metadata(in);
    c.vector.resize(corpus.dimension);
    in.read(reinterpret_cast<char*>(c.vector.data()),
            static_cast<std::streamsize>(corpus.dimension * sizeof(float)));
    if (!in) throw Error(ErrorKind::BadIndexFile, "truncated index file");
    corpus.children.push_back(std::move(c));
  }
  corpus.finalize();
  index.corpus_ = std::make_shared<const Corpus>(std::move(corpus));
  index.pack_rows();

  uint8_t has_graph = 0;
  read_pod(in, has_graph);
  if (index.ann_mode_ == AnnMode::approximate_graph) {
    if (!has_graph) {
      throw Error(ErrorKind::BadIndexFile, "graph-mode index without a graph");
    }
    index.graph_.load(in);
    if (index.graph_.size() != index.num_rows() ||
        index.graph_.dim() != index.dim()) {
      throw Error(ErrorKind::BadIndexFile,
                  "graph does not match the stored corpus");
    }
    index.graph_.set_data(index.packed_.data());
  }
  return index;
}

}  // namespace lir
