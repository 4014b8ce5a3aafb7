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

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lir/types.hpp"

namespace lir {

/// In-memory corpus: parents plus their child embeddings, with lookup
/// structures built by finalize(). Children are stored in a flat vector; the
/// per-parent lists hold indices into it, sorted by child_id so iteration
/// order never depends on input order.
struct Corpus {
  size_t dimension = 0;
  std::vector<ParentDoc> parents;
  std::vector<ChildEmbedding> children;

  std::set<Modality> modality_set;                           // derived
  std::map<std::string, size_t> parent_index;                // derived
  std::map<std::string, std::vector<size_t>> children_by_parent;  // derived

  /// Rebuilds the derived members and enforces the structural invariants:
  /// unique parent ids, unique child ids, no dangling parent references,
  /// every parent non-empty, consistent dimensions, unit-norm children.
  /// Throws Error on violation. Call after mutating parents/children.
  void finalize();

  const ParentDoc& parent(const std::string& parent_id) const;
  bool has_parent(const std::string& parent_id) const;
};

/// Graded relevance judgments: query_id -> parent_id -> grade.
struct Qrels {
  std::map<std::string, std::map<std::string, int>> grades;

  /// Grade of (query_id, parent_id), 0 when unjudged.
  int grade(const std::string& query_id, const std::string& parent_id) const;
  bool has_query(const std::string& query_id) const;
};

/// Summary statistics produced by validate_corpus.
struct ValidationReport {
  size_t parent_count = 0;
  size_t child_count = 0;
  std::map<Modality, size_t> children_by_modality;
  std::map<ParentKind, size_t> parents_by_kind;
  // children-per-parent histogram: count -> number of parents with it
  std::map<size_t, size_t> child_count_histogram;
  double mean_children_per_parent = 0.0;
  size_t min_children_per_parent = 0;
  size_t max_children_per_parent = 0;
  // Conditions that make the corpus unusable (e.g. "no parents"). The
  // report never throws; callers decide whether fatal findings abort.
  std::vector<std::string> fatal;

  std::string to_text() const;
};

/// Computes corpus statistics; report-only, never throws.
ValidationReport validate_corpus(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Persistence. All manifest formats are line-delimited JSON: one record per
// line, each tagged with a "type" field. Unknown record types are skipped
// with a warning so formats can grow without breaking old readers.
// ---------------------------------------------------------------------------

/// Reads a corpus manifest.
///
/// Record types:
///   {"type":"corpus","dimension":M}                       optional header
///   {"type":"parent","parent_id":...,"kind":...,"metadata":{...}}
///   {"type":"child","child_id":...,"parent_id":...,"modality":...,
///    "metadata":{...}, "vector":[...]}                    inline floats, or
///    "blob_file":"relative/path","offset":E,"count":M}    external blob
///
/// Blob offsets count float elements, not bytes; blob files are raw
/// little-endian f32 and are resolved relative to the manifest's directory.
/// Vectors are L2-normalized on load; inputs deviating from unit norm by
/// more than 1e-3 produce a warning. Errors carry "file:line" locators.
Corpus load_corpus(const std::string& path,
                   std::vector<std::string>* warnings = nullptr);

/// Writes a corpus manifest with all vectors inline.
void write_corpus(const Corpus& corpus, const std::string& path);

/// Reads {"type":"query","query_id":...,"tokens":[[...],...]} records. Each
/// element of "tokens" is either an inline array of numbers or a blob
/// reference {"blob_file","offset","count"} with the same semantics as
/// corpus blobs. Token vectors are L2-normalized on load. A query with zero
/// tokens is an EmptyQuery error. `dimension` 0 means infer from the first
/// token.
std::vector<QueryEmbedding> load_queries(
    const std::string& path, size_t dimension = 0,
    std::vector<std::string>* warnings = nullptr);

void write_queries(const std::vector<QueryEmbedding>& queries,
                   const std::string& path);

/// Reads whitespace-separated "query_id parent_id grade" lines. Blank lines
/// and lines starting with '#' are skipped. A repeated (query, parent) pair
/// keeps the last grade and emits a warning. Negative grades are errors.
Qrels load_qrels(const std::string& path,
                 std::vector<std::string>* warnings = nullptr);

}  // namespace lir
