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

#include "lir/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lir/error.hpp"

namespace lir {

using nlohmann::json;

namespace {

// Vectors are checked against unit norm with this slack; larger deviations
// mean the producer forgot to normalize.
constexpr double kNormSlack = 1e-3;

std::string locate(const std::string& path, size_t line) {
  return path + ":" + std::to_string(line);
}

[[noreturn]] void bad_record(const std::string& path, size_t line,
                             const std::string& msg) {
  throw Error(ErrorKind::BadRecord, locate(path, line) + ": " + msg);
}

std::string get_string(const json& j, const char* key, const std::string& path,
                       size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    bad_record(path, line, std::string("missing or non-string '") + key + "'");
  }
  return it->get<std::string>();
}

Metadata get_metadata(const json& j, const std::string& path, size_t line) {
  Metadata meta;
  auto it = j.find("metadata");
  if (it == j.end()) return meta;
  if (!it->is_object()) bad_record(path, line, "'metadata' must be an object");
  for (const auto& [key, value] : it->items()) {
    if (!value.is_string()) {
      bad_record(path, line, "metadata value for '" + key + "' must be a string");
    }
    meta[key] = value.get<std::string>();
  }
  return meta;
}

// Reads `count` little-endian f32 values starting at float-element `offset`.
Vector read_blob(const std::string& blob_path, uint64_t offset, size_t count,
                 const std::string& manifest, size_t line) {
  std::ifstream in(blob_path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError,
                locate(manifest, line) + ": cannot open blob file '" +
                    blob_path + "'");
  }
  in.seekg(static_cast<std::streamoff>(offset * sizeof(float)));
  std::vector<char> bytes(count * sizeof(float));
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<size_t>(in.gcount()) != bytes.size()) {
    throw Error(ErrorKind::IoError,
                locate(manifest, line) + ": blob file '" + blob_path +
                    "' ends before offset " + std::to_string(offset) +
                    " + count " + std::to_string(count));
  }
  Vector v(count);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

// Normalizes in place; warns when the input was off unit norm, errors on a
// zero vector.
void normalize_checked(Vector& v, const std::string& what,
                       const std::string& path, size_t line,
                       std::vector<std::string>* warnings) {
  double n = norm(v);
  if (n == 0.0) {
    throw Error(ErrorKind::ZeroVector, locate(path, line) + ": " + what +
                                           " is the zero vector");
  }
  if (std::abs(n - 1.0) > kNormSlack && warnings) {
    warnings->push_back(locate(path, line) + ": " + what + " had norm " +
                        std::to_string(n) + "; renormalized");
  }
  l2_normalize_inplace(v);
}

Vector parse_inline_vector(const json& arr, const std::string& path,
                           size_t line) {
  Vector v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) bad_record(path, line, "'vector' must hold numbers");
    v.push_back(x.get<float>());
  }
  if (v.empty()) bad_record(path, line, "'vector' must be non-empty");
  return v;
}

}  // namespace

void Corpus::finalize() {
  parent_index.clear();
  children_by_parent.clear();
  modality_set.clear();

  for (size_t i = 0; i < parents.size(); ++i) {
    parents[i].child_count_by_modality.clear();
    auto [it, inserted] = parent_index.emplace(parents[i].parent_id, i);
    if (!inserted) {
      throw Error(ErrorKind::DuplicateParent,
                  "parent_id '" + parents[i].parent_id + "' appears twice");
    }
    children_by_parent.emplace(parents[i].parent_id, std::vector<size_t>{});
  }

  std::set<std::string> seen_children;
  for (size_t i = 0; i < children.size(); ++i) {
    const ChildEmbedding& c = children[i];
    if (!seen_children.insert(c.child_id).second) {
      throw Error(ErrorKind::DuplicateChild,
                  "child_id '" + c.child_id + "' appears twice");
    }
    auto pit = parent_index.find(c.parent_id);
    if (pit == parent_index.end()) {
      throw Error(ErrorKind::DanglingParent,
                  "child '" + c.child_id + "' references unknown parent '" +
                      c.parent_id + "'");
    }
    if (dimension == 0) dimension = c.vector.size();
    if (c.vector.size() != dimension) {
      throw Error(ErrorKind::DimensionMismatch,
                  "child '" + c.child_id + "' has dimension " +
                      std::to_string(c.vector.size()) + ", corpus uses " +
                      std::to_string(dimension));
    }
    double n = norm(c.vector);
    if (std::abs(n - 1.0) > kNormSlack) {
      throw Error(ErrorKind::BadRecord,
                  "child '" + c.child_id + "' has norm " + std::to_string(n) +
                      "; vectors must be L2-normalized before finalize()");
    }
    children_by_parent[c.parent_id].push_back(i);
    parents[pit->second].child_count_by_modality[c.modality] += 1;
    modality_set.insert(c.modality);
  }

  for (const ParentDoc& p : parents) {
    if (children_by_parent[p.parent_id].empty()) {
      throw Error(ErrorKind::EmptyParent,
                  "parent '" + p.parent_id + "' has no children");
    }
  }

  // Canonical within-parent order: ascending child_id.
  for (auto& [pid, rows] : children_by_parent) {
    std::sort(rows.begin(), rows.end(), [this](size_t a, size_t b) {
      return children[a].child_id < children[b].child_id;
    });
  }
}

const ParentDoc& Corpus::parent(const std::string& parent_id) const {
  auto it = parent_index.find(parent_id);
  if (it == parent_index.end()) {
    throw Error(ErrorKind::UnknownParent, "no parent '" + parent_id + "'");
  }
  return parents[it->second];
}

bool Corpus::has_parent(const std::string& parent_id) const {
  return parent_index.count(parent_id) != 0;
}

int Qrels::grade(const std::string& query_id,
                 const std::string& parent_id) const {
  auto qit = grades.find(query_id);
  if (qit == grades.end()) return 0;
  auto pit = qit->second.find(parent_id);
  return pit == qit->second.end() ? 0 : pit->second;
}

bool Qrels::has_query(const std::string& query_id) const {
  return grades.count(query_id) != 0;
}

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport r;
  if (corpus.parents.empty()) {
    r.fatal.push_back("no parents");
    return r;
  }
  r.parent_count = corpus.parents.size();
  r.child_count = corpus.children.size();
  for (const ChildEmbedding& c : corpus.children) {
    r.children_by_modality[c.modality] += 1;
  }
  r.min_children_per_parent = corpus.children.size();
  for (const ParentDoc& p : corpus.parents) {
    r.parents_by_kind[p.kind] += 1;
    size_t n = corpus.children_by_parent.at(p.parent_id).size();
    r.child_count_histogram[n] += 1;
    r.min_children_per_parent = std::min(r.min_children_per_parent, n);
    r.max_children_per_parent = std::max(r.max_children_per_parent, n);
  }
  r.mean_children_per_parent =
      static_cast<double>(r.child_count) / static_cast<double>(r.parent_count);
  return r;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const std::string& f : fatal) out << "FATAL: " << f << "\n";
  out << "parents: " << parent_count << "\n";
  out << "children: " << child_count << "\n";
  for (const auto& [kind, n] : parents_by_kind) {
    out << "parents[" << to_string(kind) << "]: " << n << "\n";
  }
  for (const auto& [m, n] : children_by_modality) {
    out << "children[" << to_string(m) << "]: " << n << "\n";
  }
  out << "children per parent: mean " << mean_children_per_parent << ", min "
      << min_children_per_parent << ", max " << max_children_per_parent
      << "\n";
  return out.str();
}

Corpus load_corpus(const std::string& path,
                   std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open corpus manifest '" + path + "'");
  }
  std::filesystem::path base = std::filesystem::path(path).parent_path();

  Corpus corpus;
  bool saw_header = false;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_record(path, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_record(path, lineno, "record must be an object");
    std::string type = get_string(j, "type", path, lineno);

    if (type == "corpus") {
      if (saw_header) bad_record(path, lineno, "duplicate corpus header");
      saw_header = true;
      auto dit = j.find("dimension");
      if (dit == j.end() || !dit->is_number_integer() || dit->get<int64_t>() <= 0) {
        bad_record(path, lineno, "header needs a positive integer 'dimension'");
      }
      corpus.dimension = dit->get<size_t>();
    } else if (type == "parent") {
      ParentDoc p;
      p.parent_id = get_string(j, "parent_id", path, lineno);
      if (j.contains("kind")) {
        try {
          p.kind = parent_kind_from_string(get_string(j, "kind", path, lineno));
        } catch (const Error& e) {
          bad_record(path, lineno, e.what());
        }
      }
      p.metadata = get_metadata(j, path, lineno);
      corpus.parents.push_back(std::move(p));
    } else if (type == "child") {
      ChildEmbedding c;
      c.child_id = get_string(j, "child_id", path, lineno);
      c.parent_id = get_string(j, "parent_id", path, lineno);
      if (j.contains("modality")) {
        try {
          c.modality = modality_from_string(get_string(j, "modality", path, lineno));
        } catch (const Error& e) {
          bad_record(path, lineno, e.what());
        }
      }
      c.metadata = get_metadata(j, path, lineno);

      bool has_inline = j.contains("vector");
      bool has_blob = j.contains("blob_file");
      if (has_inline == has_blob) {
        bad_record(path, lineno,
                   "child needs exactly one of 'vector' or 'blob_file'");
      }
      if (has_inline) {
        if (!j["vector"].is_array()) {
          bad_record(path, lineno, "'vector' must be an array");
        }
        c.vector = parse_inline_vector(j["vector"], path, lineno);
      } else {
        std::string rel = get_string(j, "blob_file", path, lineno);
        auto oit = j.find("offset");
        auto cit = j.find("count");
        if (oit == j.end() || !oit->is_number_integer() ||
            oit->get<int64_t>() < 0) {
          bad_record(path, lineno, "blob child needs a non-negative 'offset'");
        }
        if (cit == j.end() || !cit->is_number_integer() ||
            cit->get<int64_t>() <= 0) {
          bad_record(path, lineno, "blob child needs a positive 'count'");
        }
        std::string blob_path = (base / rel).string();
        c.vector = read_blob(blob_path, oit->get<uint64_t>(),
                             cit->get<size_t>(), path, lineno);
      }
      if (corpus.dimension != 0 && c.vector.size() != corpus.dimension) {
        bad_record(path, lineno,
                   "child dimension " + std::to_string(c.vector.size()) +
                       " does not match corpus dimension " +
                       std::to_string(corpus.dimension));
      }
      normalize_checked(c.vector, "child '" + c.child_id + "'", path, lineno,
                        warnings);
      corpus.children.push_back(std::move(c));
    } else {
      if (warnings) {
        warnings->push_back(locate(path, lineno) +
                            ": skipping unknown record type '" + type + "'");
      }
    }
  }

  corpus.finalize();
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write corpus manifest '" + path + "'");
  }
  json header{{"type", "corpus"}, {"dimension", corpus.dimension}};
  out << header.dump() << "\n";
  for (const ParentDoc& p : corpus.parents) {
    json j{{"type", "parent"},
           {"parent_id", p.parent_id},
           {"kind", to_string(p.kind)}};
    if (!p.metadata.empty()) j["metadata"] = p.metadata;
    out << j.dump() << "\n";
  }
  for (const ChildEmbedding& c : corpus.children) {
    json j{{"type", "child"},
           {"child_id", c.child_id},
           {"parent_id", c.parent_id},
           {"modality", to_string(c.modality)},
           {"vector", c.vector}};
    if (!c.metadata.empty()) j["metadata"] = c.metadata;
    out << j.dump() << "\n";
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "short write to '" + path + "'");
  }
}

std::vector<QueryEmbedding> load_queries(const std::string& path,
                                         size_t dimension,
                                         std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open query manifest '" + path + "'");
  }
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<QueryEmbedding> queries;
  std::set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_record(path, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) bad_record(path, lineno, "record must be an object");
    std::string type = get_string(j, "type", path, lineno);
    if (type != "query") {
      if (warnings) {
        warnings->push_back(locate(path, lineno) +
                            ": skipping unknown record type '" + type + "'");
      }
      continue;
    }

    QueryEmbedding q;
    q.query_id = get_string(j, "query_id", path, lineno);
    if (!seen.insert(q.query_id).second) {
      bad_record(path, lineno, "query_id '" + q.query_id + "' appears twice");
    }
    auto tit = j.find("tokens");
    if (tit == j.end() || !tit->is_array()) {
      bad_record(path, lineno, "query needs a 'tokens' array");
    }
    for (const auto& tok : *tit) {
      Vector v;
      if (tok.is_array()) {
        v = parse_inline_vector(tok, path, lineno);
      } else if (tok.is_object() && tok.contains("blob_file")) {
        std::string rel = get_string(tok, "blob_file", path, lineno);
        auto oit = tok.find("offset");
        auto cit = tok.find("count");
        if (oit == tok.end() || !oit->is_number_integer() ||
            oit->get<int64_t>() < 0 || cit == tok.end() ||
            !cit->is_number_integer() || cit->get<int64_t>() <= 0) {
          bad_record(path, lineno,
                     "token blob reference needs 'offset' >= 0 and 'count' > 0");
        }
        v = read_blob((base / rel).string(), oit->get<uint64_t>(),
                      cit->get<size_t>(), path, lineno);
      } else {
        bad_record(path, lineno,
                   "each token must be an array of numbers or a blob reference");
      }
      if (dimension != 0 && v.size() != dimension) {
        bad_record(path, lineno,
                   "token dimension " + std::to_string(v.size()) +
                       " does not match expected " + std::to_string(dimension));
      }
      if (!q.tokens.empty() && v.size() != q.tokens.front().size()) {
        bad_record(path, lineno, "tokens of one query differ in dimension");
      }
      normalize_checked(v, "query '" + q.query_id + "' token", path, lineno,
                        warnings);
      q.tokens.push_back(std::move(v));
    }
    if (q.tokens.empty()) {
      throw Error(ErrorKind::EmptyQuery, locate(path, lineno) + ": query '" +
                                             q.query_id + "' has no tokens");
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

void write_queries(const std::vector<QueryEmbedding>& queries,
                   const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write query manifest '" + path + "'");
  }
  for (const QueryEmbedding& q : queries) {
    json j{{"type", "query"}, {"query_id", q.query_id}, {"tokens", q.tokens}};
    out << j.dump() << "\n";
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "short write to '" + path + "'");
  }
}

Qrels load_qrels(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open qrels '" + path + "'");
  }
  Qrels qrels;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' ||
        line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::istringstream fields(line);
    std::string qid, pid, grade_text, extra;
    if (!(fields >> qid >> pid >> grade_text)) {
      bad_record(path, lineno, "expected 'query_id parent_id grade'");
    }
    if (fields >> extra) {
      bad_record(path, lineno, "trailing fields after grade");
    }
    int grade = 0;
    try {
      size_t used = 0;
      grade = std::stoi(grade_text, &used);
      if (used != grade_text.size()) throw std::invalid_argument(grade_text);
    } catch (const std::exception&) {
      bad_record(path, lineno, "grade '" + grade_text + "' is not an integer");
    }
    if (grade < 0) {
      throw Error(ErrorKind::NegativeGrade,
                  locate(path, lineno) + ": grade must be >= 0");
    }
    auto& row = qrels.grades[qid];
    auto it = row.find(pid);
    if (it != row.end()) {
      if (warnings) {
        warnings->push_back(locate(path, lineno) + ": duplicate judgment for (" +
                            qid + ", " + pid + "); keeping the last one");
      }
      it->second = grade;
    } else {
      row.emplace(pid, grade);
    }
  }
  return qrels;
}

}  // namespace lir
