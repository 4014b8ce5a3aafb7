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

#include "lir/types.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "lir/error.hpp"

namespace lir {

const char* to_string(Modality m) {
  switch (m) {
    case Modality::text:
      return "text";
    case Modality::image:
      return "image";
    case Modality::video_frame:
      return "video_frame";
  }
  return "unknown";
}

const char* to_string(ParentKind k) {
  switch (k) {
    case ParentKind::page:
      return "page";
    case ParentKind::image:
      return "image";
    case ParentKind::video_segment:
      return "video_segment";
  }
  return "unknown";
}

const char* to_string(PrecisionMode p) {
  return p == PrecisionMode::full32 ? "full32" : "mixed16";
}

const char* to_string(AnnMode a) {
  return a == AnnMode::exact_flat ? "exact_flat" : "approximate_graph";
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::stage1:
      return "stage1";
    case Stage::stage2:
      return "stage2";
    case Stage::oracle:
      return "oracle";
  }
  return "unknown";
}

Modality modality_from_string(const std::string& s) {
  if (s == "text") return Modality::text;
  if (s == "image") return Modality::image;
  if (s == "video_frame") return Modality::video_frame;
  throw Error(ErrorKind::BadRecord, "unknown modality '" + s + "'");
}

ParentKind parent_kind_from_string(const std::string& s) {
  if (s == "page") return ParentKind::page;
  if (s == "image") return ParentKind::image;
  if (s == "video_segment") return ParentKind::video_segment;
  throw Error(ErrorKind::BadRecord, "unknown parent kind '" + s + "'");
}

PrecisionMode precision_from_string(const std::string& s) {
  if (s == "full32") return PrecisionMode::full32;
  if (s == "mixed16") return PrecisionMode::mixed16;
  throw Error(ErrorKind::BadConfig, "unknown precision mode '" + s + "'");
}

AnnMode ann_mode_from_string(const std::string& s) {
  if (s == "exact_flat") return AnnMode::exact_flat;
  if (s == "approximate_graph") return AnnMode::approximate_graph;
  throw Error(ErrorKind::BadConfig, "unknown ann mode '" + s + "'");
}

int RetrievalConfig::default_concurrency() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void RetrievalConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw Error(ErrorKind::BadConfig, msg);
  };
  require(k_per_token >= 1, "k_per_token must be >= 1");
  require(num_candidates >= 1, "num_candidates must be >= 1");
  require(k_per_token <= num_candidates,
          "k_per_token must not exceed num_candidates");
  require(top_m >= 1, "top_m must be >= 1");
  require(shortlist_n >= 1, "shortlist_n must be >= 1");
  require(fanout_concurrency >= 1, "fanout_concurrency must be >= 1");
  require(graph_neighbors >= 2, "graph_neighbors must be >= 2");
  require(graph_build_beam >= 1, "graph_build_beam must be >= 1");
  require(oracle_parent_ceiling >= 1, "oracle_parent_ceiling must be >= 1");
  for (const auto& [m, w] : modality_weights) {
    if (!(std::isfinite(w) && w >= 0.0)) {
      throw Error(ErrorKind::BadConfig,
                  std::string("weight for modality '") + to_string(m) +
                      "' must be finite and non-negative");
    }
  }
}

void sort_ranking(std::vector<ScoredParent>& ranking) {
  std::sort(ranking.begin(), ranking.end(), scored_before);
}

}  // namespace lir
