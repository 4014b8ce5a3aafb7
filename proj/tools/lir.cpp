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

// lir — command-line front end: build an index from a corpus manifest,
// search it, evaluate runs against qrels, or dump the brute-force oracle.
// Every flag can also come from a config file (--config; flags win) or an
// LIR_-prefixed environment variable. The effective configuration is logged
// to stderr before any work so runs are reproducible from their logs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lir/corpus.hpp"
#include "lir/error.hpp"
#include "lir/eval.hpp"
#include "lir/index.hpp"
#include "lir/stage1.hpp"
#include "lir/stage2.hpp"

namespace {

using namespace lir;

struct CommonOpts {
  RetrievalConfig cfg;
  std::string weights_text;
  std::string ann_mode_text = to_string(AnnMode::exact_flat);
  std::string precision_text = to_string(PrecisionMode::full32);
  std::string config_path;
  CLI::App* cmd = nullptr;  // for checking which flags were given explicitly
};

void add_config_flags(CLI::App* cmd, CommonOpts& o) {
  o.cmd = cmd;
  cmd->add_option("--config", o.config_path,
                  "key=value config file; keys are flag names without the "
                  "leading dashes (explicit flags and environment win)")
      ->envname("LIR_CONFIG");
  cmd->add_option("--k", o.cfg.k_per_token,
                  "ANN hits kept per (query token, modality)")
      ->envname("LIR_K")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--top-m", o.cfg.top_m,
                  "token maxima summed per (parent, modality)")
      ->envname("LIR_TOP_M")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--shortlist-n", o.cfg.shortlist_n,
                  "parents passed to exact re-ranking")
      ->envname("LIR_SHORTLIST_N")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--num-candidates", o.cfg.num_candidates,
                  "filtered candidate beam per ANN search")
      ->envname("LIR_NUM_CANDIDATES")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--weights", o.weights_text,
                  "fusion weights, e.g. text=0.5,image=0.5 (default uniform)")
      ->envname("LIR_WEIGHTS");
  cmd->add_option("--ann-mode", o.ann_mode_text,
                  "exact_flat or approximate_graph")
      ->envname("LIR_ANN_MODE");
  cmd->add_option("--precision", o.precision_text, "full32 or mixed16")
      ->envname("LIR_PRECISION");
  cmd->add_option("--concurrency", o.cfg.fanout_concurrency,
                  "bounded fan-out / rerank worker count")
      ->envname("LIR_CONCURRENCY")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.cfg.seed, "graph construction seed")
      ->envname("LIR_SEED");
  cmd->add_option("--graph-neighbors", o.cfg.graph_neighbors,
                  "graph degree bound (approximate_graph)")
      ->envname("LIR_GRAPH_NEIGHBORS")
      ->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--graph-beam", o.cfg.graph_build_beam,
                  "graph construction beam (approximate_graph)")
      ->envname("LIR_GRAPH_BEAM")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--oracle-ceiling", o.cfg.oracle_parent_ceiling,
                  "max corpus parents an oracle run accepts")
      ->envname("LIR_ORACLE_CEILING")
      ->check(CLI::PositiveNumber);
}

// CLI11 only reads config files attached to the root app, never ones attached
// to a subcommand, so --config is an ordinary option handled here by hand.
// A key is honoured only when the matching flag was not set on the command
// line or through its environment variable: explicit settings always win.
void apply_config_file(CommonOpts& o) {
  std::ifstream in(o.config_path);
  if (!in) {
    throw Error(ErrorKind::IoError,
                "cannot read config file '" + o.config_path + "'");
  }
  auto trim = [](const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  static constexpr const char* kKeys[] = {
      "k",           "top-m",       "shortlist-n",     "num-candidates",
      "weights",     "ann-mode",    "precision",       "concurrency",
      "seed",        "graph-neighbors", "graph-beam",  "oracle-ceiling"};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::string where = o.config_path + ":" + std::to_string(line_no);
    size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::BadConfig,
                  where + ": expected key=value, got '" + text + "'");
    }
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty() || value.empty()) {
      throw Error(ErrorKind::BadConfig,
                  where + ": expected key=value, got '" + text + "'");
    }
    if (std::find(std::begin(kKeys), std::end(kKeys), key) ==
        std::end(kKeys)) {
      throw Error(ErrorKind::BadConfig,
                  where + ": unknown config key '" + key + "'");
    }
    if (o.cmd != nullptr && o.cmd->count("--" + key) > 0) continue;
    try {
      if (key == "k") {
        o.cfg.k_per_token = std::stoi(value);
      } else if (key == "top-m") {
        o.cfg.top_m = std::stoi(value);
      } else if (key == "shortlist-n") {
        o.cfg.shortlist_n = std::stoi(value);
      } else if (key == "num-candidates") {
        o.cfg.num_candidates = std::stoi(value);
      } else if (key == "weights") {
        o.weights_text = value;
      } else if (key == "ann-mode") {
        o.ann_mode_text = value;
      } else if (key == "precision") {
        o.precision_text = value;
      } else if (key == "concurrency") {
        o.cfg.fanout_concurrency = std::stoi(value);
      } else if (key == "seed") {
        o.cfg.seed = std::stoull(value);
      } else if (key == "graph-neighbors") {
        o.cfg.graph_neighbors = std::stoi(value);
      } else if (key == "graph-beam") {
        o.cfg.graph_build_beam = std::stoi(value);
      } else {  // oracle-ceiling
        o.cfg.oracle_parent_ceiling = std::stoi(value);
      }
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadConfig,
                  where + ": bad value '" + value + "' for '" + key + "'");
    }
  }
}

RetrievalConfig resolve_config(const CommonOpts& opts) {
  CommonOpts o = opts;
  if (!o.config_path.empty()) apply_config_file(o);
  RetrievalConfig cfg = o.cfg;
  cfg.ann_mode = ann_mode_from_string(o.ann_mode_text);
  cfg.precision_mode = precision_from_string(o.precision_text);
  if (!o.weights_text.empty()) {
    std::stringstream parts(o.weights_text);
    std::string part;
    while (std::getline(parts, part, ',')) {
      size_t eq = part.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == part.size()) {
        throw Error(ErrorKind::BadConfig,
                    "--weights expects modality=value pairs, got '" + part + "'");
      }
      Modality m = modality_from_string(part.substr(0, eq));
      try {
        cfg.modality_weights[m] = std::stod(part.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::BadConfig,
                    "bad weight value in '--weights " + part + "'");
      }
    }
  }
  cfg.validate();
  return cfg;
}

void log_config(const RetrievalConfig& cfg) {
  std::ostringstream line;
  line << "# config k_per_token=" << cfg.k_per_token
       << " num_candidates=" << cfg.num_candidates << " top_m=" << cfg.top_m
       << " shortlist_n=" << cfg.shortlist_n << " weights=";
  if (cfg.modality_weights.empty()) {
    line << "uniform";
  } else {
    bool first = true;
    for (const auto& [m, w] : cfg.modality_weights) {
      if (!first) line << ",";
      line << to_string(m) << "=" << w;
      first = false;
    }
  }
  line << " ann_mode=" << to_string(cfg.ann_mode)
       << " precision=" << to_string(cfg.precision_mode)
       << " concurrency=" << cfg.fanout_concurrency << " seed=" << cfg.seed
       << " graph_neighbors=" << cfg.graph_neighbors
       << " graph_build_beam=" << cfg.graph_build_beam
       << " oracle_ceiling=" << cfg.oracle_parent_ceiling;
  std::cerr << line.str() << "\n";
}

FilterSpec parse_filters(const std::vector<std::string>& pairs) {
  FilterSpec filter;
  for (const std::string& pair : pairs) {
    size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw Error(ErrorKind::BadArgument,
                  "--filter expects key=value, got '" + pair + "'");
    }
    std::string key = pair.substr(0, eq);
    std::string value = pair.substr(eq + 1);
    // "modality" is reserved for the structural modality filter; everything
    // else is an exact metadata match.
    if (key == "modality") {
      filter.modality = modality_from_string(value);
    } else {
      filter.metadata_equals[key] = value;
    }
  }
  return filter;
}

// Returns the stream records go to: --out PATH or stdout.
std::ostream& open_out(std::optional<std::ofstream>& holder,
                       const std::string& path) {
  if (path.empty()) return std::cout;
  holder.emplace(path, std::ios::trunc);
  if (!*holder) {
    throw Error(ErrorKind::IoError, "cannot write output file '" + path + "'");
  }
  return *holder;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

void emit_ranking(std::ostream& out, const std::string& query_id,
                  const std::vector<ScoredParent>& ranking) {
  for (size_t r = 0; r < ranking.size(); ++r) {
    out << query_id << '\t' << (r + 1) << '\t' << ranking[r].parent_id << '\t'
        << format_score(ranking[r].score) << '\t' << to_string(ranking[r].stage)
        << '\n';
  }
}

void emit_trec(std::ostream& out, const std::string& query_id,
               const std::vector<ScoredParent>& ranking) {
  for (size_t r = 0; r < ranking.size(); ++r) {
    out << query_id << " Q0 " << ranking[r].parent_id << " " << (r + 1) << " "
        << format_score(ranking[r].score) << " lir\n";
  }
}

void emit_metrics(std::ostream& out, const std::vector<MetricRow>& rows) {
  for (const MetricRow& row : rows) {
    out << row.query_id << '\t' << row.metric << '\t' << row.k << '\t'
        << format_score(row.value) << '\n';
  }
}

struct SweepSpec {
  std::string field;
  std::vector<int> values;
};

SweepSpec parse_sweep(const std::string& text) {
  size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw Error(ErrorKind::BadArgument,
                "--sweep expects field=v1,v2,..., got '" + text + "'");
  }
  SweepSpec spec;
  spec.field = text.substr(0, eq);
  std::stringstream values(text.substr(eq + 1));
  std::string value;
  while (std::getline(values, value, ',')) {
    try {
      spec.values.push_back(std::stoi(value));
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadArgument,
                  "bad sweep value '" + value + "' in '" + text + "'");
    }
  }
  if (spec.values.empty()) {
    throw Error(ErrorKind::BadArgument, "--sweep got no values");
  }
  return spec;
}

void apply_sweep_value(RetrievalConfig& cfg, const std::string& field,
                       int value) {
  if (field == "k" || field == "k_per_token") {
    cfg.k_per_token = value;
  } else if (field == "top_m" || field == "top-m") {
    cfg.top_m = value;
  } else if (field == "shortlist_n" || field == "shortlist-n") {
    cfg.shortlist_n = value;
  } else if (field == "num_candidates" || field == "num-candidates") {
    cfg.num_candidates = value;
  } else {
    throw Error(ErrorKind::BadArgument,
                "--sweep field must be one of k, top_m, shortlist_n, "
                "num_candidates; got '" +
                    field + "'");
  }
  cfg.validate();
}

int cmd_build(const CommonOpts& opts, const std::string& corpus_path,
              const std::string& index_path, bool force) {
  RetrievalConfig cfg = resolve_config(opts);
  log_config(cfg);
  if (!force && std::filesystem::exists(index_path)) {
    throw Error(ErrorKind::BadArgument,
                "index file '" + index_path +
                    "' already exists; pass --force to overwrite");
  }
  std::vector<std::string> warnings;
  Corpus corpus = load_corpus(corpus_path, &warnings);
  print_warnings(warnings);
  ValidationReport report = validate_corpus(corpus);
  std::cerr << report.to_text();
  if (!report.fatal.empty()) {
    throw Error(ErrorKind::BadRecord,
                "corpus '" + corpus_path + "' failed validation: " +
                    report.fatal.front());
  }

  auto started = std::chrono::steady_clock::now();
  Index index = build_index(std::move(corpus), cfg);
  save_index(index, index_path);
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::cerr << "indexed " << index.corpus().parents.size() << " parents / "
            << index.num_rows() << " children (" << to_string(cfg.ann_mode)
            << ") -> " << index_path << " in " << format_score(elapsed)
            << "s\n";
  return 0;
}

int cmd_search(const CommonOpts& opts, const std::string& index_path,
               const std::string& queries_path,
               const std::vector<std::string>& filter_pairs, bool stage1_only,
               const std::string& out_path, const std::string& trec_path) {
  RetrievalConfig cfg = resolve_config(opts);
  log_config(cfg);
  FilterSpec filter = parse_filters(filter_pairs);

  Index index = load_index(index_path);
  std::vector<std::string> warnings;
  std::vector<QueryEmbedding> queries =
      load_queries(queries_path, index.dim(), &warnings);
  print_warnings(warnings);

  std::optional<std::ofstream> out_file;
  std::ostream& out = open_out(out_file, out_path);
  std::optional<std::ofstream> trec_file;
  std::ostream* trec = nullptr;
  if (!trec_path.empty()) {
    trec_file.emplace(trec_path, std::ios::trunc);
    if (!*trec_file) {
      throw Error(ErrorKind::IoError,
                  "cannot write trec run file '" + trec_path + "'");
    }
    trec = &*trec_file;
  }

  auto started = std::chrono::steady_clock::now();
  for (const QueryEmbedding& query : queries) {
    std::vector<ScoredParent> shortlist = stage1_run(index, query, cfg, filter);
    emit_ranking(out, query.query_id, shortlist);
    if (stage1_only) {
      if (trec) emit_trec(*trec, query.query_id, shortlist);
      continue;
    }
    RerankResult reranked = rerank(index, query, shortlist, cfg);
    emit_ranking(out, query.query_id, reranked.ranking);
    if (trec) emit_trec(*trec, query.query_id, reranked.ranking);
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::cerr << queries.size() << " queries in " << format_score(elapsed)
            << "s\n";
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& index_path,
             const std::string& queries_path, const std::string& qrels_path,
             bool with_oracle, bool exclude_no_relevant, int recall_r,
             const std::string& sweep_text, const std::string& out_path) {
  RetrievalConfig cfg = resolve_config(opts);
  log_config(cfg);

  Index index = load_index(index_path);
  std::vector<std::string> warnings;
  std::vector<QueryEmbedding> queries =
      load_queries(queries_path, index.dim(), &warnings);
  Qrels qrels = load_qrels(qrels_path, &warnings);
  print_warnings(warnings);
  if (queries.empty()) {
    std::cerr << "warning: no queries in '" << queries_path
              << "'; nothing to evaluate\n";
  }

  EvalOptions eval_opts;
  eval_opts.with_oracle = with_oracle;
  eval_opts.exclude_no_relevant = exclude_no_relevant;
  eval_opts.recall_r = recall_r;

  std::optional<std::ofstream> out_file;
  std::ostream& out = open_out(out_file, out_path);

  std::vector<std::pair<std::string, int>> sweep_points;
  if (sweep_text.empty()) {
    sweep_points.emplace_back("", 0);
  } else {
    SweepSpec spec = parse_sweep(sweep_text);
    for (int v : spec.values) sweep_points.emplace_back(spec.field, v);
  }

  for (const auto& [field, value] : sweep_points) {
    RetrievalConfig point_cfg = cfg;
    if (!field.empty()) {
      apply_sweep_value(point_cfg, field, value);
      out << "# sweep " << field << "=" << value << "\n";
    }
    RunResult run = evaluate_run(index, queries, qrels, point_cfg, eval_opts);
    for (const auto& [query_id, message] : run.skipped) {
      std::cerr << "warning: skipped query '" << query_id << "': " << message
                << "\n";
    }
    emit_metrics(out, run.metrics);
    std::cerr << run.to_table();
  }
  return 0;
}

int cmd_oracle(const CommonOpts& opts, const std::string& index_path,
               const std::string& queries_path, const std::string& out_path) {
  RetrievalConfig cfg = resolve_config(opts);
  log_config(cfg);
  Index index = load_index(index_path);
  if (index.corpus().parents.size() > size_t(cfg.oracle_parent_ceiling)) {
    throw Error(ErrorKind::BadConfig,
                "oracle run refused: corpus has " +
                    std::to_string(index.corpus().parents.size()) +
                    " parents, above the ceiling of " +
                    std::to_string(cfg.oracle_parent_ceiling) +
                    " (raise --oracle-ceiling to override)");
  }
  std::vector<std::string> warnings;
  std::vector<QueryEmbedding> queries =
      load_queries(queries_path, index.dim(), &warnings);
  print_warnings(warnings);

  std::optional<std::ofstream> out_file;
  std::ostream& out = open_out(out_file, out_path);
  for (const QueryEmbedding& query : queries) {
    emit_ranking(out, query.query_id, oracle_rank(index, query));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lir: embeddable two-stage late-interaction retrieval engine"};
  app.require_subcommand(1);

  int exit_code = 0;

  // --- build ---------------------------------------------------------------
  CLI::App* build = app.add_subcommand(
      "build", "ingest a corpus manifest, build and persist an index");
  auto build_opts = std::make_shared<CommonOpts>();
  auto build_corpus = std::make_shared<std::string>();
  auto build_index_path = std::make_shared<std::string>();
  auto build_force = std::make_shared<bool>(false);
  add_config_flags(build, *build_opts);
  build->add_option("--corpus", *build_corpus, "corpus manifest (json lines)")
      ->required()
      ->envname("LIR_CORPUS");
  build->add_option("--index", *build_index_path, "index file to write")
      ->required()
      ->envname("LIR_INDEX");
  build->add_flag("--force", *build_force, "overwrite an existing index file");
  build->callback([&exit_code, build_opts, build_corpus, build_index_path,
                   build_force]() {
    exit_code =
        cmd_build(*build_opts, *build_corpus, *build_index_path, *build_force);
  });

  // --- search --------------------------------------------------------------
  CLI::App* search = app.add_subcommand(
      "search", "run the two-stage pipeline for a query file");
  auto search_opts = std::make_shared<CommonOpts>();
  auto search_index = std::make_shared<std::string>();
  auto search_queries = std::make_shared<std::string>();
  auto search_filters = std::make_shared<std::vector<std::string>>();
  auto search_stage1_only = std::make_shared<bool>(false);
  auto search_out = std::make_shared<std::string>();
  auto search_trec = std::make_shared<std::string>();
  add_config_flags(search, *search_opts);
  search->add_option("--index", *search_index, "index file")
      ->required()
      ->envname("LIR_INDEX");
  search->add_option("--queries", *search_queries, "query manifest")
      ->required()
      ->envname("LIR_QUERIES");
  search
      ->add_option("--filter", *search_filters,
                   "key=value restriction; 'modality' is the modality filter, "
                   "anything else matches effective metadata (repeatable)")
      ->take_all();
  search->add_flag("--stage1-only", *search_stage1_only,
                   "emit the Stage-1 shortlist and skip re-ranking");
  search->add_option("--out", *search_out,
                     "write ranking records here instead of stdout");
  search->add_option("--trec", *search_trec,
                     "also write a trec-style run file of the final ranking");
  search->callback([&exit_code, search_opts, search_index, search_queries,
                    search_filters, search_stage1_only, search_out,
                    search_trec]() {
    exit_code = cmd_search(*search_opts, *search_index, *search_queries,
                           *search_filters, *search_stage1_only, *search_out,
                           *search_trec);
  });

  // --- eval ----------------------------------------------------------------
  CLI::App* eval = app.add_subcommand(
      "eval", "evaluate both stages against qrels (nDCG, optional oracle)");
  auto eval_opts = std::make_shared<CommonOpts>();
  auto eval_index = std::make_shared<std::string>();
  auto eval_queries = std::make_shared<std::string>();
  auto eval_qrels = std::make_shared<std::string>();
  auto eval_oracle = std::make_shared<bool>(false);
  auto eval_exclude = std::make_shared<bool>(false);
  auto eval_recall_r = std::make_shared<int>(10);
  auto eval_sweep = std::make_shared<std::string>();
  auto eval_out = std::make_shared<std::string>();
  add_config_flags(eval, *eval_opts);
  eval->add_option("--index", *eval_index, "index file")
      ->required()
      ->envname("LIR_INDEX");
  eval->add_option("--queries", *eval_queries, "query manifest")
      ->required()
      ->envname("LIR_QUERIES");
  eval->add_option("--qrels", *eval_qrels, "graded judgments file")
      ->required()
      ->envname("LIR_QRELS");
  eval->add_flag("--oracle", *eval_oracle,
                 "also compute the brute-force oracle ranking, oracle nDCG, "
                 "and Stage-1 recall");
  eval->add_flag("--exclude-no-relevant", *eval_exclude,
                 "leave queries with no relevant documents out of the means");
  eval->add_option("--recall-r", *eval_recall_r,
                   "oracle depth for Stage-1 recall")
      ->check(CLI::PositiveNumber);
  eval->add_option("--sweep", *eval_sweep,
                   "field=v1,v2,... one metric block per value (fields: k, "
                   "top_m, shortlist_n, num_candidates)");
  eval->add_option("--out", *eval_out,
                   "write metric records here instead of stdout");
  eval->callback([&exit_code, eval_opts, eval_index, eval_queries, eval_qrels,
                  eval_oracle, eval_exclude, eval_recall_r, eval_sweep,
                  eval_out]() {
    exit_code = cmd_eval(*eval_opts, *eval_index, *eval_queries, *eval_qrels,
                         *eval_oracle, *eval_exclude, *eval_recall_r,
                         *eval_sweep, *eval_out);
  });

  // --- oracle --------------------------------------------------------------
  CLI::App* oracle = app.add_subcommand(
      "oracle", "emit the brute-force exact ranking for every query");
  auto oracle_opts = std::make_shared<CommonOpts>();
  auto oracle_index = std::make_shared<std::string>();
  auto oracle_queries = std::make_shared<std::string>();
  auto oracle_out = std::make_shared<std::string>();
  add_config_flags(oracle, *oracle_opts);
  oracle->add_option("--index", *oracle_index, "index file")
      ->required()
      ->envname("LIR_INDEX");
  oracle->add_option("--queries", *oracle_queries, "query manifest")
      ->required()
      ->envname("LIR_QUERIES");
  oracle->add_option("--out", *oracle_out,
                     "write ranking records here instead of stdout");
  oracle->callback([&exit_code, oracle_opts, oracle_index, oracle_queries,
                    oracle_out]() {
    exit_code = cmd_oracle(*oracle_opts, *oracle_index, *oracle_queries,
                           *oracle_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
