#include "sgu/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgu/config.hpp"
#include "sgu/error.hpp"
#include "sgu/rng.hpp"
#include "sgu/serialization.hpp"

namespace sgu::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
  std::optional<double> delta;
  std::optional<std::string> partitioner;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> repeats;
  std::optional<std::string> format;
  std::optional<std::string> input;
  std::optional<std::string> preset;
  std::optional<std::string> aggregation;
  std::optional<std::size_t> threads;
  std::optional<std::string> partition;
  std::optional<std::string> train;
  std::optional<std::string> test;
  std::optional<std::string> checkpoint;
  std::optional<std::string> requests;
  std::optional<std::string> compare;
};

RunConfig resolve_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.input) c.dataset = *f.input;
  if (f.format) {
    auto fmt = parse_edge_format(*f.format);
    if (!fmt) throw ConfigError("--format: expected raw-rating or signed");
    c.format = *fmt;
  }
  if (f.preset) {
    auto k = preset_shard_count(*f.preset);
    if (!k) throw ConfigError("--preset: unknown preset \"" + *f.preset + "\"");
    c.preset = *f.preset;
    c.clustering.k = *k;
  }
  if (f.k) c.clustering.k = *f.k;
  if (f.alpha) c.clustering.alpha = *f.alpha;
  if (f.delta) c.clustering.delta = *f.delta;
  if (f.partitioner) {
    auto p = parse_partitioner(*f.partitioner);
    if (!p) throw ConfigError("--partitioner: expected sgu or random");
    c.partitioner = *p;
  }
  if (f.aggregation) {
    auto a = parse_aggregation(*f.aggregation);
    if (!a) throw ConfigError("--aggregation: expected covering-mean or prior-mean");
    c.aggregation = *a;
  }
  if (f.seed) c.global_seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.repeats) c.repeats = *f.repeats;
  if (f.threads) c.threads = *f.threads;
  c.validate();
  return c;
}

struct InputGraph {
  SignedGraph graph;
  std::vector<std::int64_t> original_ids;
  std::string source;
};

InputGraph load_input(const RunConfig& c) {
  if (c.dataset) {
    LoadedGraph lg = load_edge_list(*c.dataset, c.format);
    return {std::move(lg.graph), std::move(lg.original_ids), *c.dataset};
  }
  return {generate_polarized_ssbm(c.synth), {}, "synth"};
}

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void write_text(const fs::path& path, const std::string& s) { write_file_atomic(path, s); }

std::string graph_csv(const SignedGraph& g) {
  std::ostringstream ss;
  write_graph_csv(ss, g);
  return ss.str();
}

fs::path path_or(const std::optional<std::string>& p, const fs::path& fallback) {
  return p ? fs::path(*p) : fallback;
}

TrainOptions train_options(const RunConfig& c) { return {c.threads, c.aggregation}; }

std::string fmt(double x, int digits = 4) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << x;
  return ss.str();
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) err << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------

int cmd_synth(const Flags& f, const RunConfig& c, std::ostream& out) {
  SsbmParams p = c.synth;
  if (f.seed) p.seed = *f.seed;
  const SignedGraph g = generate_polarized_ssbm(p);
  const fs::path dir = c.out;
  write_text(dir / "graph.csv", graph_csv(g));
  std::ostringstream blocks;
  for (NodeId u = 0; u < g.node_count(); ++u) blocks << u << "," << ssbm_block_of(p, u) << "\n";
  write_text(dir / "blocks.csv", blocks.str());
  out << "synth: n=" << g.node_count() << " edges=" << g.edge_count() << " positive=" << g.positive_edge_count()
      << " -> " << (dir / "graph.csv").string() << "\n";
  return kOk;
}

int cmd_partition(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const InputGraph in = load_input(c);
  const EdgeSplit split = split_edges(in.graph, c.effective_split());
  print_warnings(err, split.warnings);
  const PartitionResult pr = run_partitioner(c.partitioner, split.train, c.extraction, c.clustering,
                                             derive_seed(c.global_seed, "partition"));
  const fs::path dir = c.out;
  write_text(dir / "train.csv", graph_csv(split.train));
  write_text(dir / "test.csv", graph_csv(SignedGraph(in.graph.node_count(), split.test)));
  if (!in.original_ids.empty()) {
    std::ostringstream map;
    write_node_mapping_csv(map, in.original_ids);
    write_text(dir / "node_map.csv", map.str());
  }
  write_json(dir / "graph_info.json", {{"source", in.source},
                                       {"node_count", in.graph.node_count()},
                                       {"edges", in.graph.edge_count()},
                                       {"train_edges", split.train.edge_count()},
                                       {"test_edges", split.test.size()},
                                       {"warnings", split.warnings},
                                       {"config", config_to_json(c)}});
  write_json(dir / "groups.json", groups_to_json(pr.groups));
  write_json(dir / "partition.json", partition_to_json(pr.partition));
  const PartitionDiagnostics diag = partition_diagnostics(split.train, pr.partition);
  write_json(dir / "diagnostics.json", diagnostics_to_json(diag));
  write_json(dir / "partition_timing.json", {{"partitioner", to_string(c.partitioner)},
                                             {"stage_a_extraction_seconds", pr.extraction_seconds},
                                             {"stage_b_clustering_seconds", pr.clustering_seconds}});
  out << "partition (" << to_string(c.partitioner) << "): k=" << pr.partition.k
      << " delta_final=" << pr.partition.delta_final << " groups=" << pr.groups.size()
      << " cut_edges=" << diag.cut_edges << "/" << diag.total_edges
      << " mean_balance_ratio=" << fmt(diag.mean_balance_ratio) << "\n"
      << "  stage (a) extraction " << fmt(pr.extraction_seconds, 3) << " s, stage (b) clustering "
      << fmt(pr.clustering_seconds, 3) << " s\n";
  return kOk;
}

int cmd_train(const Flags& f, const RunConfig& c, std::ostream& out, std::ostream& err) {
  const fs::path dir = c.out;
  const Json pj = read_json_file(path_or(f.partition, dir / "partition.json"));
  if (!pj.contains("assignment") || !pj["assignment"].is_object()) {
    throw ValidationError("partition file has no assignment object");
  }
  const std::size_t n = pj["assignment"].size();
  const std::vector<Edge> edges = load_signed_edges(path_or(f.train, dir / "train.csv"));
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw ValidationError("training edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                            "} names a node the partition does not cover");
    }
  }
  const SignedGraph g(n, edges);
  const Partition p = partition_from_json(g, pj);
  const auto t0 = std::chrono::steady_clock::now();
  const EnsembleModel e = train_all(g, p, c.model, c.global_seed, train_options(c));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  print_warnings(err, e.warnings);
  const fs::path ckpt = path_or(f.checkpoint, dir / "checkpoint");
  save_ensemble(ckpt, e);
  write_json(dir / "train_timing.json", {{"train_seconds", seconds}});
  out << "train: k=" << e.k() << " shards, " << e.training_edge_count() - e.cut_edges.size()
      << " intra edges, " << e.cut_edges.size() << " cut edges, " << fmt(seconds, 3) << " s -> " << ckpt.string()
      << "\n";
  return kOk;
}

int cmd_unlearn(const Flags& f, const RunConfig& c, std::ostream& out) {
  if (!f.requests) throw ConfigError("unlearn needs --requests");
  const fs::path dir = c.out;
  const fs::path ckpt = path_or(f.checkpoint, dir / "checkpoint");
  EnsembleModel e = load_ensemble(ckpt);
  const std::vector<UnlearnRequest> requests = load_requests(*f.requests);
  Json report = Json::array();
  Json timing = Json::array();
  std::size_t applied = 0, retrained = 0;
  for (const UnlearnRequest& r : requests) {
    const UnlearnReport rep = unlearn(e, r);
    Json entry = r.kind == UnlearnRequest::Kind::kRemoveEdge
                     ? Json{{"op", "remove-edge"}, {"u", r.u}, {"v", r.v}}
                     : Json{{"op", "remove-node"}, {"u", r.u}};
    entry["applied"] = rep.applied;
    entry["cut_edge"] = rep.was_cut_edge;
    entry["retrained_shard"] = rep.retrained_shard ? Json(*rep.retrained_shard) : Json(nullptr);
    entry["edges_removed"] = rep.edges_removed;
    if (!rep.notice.empty()) {
      entry["notice"] = rep.notice;
      out << "notice: " << rep.notice << "\n";
    }
    report.push_back(std::move(entry));
    timing.push_back({{"retrained_shard", rep.retrained_shard ? Json(*rep.retrained_shard) : Json(nullptr)},
                      {"seconds", rep.seconds}});
    applied += rep.applied;
    retrained += rep.retrained_shard.has_value();
  }
  save_ensemble(ckpt, e);
  write_json(dir / "unlearn_report.json", {{"requests", std::move(report)}});
  write_json(dir / "unlearn_timing.json", {{"requests", std::move(timing)}});
  out << "unlearn: " << requests.size() << " requests, " << applied << " applied, " << retrained
      << " shard retrains -> " << ckpt.string() << "\n";
  return kOk;
}

void add_f1_metrics(ReportRow& row, const std::vector<F1Report>& runs) {
  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const F1Report& r : runs) {
      if (auto x = getter(r)) v.push_back(*x);
    }
    return summarize(v);
  };
  row.metrics.push_back({"macro_f1", collect([](const F1Report& r) { return std::optional<double>(r.macro_f1); })});
  const MetricSummary pos = collect([](const F1Report& r) { return r.f1_positive; });
  const MetricSummary neg = collect([](const F1Report& r) { return r.f1_negative; });
  if (pos.n) row.metrics.push_back({"f1_positive", pos});
  if (neg.n) row.metrics.push_back({"f1_negative", neg});
}

BenchmarkConfig benchmark_config(const RunConfig& c, PartitionerKind kind, std::size_t repeat, bool scratch) {
  BenchmarkConfig b;
  b.partitioner = kind;
  b.extraction = c.extraction;
  b.clustering = c.clustering;
  b.model = c.model;
  b.split = c.effective_split();
  b.split.seed = derive_seed(b.split.seed, "repeat", repeat);
  b.deletion_fraction = c.deletion_fraction;
  b.seed = derive_seed(c.global_seed, "repeat", repeat);
  // Timed runs use one worker.
  b.train = {1, c.aggregation};
  b.skip_scratch = !scratch;
  return b;
}

int cmd_eval(const Flags& f, const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (f.compare && *f.compare != "scratch") throw ConfigError("--compare: only \"scratch\" is supported");
  const bool compare = f.compare.has_value();
  const fs::path dir = c.out;
  const fs::path ckpt = path_or(f.checkpoint, dir / "checkpoint");
  EvalReport report;
  if (c.repeats == 1 && fs::exists(ckpt / "manifest.json")) {
    const EnsembleModel e = load_ensemble(ckpt);
    std::vector<Edge> test = load_signed_edges(path_or(f.test, dir / "test.csv"));
    for (const Edge& x : test) {
      if (x.u >= e.node_count || x.v >= e.node_count) throw ValidationError("test edge outside the checkpoint's graph");
    }
    // The graph's source, not the checkpoint location, so reports do not
    // depend on the output directory.
    const fs::path info = dir / "graph_info.json";
    report.dataset = fs::exists(info) ? read_json_file(info).value("source", "checkpoint") : "checkpoint";
    report.runs.push_back(evaluate_f1(e, test));
    ReportRow row{"ensemble", {}};
    add_f1_metrics(row, {report.runs.back()});
    report.rows.push_back(std::move(row));
    if (compare) {
      const SignedGraph g(e.node_count, e.training_edges());
      const EnsembleModel scratch = scratch_retrain(g, e.partition, e.hp, e.global_seed, e.removed_nodes, {c.threads, e.aggregation});
      report.runs.push_back(evaluate_f1(scratch, test));
      ReportRow srow{"scratch", {}};
      add_f1_metrics(srow, {report.runs.back()});
      report.rows.push_back(std::move(srow));
      report.notes.push_back(std::string("scratch retrain identical to checkpoint: ") +
                             (same_models(e, scratch) ? "yes" : "no"));
    }
  } else {
    const InputGraph in = load_input(c);
    report.dataset = in.source;
    std::vector<F1Report> before, after, scratch;
    std::vector<double> mia_o, mia_u;
    for (std::size_t r = 0; r < c.repeats; ++r) {
      const UnlearnBenchmark b = run_unlearn_benchmark(in.graph, benchmark_config(c, c.partitioner, r, compare));
      print_warnings(err, b.warnings);
      before.push_back(b.f1_before);
      after.push_back(b.f1_after);
      if (b.f1_scratch) scratch.push_back(*b.f1_scratch);
      mia_o.push_back(b.mia_original);
      mia_u.push_back(b.mia_unlearned);
      report.mia_auc.push_back({b.mia_original, b.mia_unlearned});
    }
    report.runs = before;
    ReportRow row{to_string(c.partitioner), {}};
    add_f1_metrics(row, before);
    std::vector<double> after_macro;
    for (const F1Report& x : after) after_macro.push_back(x.macro_f1);
    row.metrics.push_back({"macro_f1_unlearned", summarize(after_macro)});
    row.metrics.push_back({"mia_auc_original", summarize(mia_o)});
    row.metrics.push_back({"mia_auc_unlearned", summarize(mia_u)});
    report.rows.push_back(std::move(row));
    if (compare) {
      ReportRow srow{"scratch", {}};
      add_f1_metrics(srow, scratch);
      report.rows.push_back(std::move(srow));
    }
    report.notes.push_back("repeats=" + std::to_string(c.repeats) + ", deletion_fraction=" +
                           fmt(c.deletion_fraction, 4));
  }
  report.notes.push_back("membership inference: confidence-threshold attack, not a shadow-model attack");
  const std::string table = format_table(report.rows);
  write_json(dir / "report.json", eval_report_to_json(report));
  write_text(dir / "report.txt", table);
  out << table;
  return kOk;
}

int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const InputGraph in = load_input(c);
  const fs::path dir = c.out;
  Json runs = Json::object(), timings = Json::object();
  std::vector<ReportRow> table3, table2;
  std::vector<double> scratch_s, scratch_f1;
  for (PartitionerKind kind : {PartitionerKind::kRandom, PartitionerKind::kSgu}) {
    const std::string name = to_string(kind);
    runs[name] = Json::array();
    timings[name] = Json::array();
    std::vector<double> mean_s, intra_s, cut_s, f1, mia_o, mia_u, stage_a, stage_b;
    for (std::size_t r = 0; r < c.repeats; ++r) {
      const bool scratch = kind == PartitionerKind::kSgu;
      const UnlearnBenchmark b = run_unlearn_benchmark(in.graph, benchmark_config(c, kind, r, scratch));
      print_warnings(err, b.warnings);
      runs[name].push_back(benchmark_to_json(b));
      timings[name].push_back(benchmark_timing_to_json(b));
      mean_s.push_back(b.mean_unlearn_seconds);
      if (b.intra_deletions) intra_s.push_back(b.mean_intra_seconds);
      if (b.cut_deletions) cut_s.push_back(b.mean_cut_seconds);
      f1.push_back(b.f1_before.macro_f1);
      mia_o.push_back(b.mia_original);
      mia_u.push_back(b.mia_unlearned);
      stage_a.push_back(b.extraction_seconds);
      stage_b.push_back(b.clustering_seconds);
      if (scratch) {
        scratch_s.push_back(b.scratch_seconds);
        if (b.f1_scratch) scratch_f1.push_back(b.f1_scratch->macro_f1);
      }
    }
    table3.push_back({name,
                      {{"unlearn_s", summarize(mean_s)},
                       {"intra_s", summarize(intra_s)},
                       {"cut_s", summarize(cut_s)},
                       {"macro_f1", summarize(f1)},
                       {"mia_original", summarize(mia_o)},
                       {"mia_unlearned", summarize(mia_u)}}});
    table2.push_back({name, {{"stage_a_s", summarize(stage_a)}, {"stage_b_s", summarize(stage_b)}}});
  }
  table3.insert(table3.begin(), ReportRow{"scratch", {{"unlearn_s", summarize(scratch_s)}, {"macro_f1", summarize(scratch_f1)}}});
  const std::string text = "partitioning time (seconds)\n" + format_table(table2, "partitioner") +
                           "\nunlearning time (seconds per request) and utility\n" + format_table(table3);
  write_json(dir / "bench.json", {{"dataset", in.source}, {"config", config_to_json(c)}, {"runs", std::move(runs)}});
  write_json(dir / "bench_timing.json", std::move(timings));
  write_text(dir / "bench_timing.txt", text);
  out << text;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signed-graph partitioning and sharded unlearning"};
  app.require_subcommand(1, 1);
  Flags f;
  app.add_option("--config", f.config, "key = value config file");
  app.add_option("--k", f.k, "number of shards");
  app.add_option("--alpha", f.alpha, "RatioCut / BalanceRatio trade-off");
  app.add_option("--delta", f.delta, "edge-cap slack");
  app.add_option("--partitioner", f.partitioner, "sgu or random");
  app.add_option("--seed", f.seed, "global seed");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--repeats", f.repeats, "repeat runs for mean and std");
  app.add_option("--format", f.format, "raw-rating or signed");
  app.add_option("--input", f.input, "edge-list CSV (synthetic graph when omitted)");
  app.add_option("--preset", f.preset, "bitcoin-alpha, bitcoin-otc, epinions, slashdot");
  app.add_option("--aggregation", f.aggregation, "covering-mean or prior-mean");
  app.add_option("--threads", f.threads, "training workers (0 = all cores)");
  app.add_option("--partition", f.partition, "partition JSON (train)");
  app.add_option("--train", f.train, "training edges CSV (train)");
  app.add_option("--test", f.test, "test edges CSV (eval)");
  app.add_option("--checkpoint", f.checkpoint, "checkpoint directory");
  app.add_option("--requests", f.requests, "JSON-lines unlearning requests (unlearn)");
  app.add_option("--compare", f.compare, "add a scratch-retrain row (eval)");
  const char* commands[][2] = {{"synth", "write a polarized SSBM graph"},
                               {"partition", "split edges and partition the training graph"},
                               {"train", "train one model per shard"},
                               {"unlearn", "apply unlearning requests to a checkpoint"},
                               {"eval", "Macro-F1 and attack AUC report"},
                               {"bench", "partitioning and unlearning timings"}};
  for (const auto& cmd : commands) app.add_subcommand(cmd[0], cmd[1])->fallthrough();

  std::vector<std::string> argv_store{"sgu"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const RunConfig c = resolve_config(f);
    if (command == "synth") return cmd_synth(f, c, out);
    if (command == "partition") return cmd_partition(c, out, err);
    if (command == "train") return cmd_train(f, c, out, err);
    if (command == "unlearn") return cmd_unlearn(f, c, out);
    if (command == "eval") return cmd_eval(f, c, out, err);
    return cmd_bench(c, out, err);
  } catch (const InfeasibleKError& e) {
    err << "error: " << e.what() << "\n";
    return kInfeasibleK;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidParamsError& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kIoError;
  } catch (const EmptyGraphError& e) {
    err << "input error: " << e.what() << "\n";
    return kIoError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const NotFoundError& e) {
    err << "not found: " << e.what() << "\n";
    return kValidationError;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace sgu::cli
