#include "sgu/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "sgu/error.hpp"
#include "sgu/rng.hpp"

namespace sgu {

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidParamsError("split: train_fraction must lie in (0, 1)");
  }
}

EdgeSplit split_edges(const SignedGraph& g, const SplitSpec& spec) {
  spec.validate();
  EdgeSplit out;
  Rng rng(derive_seed(spec.seed, "split"));
  std::vector<Edge> train;
  auto take = [&](std::vector<Edge> pool) {
    rng.shuffle(pool);
    const auto keep = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(pool.size())));
    train.insert(train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
    out.test.insert(out.test.end(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end());
  };
  const bool degenerate = g.positive_edge_count() < 2 || g.negative_edge_count() < 2;
  if (spec.stratify_by_sign && !degenerate) {
    take(g.positive_edges());
    take(g.negative_edges());
  } else {
    if (spec.stratify_by_sign) {
      out.warnings.push_back("a sign class has fewer than 2 edges; split is not stratified");
    }
    take(std::vector<Edge>(g.edges().begin(), g.edges().end()));
  }
  std::sort(out.test.begin(), out.test.end());
  out.train = SignedGraph(g.node_count(), std::move(train));
  return out;
}

F1Report macro_f1(std::span<const double> probabilities, std::span<const int> labels, double threshold) {
  if (probabilities.empty()) throw InvalidParamsError("macro_f1: undefined on empty input");
  if (probabilities.size() != labels.size()) throw InvalidParamsError("macro_f1: length mismatch");
  F1Report r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1 && labels[i] != -1) throw InvalidParamsError("macro_f1: labels must be +1 or -1");
    const bool predicted = probabilities[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++r.tp : ++r.fn;
    } else {
      predicted ? ++r.fp : ++r.tn;
    }
  }
  auto f1 = [](std::size_t tp, std::size_t fp, std::size_t fn) -> std::optional<double> {
    if (tp + fp + fn == 0) return std::nullopt;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  };
  // Negative-class F1 swaps the roles: its true positives are tn.
  r.f1_positive = f1(r.tp, r.fp, r.fn);
  r.f1_negative = f1(r.tn, r.fn, r.fp);
  double sum = 0.0;
  int classes = 0;
  for (const auto& f : {r.f1_positive, r.f1_negative}) {
    if (f) {
      sum += *f;
      ++classes;
    }
  }
  r.macro_f1 = sum / classes;
  return r;
}

double mia_auc(std::span<const double> member_scores, std::span<const double> nonmember_scores) {
  if (member_scores.empty() || nonmember_scores.empty()) {
    throw InvalidParamsError("mia_auc: member and non-member lists must be non-empty");
  }
  std::vector<double> a(member_scores.begin(), member_scores.end());
  std::vector<double> b(nonmember_scores.begin(), nonmember_scores.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Twice the win count so that half-ties stay integral.
  std::uint64_t twice_wins = 0;
  std::size_t below = 0, upto = 0;
  for (double x : a) {
    while (below < b.size() && b[below] < x) ++below;
    if (upto < below) upto = below;
    while (upto < b.size() && b[upto] <= x) ++upto;
    twice_wins += 2 * below + (upto - below);
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::vector<double> ensemble_predictions(const EnsembleModel& e, std::span<const Edge> pairs) {
  std::vector<double> p;
  p.reserve(pairs.size());
  for (const Edge& x : pairs) p.push_back(aggregate_predict(e, x.u, x.v));
  return p;
}

std::vector<double> attack_scores(const EnsembleModel& e, std::span<const Edge> pairs) {
  std::vector<double> s = ensemble_predictions(e, pairs);
  for (double& x : s) x = attack_confidence(x);
  return s;
}

std::vector<int> sign_labels(std::span<const Edge> edges) {
  std::vector<int> y;
  y.reserve(edges.size());
  for (const Edge& x : edges) y.push_back(to_int(x.sign));
  return y;
}

F1Report evaluate_f1(const EnsembleModel& e, std::span<const Edge> test) {
  return macro_f1(ensemble_predictions(e, test), sign_labels(test));
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

Json f1_to_json(const F1Report& r) {
  auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  return {{"macro_f1", r.macro_f1},
          {"f1_positive", opt(r.f1_positive)},
          {"f1_negative", opt(r.f1_negative)},
          {"confusion", {{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"tn", r.tn}}},
          {"count", r.count()}};
}

Json eval_report_to_json(const EvalReport& r) {
  Json runs = Json::array();
  for (const F1Report& f : r.runs) runs.push_back(f1_to_json(f));
  Json mia = Json::array();
  for (const auto& [orig, unl] : r.mia_auc) mia.push_back({{"original", orig}, {"unlearned", unl}});
  Json rows = Json::array();
  for (const ReportRow& row : r.rows) {
    Json metrics = Json::object();
    for (const auto& [name, m] : row.metrics) metrics[name] = {{"mean", m.mean}, {"std", m.stddev}, {"n", m.n}};
    rows.push_back({{"label", row.label}, {"metrics", std::move(metrics)}});
  }
  Json out = {{"dataset", r.dataset}, {"runs", std::move(runs)}, {"rows", std::move(rows)}, {"notes", r.notes}};
  if (!r.mia_auc.empty()) {
    out["mia_auc"] = std::move(mia);
    out["mia_attack"] = "confidence threshold, score = max(p, 1 - p)";
  }
  return out;
}

std::string format_table(const std::vector<ReportRow>& rows, const std::string& first_column) {
  std::vector<std::string> columns;
  for (const ReportRow& row : rows) {
    for (const auto& [name, m] : row.metrics) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
    }
  }
  std::vector<std::vector<std::string>> cells;
  cells.push_back({first_column});
  cells.back().insert(cells.back().end(), columns.begin(), columns.end());
  for (const ReportRow& row : rows) {
    std::vector<std::string> line{row.label};
    for (const std::string& c : columns) {
      auto it = std::find_if(row.metrics.begin(), row.metrics.end(), [&](const auto& kv) { return kv.first == c; });
      if (it == row.metrics.end()) {
        line.push_back("-");
        continue;
      }
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(4) << it->second.mean;
      if (it->second.n > 1) cell << " ± " << it->second.stddev;
      line.push_back(cell.str());
    }
    cells.push_back(std::move(line));
  }
  // Width in code points so the ± sign does not skew alignment.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(columns.size() + 1, 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], width(line[i]));
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) out << "  ";
      out << cells[r][i];
      if (i + 1 < cells[r].size()) out << std::string(widths[i] - width(cells[r][i]), ' ');
    }
    out << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

UnlearnBenchmark run_unlearn_benchmark(const SignedGraph& g, const BenchmarkConfig& config) {
  UnlearnBenchmark b;
  b.partitioner = config.partitioner;
  const EdgeSplit split = split_edges(g, config.split);
  b.warnings = split.warnings;
  b.train_edges = split.train.edge_count();
  b.test_edges = split.test.size();

  const double wanted = config.deletion_fraction * static_cast<double>(b.train_edges);
  if (!(wanted >= 1.0)) throw InvalidParamsError("benchmark: deletion_fraction * |train| must be >= 1");
  const auto deletions = static_cast<std::size_t>(std::lround(wanted));

  const PartitionResult pr = run_partitioner(config.partitioner, split.train, config.extraction, config.clustering,
                                             derive_seed(config.seed, "partition"));
  b.extraction_seconds = pr.extraction_seconds;
  b.clustering_seconds = pr.clustering_seconds;
  b.k = pr.partition.k;
  b.delta_final = pr.partition.delta_final;
  b.mean_balance_ratio = partition_diagnostics(split.train, pr.partition).mean_balance_ratio;

  auto t0 = Clock::now();
  EnsembleModel ensemble = train_all(split.train, pr.partition, config.model, config.seed, config.train);
  b.train_seconds = seconds_since(t0);
  b.cut_edges = ensemble.cut_edges.size();
  b.warnings.insert(b.warnings.end(), ensemble.warnings.begin(), ensemble.warnings.end());
  b.f1_before = evaluate_f1(ensemble, split.test);

  std::vector<Edge> pool(split.train.edges().begin(), split.train.edges().end());
  Rng rng(derive_seed(config.seed, "deletions"));
  rng.shuffle(pool);
  pool.resize(deletions);

  std::vector<Edge> nonmembers = split.test;
  Rng nm_rng(derive_seed(config.seed, "nonmembers"));
  nm_rng.shuffle(nonmembers);
  if (nonmembers.size() > deletions) nonmembers.resize(deletions);
  if (nonmembers.size() < deletions) b.warnings.push_back("fewer test edges than deletions; using all test edges");
  b.mia_original = mia_auc(attack_scores(ensemble, pool), attack_scores(ensemble, nonmembers));

  std::vector<UnlearnRequest> requests;
  double intra_total = 0.0, cut_total = 0.0;
  for (const Edge& e : pool) {
    requests.push_back(UnlearnRequest::remove_edge(e.u, e.v));
    const auto start = Clock::now();
    const UnlearnReport r = unlearn(ensemble, requests.back());
    const double s = seconds_since(start);
    b.deletions.push_back({e, r.was_cut_edge, r.retrained_shard, s});
    if (r.was_cut_edge) {
      cut_total += s;
      ++b.cut_deletions;
    } else {
      intra_total += s;
      ++b.intra_deletions;
    }
  }
  b.mean_intra_seconds = b.intra_deletions ? intra_total / static_cast<double>(b.intra_deletions) : 0.0;
  b.mean_cut_seconds = b.cut_deletions ? cut_total / static_cast<double>(b.cut_deletions) : 0.0;
  b.mean_unlearn_seconds = (intra_total + cut_total) / static_cast<double>(pool.size());
  b.f1_after = evaluate_f1(ensemble, split.test);
  b.mia_unlearned = mia_auc(attack_scores(ensemble, pool), attack_scores(ensemble, nonmembers));

  if (!config.skip_scratch) {
    const SignedGraph reduced = apply_removals(split.train, requests);
    t0 = Clock::now();
    const EnsembleModel scratch = scratch_retrain(reduced, pr.partition, config.model, config.seed, {}, config.train);
    b.scratch_seconds = seconds_since(t0);
    b.exact = same_models(ensemble, scratch);
    b.f1_scratch = evaluate_f1(scratch, split.test);
  }
  return b;
}

Json benchmark_to_json(const UnlearnBenchmark& b) {
  Json deleted = Json::array();
  for (const DeletionTiming& d : b.deletions) {
    deleted.push_back({{"u", d.edge.u},
                       {"v", d.edge.v},
                       {"sign", to_int(d.edge.sign)},
                       {"cut", d.cut},
                       {"shard", d.shard ? Json(*d.shard) : Json(nullptr)}});
  }
  Json out = {{"partitioner", to_string(b.partitioner)},
              {"k", b.k},
              {"train_edges", b.train_edges},
              {"test_edges", b.test_edges},
              {"cut_edges", b.cut_edges},
              {"delta_final", b.delta_final},
              {"mean_balance_ratio", b.mean_balance_ratio},
              {"intra_deletions", b.intra_deletions},
              {"cut_deletions", b.cut_deletions},
              {"f1_before", f1_to_json(b.f1_before)},
              {"f1_after", f1_to_json(b.f1_after)},
              {"mia_auc", {{"original", b.mia_original}, {"unlearned", b.mia_unlearned}}},
              {"deletions", std::move(deleted)},
              {"warnings", b.warnings}};
  out["exact"] = b.exact ? Json(*b.exact) : Json(nullptr);
  out["f1_scratch"] = b.f1_scratch ? f1_to_json(*b.f1_scratch) : Json(nullptr);
  return out;
}

Json benchmark_timing_to_json(const UnlearnBenchmark& b) {
  Json per = Json::array();
  for (const DeletionTiming& d : b.deletions) per.push_back(d.seconds);
  return {{"partitioner", to_string(b.partitioner)},
          {"extraction_seconds", b.extraction_seconds},
          {"clustering_seconds", b.clustering_seconds},
          {"train_seconds", b.train_seconds},
          {"scratch_seconds", b.scratch_seconds},
          {"mean_unlearn_seconds", b.mean_unlearn_seconds},
          {"mean_intra_seconds", b.mean_intra_seconds},
          {"mean_cut_seconds", b.mean_cut_seconds},
          {"per_request_seconds", std::move(per)}};
}

}  // namespace sgu
