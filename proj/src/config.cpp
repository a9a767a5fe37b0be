#include "sgu/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>

#include "sgu/error.hpp"

namespace sgu {

void RunConfig::validate() const {
  synth.validate();
  extraction.validate();
  clustering.validate();
  model.validate();
  split.validate();
  if (repeats < 1) throw InvalidParamsError("repeats must be >= 1");
  if (!(deletion_fraction > 0.0 && deletion_fraction < 1.0)) {
    throw InvalidParamsError("deletion_fraction must lie in (0, 1)");
  }
}

SplitSpec RunConfig::effective_split() const {
  SplitSpec s = split;
  s.seed = split_seed.value_or(global_seed);
  return s;
}

std::optional<std::size_t> preset_shard_count(const std::string& preset) {
  static const std::map<std::string, std::size_t> kPresets = {
      {"bitcoin-alpha", 10}, {"bitcoin-otc", 10}, {"epinions", 50}, {"slashdot", 50}, {"synth", 10}};
  auto it = kPresets.find(preset);
  if (it == kPresets.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string section, line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    if (out.count(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
    out[key] = value;
  }
  return out;
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T x{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, x);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": cannot parse \"" + value + "\"");
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key + ": expected true or false");
}

}  // namespace

RunConfig apply_config(RunConfig c, const std::map<std::string, std::string>& values) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto size = [](std::size_t& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = parse_number<std::size_t>(k, v); };
  };
  auto real = [](double& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = parse_number<double>(k, v); };
  };
  auto u64 = [](std::uint64_t& f) -> Setter {
    return [&f](const std::string& k, const std::string& v) { f = parse_number<std::uint64_t>(k, v); };
  };
  const std::map<std::string, Setter> setters = {
      {"dataset", [&](const std::string&, const std::string& v) { c.dataset = v; }},
      {"format",
       [&](const std::string& k, const std::string& v) {
         auto f = parse_edge_format(v);
         if (!f) throw ConfigError(k + ": expected raw-rating or signed");
         c.format = *f;
       }},
      {"preset",
       [&](const std::string& k, const std::string& v) {
         if (!preset_shard_count(v)) throw ConfigError(k + ": unknown preset \"" + v + "\"");
         c.preset = v;
       }},
      {"seed", u64(c.global_seed)},
      {"out", [&](const std::string&, const std::string& v) { c.out = v; }},
      {"partitioner",
       [&](const std::string& k, const std::string& v) {
         auto p = parse_partitioner(v);
         if (!p) throw ConfigError(k + ": expected sgu or random");
         c.partitioner = *p;
       }},
      {"aggregation",
       [&](const std::string& k, const std::string& v) {
         auto a = parse_aggregation(v);
         if (!a) throw ConfigError(k + ": expected covering-mean or prior-mean");
         c.aggregation = *a;
       }},
      {"repeats", size(c.repeats)},
      {"threads", size(c.threads)},
      {"synth.n", size(c.synth.n)},
      {"synth.blocks", size(c.synth.blocks)},
      {"synth.p_in_pos", real(c.synth.p_in_pos)},
      {"synth.p_in_neg", real(c.synth.p_in_neg)},
      {"synth.p_out_pos", real(c.synth.p_out_pos)},
      {"synth.p_out_neg", real(c.synth.p_out_neg)},
      {"synth.seed", u64(c.synth.seed)},
      {"extraction.tau", real(c.extraction.tau)},
      {"extraction.min_group", size(c.extraction.min_group)},
      {"extraction.max_groups", size(c.extraction.max_groups)},
      {"extraction.pi_tol", real(c.extraction.pi_tol)},
      {"extraction.pi_max_iter", size(c.extraction.pi_max_iter)},
      {"extraction.lambda_min", real(c.extraction.lambda_min)},
      {"clustering.k", size(c.clustering.k)},
      {"clustering.alpha", real(c.clustering.alpha)},
      {"clustering.delta", real(c.clustering.delta)},
      {"model.embed_dim", size(c.model.embed_dim)},
      {"model.learning_rate", real(c.model.learning_rate)},
      {"model.epochs", size(c.model.epochs)},
      {"model.l2", real(c.model.l2)},
      {"split.train_fraction", real(c.split.train_fraction)},
      {"split.stratify_by_sign",
       [&](const std::string& k, const std::string& v) { c.split.stratify_by_sign = parse_bool(k, v); }},
      {"split.seed", [&](const std::string& k, const std::string& v) { c.split_seed = parse_number<std::uint64_t>(k, v); }},
      {"bench.deletion_fraction", real(c.deletion_fraction)},
  };
  for (const auto& [key, value] : values) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key \"" + key + "\"");
    it->second(key, value);
  }
  if (values.count("preset") && !values.count("clustering.k")) c.clustering.k = *preset_shard_count(*c.preset);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return apply_config(RunConfig{}, parse_key_values(in));
}

Json config_to_json(const RunConfig& c) {
  return {{"dataset", c.dataset ? Json(*c.dataset) : Json(nullptr)},
          {"format", to_string(c.format)},
          {"preset", c.preset ? Json(*c.preset) : Json(nullptr)},
          {"seed", c.global_seed},
          {"partitioner", to_string(c.partitioner)},
          {"aggregation", to_string(c.aggregation)},
          {"repeats", c.repeats},
          {"synth",
           {{"n", c.synth.n},
            {"blocks", c.synth.blocks},
            {"p_in_pos", c.synth.p_in_pos},
            {"p_in_neg", c.synth.p_in_neg},
            {"p_out_pos", c.synth.p_out_pos},
            {"p_out_neg", c.synth.p_out_neg},
            {"seed", c.synth.seed}}},
          {"extraction",
           {{"tau", c.extraction.tau},
            {"min_group", c.extraction.min_group},
            {"max_groups", c.extraction.max_groups},
            {"pi_tol", c.extraction.pi_tol},
            {"pi_max_iter", c.extraction.pi_max_iter},
            {"lambda_min", c.extraction.lambda_min}}},
          {"clustering", {{"k", c.clustering.k}, {"alpha", c.clustering.alpha}, {"delta", c.clustering.delta}}},
          {"model", hyperparams_to_json(c.model)},
          {"split",
           {{"train_fraction", c.split.train_fraction},
            {"stratify_by_sign", c.split.stratify_by_sign},
            {"seed", c.effective_split().seed}}},
          {"bench", {{"deletion_fraction", c.deletion_fraction}}}};
}

}  // namespace sgu
