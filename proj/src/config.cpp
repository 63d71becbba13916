#include "kgcl/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "kgcl/errors.hpp"

namespace kgcl {

Composition parse_composition(std::string_view s) {
  if (s == "subtract" || s == "sub") return Composition::Subtract;
  if (s == "multiply" || s == "mult") return Composition::Multiply;
  if (s == "correlate" || s == "corr") return Composition::Correlate;
  throw ConfigError("unknown composition '" + std::string(s) + "'");
}

NegativeMode parse_negative_mode(std::string_view s) {
  if (s == "schema") return NegativeMode::Schema;
  if (s == "relation") return NegativeMode::Relation;
  throw ConfigError("unknown negative_mode '" + std::string(s) + "'");
}

TypeMatch parse_type_match(std::string_view s) {
  if (s == "strict") return TypeMatch::Strict;
  if (s == "overlap") return TypeMatch::Overlap;
  throw ConfigError("unknown type_match '" + std::string(s) + "'");
}

std::string_view to_string(Composition c) {
  switch (c) {
    case Composition::Subtract: return "subtract";
    case Composition::Multiply: return "multiply";
    case Composition::Correlate: return "correlate";
  }
  return "?";
}

std::string_view to_string(NegativeMode m) { return m == NegativeMode::Schema ? "schema" : "relation"; }
std::string_view to_string(TypeMatch m) { return m == TypeMatch::Strict ? "strict" : "overlap"; }

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(temperature > 0.0)) fail("temperature must be > 0");
  if (!(balancing_coefficient >= 0.0 && balancing_coefficient <= 1.0))
    fail("balancing_coefficient must lie in [0, 1]");
  if (embedding_dim == 0 || projection_dim == 0) fail("dimensions must be positive");
  if (heads == 0 || embedding_dim % heads != 0) fail("embedding_dim must be divisible by heads");
  if (layers == 0) fail("layers must be >= 1");
  if (context_subgraph_size < 2) fail("context_subgraph_size must be >= 2");
  if (batch_size_pretrain == 0 || batch_size_finetune == 0) fail("batch sizes must be positive");
  if (schema_alpha == 0) fail("schema_alpha must be >= 1");
  if (disable_contextual && disable_global) fail("cannot disable both contrastive levels");
  if (!(learning_rate_pretrain >= 0.0 && learning_rate_finetune >= 0.0)) fail("learning rates must be >= 0");
  if (!(threshold >= 0.0 && threshold <= 1.0)) fail("threshold must lie in [0, 1]");
}

namespace {

struct Field {
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("bad value '" + v + "' for " + key);
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw ConfigError("");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad value '" + v + "' for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean '" + v + "' for " + key);
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os << std::setprecision(17) << d;
  return os.str();
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto size = [&t](const char* k, std::size_t TrainConfig::*m) {
      t[k] = {[k, m](TrainConfig& c, const std::string& v) { c.*m = parse_number<std::size_t>(k, v); },
              [m](const TrainConfig& c) { return std::to_string(c.*m); }};
    };
    auto real = [&t](const char* k, double TrainConfig::*m) {
      t[k] = {[k, m](TrainConfig& c, const std::string& v) { c.*m = parse_double(k, v); },
              [m](const TrainConfig& c) { return fmt_double(c.*m); }};
    };
    auto flag = [&t](const char* k, bool TrainConfig::*m) {
      t[k] = {[k, m](TrainConfig& c, const std::string& v) { c.*m = parse_bool(k, v); },
              [m](const TrainConfig& c) { return std::string(c.*m ? "true" : "false"); }};
    };
    size("embedding_dim", &TrainConfig::embedding_dim);
    size("projection_dim", &TrainConfig::projection_dim);
    size("layers", &TrainConfig::layers);
    size("heads", &TrainConfig::heads);
    real("temperature", &TrainConfig::temperature);
    real("balancing_coefficient", &TrainConfig::balancing_coefficient);
    size("max_intra_negatives", &TrainConfig::max_intra_negatives);
    size("max_inter_negatives", &TrainConfig::max_inter_negatives);
    size("queued_negative_batches", &TrainConfig::queued_negative_batches);
    real("learning_rate_pretrain", &TrainConfig::learning_rate_pretrain);
    size("batch_size_pretrain", &TrainConfig::batch_size_pretrain);
    size("epoch_pretrain", &TrainConfig::epoch_pretrain);
    flag("schema_bucketing", &TrainConfig::schema_bucketing);
    flag("freeze_structure", &TrainConfig::freeze_structure);
    flag("disable_contextual", &TrainConfig::disable_contextual);
    flag("disable_global", &TrainConfig::disable_global);
    flag("disable_pretrain", &TrainConfig::disable_pretrain);
    size("context_subgraph_size", &TrainConfig::context_subgraph_size);
    size("context_walk_length", &TrainConfig::context_walk_length);
    size("schema_alpha", &TrainConfig::schema_alpha);
    real("learning_rate_finetune", &TrainConfig::learning_rate_finetune);
    size("batch_size_finetune", &TrainConfig::batch_size_finetune);
    size("epoch_finetune", &TrainConfig::epoch_finetune);
    size("finetune_negatives", &TrainConfig::finetune_negatives);
    flag("compose_all_nodes", &TrainConfig::compose_all_nodes);
    flag("mask_target_edge", &TrainConfig::mask_target_edge);
    size("structure_walks_per_node", &TrainConfig::structure_walks_per_node);
    size("structure_walk_length", &TrainConfig::structure_walk_length);
    size("structure_window", &TrainConfig::structure_window);
    size("structure_negatives", &TrainConfig::structure_negatives);
    size("structure_epochs", &TrainConfig::structure_epochs);
    real("structure_learning_rate", &TrainConfig::structure_learning_rate);
    real("threshold", &TrainConfig::threshold);
    t["seed"] = {[](TrainConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
                 [](const TrainConfig& c) { return std::to_string(c.seed); }};
    t["composition"] = {[](TrainConfig& c, const std::string& v) { c.composition = parse_composition(v); },
                        [](const TrainConfig& c) { return std::string(to_string(c.composition)); }};
    t["negative_mode"] = {[](TrainConfig& c, const std::string& v) { c.negative_mode = parse_negative_mode(v); },
                          [](const TrainConfig& c) { return std::string(to_string(c.negative_mode)); }};
    t["type_match"] = {[](TrainConfig& c, const std::string& v) { c.type_match = parse_type_match(v); },
                       [](const TrainConfig& c) { return std::string(to_string(c.type_match)); }};
    return t;
  }();
  return table;
}

std::string trim(std::string s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

}  // namespace

TrainConfig parse_config(std::string_view text, TrainConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    auto it = fields().find(key);
    if (it == fields().end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second.set(base, value);
  }
  base.validate();
  return base;
}

TrainConfig load_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const TrainConfig& config) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace kgcl
