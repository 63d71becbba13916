#include "kgcl/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "kgcl/errors.hpp"

namespace kgcl {

using nlohmann::json;

namespace {

json tensor_json(const Tensor& t) {
  return {{"rows", t.rows()}, {"cols", t.cols()}, {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

Tensor tensor_from(const json& j) {
  auto values = j.at("values").get<std::vector<double>>();
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  if (values.size() != rows * cols) throw ValidationError("checkpoint tensor size mismatch");
  return Tensor(rows, cols, std::move(values));
}

json record_json(const AnchorRecord& r) {
  return {{"entity", r.entity},
          {"key", std::vector<unsigned char>(r.key.begin(), r.key.end())},
          {"types", r.types},
          {"positives", r.positives},
          {"positive_embeddings", r.positive_embeddings},
          {"embedding", r.embedding},
          {"context", r.context},
          {"batch_index", r.batch_index}};
}

AnchorRecord record_from(const json& j) {
  AnchorRecord r;
  r.entity = j.at("entity").get<EntityId>();
  auto key = j.at("key").get<std::vector<unsigned char>>();
  r.key.assign(key.begin(), key.end());
  r.types = j.at("types").get<TypeSet>();
  r.positives = j.at("positives").get<std::vector<EntityId>>();
  r.positive_embeddings = j.at("positive_embeddings").get<std::vector<std::vector<double>>>();
  r.embedding = j.at("embedding").get<std::vector<double>>();
  r.context = j.at("context").get<std::vector<EntityId>>();
  r.batch_index = j.at("batch_index").get<std::size_t>();
  return r;
}

json state_json(const PhaseState& s) {
  json m = json::array(), v = json::array(), queue = json::array();
  for (const auto& t : s.adam.m) m.push_back(tensor_json(t));
  for (const auto& t : s.adam.v) v.push_back(tensor_json(t));
  for (std::size_t age = s.queue.size(); age >= 1; --age) {
    json batch = json::array();
    for (const auto& r : s.queue.at_age(age)) batch.push_back(record_json(r));
    queue.push_back(std::move(batch));
  }
  return {{"epochs_done", s.epochs_done},
          {"batches_done", s.batches_done},
          {"adam_step", s.adam.step},
          {"adam_m", m},
          {"adam_v", v},
          {"queue_capacity", s.queue.capacity()},
          {"queue", queue}};
}

PhaseState state_from(const json& j) {
  PhaseState s;
  s.epochs_done = j.at("epochs_done").get<std::size_t>();
  s.batches_done = j.at("batches_done").get<std::size_t>();
  s.adam.step = j.at("adam_step").get<std::size_t>();
  for (const auto& t : j.at("adam_m")) s.adam.m.push_back(tensor_from(t));
  for (const auto& t : j.at("adam_v")) s.adam.v.push_back(tensor_from(t));
  s.queue = PreBatchQueue(j.at("queue_capacity").get<std::size_t>());
  for (const auto& batch : j.at("queue")) {
    RecordBatch b;
    for (const auto& r : batch) b.push_back(record_from(r));
    s.queue.push(std::move(b));
  }
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  json params = json::array();
  for (const Parameter* p : c.params.all()) params.push_back({{"name", p->name}, {"tensor", tensor_json(p->value)}});
  json j = {{"version", kCheckpointVersion},
            {"stage", c.stage},
            {"config", format_config(c.config)},
            {"dim", c.params.dim},
            {"projection_dim", c.params.projection_dim},
            {"heads", c.params.heads},
            {"layers", c.params.num_layers()},
            {"params", params},
            {"pretrain", state_json(c.pretrain)},
            {"finetune", state_json(c.finetune)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": not a checkpoint: " + e.what());
  }
  try {
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw ValidationError(path.string() + ": unsupported checkpoint version");
    Checkpoint c;
    c.stage = j.at("stage").get<std::string>();
    c.config = parse_config(j.at("config").get<std::string>());
    // Build the parameter skeleton from the stored shape, then overwrite.
    auto shape = c.config;
    shape.embedding_dim = j.at("dim").get<std::size_t>();
    shape.projection_dim = j.at("projection_dim").get<std::size_t>();
    shape.heads = j.at("heads").get<std::size_t>();
    shape.layers = j.at("layers").get<std::size_t>();
    const auto& stored = j.at("params");
    const auto& entity = stored.at(0).at("tensor");
    const auto& relation = stored.at(1).at("tensor");
    c.params = ModelParams::init(entity.at("rows").get<std::size_t>(), relation.at("rows").get<std::size_t>(),
                                 shape, 0);
    auto all = c.params.all();
    if (all.size() != stored.size()) throw ValidationError(path.string() + ": parameter count mismatch");
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (stored[i].at("name").get<std::string>() != all[i]->name)
        throw ValidationError(path.string() + ": unexpected parameter " + stored[i].at("name").get<std::string>());
      Tensor t = tensor_from(stored[i].at("tensor"));
      if (!t.same_shape(all[i]->value)) throw ValidationError(path.string() + ": shape mismatch for " + all[i]->name);
      all[i]->value = std::move(t);
    }
    c.pretrain = state_from(j.at("pretrain"));
    c.finetune = state_from(j.at("finetune"));
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed checkpoint: " + e.what());
  }
}

}  // namespace kgcl
