#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgcl/checkpoint.hpp"
#include "kgcl/errors.hpp"
#include "kgcl/metrics.hpp"
#include "kgcl/pipeline.hpp"

using namespace kgcl;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::string out;
};

struct DataArgs {
  std::string triples, types, train, valid, test;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "flat key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  cmd->add_option("--out", c.out, "also write the JSON result here");
}

void add_data(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--types", d.types, "entity\\ttype file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--triples", d.triples, "head\\trelation\\ttail file, split 80/10/10")->check(CLI::ExistingFile);
  cmd->add_option("--train", d.train, "predefined training triples")->check(CLI::ExistingFile);
  cmd->add_option("--valid", d.valid, "predefined validation triples")->check(CLI::ExistingFile);
  cmd->add_option("--test", d.test, "predefined test triples")->check(CLI::ExistingFile);
}

TrainConfig resolve_config(const Common& c) {
  TrainConfig cfg = c.config.empty() ? TrainConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threshold) cfg.threshold = *c.threshold;
  cfg.validate();
  return cfg;
}

Dataset load_data(const DataArgs& d, std::uint64_t seed) {
  if (!d.train.empty()) {
    if (d.valid.empty() || d.test.empty()) throw ValidationError("--train needs --valid and --test");
    return load_dataset_split(d.train, d.valid, d.test, d.types, seed);
  }
  if (d.triples.empty()) throw ValidationError("give --triples or --train/--valid/--test");
  return load_dataset(d.triples, d.types, kDefaultSplit, seed);
}

void emit(const ordered_json& j, const Common& c) {
  const auto text = j.dump(2);
  std::cout << text << '\n';
  if (!c.out.empty()) {
    std::ofstream out(c.out);
    if (!out) throw std::runtime_error("cannot write " + c.out);
    out << text << '\n';
  }
}

ordered_json report_json(const EvalReport& r) { return ordered_json::parse(r.to_json()); }

ordered_json data_json(const Dataset& d) {
  return {{"entities", d.full.num_entities()},
          {"relations", d.full.num_relations()},
          {"types", d.full.num_types()},
          {"train", d.split.train.size()},
          {"valid", d.split.valid.size()},
          {"test", d.split.test.size()},
          {"resampled", d.split.resampled}};
}

ordered_json pretrain_json(const PretrainStats& s) {
  return {{"epoch_loss", s.epoch_loss},
          {"anchors", s.anchors},
          {"skipped_no_positive", s.skipped_no_positive},
          {"empty_contextual_negatives", s.empty_contextual_negatives},
          {"empty_global_negatives", s.empty_global_negatives},
          {"empty_batches", s.empty_batches}};
}

ordered_json finetune_json(const FinetuneStats& s) {
  return {{"epoch_loss", s.epoch_loss}, {"scored", s.scored}, {"skipped_no_corruption", s.skipped_no_corruption}};
}

Checkpoint require_checkpoint(const std::string& path, const Dataset& data) {
  auto c = load_checkpoint(path);
  if (c.params.entity.value.rows() != data.full.num_entities() ||
      c.params.relation.value.rows() != data.full.num_relations())
    throw ValidationError("checkpoint does not match the dataset vocabulary");
  return c;
}

// Keeps the model shape of a checkpoint while taking run knobs from the command line.
TrainConfig with_shape_of(TrainConfig cfg, const Checkpoint& c) {
  cfg.embedding_dim = c.params.dim;
  cfg.projection_dim = c.params.projection_dim;
  cfg.heads = c.params.heads;
  cfg.layers = c.params.num_layers();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schema-augmented multi-level contrastive link prediction"};
  app.require_subcommand(1);
  Common common;
  DataArgs data;

  auto* build_schema_cmd = app.add_subcommand("build-schema", "count typed triples and threshold them");
  std::string schema_out;
  std::optional<std::size_t> alpha;
  add_common(build_schema_cmd, common);
  add_data(build_schema_cmd, data);
  build_schema_cmd->add_option("--alpha", alpha, "frequency threshold (overrides schema_alpha)");
  build_schema_cmd->add_option("--schema-out", schema_out, "write the schema as TSV");

  auto* structure_cmd = app.add_subcommand("pretrain-structure", "skip-gram structure embeddings");
  std::string embeddings_out;
  add_common(structure_cmd, common);
  add_data(structure_cmd, data);
  structure_cmd->add_option("--embeddings-out", embeddings_out, "entity\\tvector rows")->required();

  auto* pretrain_cmd = app.add_subcommand("pretrain", "multi-level contrastive pre-training");
  std::string structure_in, checkpoint_out, checkpoint_in, split_out;
  add_common(pretrain_cmd, common);
  add_data(pretrain_cmd, data);
  pretrain_cmd->add_option("--structure", structure_in, "structure embeddings to start from")
      ->check(CLI::ExistingFile);
  pretrain_cmd->add_option("--checkpoint", checkpoint_in, "resume from this checkpoint")->check(CLI::ExistingFile);
  pretrain_cmd->add_option("--checkpoint-out", checkpoint_out)->required();

  auto* finetune_cmd = app.add_subcommand("finetune", "triple-level fine-tuning");
  add_common(finetune_cmd, common);
  add_data(finetune_cmd, data);
  finetune_cmd->add_option("--checkpoint", checkpoint_in)->required()->check(CLI::ExistingFile);
  finetune_cmd->add_option("--checkpoint-out", checkpoint_out)->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "micro-F1 and AUC-ROC on a held-out split");
  std::string which_split = "test";
  add_common(evaluate_cmd, common);
  add_data(evaluate_cmd, data);
  evaluate_cmd->add_option("--checkpoint", checkpoint_in)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--split", which_split)->check(CLI::IsMember({"valid", "test"}));
  evaluate_cmd->add_option("--threshold", common.threshold, "classification threshold");

  auto* export_emb_cmd = app.add_subcommand("export-embeddings", "write structure or context embeddings");
  std::string view = "structure";
  add_common(export_emb_cmd, common);
  add_data(export_emb_cmd, data);
  export_emb_cmd->add_option("--checkpoint", checkpoint_in)->required()->check(CLI::ExistingFile);
  export_emb_cmd->add_option("--view", view)->check(CLI::IsMember({"structure", "context"}));
  export_emb_cmd->add_option("--embeddings-out", embeddings_out)->required();

  auto* export_hist_cmd = app.add_subcommand("export-histogram", "binned positive/negative score counts");
  std::size_t bins = 20;
  std::string histogram_out;
  add_common(export_hist_cmd, common);
  add_data(export_hist_cmd, data);
  export_hist_cmd->add_option("--checkpoint", checkpoint_in)->required()->check(CLI::ExistingFile);
  export_hist_cmd->add_option("--split", which_split)->check(CLI::IsMember({"valid", "test"}));
  export_hist_cmd->add_option("--bins", bins)->check(CLI::PositiveNumber);
  export_hist_cmd->add_option("--histogram-out", histogram_out)->required();

  auto* run_all_cmd = app.add_subcommand("run-all", "schema, structure, pre-train, fine-tune, evaluate");
  add_common(run_all_cmd, common);
  add_data(run_all_cmd, data);
  run_all_cmd->add_option("--structure", structure_in, "use these structure embeddings")->check(CLI::ExistingFile);
  run_all_cmd->add_option("--checkpoint-out", checkpoint_out);
  run_all_cmd->add_option("--split-out", split_out, "write the train/valid/test/negatives files here");
  run_all_cmd->add_option("--threshold", common.threshold, "classification threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    TrainConfig cfg = resolve_config(common);
    Dataset ds = load_data(data, cfg.seed);
    ordered_json j;
    if (!split_out.empty()) write_split(split_out, ds.split, *ds.vocab);

    if (*build_schema_cmd) {
      if (alpha) cfg.schema_alpha = *alpha;
      auto freq = count_typed_triples_parallel(ds.train);
      auto schema = build_schema(freq, cfg.schema_alpha);
      if (!schema_out.empty()) write_schema(schema_out, schema, *ds.vocab);
      j = {{"alpha", cfg.schema_alpha}, {"typed_triples", freq.size()}, {"schema_size", schema.size()}};
      j["data"] = data_json(ds);
    } else if (*structure_cmd) {
      auto table = pretrain_structure_embeddings(ds.train, skipgram_options(cfg), derive_seed(cfg.seed, {0x57c}));
      write_embeddings(embeddings_out, table, *ds.vocab);
      j = {{"entities", table.rows()}, {"dim", table.cols()}};
    } else if (*pretrain_cmd) {
      Checkpoint c;
      if (!checkpoint_in.empty()) {
        c = require_checkpoint(checkpoint_in, ds);
        cfg = with_shape_of(cfg, c);
      } else {
        c.params = ModelParams::init(ds.full.num_entities(), ds.full.num_relations(), cfg, cfg.seed);
        c.params.entity.value =
            structure_in.empty()
                ? pretrain_structure_embeddings(ds.train, skipgram_options(cfg), derive_seed(cfg.seed, {0x57c}))
                : load_structure_embeddings(structure_in, *ds.vocab, cfg.embedding_dim);
      }
      c.config = cfg;
      auto schema = build_schema(count_typed_triples_parallel(ds.train), cfg.schema_alpha);
      auto stats = pretrain(ds.train, schema, c.params, cfg, c.pretrain);
      c.stage = "pretrain";
      save_checkpoint(checkpoint_out, c);
      j = {{"stage", c.stage}, {"schema_size", schema.size()}, {"pretrain", pretrain_json(stats)}};
    } else if (*finetune_cmd) {
      auto c = require_checkpoint(checkpoint_in, ds);
      cfg = with_shape_of(cfg, c);
      c.config = cfg;
      auto stats = finetune(ds.train, c.params, cfg, c.finetune);
      c.stage = "finetune";
      save_checkpoint(checkpoint_out, c);
      j = {{"stage", c.stage}, {"finetune", finetune_json(stats)}};
    } else if (*evaluate_cmd || *export_hist_cmd) {
      auto c = require_checkpoint(checkpoint_in, ds);
      cfg = with_shape_of(cfg, c);
      const bool valid = which_split == "valid";
      const auto& pos = valid ? ds.split.valid : ds.split.test;
      const auto& neg = valid ? ds.split.valid_negatives : ds.split.test_negatives;
      if (pos.empty()) throw ValidationError("the " + which_split + " split is empty");
      auto report = evaluate(c.params, ds.train, pos, neg, cfg);
      j = report_json(report);
      j["split"] = which_split;
      if (*export_hist_cmd) {
        export_score_histogram(report.scores, report.labels, bins, histogram_out);
        j["bins"] = bins;
      }
    } else if (*export_emb_cmd) {
      auto c = require_checkpoint(checkpoint_in, ds);
      cfg = with_shape_of(cfg, c);
      export_embeddings(c.params, ds.train, parse_embedding_view(view), cfg, cfg.seed, embeddings_out);
      j = {{"view", view}, {"entities", ds.full.num_entities()}, {"dim", c.params.dim}};
    } else if (*run_all_cmd) {
      std::optional<Tensor> structure;
      if (!structure_in.empty()) structure = load_structure_embeddings(structure_in, *ds.vocab, cfg.embedding_dim);
      auto r = run_all(ds, cfg, structure);
      if (!checkpoint_out.empty()) {
        Checkpoint c;
        c.config = cfg;
        c.params = r.params;
        c.stage = "finetune";
        save_checkpoint(checkpoint_out, c);
      }
      j["micro_f1"] = r.test.micro_f1;
      j["auc_roc"] = r.test.auc_roc;
      j["data"] = data_json(ds);
      j["schema_size"] = r.schema.size();
      if (!ds.split.valid.empty()) j["valid"] = report_json(r.valid);
      if (!ds.split.test.empty()) j["test"] = report_json(r.test);
      j["pretrain"] = pretrain_json(r.pretrain);
      j["finetune"] = finetune_json(r.finetune);
      j["seconds"] = r.seconds;
    }
    emit(j, common);
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
