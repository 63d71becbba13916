#include <gtest/gtest.h>

#include "kgcl/config.hpp"
#include "kgcl/errors.hpp"
#include "test_util.hpp"

using namespace kgcl;
using namespace kgcl::testing;

TEST(Config, DefaultsValidate) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.temperature, 0.8);
  EXPECT_EQ(c.balancing_coefficient, 0.5);
  EXPECT_EQ(c.queued_negative_batches, 2u);
  EXPECT_EQ(c.max_intra_negatives, 512u);
  EXPECT_EQ(c.composition, Composition::Multiply);
}

TEST(Config, ParsesValuesCommentsAndWhitespace) {
  auto c = parse_config(
      "# comment\n"
      "embedding_dim = 32   # trailing\n"
      "\tprojection_dim=16\r\n"
      "\n"
      "temperature = 0.25\n"
      "composition = correlate\n"
      "negative_mode = relation\n"
      "type_match = overlap\n"
      "schema_bucketing = off\n"
      "seed = 18446744073709551615\n");
  EXPECT_EQ(c.embedding_dim, 32u);
  EXPECT_EQ(c.projection_dim, 16u);
  EXPECT_EQ(c.temperature, 0.25);
  EXPECT_EQ(c.composition, Composition::Correlate);
  EXPECT_EQ(c.negative_mode, NegativeMode::Relation);
  EXPECT_EQ(c.type_match, TypeMatch::Overlap);
  EXPECT_FALSE(c.schema_bucketing);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
}

TEST(Config, FormatRoundTrips) {
  TrainConfig c;
  c.temperature = 0.1 + 0.2;
  c.learning_rate_pretrain = 3e-7;
  c.composition = Composition::Subtract;
  c.disable_global = true;
  c.layers = 3;
  c.seed = 42;
  auto back = parse_config(format_config(c));
  EXPECT_EQ(format_config(back), format_config(c));
  EXPECT_EQ(back.temperature, c.temperature);
  EXPECT_EQ(back.learning_rate_pretrain, c.learning_rate_pretrain);
}

TEST(Config, BaseIsOverlaid) {
  TrainConfig base;
  base.layers = 2;
  auto c = parse_config("heads = 2\n", base);
  EXPECT_EQ(c.layers, 2u);
  EXPECT_EQ(c.heads, 2u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("unknown_key = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("embedding_dim 32\n"), ConfigError);
  EXPECT_THROW(parse_config("embedding_dim = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("embedding_dim = -4\n"), ConfigError);
  EXPECT_THROW(parse_config("temperature = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("temperature = 1e\n"), ConfigError);
  EXPECT_THROW(parse_config("balancing_coefficient = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("embedding_dim = 30\nheads = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_alpha = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("disable_global = true\ndisable_contextual = true\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_bucketing = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("composition = rotate\n"), ConfigError);
  EXPECT_THROW(parse_config("threshold = 2\n"), ConfigError);
  EXPECT_THROW(load_config(temp_path("does_not_exist.cfg")), ConfigError);
}

TEST(Config, ErrorNamesLine) {
  try {
    parse_config("layers = 2\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(Config, LoadFromFile) {
  auto p = write_file("cfg.txt", "layers = 1\nheads = 1\n");
  auto c = load_config(p);
  EXPECT_EQ(c.layers, 1u);
  EXPECT_EQ(c.heads, 1u);
}
