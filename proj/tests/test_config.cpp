#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include "ppde/config.hpp"

using namespace ppde;
using nlohmann::json;

namespace {

json full_config() {
  return json::parse(R"({
    "family": {"type": "t2", "s": 3, "mu": 0.1},
    "mesh": {"n": 33},
    "network": {"widths": [100, 100, 100, 100, 100], "alpha": 0.2, "init_std": 0.1, "seed": 2},
    "train": {"batch": 256, "lr": 2e-4, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "epochs": 2000, "seed": 3},
    "data": {"n_train": 2000, "n_test": 500, "seed": 4}
  })");
}

}  // namespace

TEST_CASE("a full config parses into an experiment", "[config]") {
  const ConfigFile file = parse_config(full_config());
  const ExperimentConfig config = file.experiment("test");
  CHECK(config.family.variant == FamilyVariant::Chessboard);
  CHECK(config.family.p == 9);
  CHECK(config.family.mu == 0.1);
  CHECK(config.mesh_n == 33);
  CHECK(config.network.hidden_widths == std::vector<int>{100, 100, 100, 100, 100});
  CHECK(config.network.alpha == 0.2);
  CHECK(config.train.batch_size == 256);
  CHECK(config.train.lr == 2e-4);
  CHECK(config.train.epochs == 2000);
  CHECK(config.data.n_train == 2000);
  CHECK(config.data.n_test == 500);
  CHECK(config.data.seed == 4);
}

TEST_CASE("unknown keys are rejected at every level", "[config]") {
  json top = full_config();
  top["extra"] = 1;
  CHECK_THROWS_AS(parse_config(top), ConfigError);

  json nested = full_config();
  nested["train"]["momentum"] = 0.9;
  CHECK_THROWS_AS(parse_config(nested), ConfigError);

  json family = full_config();
  family["family"]["weird"] = true;
  CHECK_THROWS_AS(parse_config(family), ConfigError);
}

TEST_CASE("family sections are validated per variant", "[config]") {
  json cfg = full_config();
  cfg["family"] = {{"type", "t2"}, {"s", 3}, {"mu", 0.1}, {"sigma", 1.0}};
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);  // sigma is a t1 knob

  cfg["family"] = {{"type", "t1"}, {"p", 10}, {"sigma", -1.0}, {"mu", 1.0}};
  CHECK(parse_config(cfg).family->variant == FamilyVariant::TrigPoly);

  cfg["family"] = {{"type", "t3f"}, {"s", 2}, {"mu", 1e-4}, {"r", 0.8}};
  CHECK(parse_config(cfg).family->r == 0.8);

  cfg["family"] = {{"type", "t2"}, {"s", 3}, {"mu", 0.1}, {"p", 8}};
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);  // p contradicts s^2

  cfg["family"] = {{"type", "nope"}, {"mu", 0.1}};
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);
}

TEST_CASE("missing and ill-typed keys are reported", "[config]") {
  json cfg = full_config();
  cfg["train"].erase("epochs");
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);

  cfg = full_config();
  cfg["mesh"]["n"] = "many";
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);

  cfg = full_config();
  cfg["mesh"]["n"] = 2;
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);

  cfg = full_config();
  cfg["network"]["alpha"] = 1.5;
  CHECK_THROWS_AS(parse_config(cfg), ConfigError);
}

TEST_CASE("defaults fill the optimizer and seeds", "[config]") {
  const json cfg = json::parse(R"({
    "family": {"type": "t4", "k": 2, "mu": 0.1},
    "mesh": {"n": 9},
    "network": {"widths": [10]},
    "train": {"epochs": 3},
    "data": {"n_train": 4, "n_test": 2}
  })");
  const ConfigFile file = parse_config(cfg);
  CHECK(file.train->batch_size == 256);
  CHECK(file.train->lr == 2e-4);
  CHECK(file.train->beta1 == 0.9);
  CHECK(file.train->beta2 == 0.999);
  CHECK(file.train->eps == 1e-8);
  CHECK(file.network->alpha == 0.2);
  CHECK(file.network->init_std == 0.1);
  CHECK(file.family->p == 6);
}

TEST_CASE("partial configs expose only their sections", "[config]") {
  const json cfg = json::parse(R"({
    "network": {"widths": [5, 5]},
    "train": {"epochs": 10}
  })");
  const ConfigFile file = parse_config(cfg);
  CHECK_FALSE(file.family.has_value());
  CHECK_FALSE(file.data.has_value());
  CHECK(file.network.has_value());
  CHECK_THROWS_AS(file.experiment("study"), ConfigError);
}
