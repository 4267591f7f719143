#include <filesystem>

#include "doctest.h"
#include "nefk/errors.hpp"
#include "nefk/io.hpp"
#include "nefk/propagators.hpp"

using namespace nefk;
namespace fs = std::filesystem;

TEST_CASE("defaults validate and survive a JSON round trip") {
  RunConfig c;
  c.validate();
  RunConfig d = config_from_json(config_to_json(c));
  CHECK(d.hash() == c.hash());
  CHECK(d.dt[1] == c.dt[1]);
}

TEST_CASE("overrides and validation errors") {
  RunConfig c;
  apply_override(c, "field.E=0.25");
  CHECK(c.E == 0.25);
  apply_override(c, "contour.dt=[0.2,0.1,0.05]");
  CHECK(c.dt[0] == 0.2);
  CHECK(c.hash() != RunConfig{}.hash());
  CHECK_THROWS_AS(apply_override(c, "field.nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "E=1"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"contour\": {\"dt\": [0.1, 0.07, 0.05]}}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"thermal\": {\"T\": -1}}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"bogus\": {}}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
  CHECK(config_from_json("{\"model\": {\"U\": 2.0}}").chemical_potential() == 1.0);
}

TEST_CASE("csv round trip with header") {
  const std::string path = (fs::temp_directory_path() / "nefk_test.csv").string();
  CsvHeader h{"abc", "transient", {{"note", "x"}}};
  write_csv(path, h, {"t", "j"}, {{0.0, 0.1}, {1.5, -2.25}});
  auto t = read_csv(path);
  CHECK(t.header.at("config_hash") == "abc");
  CHECK(t.header.at("provenance") == "transient");
  CHECK(t.column("j")[1] == -2.25);
  CHECK_THROWS(t.column("missing"));
  fs::remove(path);
}

TEST_CASE("checkpoint round trip and mismatch") {
  const std::string dir = (fs::temp_directory_path() / "nefk_ckpt_test").string();
  fs::remove_all(dir);
  auto g = build_contour(0.0, 1.0, 2.0, 0.25, 4);
  auto k = bare_isolated_level(g, 0.0, 0.2);
  save_checkpoint(dir, "run", k, Checkpoint{3, {1e-2, 1e-3, 1e-4}, "h1", 0.25});
  ContourKernel back;
  Checkpoint meta;
  meta.config_hash = "h1";
  REQUIRE(load_checkpoint(dir, "run", g, back, meta));
  CHECK(meta.iteration == 3);
  CHECK(back.values == k.values);
  Checkpoint other;
  other.config_hash = "h2";
  CHECK_FALSE(load_checkpoint(dir, "run", g, back, other));
  auto g2 = build_contour(0.0, 1.0, 2.0, 0.5, 4);
  Checkpoint any;
  CHECK_FALSE(load_checkpoint(dir, "run", g2, back, any));
  fs::remove_all(dir);
}

TEST_CASE("unwritable output directory") {
  CHECK_THROWS_AS(ensure_directory("/proc/nefk_cannot_exist"), ConfigError);
}
