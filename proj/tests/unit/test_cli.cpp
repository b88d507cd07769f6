// Copyright 2026 The mmLayout Authors.
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


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mmlayout/cli.hpp"
#include "mmlayout/config.hpp"
#include "mmlayout/error.hpp"

using namespace mmlayout;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "mmlayout");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(MMLAYOUT_TEST_DATA) + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

size_t count(const std::string& text, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(call({}).code == 1);
  CHECK(call({"--help"}).code == 0);
  CHECK(call({"render", "--input", data("three_segments.json"), "--bogus"}).code == 1);
  CHECK(call({"ablate", "--axis", "depth", "--corpus", ".", "--out", "x.csv"}).code == 1);
  const Outcome missing = call({"render", "--input", data("no_such_file.json")});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error:") != std::string::npos);
  CHECK(call({"build-graph", "--input", data("three_segments.json"), "--grid", "7by7"}).code == 1);
}

TEST_CASE("render draws one rect per region") {
  const Outcome r = call({"render", "--input", data("three_segments.json"), "--radius", "10"});
  REQUIRE(r.code == 0);
  CHECK(count(r.out, "class=\"region\"") == 2);
  CHECK(count(r.out, "class=\"segment\"") == 3);
  const Outcome tight = call({"render", "--input", data("three_segments.json"), "--radius", "1"});
  CHECK(count(tight.out, "class=\"region\"") == 3);
}

TEST_CASE("render matches the golden files") {
  for (const char* r : {"5", "100"}) {
    CAPTURE(r);
    const Outcome o = call({"render", "--input", data("radius_page.json"), "--radius", r});
    REQUIRE(o.code == 0);
    const std::string golden = slurp(std::string(MMLAYOUT_TEST_GOLDEN) + "/render_r" + r + ".svg");
    CHECK(o.out == golden);
  }
  const std::string small = slurp(std::string(MMLAYOUT_TEST_GOLDEN) + "/render_r5.svg");
  const std::string large = slurp(std::string(MMLAYOUT_TEST_GOLDEN) + "/render_r100.svg");
  CHECK(small != large);
  CHECK(count(large, "class=\"region\"") < count(small, "class=\"region\""));
}

TEST_CASE("build-graph uses radius 30 by default") {
  const Outcome def = call({"build-graph", "--input", data("radius_page.json")});
  const Outcome r30 = call({"build-graph", "--input", data("radius_page.json"), "--radius", "30"});
  const Outcome r5 = call({"build-graph", "--input", data("radius_page.json"), "--radius", "5"});
  REQUIRE(def.code == 0);
  CHECK(def.out == r30.out);
  CHECK(def.out != r5.out);
  const auto g = nlohmann::json::parse(def.out);
  CHECK(g.is_object());
}

TEST_CASE("gradcheck subcommand") {
  const Outcome o = call({"gradcheck", "--seed", "0"});
  CHECK(o.code == 0);
  std::smatch m;
  REQUIRE(std::regex_search(o.out, m, std::regex("max relative error ([0-9.e+-]+)")));
  CHECK(std::stod(m[1]) < 1e-4);
}

TEST_CASE("synth output is deterministic") {
  const auto base = std::filesystem::temp_directory_path() / "mmlayout_cli_synth";
  std::filesystem::remove_all(base);
  REQUIRE(call({"synth", "--seed", "9", "--count", "3", "--out", (base / "a").string()}).code == 0);
  REQUIRE(call({"synth", "--seed", "9", "--count", "3", "--out", (base / "b").string()}).code == 0);
  REQUIRE(call({"synth", "--seed", "10", "--count", "3", "--out", (base / "c").string()}).code == 0);
  size_t files = 0;
  bool any_diff = false;
  for (const auto& e : std::filesystem::directory_iterator(base / "a")) {
    const auto name = e.path().filename();
    CHECK(slurp(e.path()) == slurp(base / "b" / name));
    if (std::filesystem::exists(base / "c" / name) && slurp(e.path()) != slurp(base / "c" / name)) any_diff = true;
    ++files;
  }
  CHECK(files >= 3);
  CHECK(any_diff);
  std::filesystem::remove_all(base);
}

TEST_CASE("run config json") {
  ModelConfig m;
  m.d_model = 48;
  m.grid = {3, 5};
  m.aggregation = Aggregation::kMean;
  m.bypass_cross_grained = true;
  const ModelConfig back = model_config_from_json(to_json(m));
  CHECK(to_json(back) == to_json(m));
  CHECK(back.grid.rows == 5);
  TrainConfig t;
  t.lr = 1e-3;
  t.epochs = 7;
  CHECK(to_json(train_config_from_json(to_json(t))) == to_json(t));

  CHECK_THROWS_AS(model_config_from_json({{"d_modle", 32}}), ValidationError);
  CHECK_THROWS_AS(train_config_from_json({{"learning_rate", 0.1}}), ValidationError);

  const auto path = std::filesystem::temp_directory_path() / "mmlayout_cli_config.json";
  {
    std::ofstream f(path);
    f << R"({"model": {"d_model": 16, "heads": 2}, "extra": 1})";
  }
  CHECK_THROWS_AS(load_run_config(path), ValidationError);
  {
    std::ofstream f(path, std::ios::trunc);
    f << R"({"model": {"d_model": 16, "heads": 2}})";
  }
  const RunConfig rc = load_run_config(path);
  CHECK(rc.model.d_model == 16);
  CHECK(rc.train.epochs == TrainConfig{}.epochs);
  std::filesystem::remove(path);
}
