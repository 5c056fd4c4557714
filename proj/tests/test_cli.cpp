// Copyright 2026 The CBDNet-cpp Authors
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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cbd/cli.hpp"
#include "cbd/dataset.hpp"
#include "cbd/png_io.hpp"
#include "cbd/weights_io.hpp"
#include "helpers.hpp"

using namespace cbd;
using cbd::test::random_image;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "cbdnet");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

struct Workspace {
  fs::path root = fs::temp_directory_path() / "cbd_cli_test";
  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root / "in");
    Rng rng = make_rng(31);
    write_png(root / "in" / "a.png", random_image(20, 18, 3, rng));
    write_png(root / "in" / "b.png", random_image(16, 16, 3, rng));
    NetworkConfig c;
    c.est_channels = 4;
    c.unet_c0 = 4;
    c.unet_c1 = 6;
    c.unet_c2 = 8;
    save_weights(init_model(c, rng), root / "m.cbdw");
  }
  ~Workspace() { fs::remove_all(root); }
  std::string path(const std::string& rel) const { return (root / rel).string(); }
};

std::vector<std::uint8_t> tree_bytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::uint8_t> all;
  for (const fs::path& f : files) {
    const std::string rel = fs::relative(f, dir).string();
    all.insert(all.end(), rel.begin(), rel.end());
    const auto bytes = read_file(f);
    all.insert(all.end(), bytes.begin(), bytes.end());
  }
  return all;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run({"--bogus"}) == 1);
  CHECK(run({"synth", "--out", "x", "--count", "1", "--frobnicate"}) == 1);
  CHECK(run({"synth", "--in", "x", "--out", "y", "--count", "1", "--mc-draws", "4"}) == 1);
  CHECK(run({}) == 1);
  // Nonexistent inputs are caught while parsing.
  CHECK(run({"estimate", "--model", "/nonexistent.cbdw", "--in", "/nonexistent.png", "--out-map", "m.png"}) == 1);
}

TEST_CASE("synth is reproducible") {
  Workspace ws;
  const std::vector<std::string> base{"synth", "--in", ws.path("in"), "--count", "4", "--seed", "7",
                                      "--gt-mode", "raw_propagate"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", ws.path("s1")});
  b.insert(b.end(), {"--out", ws.path("s2")});
  REQUIRE(run(a) == 0);
  REQUIRE(run(b) == 0);
  CHECK(tree_bytes(ws.root / "s1") == tree_bytes(ws.root / "s2"));
  CHECK(list_pngs(ws.root / "s1" / "noisy").size() == 4);
}

TEST_CASE("denoise and estimate agree on the noise map") {
  Workspace ws;
  REQUIRE(run({"denoise", "--model", ws.path("m.cbdw"), "--in", ws.path("in/a.png"), "--out",
               ws.path("out/a.png"), "--gamma", "1", "--out-map", ws.path("out/d.bin")}) == 0);
  REQUIRE(run({"estimate", "--model", ws.path("m.cbdw"), "--in", ws.path("in/a.png"), "--out-map",
               ws.path("out/e.bin")}) == 0);
  CHECK(read_file(ws.root / "out" / "d.bin") == read_file(ws.root / "out" / "e.bin"));
  const Image out = read_png(ws.root / "out" / "a.png");
  CHECK(out.height() == 20);
  CHECK(out.width() == 18);
  REQUIRE(run({"estimate", "--model", ws.path("m.cbdw"), "--in", ws.path("in/a.png"), "--out-map",
               ws.path("out/e.png")}) == 0);
  CHECK(read_png(ws.root / "out" / "e.png").width() == 18);
}

TEST_CASE("eval of a clean set against itself") {
  Workspace ws;
  REQUIRE(run({"eval", "--model", ws.path("m.cbdw"), "--clean", ws.path("in"), "--noisy",
               ws.path("in"), "--report", ws.path("r.tsv")}) == 0);
  std::ifstream in(ws.root / "r.tsv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
    REQUIRE(cols.size() == 7);
    CHECK(cols[3] == "100.0000");
  }
  CHECK(rows == 2);
}

TEST_CASE("scenes and a short training run") {
  Workspace ws;
  REQUIRE(run({"scenes", "--out", ws.path("scenes"), "--count", "3", "--size", "16", "--seed", "1"}) == 0);
  REQUIRE(run({"synth", "--in", ws.path("scenes"), "--out", ws.path("syn"), "--count", "3",
               "--gt-mode", "raw_propagate"}) == 0);
  std::ofstream(ws.root / "train.cfg") << "patch_size = 8\nbatch_size = 2\nepochs = 2\n"
                                          "unet_c0 = 4\nunet_c1 = 6\nunet_c2 = 8\n";
  REQUIRE(run({"train", "--config", ws.path("train.cfg"), "--synthetic", ws.path("syn"), "--out",
               ws.path("t.cbdw"), "--log", ws.path("log.tsv")}) == 0);
  CHECK(fs::exists(ws.root / "t.cbdw"));
  CHECK(fs::exists(ws.root / "log.tsv"));
  REQUIRE(run({"train", "--config", ws.path("train.cfg"), "--synthetic", ws.path("syn"), "--out",
               ws.path("t2.cbdw"), "--resume", ws.path("t.cbdw")}) == 0);
}

TEST_CASE("runtime failures exit with 2") {
  Workspace ws;
  std::ofstream(ws.root / "junk.cbdw") << "not a model";
  CHECK(run({"denoise", "--model", ws.path("junk.cbdw"), "--in", ws.path("in/a.png"), "--out",
             ws.path("o.png")}) == 2);
  CHECK(run({"denoise", "--model", ws.path("m.cbdw"), "--in", ws.path("in/a.png"), "--out",
             ws.path("o.png"), "--gamma", "0"}) == 1);
  std::ofstream(ws.root / "bad.cfg") << "nonsense = 1\n";
  CHECK(run({"train", "--config", ws.path("bad.cfg"), "--synthetic", ws.path("in"), "--out",
             ws.path("t.cbdw")}) == 2);
}
