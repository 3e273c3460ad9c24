#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "glmsnn/data_io.hpp"
#include "glmsnn/experiment.hpp"
#include "test_util.hpp"

using namespace glmsnn;
using namespace glmsnn::testing;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(GLMSNN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_images(const TempDir& dir) {
  std::vector<RawImage> images;
  Rng rng(2);
  for (int k = 0; k < 20; ++k) {
    for (int d = 0; d < 10; ++d) {
      RawImage r{std::vector<std::uint8_t>(kMnistPixels, 0), d};
      for (int p = d * 60; p < d * 60 + 120; ++p) r.pixels[static_cast<std::size_t>(p)] = rng() % 2 ? 255 : 0;
      images.push_back(std::move(r));
    }
  }
  write_idx(dir / "img", dir / "lab", images);
}

ExperimentConfig small_config(const TempDir& dir) {
  ExperimentConfig c;
  c.dataset.train_images = dir / "img";
  c.dataset.train_labels = dir / "lab";
  c.dataset.spec = DatasetSpec{{1, 2}, 10, 5};
  c.training.epochs = 2;
  c.training.learning_rates = {1e-2};
  return c;
}

}  // namespace

TEST_CASE("gradcheck subcommand") {
  CHECK(run("gradcheck -n 5") == 0);
  CHECK(run("gradcheck -n 3 -t conventional -s 4") == 0);
  CHECK(run("gradcheck -t hebbian") == 2);
  CHECK(run("gradcheck --step 10") == 6);
}

TEST_CASE("argument errors") {
  CHECK(run("") == 2);
  CHECK(run("train") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("train, eval and sweep through the command line") {
  TempDir dir("cli");
  write_images(dir);
  save_config(dir / "c.json", small_config(dir));
  const std::string cfg = (dir / "c.json").string();
  const std::string out = (dir / "out").string();

  REQUIRE(run("train -c " + cfg + " -o " + out) == 0);
  CHECK(run("eval -c " + cfg + " -k " + out + "/checkpoint.json -o " + out) == 0);
  CHECK(run("eval -c " + cfg + " -k " + out + "/checkpoint.json -o " + out) == 0);
  CHECK(read_results_csv(dir / "out" / "results.csv").size() == 4);

  CHECK(run("sweep -c " + cfg + " -a K -v 1,2 -o " + (dir / "sw").string()) == 0);
  CHECK(read_results_csv(dir / "sw" / "results.csv").size() == 4);

  CHECK(run("encode-preview --images " + (dir / "img").string() + " --labels " + (dir / "lab").string() +
            " -i 3") == 0);
  CHECK(run("encode-preview --images " + (dir / "img").string() + " --labels " + (dir / "lab").string() +
            " -i 100000") == 5);
}

TEST_CASE("exit codes for failures") {
  TempDir dir("clierr");
  write_images(dir);

  std::ofstream(dir / "bad.json") << R"({"training": {"epochs": -1}})";
  CHECK(run("train -c " + (dir / "bad.json").string()) == 2);

  ExperimentConfig missing = small_config(dir);
  missing.dataset.train_images = dir / "nope";
  save_config(dir / "missing.json", missing);
  CHECK(run("train -c " + (dir / "missing.json").string()) == 3);

  ExperimentConfig diverge = small_config(dir);
  diverge.training.trainer = Trainer::kConventional;
  diverge.training.learning_rates = {1e308};
  save_config(dir / "div.json", diverge);
  CHECK(run("train -c " + (dir / "div.json").string() + " -o " + (dir / "d").string()) == 4);

  ExperimentConfig greedy = small_config(dir);
  greedy.dataset.spec.per_class_train = 1000;
  save_config(dir / "greedy.json", greedy);
  CHECK(run("train -c " + (dir / "greedy.json").string()) == 5);

  save_config(dir / "ok.json", small_config(dir));
  ExperimentConfig other = small_config(dir);
  other.model.horizon = 6;
  save_config(dir / "other.json", other);
  REQUIRE(run("train -c " + (dir / "ok.json").string() + " -o " + (dir / "m").string()) == 0);
  CHECK(run("eval -c " + (dir / "other.json").string() + " -k " + (dir / "m" / "checkpoint.json").string() +
            " -o " + (dir / "m").string()) == 5);
  CHECK(run("eval -c " + (dir / "ok.json").string() + " -k " + (dir / "none.json").string()) == 3);
}
