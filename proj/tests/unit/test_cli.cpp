#include "doctest.h"
#include "oracles.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cogeffort/cli.hpp"
#include "cogeffort/effort.hpp"
#include "cogeffort/ingest.hpp"
#include "cogeffort/ml.hpp"

#include "json.hpp"

using namespace cogeffort;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "cogeffort");
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string str(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"--help"}).code == cli::kOk);
  CHECK(run({"--version"}).out.find("cogeffort 1.0.0") != std::string::npos);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"synth", "--bogus"}).code == cli::kUsage);
  CHECK(run({"train", "-m", "svm"}).code == cli::kUsage);

  oracle::TempDir dir("cli_codes");
  const auto bad = run({"synth", "--out", str(dir / "d"), "--label-rate", "2"});
  CHECK(bad.code == cli::kUsage);
  CHECK(bad.err.find("label_rate") != std::string::npos);

  fs::create_directories(dir / "empty");
  const auto none = run({"features", "--in", str(dir / "empty"), "--out", str(dir / "f.csv")});
  CHECK(none.code == cli::kDataError);
  CHECK(none.err.find("no trials found") != std::string::npos);
}

TEST_CASE("train requires exactly one input") {
  oracle::TempDir dir("cli_train_args");
  CHECK(run({"train", "--out", str(dir / "r")}).code == cli::kUsage);
}

TEST_CASE("full pipeline in process") {
  oracle::TempDir dir("cli_pipeline");
  const auto data = str(dir / "data");
  const auto s = run({"synth", "--out", data, "--participants", "6", "--preset", "high-snr"});
  REQUIRE(s.code == 0);
  CHECK(s.out.find("wrote 96 trials") != std::string::npos);
  CHECK(fs::exists(dir / "data" / "ground_truth.json"));
  CHECK(fs::exists(dir / "data" / "run_config.json"));

  const auto f = run({"features", "--in", data, "-f", "basic", "--out", str(dir / "basic.csv")});
  REQUIRE(f.code == 0);
  CHECK(slurp(dir / "basic.csv").rfind("participant_id,question_order,label,", 0) == 0);

  auto train = [&](const std::string& out, const std::string& jobs) {
    return run({"train", "--in", data, "-f", "st", "-m", "rf", "--param", "n_trees=15", "--seed", "3", "--out", out,
                "--jobs", jobs});
  };
  REQUIRE(train(str(dir / "run1"), "1").code == 0);
  REQUIRE(train(str(dir / "run2"), "3").code == 0);
  CHECK(slurp(dir / "run1" / "predictions.csv") == slurp(dir / "run2" / "predictions.csv"));
  CHECK(slurp(dir / "run1" / "metrics.csv") == slurp(dir / "run2" / "metrics.csv"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "run1" / "manifest.json"));
  CHECK(manifest["kind"] == "train");
  CHECK(manifest["hyperparameters"]["n_trees"] == 15);
  CHECK(ml::read_predictions(dir / "run1" / "predictions.csv").size() == 96);

  const auto fromcsv = run({"train", "--features", str(dir / "basic.csv"), "-f", "basic", "-m", "lr", "--out",
                            str(dir / "run_lr")});
  REQUIRE(fromcsv.code == 0);

  const auto e = run({"effort", "--in", data, "-p", str(dir / "run1" / "predictions.csv"), "--out",
                      str(dir / "effort")});
  REQUIRE(e.code == 0);
  for (const char* name : {"effort_actual.csv", "effort_predicted.csv", "agreement.csv", "agreement.txt"}) {
    CHECK(fs::exists(dir / "effort" / name));
  }
  CHECK(effort::read_effort(dir / "effort" / "effort_actual.csv").size() == 24);

  const auto a = run({"effort", "--in", data, "--actual", "--out", str(dir / "effort_actual")});
  REQUIRE(a.code == 0);
  CHECK(fs::exists(dir / "effort_actual" / "effort_actual.csv"));
  CHECK_FALSE(fs::exists(dir / "effort_actual" / "agreement.csv"));
  CHECK(run({"effort", "--in", data, "--out", str(dir / "x")}).code == cli::kUsage);

  const auto fold = run({"effort", "--in", data, "-p", str(dir / "run1" / "predictions.csv"), "--fold", "0",
                         "--effort-mode", "negation", "--out", str(dir / "effort_fold")});
  REQUIRE(fold.code == 0);
  const auto fold_points = effort::read_effort(dir / "effort_fold" / "effort_actual.csv");
  CHECK(fold_points.size() > 0);
  CHECK(fold_points.size() < 24);

  const auto rep = run({"report", str(dir / "run1"), str(dir / "run_lr"), str(dir / "effort"), "--out",
                        str(dir / "report"), "--plot", "svg"});
  REQUIRE(rep.code == 0);
  const auto grid = slurp(dir / "report" / "grid.csv");
  CHECK(grid.rfind("feature_set,model,accuracy,precision_weighted,recall_weighted,f1_weighted\n", 0) == 0);
  CHECK(grid.find("\nbasic,lr,") != std::string::npos);
  CHECK(grid.find("\nst,rf,") != std::string::npos);
  CHECK(fs::exists(dir / "report" / "grid.txt"));
  CHECK(fs::exists(dir / "report" / "coordinates.csv"));
  CHECK(slurp(dir / "report" / "scatter.svg").find("<svg") != std::string::npos);

  CHECK(run({"report", str(dir / "run1"), str(dir / "run1"), "--out", str(dir / "dup")}).code ==
        cli::kDataError);
}

TEST_CASE("preprocess on raw intensity") {
  oracle::TempDir dir("cli_raw");
  REQUIRE(run({"synth", "--out", str(dir / "raw"), "--participants", "1", "--emit", "raw_intensity"}).code == 0);
  const auto p = run({"preprocess", "--in", str(dir / "raw"), "--out", str(dir / "pre")});
  REQUIRE(p.code == 0);
  const auto loaded = ingest::load_dataset(dir / "pre");
  CHECK(loaded.dataset.size() == 16);
  CHECK(validate_dataset(loaded.dataset).empty());
}

TEST_CASE("output root from the environment") {
  oracle::TempDir dir("cli_env");
  const char* saved = std::getenv(cli::kOutputRootEnv);
  const std::string restore = saved ? saved : "";
  ::setenv(cli::kOutputRootEnv, dir.path().c_str(), 1);
  const auto r = run({"synth", "--participants", "1"});
  if (saved) ::setenv(cli::kOutputRootEnv, restore.c_str(), 1);
  else ::unsetenv(cli::kOutputRootEnv);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "synth" / "manifest.csv"));
}
