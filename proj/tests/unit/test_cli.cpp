#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slicefix/cli.hpp"
#include "support/io.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  int code = slicefix::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string &name) {
  fs::path p = fs::temp_directory_path() / ("slicefix_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("exit codes") {
  const std::string buggy = testsupport::fixture_path("motivating/buggy.js");
  CHECK(run({}).code == slicefix::cli::kUsageError);
  CHECK(run({"nonsense"}).code == slicefix::cli::kUsageError);
  CHECK(run({"slice", buggy, "--line", "0"}).code == slicefix::cli::kUsageError);
  CHECK(run({"slice", buggy, "--line", "9999"}).code == slicefix::cli::kUsageError);
  CHECK(run({"slice", buggy, "--emit-lines", "--emit-source", "--line", "3"}).code == slicefix::cli::kUsageError);
  CHECK(run({"slice", "/nonexistent.js", "--line", "1"}).code == slicefix::cli::kInputError);
  CHECK(run({"eval", "--checkpoint", "/nonexistent.sfck", "--dataset", "/nonexistent"}).code ==
        slicefix::cli::kInputError);
  CHECK(run({"train", "--data", "/nonexistent", "--out", scratch("x").string()}).code == slicefix::cli::kInputError);
  CHECK(run({"--help"}).code == slicefix::cli::kOk);
}

TEST_CASE("slice emits line numbers") {
  const std::string buggy = testsupport::fixture_path("motivating/buggy.js");
  Result r = run({"slice", buggy, "--line", "14", "--emit-lines"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "3,4,5,6,7,8,9,10,11,13,14\n");
  // An import line uses nothing, so the whole file is returned.
  r = run({"slice", buggy, "--line", "1", "--emit-lines"});
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), ',') == 65);
}

TEST_CASE("dataset split on ten pairs and config precedence") {
  fs::path corpus = scratch("corpus10");
  int copied = 0;
  for (const auto &e : fs::directory_iterator(testsupport::fixture_path("corpus"))) {
    const std::string name = e.path().filename().string();
    if (name[0] != 'p' || copied == 10) continue;
    fs::copy(e.path(), corpus / name);
    ++copied;
  }
  REQUIRE(copied == 10);
  fs::path out = scratch("ds10");
  Result r = run({"--out", out.string(), "dataset", corpus.string(), "--mode", "dual"});
  REQUIRE(r.code == 0);
  Json rep = Json::parse(slurp(out / "filter_report.json"));
  CHECK(rep["split"]["train"] == 8);
  CHECK(rep["split"]["validation"] == 1);
  CHECK(rep["split"]["test"] == 1);
  CHECK(fs::exists(out / "manifest.json"));

  // A config value applies unless the flag is given on the command line.
  fs::path cfg = scratch("cfg") / "run.cfg";
  std::ofstream(cfg) << "# tiny model\nd = 4\nlayers = 1\nepochs = 2\n";
  fs::path tr = scratch("tr10");
  r = run({"--config", cfg.string(), "--out", tr.string(), "train", "--data", out.string(), "--mode", "dual",
           "--epochs", "3"});
  REQUIRE(r.code == 0);
  Json hist = Json::parse(slurp(tr / "history.json"));
  if (hist.is_object()) hist = hist["history"];
  CHECK(hist.size() == 3);
  Json manifest = Json::parse(slurp(tr / "manifest.json"));
  CHECK(manifest["config"]["d"] == 4);

  std::ofstream(cfg) << "bogus = 1\n";
  CHECK(run({"--config", cfg.string(), "--out", tr.string(), "train", "--data", out.string()}).code ==
        slicefix::cli::kUsageError);

  SUBCASE("tune covers the 27-model grid") {
    fs::path tu = scratch("tune10");
    r = run({"--out", tu.string(), "tune", "--data", out.string(), "--mode", "dual", "--d", "4", "--epochs", "1"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(slurp(tu / "tune.json")).size() == 27);
  }
  SUBCASE("eval on the dataset directory") {
    r = run({"eval", "--checkpoint", (tr / "model.sfck").string(), "--dataset", out.string(), "--mode", "dual"});
    CHECK(r.code == 0);
    CHECK(r.out.find("all") != std::string::npos);
  }
}

TEST_CASE("path hash covers names and contents") {
  fs::path d = scratch("hash");
  std::ofstream(d / "a.txt") << "x";
  auto h1 = slicefix::cli::path_hash(d.string());
  std::ofstream(d / "a.txt") << "y";
  auto h2 = slicefix::cli::path_hash(d.string());
  fs::rename(d / "a.txt", d / "b.txt");
  auto h3 = slicefix::cli::path_hash(d.string());
  CHECK(h1 != h2);
  CHECK(h2 != h3);
}
