#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "gesturekit/model.hpp"
#include "gesturekit/synthetic.hpp"
#include "gesturekit/trace.hpp"
#include "test_support.hpp"

using namespace gesturekit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gesturekit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Two well-separated gestures, trained.
  void train_pair(const std::string& quantizer = "gmm") {
    ASSERT_EQ(run({"gen", "--template", "circle-xy", "--template", "line-x", "--count", "12", "--seed", "4",
                   "--out", path("train.csv")})
                  .code,
              0);
    const auto r = run({"train", "--data", path("train.csv"), "--quantizer", quantizer, "--states", "5", "--seed",
                        "1", "--out", path("models.json")});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenWritesRequestedCount) {
  const auto r = run({"gen", "--template", "circle-xy", "--count", "10", "--out", path("a.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["traces"], 10);
  const auto d = load_traces(path("a.csv"));
  EXPECT_EQ(d.size(), 10u);
  EXPECT_EQ(d.labels(), (std::vector<std::string>{"circle-xy"}));
}

TEST_F(Cli, GenIsByteIdenticalForTheSameSeed) {
  const std::vector<std::string> base{"gen", "--catalog", "3", "--count", "4", "--seed", "77", "--noise-xyz",
                                      "0.05", "0.02", "0.01", "--orientation-jitter", "0.03"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.csv")});
  b.insert(b.end(), {"--out", path("b.csv")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  // Without --out the CSV goes to stdout, identical bytes.
  EXPECT_EQ(run(base).out, slurp(path("a.csv")));
}

TEST_F(Cli, GenNoiseSurvivesTheFileRoundTrip) {
  // Per-axis noise re-estimated from the written CSV against a clean rendering.
  ASSERT_EQ(run({"gen", "--template", "line-y", "--count", "20", "--seed", "5", "--noise-xyz", "0.06", "0.03",
                 "0.015", "--out", path("n.csv")})
                .code,
            0);
  const auto d = load_traces(path("n.csv"));
  const auto tmpl = make_template("line-y");
  const auto clean = generate_gesture(tmpl, {}, default_sample_count(tmpl));
  const double want[3] = {0.06, 0.03, 0.015};
  for (int k = 0; k < 3; ++k) {
    double ss = 0.0;
    std::size_t n = 0;
    for (const auto& tr : d.traces()) {
      for (std::size_t i = 0; i < tr.size(); ++i, ++n) {
        const double e = tr[i].accel[k] - clean[i].accel[k];
        ss += e * e;
      }
    }
    EXPECT_NEAR(std::sqrt(ss / double(n)), want[k], 0.15 * want[k]) << "axis " << k;
  }
}

TEST_F(Cli, BadTemplateExitsWithInvalidInput) {
  const auto r = run({"gen", "--template", "spiral", "--out", path("x.csv")});
  EXPECT_EQ(r.code, cli::kExitInvalidInput);
  EXPECT_NE(r.err.find("spiral"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("x.csv")));
}

TEST_F(Cli, UnknownFlagsAreRejected) {
  EXPECT_EQ(run({"gen", "--template", "line-x", "--colour", "red"}).code, cli::kExitInvalidInput);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInvalidInput);
  EXPECT_EQ(run({}).code, cli::kExitInvalidInput);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST_F(Cli, TrainWritesOneModelPerGesture) {
  train_pair();
  const auto models = load_models(path("models.json"));
  ASSERT_EQ(models.size(), 2u);
  EXPECT_EQ(models[0].label, "circle-xy");
  // Retraining with the same seed reproduces the file.
  ASSERT_EQ(run({"train", "--data", path("train.csv"), "--quantizer", "gmm", "--states", "5", "--seed", "1",
                 "--out", path("again.json")})
                .code,
            0);
  EXPECT_EQ(slurp(path("models.json")), slurp(path("again.json")));
}

TEST_F(Cli, SphericalTrainingRecordsTheCodebookOnce) {
  train_pair("spherical");
  const auto doc = nlohmann::json::parse(slurp(path("models.json")));
  EXPECT_TRUE(doc.contains("shared_codebook"));
  for (const auto& m : doc["models"]) EXPECT_EQ(m["codebook"], "shared");
}

TEST_F(Cli, ClassifyZeroNoiseTraceFindsItsGesture) {
  train_pair();
  ASSERT_EQ(run({"gen", "--template", "line-x", "--count", "1", "--seed", "99", "--noise-xyz", "0", "0", "0",
                 "--out", path("q.csv")})
                .code,
            0);
  const auto r = run({"classify", "--models", path("models.json"), "--trace", path("q.csv"), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["decision"], "line-x");
  EXPECT_EQ(j["gestures"].size(), 2u);
  EXPECT_FALSE(j.contains("elapsed_ms"));
  // Deterministic output for identical argv.
  EXPECT_EQ(run({"classify", "--models", path("models.json"), "--trace", path("q.csv"), "--seed", "3"}).out, r.out);
}

TEST_F(Cli, AmbiguousTraceAtHighThresholdAbstains) {
  // The two labels were recorded from the same movement; no gesture clears 0.99.
  save_traces(path("twins.csv"), testkit::twin_dataset(8, 4).traces());
  ASSERT_EQ(run({"train", "--data", path("twins.csv"), "--states", "5", "--seed", "1", "--out", path("twins.json")})
                .code,
            0);
  save_traces(path("amb.csv"), testkit::twin_dataset(2, 99).traces());
  const auto r = run({"classify", "--models", path("twins.json"), "--trace", path("amb.csv"), "--thr", "0.99"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    EXPECT_NE(line.find("\"decision\":null"), std::string::npos) << line;
  }
  EXPECT_EQ(n, 4);
}

TEST_F(Cli, MalformedInputsExitTwo) {
  train_pair();
  std::ofstream(path("bad.csv")) << "trace_id,label,subject,t,ax,ay,az\nx,,,0,zero,0,-1\n";
  EXPECT_EQ(run({"classify", "--models", path("models.json"), "--trace", path("bad.csv")}).code, 2);
  EXPECT_EQ(run({"classify", "--models", path("missing.json"), "--trace", path("bad.csv")}).code, 2);
  std::ofstream(path("broken.json")) << "{\"version\": 1, \"models\": [";
  EXPECT_EQ(run({"classify", "--models", path("broken.json"), "--trace", path("train.csv")}).code, 2);
  EXPECT_EQ(run({"classify", "--models", path("models.json"), "--trace", path("train.csv"), "--thr", "1.5"}).code, 2);
}

TEST_F(Cli, EvalEmitsJsonAndCsvReports) {
  const auto r = run({"eval", "--benchmark", "2", "--traces-per-gesture", "6", "--repetitions", "2", "--kinds",
                      "spherical,gmm", "--states", "4", "--max-samples", "200", "--out-json", path("r.json"),
                      "--out-csv", path("r.csv"), "--sweep-csv", path("s.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(r.out)["summary"];
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0]["kind"], "deterministic_spherical");
  EXPECT_EQ(nlohmann::json::parse(slurp(path("r.json")))["runs"].size(), 4u);
  EXPECT_EQ(slurp(path("r.csv")).substr(0, 5), "kind,");
  EXPECT_EQ(slurp(path("s.csv")).substr(0, 5), "kind,");
}

TEST_F(Cli, DriftTableMatchesClosedForm) {
  const auto r = run({"drift", "--angles", "1", "--duration", "10", "--dt", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line, last;
  std::getline(in, line);
  EXPECT_EQ(line, "angle_deg,t,error_m,closed_form_m");
  while (std::getline(in, line)) last = line;
  double angle, t, err, cf;
  char c;
  std::istringstream(last) >> angle >> c >> t >> c >> err >> c >> cf;
  EXPECT_DOUBLE_EQ(angle, 1.0);
  EXPECT_NEAR(t, 10.0, 1e-9);
  EXPECT_NEAR(err, cf, 0.01 * cf);
  EXPECT_EQ(run({"drift", "--dt", "0"}).code, 2);
}
