// End-to-end checks of the installed command line against the C API.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msa/msa_c.h"

#ifndef MSA_CLI_PATH
#error "MSA_CLI_PATH must point at the built msa binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("msa_cli_test_" + std::to_string(static_cast<long>(::getpid())));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string command = std::string(MSA_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string captured;
  char buffer[512];
  while (fgets(buffer, sizeof(buffer), pipe)) captured += buffer;
  const int status = pclose(pipe);
  if (output) *output = captured;
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Deterministic two-domain CSV with y = +1 on the left cluster, -1 right.
std::string make_dataset_csv(int per_domain) {
  std::string csv = "x0,y,domain\n";
  char line[96];
  for (int i = 0; i < per_domain; ++i) {
    std::snprintf(line, sizeof(line), "%.17g,1,0\n", -2.0 + 0.04 * i);
    csv += line;
    std::snprintf(line, sizeof(line), "%.17g,-1,1\n", 2.0 + 0.04 * i);
    csv += line;
  }
  return csv;
}

constexpr const char* kBundle = R"({
  "model": "regression", "d": 1,
  "predictors": [
    {"type": "linear", "weights": [0.0], "bias": 1.0, "output": "raw"},
    {"type": "linear", "weights": [-2.0], "bias": 0.0, "output": "logistic_pm1"}
  ]})";

}  // namespace

TEST_CASE("usage errors exit with 2, runtime errors with 1") {
  std::string out;
  CHECK(run_cli("definitely-not-a-command", &out) == 2);
  CHECK(run_cli("renyi --alpha 2 /no/such/p.csv /no/such/q.csv", &out) == 1);
  CHECK(out.find("/no/such/p.csv") != std::string::npos);
  CHECK(run_cli("--help", &out) == 0);
  CHECK(out.find("train-posterior") != std::string::npos);
}

TEST_CASE("renyi subcommand prints divergences") {
  Scratch scratch;
  write_file(scratch.path("p.csv"), "p\n0.5\n0.5\n");
  write_file(scratch.path("q.csv"), "p\n0.25\n0.75\n");
  std::string out;
  CHECK(run_cli("renyi --alpha 2 " + scratch.path("p.csv") + " " + scratch.path("p.csv"),
                &out) == 0);
  CHECK(std::stod(out) == 0.0);
  CHECK(run_cli("renyi --alpha 2 " + scratch.path("p.csv") + " " + scratch.path("q.csv"),
                &out) == 0);
  CHECK(std::stod(out) == doctest::Approx(0.28768207245178085).epsilon(1e-12));
}

TEST_CASE("full pipeline: train, kde, solve, predict") {
  Scratch scratch;
  const std::string data = scratch.path("data.csv");
  write_file(data, make_dataset_csv(40));
  write_file(scratch.path("predictors.json"), kBundle);

  // Train the posterior.
  std::string out;
  REQUIRE(run_cli("train-posterior --data " + data + " --mu 0.001 --seed 3 --out " +
                      scratch.path("posterior.json"),
                  &out) == 0);
  const json posterior_doc = json::parse(read_file(scratch.path("posterior.json")));
  CHECK(posterior_doc.contains("manifest"));
  CHECK(posterior_doc.at("p") == 2);

  // KDE models for every domain.
  REQUIRE(run_cli("kde " + data + " --domain -1 --bandwidth auto --grid 0.05:1:5 --out " +
                      scratch.path("kde"),
                  &out) == 0);
  CHECK(fs::exists(scratch.path("kde/kde_0.json")));
  CHECK(fs::exists(scratch.path("kde/kde_1.json")));
  const json kde_doc = json::parse(read_file(scratch.path("kde/kde_0.json")));
  CHECK(kde_doc.contains("sigma"));
  CHECK(kde_doc.contains("cv_scores"));

  // Solve z with both weightings.
  REQUIRE(run_cli("solve-z --calibration " + data + " --weighting " +
                      scratch.path("posterior.json") + " --predictors " +
                      scratch.path("predictors.json") +
                      " --resolution 50 --loss-bound 4 --out " + scratch.path("z.json"),
                  &out) == 0);
  const json z_doc = json::parse(read_file(scratch.path("z.json")));
  CHECK(z_doc.at("z").size() == 2);
  CHECK(z_doc.at("per_domain_losses").size() == 2);
  CHECK(z_doc.at("method") == "grid");
  CHECK(z_doc.contains("spread"));

  REQUIRE(run_cli("solve-z --calibration " + data + " --weighting " + scratch.path("kde") +
                      " --predictors " + scratch.path("predictors.json") +
                      " --resolution 50 --loss-bound 4 --out " + scratch.path("z_kde.json"),
                  &out) == 0);
  const json z_kde_doc = json::parse(read_file(scratch.path("z_kde.json")));
  // The generative route has uniform qhat, so z' = z.
  CHECK(z_kde_doc.at("z") == z_kde_doc.at("z_prime"));

  // Predict and compare bit-for-bit against direct C API calls.
  const std::string input = scratch.path("input.csv");
  write_file(input, "x0,y,domain\n-2,,\n-0.5,,\n0,,\n1.5,,\n");
  REQUIRE(run_cli("predict --input " + input + " --weighting " +
                      scratch.path("posterior.json") + " --predictors " +
                      scratch.path("predictors.json") + " --z " + scratch.path("z.json") +
                      " --eta 0 --out " + scratch.path("pred.csv"),
                  &out) == 0);
  CHECK(fs::exists(scratch.path("pred.csv.manifest.json")));

  msa_posterior* posterior = nullptr;
  REQUIRE(msa_posterior_from_json(read_file(scratch.path("posterior.json")).c_str(),
                                  &posterior) == MSA_OK);
  msa_predictors* predictors = nullptr;
  REQUIRE(msa_predictors_from_json(kBundle, &predictors) == MSA_OK);
  const std::vector<double> z_prime =
      z_doc.at("z_prime").get<std::vector<double>>();

  std::ifstream pred_csv(scratch.path("pred.csv"));
  std::string header_line;
  std::getline(pred_csv, header_line);
  CHECK(header_line == "prediction,w0,w1,score0,score1");
  const double xs[] = {-2.0, -0.5, 0.0, 1.5};
  for (double x : xs) {
    std::string line;
    REQUIRE(std::getline(pred_csv, line));
    double prediction = 0.0, weights[2], scores[2];
    REQUIRE(msa_predict_posterior(predictors, posterior, z_prime.data(), 2, 0.0, &x, 1,
                                  &prediction, weights, scores) == MSA_OK);
    std::stringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    CHECK(std::stod(field) == prediction);  // %.17g round trip is exact
    std::getline(row, field, ',');
    CHECK(std::stod(field) == weights[0]);
    std::getline(row, field, ',');
    CHECK(std::stod(field) == weights[1]);
    std::getline(row, field, ',');
    CHECK(std::stod(field) == scores[0]);
  }
  msa_predictors_free(predictors);
  msa_posterior_free(posterior);

  // Vertex z passes predictor 0 straight through (h_0 is the constant 1).
  write_file(scratch.path("z_vertex.json"),
             R"({"z":[1.0,0.0],"z_prime":[1.0,0.0],"objective":0.0,)"
             R"("per_domain_losses":[0.0,0.0],"spread":0.0,"method":"grid"})");
  REQUIRE(run_cli("predict --input " + input + " --weighting " +
                      scratch.path("posterior.json") + " --predictors " +
                      scratch.path("predictors.json") + " --z " +
                      scratch.path("z_vertex.json") + " --eta 0 --out " +
                      scratch.path("pred_vertex.csv"),
                  &out) == 0);
  std::ifstream vertex_csv(scratch.path("pred_vertex.csv"));
  std::string vertex_line;
  std::getline(vertex_csv, vertex_line);  // header
  while (std::getline(vertex_csv, vertex_line)) {
    CHECK(vertex_line.rfind("1,", 0) == 0);  // prediction column is exactly 1
  }
}

TEST_CASE("solve-z under the probability model") {
  Scratch scratch;
  // Class labels: 0 on the left cluster, 1 on the right.
  std::string csv = "x0,y,domain\n";
  char line[96];
  for (int i = 0; i < 30; ++i) {
    std::snprintf(line, sizeof(line), "%.17g,0,0\n", -2.0 + 0.05 * i);
    csv += line;
    std::snprintf(line, sizeof(line), "%.17g,1,1\n", 2.0 + 0.05 * i);
    csv += line;
  }
  const std::string data = scratch.path("data.csv");
  write_file(data, csv);
  write_file(scratch.path("predictors.json"), R"({
    "model": "probability", "d": 1, "labels": 2,
    "predictors": [
      {"type": "linear_softmax", "weights": [[-3.0], [3.0]], "bias": [0.0, 0.0]},
      {"type": "linear_softmax", "weights": [[0.0], [0.0]], "bias": [0.0, 0.0]}
    ]})");
  std::string out;
  REQUIRE(run_cli("train-posterior --data " + data + " --mu 0.001 --out " +
                      scratch.path("posterior.json"),
                  &out) == 0);
  REQUIRE(run_cli("solve-z --calibration " + data + " --weighting " +
                      scratch.path("posterior.json") + " --predictors " +
                      scratch.path("predictors.json") +
                      " --loss cross-entropy --resolution 40 --out " + scratch.path("z.json"),
                  &out) == 0);
  const json z_doc = json::parse(read_file(scratch.path("z.json")));
  // The sharp predictor dominates the uninformed one.
  CHECK(z_doc.at("z")[0].get<double>() > 0.5);
}

TEST_CASE("synth subcommand writes report, curves, and reproducible digests") {
  Scratch scratch;
  write_file(scratch.path("config.json"), R"({
    "sample_sizes": [100], "runs": 1, "test_size": 200, "grid_resolution": 25,
    "maxent_mu": 0.01, "kde_grid": [0.05, 0.3, 1.0], "threads": 1, "seed": 5
  })");
  std::string out;
  REQUIRE(run_cli("synth --config " + scratch.path("config.json") + " --out " +
                      scratch.path("report.json") + " --curves " + scratch.path("curves.csv"),
                  &out) == 0);
  const json report = json::parse(read_file(scratch.path("report.json")));
  CHECK(report.contains("manifest"));
  CHECK(report.at("runs").size() == 1);
  const std::string curves = read_file(scratch.path("curves.csv"));
  CHECK(curves.rfind("method,target,m,mean_acc,std_acc", 0) == 0);

  // Rerun: identical content digests, byte-identical curves.
  const std::string digest_one =
      json::parse(read_file(scratch.path("report.json"))).at("manifest").at("content_digest");
  REQUIRE(run_cli("synth --config " + scratch.path("config.json") + " --out " +
                      scratch.path("report2.json") + " --curves " + scratch.path("curves2.csv"),
                  &out) == 0);
  const std::string digest_two =
      json::parse(read_file(scratch.path("report2.json"))).at("manifest").at("content_digest");
  CHECK(digest_one == digest_two);
  CHECK(read_file(scratch.path("curves.csv")) == read_file(scratch.path("curves2.csv")));
}
