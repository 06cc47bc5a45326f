// msa: multiple-source adaptation toolkit command line.
//
// The binary drives the shared library through its C API; every output file
// embeds (or sits next to) a manifest with input digests and a content
// digest so reruns can be checked byte for byte.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msa/msa_c.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& message) { throw CliError(message); }

void check(msa_status status, const std::string& what) {
  if (status != MSA_OK) fail(what + ": " + msa_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write file: " + path);
  out << content;
  if (!out) fail("failed writing file: " + path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, hash);
  return buffer;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// Owned string coming back from the C API.
struct ApiString {
  char* text = nullptr;
  ~ApiString() { msa_string_free(text); }
  std::string str() const { return text ? text : ""; }
};

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
  Handle& operator=(Handle&& other) noexcept {
    std::swap(ptr, other.ptr);
    return *this;
  }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};

using DatasetHandle = Handle<msa_dataset, msa_dataset_free>;
using PosteriorHandle = Handle<msa_posterior, msa_posterior_free>;
using KdeHandle = Handle<msa_kde, msa_kde_free>;
using PredictorsHandle = Handle<msa_predictors, msa_predictors_free>;

// Manifest carried by every output. wall_clock_ms is informational and is
// excluded from content digests; rerunning with identical inputs must
// reproduce content_digest exactly.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv)
      : command_(std::move(command)), argv_(argv),
        start_(std::chrono::steady_clock::now()) {}

  void add_input(const std::string& path) {
    inputs_[path] = fnv1a_hex(read_file(path));
  }
  void add_config(const std::string& text) { config_digest_ = fnv1a_hex(text); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  json build(const std::string& payload_dump) const {
    const auto elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - start_);
    json m;
    m["tool"] = "msa";
    m["version"] = msa_version();
    m["command"] = command_;
    m["argv"] = argv_;
    m["inputs"] = inputs_;
    if (!config_digest_.empty()) m["config_digest"] = config_digest_;
    if (seed_) m["seed"] = *seed_;
    m["content_digest"] = fnv1a_hex(payload_dump);
    m["wall_clock_ms"] = elapsed.count();
    return m;
  }

  // Payload JSON with the manifest embedded under "manifest".
  std::string wrap(json payload) const {
    const std::string canonical = payload.dump();
    payload["manifest"] = build(canonical);
    return payload.dump(2) + "\n";
  }

  // Sidecar manifest for non-JSON outputs.
  void write_sidecar(const std::string& out_path, const std::string& content) const {
    json m = build(content);
    write_file(out_path + ".manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  json inputs_ = json::object();
  std::string config_digest_;
  std::optional<std::uint64_t> seed_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> collect_argv(int argc, char** argv) {
  std::vector<std::string> out;
  for (int i = 0; i < argc; ++i) out.emplace_back(argv[i]);
  return out;
}

DatasetHandle load_dataset(const std::string& path) {
  DatasetHandle handle;
  check(msa_dataset_load_csv(path.c_str(), &handle.ptr), "loading " + path);
  return handle;
}

PredictorsHandle load_predictors(const std::string& path) {
  PredictorsHandle handle;
  const std::string text = read_file(path);
  check(msa_predictors_from_json(text.c_str(), &handle.ptr), "parsing " + path);
  return handle;
}

PosteriorHandle load_posterior(const std::string& path) {
  PosteriorHandle handle;
  const std::string text = read_file(path);
  check(msa_posterior_from_json(text.c_str(), &handle.ptr), "parsing " + path);
  return handle;
}

std::vector<KdeHandle> load_kde_dir(const std::string& dir, int expected) {
  std::vector<KdeHandle> handles;
  for (int k = 0; k < expected; ++k) {
    const std::string path = (fs::path(dir) / ("kde_" + std::to_string(k) + ".json")).string();
    if (!fs::exists(path)) fail("missing KDE model: " + path);
    KdeHandle handle;
    const std::string text = read_file(path);
    check(msa_kde_from_json(text.c_str(), &handle.ptr), "parsing " + path);
    handles.push_back(std::move(handle));
  }
  return handles;
}

double parse_alpha(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    fail("bad alpha value: " + text);
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  // lo:hi:n, log-spaced.
  double lo = 0.0, hi = 0.0;
  int n = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1 ||
      !(lo > 0.0) || !(hi >= lo)) {
    fail("bad grid spec (want lo:hi:n with 0 < lo <= hi): " + spec);
  }
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    grid[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return grid;
}

// Single-column probability CSV: optional non-numeric header, one value per
// line. Values off by at most 1e-6 from summing to 1 are renormalized.
std::vector<double> read_probability_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open file: " + path);
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      const double value = std::stod(line, &used);
      if (used != line.size()) throw std::invalid_argument(line);
      values.push_back(value);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;  // header row
      }
      fail("bad probability value in " + path + ": " + line);
    }
    first = false;
  }
  if (values.empty()) fail("no probability values in " + path);
  double sum = 0.0;
  for (double v : values) sum += v;
  if (std::abs(sum - 1.0) > 1e-6) {
    fail("probabilities in " + path + " sum to " + format_double(sum) + ", not 1");
  }
  for (double& v : values) v /= sum;
  return values;
}

// ---------------------------------------------------------------------------

int cmd_train_posterior(const std::string& data_path, const std::string& out_path,
                        const std::string& mu_text, const std::string& feature_map,
                        int rff_width, double rff_bandwidth, double tol, int max_iters,
                        std::uint64_t seed, const std::vector<std::string>& argv) {
  Manifest manifest("train-posterior", argv);
  manifest.add_input(data_path);
  manifest.set_seed(seed);

  const DatasetHandle data = load_dataset(data_path);
  msa_maxent_config config;
  msa_maxent_config_init(&config);
  config.mu = mu_text == "auto" ? -1.0 : std::stod(mu_text);
  config.tol = tol;
  config.max_iters = max_iters;
  config.seed = seed;
  config.feature_map = feature_map == "rff" ? 1 : 0;
  config.rff_width = rff_width;
  config.rff_bandwidth = rff_bandwidth;

  PosteriorHandle model;
  check(msa_maxent_train(data.ptr, &config, &model.ptr), "training posterior");
  ApiString model_json;
  check(msa_posterior_to_json(model.ptr, &model_json.text), "serializing model");
  write_file(out_path, manifest.wrap(json::parse(model_json.str())));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_kde(const std::string& data_path, const std::string& out_path, int domain,
            const std::string& bandwidth, const std::string& grid_spec, int folds,
            std::uint64_t seed, const std::vector<std::string>& argv) {
  Manifest manifest("kde", argv);
  manifest.add_input(data_path);
  manifest.set_seed(seed);

  const DatasetHandle data = load_dataset(data_path);
  const int p = msa_dataset_num_domains(data.ptr);
  if (p == 0) fail("dataset has no domain labels: " + data_path);

  std::vector<int> domains;
  if (domain < 0) {
    for (int k = 0; k < p; ++k) domains.push_back(k);
    fs::create_directories(out_path);
  } else {
    domains.push_back(domain);
  }

  const std::vector<double> grid = parse_grid(grid_spec);
  for (int k : domains) {
    double sigma = 0.0;
    std::vector<double> scores(grid.size(), 0.0);
    json extra;
    if (bandwidth == "auto") {
      check(msa_kde_cv_bandwidth(data.ptr, k, grid.data(), static_cast<int32_t>(grid.size()),
                                 folds, seed, &sigma, scores.data()),
            "bandwidth selection");
      extra["grid"] = grid;
      extra["cv_scores"] = scores;
    } else {
      sigma = std::stod(bandwidth);
    }
    KdeHandle model;
    check(msa_kde_fit(data.ptr, k, sigma, &model.ptr), "fitting kde");
    ApiString model_json;
    check(msa_kde_to_json(model.ptr, k, &model_json.text), "serializing kde");
    json payload = json::parse(model_json.str());
    for (auto& [key, value] : extra.items()) payload[key] = value;
    const std::string file =
        domain < 0 ? (fs::path(out_path) / ("kde_" + std::to_string(k) + ".json")).string()
                   : out_path;
    write_file(file, manifest.wrap(payload));
    std::cout << "wrote " << file << " (sigma " << format_double(sigma) << ")\n";
  }
  return 0;
}

int cmd_solve_z(const std::string& calibration_path, const std::string& weighting_path,
                const std::string& predictors_path, const std::string& out_path,
                const std::string& method, int resolution, double eta,
                const std::string& loss_kind, double loss_bound,
                const std::vector<std::string>& argv) {
  Manifest manifest("solve-z", argv);
  manifest.add_input(calibration_path);
  manifest.add_input(predictors_path);

  const DatasetHandle calibration = load_dataset(calibration_path);
  const PredictorsHandle predictors = load_predictors(predictors_path);
  const int p = msa_predictors_count(predictors.ptr);

  msa_zsolve_config config;
  msa_zsolve_config_init(&config);
  config.method = method == "iter" ? 1 : 0;
  config.resolution = resolution;
  config.eta = eta;
  config.loss_kind = loss_kind == "cross-entropy" ? 1 : 0;
  config.loss_bound = loss_bound;

  ApiString result_json;
  if (fs::is_directory(weighting_path)) {
    const std::vector<KdeHandle> kdes = load_kde_dir(weighting_path, p);
    std::vector<const msa_kde*> raw;
    for (const KdeHandle& h : kdes) raw.push_back(h.ptr);
    check(msa_solve_z_kde(calibration.ptr, raw.data(), p, predictors.ptr, &config,
                          &result_json.text),
          "solving z (kde weighting)");
  } else {
    manifest.add_input(weighting_path);
    const PosteriorHandle posterior = load_posterior(weighting_path);
    check(msa_solve_z_posterior(calibration.ptr, posterior.ptr, predictors.ptr, &config,
                                &result_json.text),
          "solving z (posterior weighting)");
  }

  write_file(out_path, manifest.wrap(json::parse(result_json.str())));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_predict(const std::string& input_path, const std::string& weighting_path,
                const std::string& predictors_path, const std::string& z_path,
                const std::string& out_path, double eta,
                const std::vector<std::string>& argv) {
  Manifest manifest("predict", argv);
  manifest.add_input(input_path);
  manifest.add_input(predictors_path);
  manifest.add_input(z_path);

  const DatasetHandle input = load_dataset(input_path);
  const PredictorsHandle predictors = load_predictors(predictors_path);
  const int p = msa_predictors_count(predictors.ptr);
  const int d = msa_dataset_dim(input.ptr);
  const int model = msa_predictors_model(predictors.ptr);
  const int outputs = model == 0 ? 1 : msa_predictors_label_count(predictors.ptr);

  const json z_doc = json::parse(read_file(z_path));
  const bool kde_weighting = fs::is_directory(weighting_path);
  // The discriminative route deploys g at z'; the generative route uses z.
  const std::vector<double> z =
      z_doc.at(kde_weighting ? "z" : "z_prime").get<std::vector<double>>();
  if (static_cast<int>(z.size()) != p) fail("z length does not match the predictors");

  PosteriorHandle posterior;
  std::vector<KdeHandle> kdes;
  std::vector<const msa_kde*> raw_kdes;
  if (kde_weighting) {
    kdes = load_kde_dir(weighting_path, p);
    for (const KdeHandle& h : kdes) raw_kdes.push_back(h.ptr);
  } else {
    manifest.add_input(weighting_path);
    posterior = load_posterior(weighting_path);
  }

  // Feature columns are re-read from the CSV; the dataset handle is only
  // used for validation and dimensions.
  std::ifstream in(input_path);
  std::string header;
  std::getline(in, header);
  std::ostringstream out;
  for (int j = 0; j < outputs; ++j) {
    out << (model == 0 ? std::string("prediction")
                       : "prediction_y" + std::to_string(j))
        << ",";
  }
  for (int k = 0; k < p; ++k) out << "w" << k << ",";
  for (int k = 0; k < p; ++k) out << "score" << k << (k + 1 < p ? "," : "\n");

  std::string line;
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> prediction(static_cast<std::size_t>(outputs));
  std::vector<double> weights(static_cast<std::size_t>(p));
  std::vector<double> scores(static_cast<std::size_t>(p));
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream row(line);
    std::string field;
    for (int i = 0; i < d; ++i) {
      if (!std::getline(row, field, ',')) fail("short row in " + input_path);
      x[static_cast<std::size_t>(i)] = std::stod(field);
    }
    if (kde_weighting) {
      check(msa_predict_kde(predictors.ptr, raw_kdes.data(), z.data(), p, eta, x.data(),
                            d, prediction.data(), weights.data(), scores.data()),
            "prediction");
    } else {
      check(msa_predict_posterior(predictors.ptr, posterior.ptr, z.data(), p, eta,
                                  x.data(), d, prediction.data(), weights.data(),
                                  scores.data()),
            "prediction");
    }
    for (int j = 0; j < outputs; ++j) out << format_double(prediction[static_cast<std::size_t>(j)]) << ",";
    for (int k = 0; k < p; ++k) out << format_double(weights[static_cast<std::size_t>(k)]) << ",";
    for (int k = 0; k < p; ++k) {
      out << format_double(scores[static_cast<std::size_t>(k)]) << (k + 1 < p ? "," : "\n");
    }
  }

  const std::string csv = out.str();
  write_file(out_path, csv);
  manifest.write_sidecar(out_path, csv);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_synth(const std::string& config_arg, const std::string& out_path,
              const std::string& curves_path, const std::string& variance_convention,
              std::int64_t seed_override, const std::vector<std::string>& argv) {
  Manifest manifest("synth", argv);

  std::string config_text = "default";
  json config_doc = json::object();
  if (config_arg != "default") {
    manifest.add_input(config_arg);
    config_text = read_file(config_arg);
    config_doc = json::parse(config_text);
  }
  bool modified = config_arg != "default";
  if (variance_convention == "variance") {
    config_doc["variance_convention"] = true;
    modified = true;
  }
  if (variance_convention == "stddev") {
    config_doc["variance_convention"] = false;
    modified = true;
  }
  if (seed_override >= 0) {
    config_doc["seed"] = static_cast<std::uint64_t>(seed_override);
    modified = true;
  }
  if (modified) config_text = config_doc.dump();
  manifest.add_config(config_text);

  ApiString report_json, curves_csv;
  check(msa_synth_run(config_text.c_str(), &report_json.text, &curves_csv.text),
        "running the synthetic benchmark");

  write_file(out_path, manifest.wrap(json::parse(report_json.str())));
  std::cout << "wrote " << out_path << "\n";
  if (!curves_path.empty()) {
    const std::string csv = curves_csv.str();
    write_file(curves_path, csv);
    manifest.write_sidecar(curves_path, csv);
    std::cout << "wrote " << curves_path << "\n";
  }
  return 0;
}

int cmd_renyi(const std::string& alpha_text, const std::string& p_path,
              const std::string& q_path) {
  const double alpha = parse_alpha(alpha_text);
  const std::vector<double> p = read_probability_csv(p_path);
  const std::vector<double> q = read_probability_csv(q_path);
  if (p.size() != q.size()) fail("distributions have different support sizes");
  double value = 0.0;
  check(msa_renyi_divergence(p.data(), q.data(), static_cast<int32_t>(p.size()), alpha,
                             &value),
        "renyi divergence");
  std::cout << format_double(value) << "\n";
  return 0;
}

int cmd_bounds(const std::string& theorem, double epsilon, double delta,
               const std::string& alpha_text, double loss_bound, double dhat,
               double dhat_prime, double d_target, double d2alpha_target, int p,
               double feature_radius, double mu, std::int64_t m, double kappa,
               double d_star, double d_prime_star, const std::string& out_path,
               const std::vector<std::string>& argv) {
  Manifest manifest("bounds", argv);
  const double alpha = parse_alpha(alpha_text);
  double value = 0.0;
  json inputs;
  if (theorem == "2" || theorem == "1") {
    check(msa_bound_theorem_1_2(epsilon, delta, alpha, loss_bound, dhat, d_target, &value),
          "bound evaluation");
    inputs = {{"epsilon", epsilon}, {"delta", delta}, {"alpha", alpha},
              {"M", loss_bound},    {"dhat", dhat},   {"d_target", d_target}};
  } else if (theorem == "4") {
    check(msa_bound_theorem_4(epsilon, delta, alpha, loss_bound, dhat, dhat_prime,
                              d2alpha_target, &value),
          "bound evaluation");
    inputs = {{"epsilon", epsilon},     {"delta", delta},
              {"alpha", alpha},         {"M", loss_bound},
              {"dhat", dhat},           {"dhat_prime", dhat_prime},
              {"d_2alpha_target", d2alpha_target}};
  } else if (theorem == "5") {
    check(msa_bound_theorem_5_dmsa(epsilon, p, feature_radius, mu, m, delta, d_star,
                                   d_prime_star, &value),
          "bound evaluation");
    inputs = {{"epsilon", epsilon}, {"p", p},     {"r", feature_radius},
              {"mu", mu},           {"m", m},     {"delta", delta},
              {"d_star", d_star},   {"d_prime_star", d_prime_star}};
  } else if (theorem == "6") {
    check(msa_bound_theorem_6_gmsa(epsilon, loss_bound, kappa, p, m, delta, d_star,
                                   d_prime_star, &value),
          "bound evaluation");
    inputs = {{"epsilon", epsilon}, {"M", loss_bound}, {"kappa", kappa},
              {"p", p},             {"m", m},          {"delta", delta},
              {"d_star", d_star},   {"d_prime_star", d_prime_star}};
  } else if (theorem == "3") {
    check(msa_theorem3_radius(feature_radius, mu, m, delta, &value), "bound evaluation");
    inputs = {{"r", feature_radius}, {"mu", mu}, {"m", m}, {"delta", delta}};
  } else {
    fail("unknown theorem (expected one of 1, 2, 3, 4, 5, 6): " + theorem);
  }

  json payload;
  payload["theorem"] = theorem;
  payload["inputs"] = inputs;
  payload["value"] = value;
  if (out_path.empty()) {
    std::cout << format_double(value) << "\n";
  } else {
    write_file(out_path, manifest.wrap(payload));
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> raw_argv = collect_argv(argc, argv);
  CLI::App app{"msa: distribution-weighted combination of per-domain predictors"};
  app.require_subcommand(1);
  app.footer(
      "Environment:\n"
      "  MSA_THREADS   caps worker threads for the synthetic benchmark\n"
      "Exit codes: 0 success, 1 runtime error, 2 usage error.");

  // train-posterior
  auto* train = app.add_subcommand(
      "train-posterior", "Train the domain posterior (conditional maxent)");
  std::string train_data, train_out = "posterior.json", train_mu = "auto";
  std::string train_fmap = "linear";
  int train_rff_width = 64;
  double train_rff_bandwidth = 1.0, train_tol = 1e-8;
  int train_max_iters = 500;
  std::uint64_t train_seed = 0;
  train->add_option("--data", train_data, "domain-labeled dataset CSV")->required();
  train->add_option("--out", train_out, "output model JSON");
  train->add_option("--mu", train_mu, "regularization, or 'auto' for 5-fold CV");
  train->add_option("--feature-map", train_fmap, "linear | rff")
      ->check(CLI::IsMember({"linear", "rff"}));
  train->add_option("--rff-width", train_rff_width, "random Fourier feature count");
  train->add_option("--rff-bandwidth", train_rff_bandwidth, "random Fourier bandwidth");
  train->add_option("--tol", train_tol, "gradient norm tolerance");
  train->add_option("--max-iters", train_max_iters, "iteration cap");
  train->add_option("--seed", train_seed, "random seed");

  // kde
  auto* kde = app.add_subcommand("kde", "Fit per-domain kernel density estimates");
  std::string kde_data, kde_out = "kde", kde_bandwidth = "auto", kde_grid = "0.02:5:15";
  int kde_domain = -1, kde_folds = 5;
  std::uint64_t kde_seed = 0;
  kde->add_option("data", kde_data, "domain-labeled dataset CSV")->required();
  kde->add_option("--out", kde_out, "output file (one domain) or directory (all)");
  kde->add_option("--domain", kde_domain, "domain index, or -1 for all domains");
  kde->add_option("--bandwidth", kde_bandwidth, "'auto' (5-fold CV) or a fixed sigma");
  kde->add_option("--grid", kde_grid, "bandwidth grid lo:hi:n (log-spaced)");
  kde->add_option("--folds", kde_folds, "cross-validation folds");
  kde->add_option("--seed", kde_seed, "random seed");

  // solve-z
  auto* solve = app.add_subcommand("solve-z", "Solve for the mixture parameter z");
  std::string solve_cal, solve_weighting, solve_predictors, solve_out = "z.json";
  std::string solve_method = "grid", solve_loss = "squared";
  int solve_resolution = 0;
  double solve_eta = 1e-8, solve_loss_bound = 50.0;
  solve->add_option("--calibration", solve_cal, "labeled calibration CSV")->required();
  solve->add_option("--weighting", solve_weighting,
                    "posterior model JSON, or a directory of kde_<k>.json")
      ->required();
  solve->add_option("--predictors", solve_predictors, "predictor bundle JSON")->required();
  solve->add_option("--out", solve_out, "output JSON");
  solve->add_option("--method", solve_method, "grid | iter")
      ->check(CLI::IsMember({"grid", "iter"}));
  solve->add_option("--resolution,--grid-resolution", solve_resolution,
                    "simplex lattice resolution (0 picks 100/40/20 for p=2/3/4+)");
  solve->add_option("--eta", solve_eta, "denominator smoothing");
  solve->add_option("--loss", solve_loss, "squared | cross-entropy")
      ->check(CLI::IsMember({"squared", "cross-entropy"}));
  solve->add_option("--loss-bound", solve_loss_bound, "loss cap M");

  // predict
  auto* predict = app.add_subcommand("predict", "Combine predictors on new points");
  std::string pred_input, pred_weighting, pred_predictors, pred_z, pred_out = "predictions.csv";
  double pred_eta = 1e-8;
  predict->add_option("--input", pred_input, "input CSV")->required();
  predict->add_option("--weighting", pred_weighting,
                      "posterior model JSON, or a directory of kde_<k>.json")
      ->required();
  predict->add_option("--predictors", pred_predictors, "predictor bundle JSON")->required();
  predict->add_option("--z", pred_z, "solution JSON from solve-z")->required();
  predict->add_option("--out", pred_out, "output CSV");
  predict->add_option("--eta", pred_eta, "denominator smoothing");

  // synth
  auto* synth = app.add_subcommand("synth", "Run the synthetic two-domain benchmark");
  std::string synth_config = "default", synth_out = "report.json", synth_curves;
  std::string synth_variance = "";
  std::int64_t synth_seed = -1;
  synth->add_option("--config", synth_config, "config JSON path, or 'default'");
  synth->add_option("--out", synth_out, "report JSON");
  synth->add_option("--curves", synth_curves, "accuracy curves CSV");
  synth->add_option("--variance-convention", synth_variance,
                    "interpret mixture spread parameters as 'stddev' or 'variance'")
      ->check(CLI::IsMember({"", "stddev", "variance"}));
  synth->add_option("--seed", synth_seed, "override the config seed");

  // renyi
  auto* renyi = app.add_subcommand("renyi", "Renyi divergence of two probability CSVs");
  std::string renyi_alpha = "2", renyi_p, renyi_q;
  renyi->add_option("--alpha", renyi_alpha, "order (>= 0, or 'inf')");
  renyi->add_option("P", renyi_p, "first distribution CSV")->required();
  renyi->add_option("Q", renyi_q, "second distribution CSV")->required();

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Evaluate closed-form guarantee values");
  std::string bounds_theorem, bounds_alpha = "2", bounds_out;
  double b_eps = 0.0, b_delta = 0.05, b_M = 1.0, b_dhat = 1.0, b_dhat_prime = 1.0;
  double b_d_target = 1.0, b_d2alpha = 1.0, b_r = 1.0, b_mu = 1.0, b_kappa = 1.0;
  double b_dstar = 1.0, b_dprimestar = 1.0;
  int b_p = 2;
  std::int64_t b_m = 1000;
  bounds->add_option("--theorem", bounds_theorem,
                     "1|2 (estimate bound), 3 (maxent radius), 4, 5 (dmsa), 6 (gmsa)")
      ->required();
  bounds->add_option("--eps", b_eps, "per-source accuracy epsilon");
  bounds->add_option("--delta", b_delta, "confidence slack delta");
  bounds->add_option("--alpha", bounds_alpha, "divergence order (or 'inf')");
  bounds->add_option("--M", b_M, "loss bound M");
  bounds->add_option("--dhat", b_dhat, "max_k d_alpha(Dhat_k || D_k)");
  bounds->add_option("--dhat-prime", b_dhat_prime, "max_k d_{2a-1}(D_k || Dhat_k)");
  bounds->add_option("--d-target", b_d_target, "d_alpha(D_T || mixture family)");
  bounds->add_option("--d2alpha-target", b_d2alpha, "d_{2a}(D_T || mixture family)");
  bounds->add_option("--p", b_p, "number of domains");
  bounds->add_option("--r", b_r, "feature norm bound");
  bounds->add_option("--mu", b_mu, "maxent regularization");
  bounds->add_option("--m", b_m, "sample size");
  bounds->add_option("--kappa", b_kappa, "kernel ratio bound");
  bounds->add_option("--dstar", b_dstar, "d* divergence term");
  bounds->add_option("--dprimestar", b_dprimestar, "d'* divergence term");
  bounds->add_option("--out", bounds_out, "optional output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) {
      return cmd_train_posterior(train_data, train_out, train_mu, train_fmap,
                                 train_rff_width, train_rff_bandwidth, train_tol,
                                 train_max_iters, train_seed, raw_argv);
    }
    if (kde->parsed()) {
      return cmd_kde(kde_data, kde_out, kde_domain, kde_bandwidth, kde_grid, kde_folds,
                     kde_seed, raw_argv);
    }
    if (solve->parsed()) {
      return cmd_solve_z(solve_cal, solve_weighting, solve_predictors, solve_out,
                         solve_method, solve_resolution, solve_eta, solve_loss,
                         solve_loss_bound, raw_argv);
    }
    if (predict->parsed()) {
      return cmd_predict(pred_input, pred_weighting, pred_predictors, pred_z, pred_out,
                         pred_eta, raw_argv);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_config, synth_out, synth_curves, synth_variance, synth_seed,
                       raw_argv);
    }
    if (renyi->parsed()) return cmd_renyi(renyi_alpha, renyi_p, renyi_q);
    if (bounds->parsed()) {
      return cmd_bounds(bounds_theorem, b_eps, b_delta, bounds_alpha, b_M, b_dhat,
                        b_dhat_prime, b_d_target, b_d2alpha, b_p, b_r, b_mu, b_m,
                        b_kappa, b_dstar, b_dprimestar, bounds_out, raw_argv);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
