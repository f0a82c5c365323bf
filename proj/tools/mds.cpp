// Command-line front end: load a dissimilarity matrix (file or builtin),
// run one of the two majorization solvers, and emit the requested artifacts.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mds/analysis.hpp"
#include "mds/io.hpp"
#include "mds/solver.hpp"

namespace {

mds::InitSpec parse_init(const std::string& text, std::string& descriptor) {
  descriptor = text;
  if (text == "torgerson") return mds::InitSpec::torgerson_start();
  if (text.rfind("random:", 0) == 0) {
    const std::string seed_text = text.substr(7);
    try {
      return mds::InitSpec::random_start(std::stoull(seed_text));
    } catch (const std::exception&) {
      mds::fail(mds::ErrorCode::InvalidArgument,
                "bad seed in --init '" + text + "' (expected random:<integer>)");
    }
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    const mds::ParsedTable table = mds::parse_table(mds::detail::read_file(path));
    return mds::InitSpec::user_start(table.values);
  }
  mds::fail(mds::ErrorCode::InvalidArgument,
            "--init must be torgerson, random:<seed>, or file:<path>");
}

int run_command(const std::string& input, const std::string& loss_text, int ndim, int itmax,
                double eps, const std::string& weights_path, const std::string& init_text,
                bool allow_indefinite, const std::string& out_dir,
                const std::vector<std::string>& emit, bool quiet) {
  mds::RunConfig config;
  config.input = input;
  config.loss = loss_text == "raw" ? mds::Loss::raw : mds::Loss::stress2;
  config.options.ndim = ndim;
  config.options.itmax = itmax;
  config.options.eps = eps;
  config.options.allow_indefinite = allow_indefinite;
  config.options.init = parse_init(init_text, config.init_descriptor);
  config.weights_path = weights_path;
  config.out_dir = out_dir;
  if (!emit.empty()) config.outputs = {emit.begin(), emit.end()};
  for (const auto& kind : config.outputs)
    if (kind != "log" && kind != "json" && kind != "csv" && kind != "svg")
      mds::fail(mds::ErrorCode::InvalidArgument, "unknown --emit kind '" + kind + "'");

  // input: builtin id or a dissimilarity file
  std::string input_bytes;
  std::vector<std::string> labels;
  mds::Matrix delta_values;
  if (input == "ekman") {
    input_bytes = mds::datasets::ekman_similarities;
    mds::Dataset data = mds::load_dataset(input);
    delta_values = data.delta.values();
    labels = std::move(data.labels);
  } else {
    input_bytes = mds::detail::read_file(input);
    mds::ParsedMatrix parsed = mds::parse_matrix(input_bytes);
    if (parsed.max_asymmetry > 1e-9)
      std::fprintf(stderr, "warning: input symmetrized (max asymmetry %.3e)\n",
                   parsed.max_asymmetry);
    delta_values = std::move(parsed.values);
    labels = std::move(parsed.labels);
  }
  const mds::DissimilarityMatrix delta =
      mds::DissimilarityMatrix::from_matrix(std::move(delta_values));
  if (labels.empty()) labels = mds::default_labels(delta.order());
  const std::string checksum = mds::input_checksum(input_bytes);

  mds::WeightMatrix weights = [&] {
    if (weights_path.empty()) return mds::WeightMatrix::equal(delta.order());
    mds::ParsedMatrix parsed = mds::parse_matrix(mds::detail::read_file(weights_path));
    if (parsed.max_asymmetry > 1e-9)
      std::fprintf(stderr, "warning: weights symmetrized (max asymmetry %.3e)\n",
                   parsed.max_asymmetry);
    return mds::normalize_weights(parsed.values);
  }();

  mds::IterationObserver observer;
  if (!quiet)
    observer = [](const mds::IterationRecord& rec) {
      std::fputs(mds::format_iteration_line(rec).c_str(), stdout);
    };

  const mds::SolverResult result =
      config.loss == mds::Loss::stress2
          ? mds::run_stress2(delta, weights, config.options, observer)
          : mds::run_raw_smacof(delta, weights, config.options, observer);

  mds::emit_results(result, config, labels, checksum);
  if (!quiet)
    std::printf("%s %s after %d iteration%s, final stress %.10f -> %s\n",
                mds::to_string(config.loss),
                result.converged ? "converged" : "stopped at itmax", result.itel,
                result.itel == 1 ? "" : "s", result.stress, out_dir.c_str());
  return result.converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multidimensional scaling by stress majorization"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Fit a configuration to a dissimilarity matrix");
  std::string input, out_dir;
  std::string loss = "stress2", init = "torgerson", weights_path;
  int ndim = 2, itmax = 1000;
  double eps = 1e-10;
  bool allow_indefinite = false, quiet = false;
  std::vector<std::string> emit;

  run->add_option("--input", input, "Dissimilarity file or builtin dataset id (ekman)")
      ->required();
  run->add_option("--loss", loss, "Loss to minimize")
      ->check(CLI::IsMember({"stress2", "raw"}));
  run->add_option("--ndim", ndim, "Embedding dimension");
  run->add_option("--itmax", itmax, "Maximum number of updates");
  run->add_option("--eps", eps, "Stop when an update gains less than this");
  run->add_option("--weights", weights_path, "Optional weight matrix file");
  run->add_option("--init", init, "torgerson | random:<seed> | file:<path>");
  run->add_flag("--allow-indefinite", allow_indefinite,
                "Keep going when sigma2 exceeds 1 (emergency steps)");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--emit", emit, "Artifacts to write (log,json,csv,svg)")
      ->delimiter(',');
  run->add_flag("--quiet", quiet, "Suppress per-iteration output");

  CLI11_PARSE(app, argc, argv);

  try {
    return run_command(input, loss, ndim, itmax, eps, weights_path, init, allow_indefinite,
                       out_dir, emit, quiet);
  } catch (const mds::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_input_error() ? 3 : 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
