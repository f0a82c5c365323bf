#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mds/core.hpp"
#include "mds/datasets.hpp"
#include "mds/linalg.hpp"
#include "mds/solver.hpp"

namespace mds {

namespace detail {

inline bool parse_double(std::string_view token, double& out) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

// '#' starts a comment; fields split on whitespace and commas.
inline std::vector<std::vector<std::string>> tokenize_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::vector<std::string> tokens;
    std::string current;
    for (char c : line) {
      if (c == ' ' || c == '\t' || c == '\r' || c == ',') {
        if (!current.empty()) tokens.emplace_back(std::move(current)), current.clear();
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) tokens.emplace_back(std::move(current));
    if (!tokens.empty()) rows.push_back(std::move(tokens));
  }
  return rows;
}

}  // namespace detail

// A rectangular numeric table: the shared layer under matrix and
// configuration files.  An optional leading label row is recognized either
// by non-numeric tokens or by the row count exceeding the column count by
// one (numeric labels such as wavelengths).  A label column is recognized
// only by non-numeric first tokens.
struct ParsedTable {
  Matrix values;
  std::vector<std::string> labels;  // empty when the file carries none
};

inline ParsedTable parse_table(std::string_view text, bool square_hint = false) {
  auto rows = detail::tokenize_rows(text);
  if (rows.empty()) fail(ErrorCode::NonSquare, "no numeric rows in input");

  ParsedTable out;
  auto numeric = [](const std::string& token) {
    double ignored;
    return detail::parse_double(token, ignored);
  };
  // Header detection.  Non-numeric tokens past the first column can only be
  // labels.  A non-numeric token in the first column alone is a header only
  // when the rows below start numerically; otherwise the whole first column
  // is row labels.  A purely numeric label row (wavelengths, years) is
  // recognized when the caller expects a square matrix, by the one-extra-row
  // shape.
  const bool first_beyond_nonnumeric = [&] {
    for (size_t j = 1; j < rows.front().size(); ++j)
      if (!numeric(rows.front()[j])) return true;
    return false;
  }();
  const bool later_rows_labeled = [&] {
    if (rows.size() < 2) return false;
    for (size_t i = 1; i < rows.size(); ++i)
      if (numeric(rows[i].front())) return false;
    return true;
  }();
  const size_t data_cols = rows.back().size();
  const bool header =
      first_beyond_nonnumeric ||
      (!numeric(rows.front().front()) && !later_rows_labeled) ||
      (square_hint && rows.size() == data_cols + 1 && rows.front().size() == data_cols);
  if (header) {
    out.labels.assign(rows.front().begin(), rows.front().end());
    rows.erase(rows.begin());
    if (rows.empty()) fail(ErrorCode::NonSquare, "no numeric rows after header");
  }

  const bool row_labels = [&] {
    double ignored;
    for (const auto& row : rows)
      if (row.empty() || detail::parse_double(row.front(), ignored)) return false;
    return true;
  }();
  const size_t skip = row_labels ? 1 : 0;

  const size_t ncols = rows.front().size() - skip;
  if (ncols == 0) fail(ErrorCode::NonSquare, "rows have no numeric fields");
  out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(ncols));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() - skip != ncols)
      fail(ErrorCode::RaggedRows, "row " + std::to_string(i + 1) + " has " +
                                      std::to_string(rows[i].size() - skip) +
                                      " fields, expected " + std::to_string(ncols));
    for (size_t j = 0; j < ncols; ++j) {
      double v;
      if (!detail::parse_double(rows[i][j + skip], v))
        fail(ErrorCode::NonNumericToken, "cannot parse '" + rows[i][j + skip] + "' at row " +
                                             std::to_string(i + 1));
      out.values(static_cast<Index>(i), static_cast<Index>(j)) = v;
    }
  }
  if (row_labels && out.labels.empty()) {
    for (const auto& row : rows) out.labels.push_back(row.front());
  }
  // a label row one longer than the matrix means a corner cell; drop it
  if (header && out.labels.size() == static_cast<size_t>(out.values.cols()) + 1)
    out.labels.erase(out.labels.begin());
  return out;
}

struct ParsedMatrix {
  Matrix values;
  std::vector<std::string> labels;
  double max_asymmetry = 0.0;  // before averaging; caller may warn when > 1e-9
};

// Square matrix reader: symmetry is enforced by averaging with the
// transpose, and the amount of asymmetry that was averaged away is reported.
inline ParsedMatrix parse_matrix(std::string_view text) {
  ParsedTable table = parse_table(text, /*square_hint=*/true);
  const Index n = table.values.rows();
  if (table.values.cols() != n)
    fail(ErrorCode::NonSquare, "expected a square matrix, got " + std::to_string(n) + "x" +
                                   std::to_string(table.values.cols()));
  if (n < 3) fail(ErrorCode::NonSquare, "need at least 3 rows, got " + std::to_string(n));
  ParsedMatrix out;
  out.max_asymmetry = detail::max_asymmetry(table.values);
  out.values = 0.5 * (table.values + table.values.transpose());
  out.labels = std::move(table.labels);
  return out;
}

struct Dataset {
  DissimilarityMatrix delta;
  std::vector<std::string> labels;
};

// Builtin datasets by id.  "ekman" is the 14-color similarity table turned
// into dissimilarities by delta = 1 - s.
inline Dataset load_dataset(const std::string& id) {
  if (id != "ekman") fail(ErrorCode::UnknownDataset, "no builtin dataset named '" + id + "'");
  ParsedMatrix sim = parse_matrix(datasets::ekman_similarities);
  Matrix delta = 1.0 - sim.values.array();
  delta.diagonal().setZero();
  return Dataset{DissimilarityMatrix::from_matrix(std::move(delta)), std::move(sim.labels)};
}

// Labels 1..n for inputs that carry none.
inline std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(n));
  for (Index i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return labels;
}

namespace detail {

inline std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

inline std::string shortest17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// One line per update in the reference trace format: the labels carry their
// own trailing space and the list separator adds another, giving the
// characteristic double spacing, ten fixed decimals, and a trailing space
// before each newline.
inline std::string format_iteration_line(const IterationRecord& rec) {
  return "itel  " + std::to_string(rec.itel) + " sold  " + detail::fixed10(rec.sold) +
         " snew  " + detail::fixed10(rec.snew) + " \n";
}

inline std::string format_iteration_log(const std::vector<IterationRecord>& records) {
  std::string out;
  for (const auto& rec : records) out += format_iteration_line(rec);
  return out;
}

// FNV-1a over the exact input bytes, rendered as 16 hex digits.  Stable,
// fast, and good enough to tie a result file to the data that produced it.
inline std::string input_checksum(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

enum class Loss { stress2, raw };

inline const char* to_string(Loss loss) { return loss == Loss::stress2 ? "stress2" : "raw"; }

// Everything one CLI invocation needs, kept separate from SolverOptions so
// results can echo the run configuration verbatim.
struct RunConfig {
  std::string input;  // path or builtin dataset id
  Loss loss = Loss::stress2;
  SolverOptions options;
  std::string init_descriptor = "torgerson";  // the --init text, echoed to JSON
  std::string weights_path;                   // empty: equal weights
  std::set<std::string> outputs = {"log", "json", "csv", "svg"};
  std::filesystem::path out_dir;
};

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::IoFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

inline std::string render_csv(const SolverResult& result, const std::vector<std::string>& labels) {
  const Index n = result.x.point_count(), p = result.x.dim_count();
  std::string out = "label";
  for (Index j = 0; j < p; ++j) out += ",dim" + std::to_string(j + 1);
  out += "\n";
  for (Index i = 0; i < n; ++i) {
    out += labels[static_cast<size_t>(i)];
    for (Index j = 0; j < p; ++j) out += "," + detail::shortest17(result.x.coords(i, j));
    out += "\n";
  }
  return out;
}

// Fixed-size scatter of the first two configuration columns with equal axis
// scaling.  Pure text assembly: identical results give identical bytes.
inline std::string render_svg(const SolverResult& result, const std::vector<std::string>& labels) {
  const Index n = result.x.point_count(), p = result.x.dim_count();
  const int size = 640, margin = 60;
  const Vector cx = result.x.coords.col(0);
  const Vector cy = p >= 2 ? Vector(result.x.coords.col(1)) : Vector(Vector::Zero(n));

  const double xmid = 0.5 * (cx.maxCoeff() + cx.minCoeff());
  const double ymid = 0.5 * (cy.maxCoeff() + cy.minCoeff());
  double half = 0.5 * std::max(cx.maxCoeff() - cx.minCoeff(), cy.maxCoeff() - cy.minCoeff());
  if (half <= 0.0) half = 1.0;
  const double scale = (size / 2.0 - margin) / half;

  auto px = [&](double v) { return size / 2.0 + (v - xmid) * scale; };
  auto py = [&](double v) { return size / 2.0 - (v - ymid) * scale; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
         "\" height=\"" + std::to_string(size) + "\" viewBox=\"0 0 " + std::to_string(size) +
         " " + std::to_string(size) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (p > 2)
    svg += "<!-- configuration has " + std::to_string(p) +
           " dimensions; showing the first two -->\n";
  for (Index i = 0; i < n; ++i) {
    const std::string x = num(px(cx(i))), y = num(py(cy(i)));
    svg += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"3\" fill=\"steelblue\"/>\n";
    svg += "<text x=\"" + num(px(cx(i)) + 6.0) + "\" y=\"" + num(py(cy(i)) - 6.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           labels[static_cast<size_t>(i)] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline nlohmann::ordered_json result_json(const SolverResult& result, const RunConfig& config,
                                          const std::vector<std::string>& labels,
                                          const std::string& checksum) {
  nlohmann::ordered_json j;
  j["loss"] = to_string(config.loss);
  j["ndim"] = config.options.ndim;
  j["itel"] = result.itel;
  j["converged"] = result.converged;
  j["final_stress"] = result.stress;
  auto records = nlohmann::ordered_json::array();
  for (const auto& rec : result.records)
    records.push_back({{"itel", rec.itel}, {"sold", rec.sold}, {"snew", rec.snew}});
  j["records"] = std::move(records);
  auto coords = nlohmann::ordered_json::array();
  for (Index i = 0; i < result.x.point_count(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Index k = 0; k < result.x.dim_count(); ++k) row.push_back(result.x.coords(i, k));
    coords.push_back(std::move(row));
  }
  j["configuration"] = std::move(coords);
  j["labels"] = labels;
  j["skipped_pairs"] = result.skipped_pairs;
  j["options"] = {{"input", config.input},
                  {"loss", to_string(config.loss)},
                  {"ndim", config.options.ndim},
                  {"itmax", config.options.itmax},
                  {"eps", config.options.eps},
                  {"allow_indefinite", config.options.allow_indefinite},
                  {"init", config.init_descriptor},
                  {"weights", config.weights_path}};
  j["input_checksum"] = checksum;
  return j;
}

// Writes the requested artifacts into config.out_dir: iterations.log,
// result.json, configuration.csv, configuration.svg.  Writes are atomic
// (temp file + rename) so a crash never leaves a half-written artifact.
inline void emit_results(const SolverResult& result, const RunConfig& config,
                         const std::vector<std::string>& labels, const std::string& checksum) {
  namespace fs = std::filesystem;
  if (labels.size() != static_cast<size_t>(result.x.point_count()))
    fail(ErrorCode::InvalidArgument, "label count does not match the configuration");
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + config.out_dir.string());

  if (config.outputs.count("log"))
    detail::write_file_atomic(config.out_dir / "iterations.log",
                              format_iteration_log(result.records));
  if (config.outputs.count("json"))
    detail::write_file_atomic(config.out_dir / "result.json",
                              result_json(result, config, labels, checksum).dump(2) + "\n");
  if (config.outputs.count("csv"))
    detail::write_file_atomic(config.out_dir / "configuration.csv",
                              render_csv(result, labels));
  if (config.outputs.count("svg"))
    detail::write_file_atomic(config.out_dir / "configuration.svg",
                              render_svg(result, labels));
}

// Procrustes comparison of two solutions of the same problem, written as a
// small JSON report (used to compare the ratio-loss and raw-stress answers).
inline void write_alignment_report(const std::filesystem::path& path, const SolverResult& a,
                                   const SolverResult& b) {
  const ProcrustesResult fit = procrustes_align(a.x, b.x, true);
  nlohmann::ordered_json j;
  j["dilation"] = fit.dilation;
  j["residual"] = fit.residual;
  j["relative_residual"] = fit.relative_residual;
  detail::write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace mds
