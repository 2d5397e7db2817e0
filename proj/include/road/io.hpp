#pragma once

#include "road/core.hpp"
#include "road/counterexample.hpp"
#include "road/estimators.hpp"
#include "road/experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace road::io {

/// Malformed text in a file or command-line argument.
struct ParseError : Error {
  using Error::Error;
};

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

double parse_double(const std::string& text);
VectorXd parse_vector(const std::string& text);       // comma-separated reals
std::vector<int> parse_int_list(const std::string& text);

std::string read_text(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it over the target,
/// so a crash mid-write never leaves a truncated file behind.
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

// Matrix files: one row per line, comma separated, no header.
MatrixXd read_matrix_csv(const std::filesystem::path& path);
std::string matrix_csv(const MatrixXd& m);

// Dataset files: header "label,x1,...,xp", then one observation per line.
LabeledDataset read_dataset_csv(const std::filesystem::path& path);
std::string dataset_csv(const LabeledDataset& data);

// Model files: JSON object with keys mu1, mu2 (arrays) and sigma (array of
// rows).
GaussianPair read_model_json(const std::filesystem::path& path);
std::string model_json(const GaussianPair& model);

std::string labels_csv(const std::vector<int>& labels);
std::string draws_csv(const std::vector<CeDraw>& draws);
std::string records_csv(const std::vector<RegretRecord>& records);
std::string summary_csv(const std::vector<ConvergenceSummary>& summaries);

}  // namespace road::io
