#pragma once

// File formats: datasets and observed-entry triplets as self-describing CSV,
// models and solver configuration as versioned JSON. All numeric text is
// written with 17 significant digits, so every round trip restores the exact
// double values.

#include <stdexcept>
#include <string>
#include <vector>

#include "assist/completion.hpp"
#include "assist/types.hpp"

namespace assist {

// Malformed input files: unreadable paths, bad headers, ragged rows,
// dimension mismatches, unsupported versions, corrupted model blocks.
// Messages name the file and, for row-level problems, the line number.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dataset CSV. Header line:
//   #assist-dataset v1 d1=<d1> d2=<d2> p=<p> n=<n>
// then one line per sample: d1*d2 row-major predictor entries, p covariates,
// and the raw-scale response. Loading rebuilds the response scale from the
// raw values.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

// Observed-entry CSV. Header line:
//   #assist-triplets v1 d1=<d1> d2=<d2>
// then one `i,j,y` line per observation (0-based indices, raw-scale y).
void save_triplets(const ObservedMatrix& obs, const std::string& path);
ObservedMatrix load_triplets(const std::string& path);

// Full-matrix CSV. Header line `#assist-matrix v1 d1=<d1> d2=<d2>`, then d1
// lines of d2 comma-separated values.
void save_matrix(const DenseMatrix& m, const std::string& path);
DenseMatrix load_matrix(const std::string& path);

// Plain value-list CSV (predictions, truth samples). Header line
// `#assist-values v1 n=<n>`, then one value per line.
void save_values(const std::vector<double>& values, const std::string& path);
std::vector<double> load_values(const std::string& path);

// Model JSON with a format/version envelope and a `kind` tag distinguishing
// the two model families. Numbers survive the round trip exactly, so a
// reloaded model predicts bit-for-bit identically.
enum class ModelKind { sign_series, completion };
void save_model(const SignSeriesModel& model, const std::string& path);
void save_model(const CompletionModel& model, const std::string& path);
ModelKind peek_model_kind(const std::string& path);
SignSeriesModel load_sign_model(const std::string& path);
CompletionModel load_completion_model(const std::string& path);

// Flat JSON object whose keys mirror the Hyperparams field names exactly
// (loss by its name, e.g. "hinge"). Keys absent from the file keep their
// default values; unknown keys are rejected.
void save_config(const Hyperparams& hp, const std::string& path);
Hyperparams load_config(const std::string& path);

}  // namespace assist
