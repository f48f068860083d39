#include "assist/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "assist/loss.hpp"

namespace assist {
namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ParseError(path + ": " + message);
}

[[noreturn]] void fail_at(const std::string& path, int line,
                          const std::string& message) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + message);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open file for writing");
  out << content;
  out.flush();
  if (!out) fail(path, "write failed");
}

// All lines of the file with their 1-based numbers, blank lines dropped.
std::vector<std::pair<int, std::string>> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') blank = false;
    }
    if (!blank) lines.push_back({number, line});
  }
  return lines;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    std::size_t end = line.find(sep, begin);
    if (end == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, end - begin));
    begin = end + 1;
  }
}

double parse_double(const std::string& text, const std::string& path,
                    int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    fail_at(path, line, "not a number: '" + text + "'");
  }
  if (!std::isfinite(value)) {
    fail_at(path, line, "value is not finite: '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& text, const std::string& path, int line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  long value = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0' || value < -1000000000L ||
      value > 1000000000L) {
    fail_at(path, line, "not an integer: '" + text + "'");
  }
  return static_cast<int>(value);
}

// Parses a header of the form `#<tag> v1 key1=<int> key2=<int> ...` with the
// keys required in order, returning their values.
std::vector<int> parse_header(const std::string& path,
                              const std::vector<std::pair<int, std::string>>&
                                  lines,
                              const std::string& tag,
                              const std::vector<std::string>& keys) {
  if (lines.empty()) {
    fail(path, "empty file: expected a " + tag + " header");
  }
  auto [line_no, text] = lines.front();
  std::vector<std::string> tokens = split(text, ' ');
  std::vector<std::string> kept;
  for (std::string& t : tokens) {
    if (!t.empty()) kept.push_back(std::move(t));
  }
  if (kept.empty() || kept[0] != "#" + tag) {
    fail_at(path, line_no, "malformed header: expected '#" + tag + " v1 ...'");
  }
  if (kept.size() < 2 || kept[1] != "v1") {
    fail_at(path, line_no,
            "unsupported format version in header (expected v1)");
  }
  if (kept.size() != keys.size() + 2) {
    fail_at(path, line_no, "malformed header: expected " +
                               std::to_string(keys.size()) +
                               " key=value entries");
  }
  std::vector<int> values;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const std::string& token = kept[k + 2];
    const std::string prefix = keys[k] + "=";
    if (token.rfind(prefix, 0) != 0) {
      fail_at(path, line_no,
              "malformed header: expected '" + keys[k] + "=<value>'");
    }
    values.push_back(parse_int(token.substr(prefix.size()), path, line_no));
  }
  return values;
}

json matrix_json(const DenseMatrix& m) {
  json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["values"] = m.values;
  return j;
}

const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) {
    fail(path, std::string("missing field '") + key + "'");
  }
  return *it;
}

DenseMatrix matrix_from_json(const json& j, const std::string& path,
                             const char* what) {
  DenseMatrix m(require(j, "rows", path).get<int>(),
                require(j, "cols", path).get<int>());
  std::vector<double> values =
      require(j, "values", path).get<std::vector<double>>();
  if (m.rows < 0 || m.cols < 0 ||
      values.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    fail(path, std::string("corrupted ") + what +
                   " block: value count does not match rows*cols");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      fail(path, std::string("corrupted ") + what + " block: non-finite value");
    }
  }
  m.values = std::move(values);
  return m;
}

json model_envelope(const char* kind) {
  json j;
  j["format"] = "assist-model";
  j["version"] = 1;
  j["kind"] = kind;
  return j;
}

json load_model_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid model file: ") + e.what());
  }
  if (!j.is_object() ||
      require(j, "format", path).get<std::string>() != "assist-model") {
    fail(path, "not an assist model file");
  }
  int version = require(j, "version", path).get<int>();
  if (version != 1) {
    fail(path, "unsupported model version " + std::to_string(version) +
                   " (expected 1)");
  }
  return j;
}

ResponseScale scale_from_json(const json& j, const std::string& path) {
  const json& s = require(j, "scale", path);
  ResponseScale scale;
  scale.shift = require(s, "shift", path).get<double>();
  scale.span = require(s, "span", path).get<double>();
  if (!std::isfinite(scale.shift) || !std::isfinite(scale.span) ||
      scale.span <= 0.0) {
    fail(path, "corrupted scale block");
  }
  return scale;
}

}  // namespace

void save_dataset(const Dataset& data, const std::string& path) {
  data.validate();
  std::ostringstream out;
  out << "#assist-dataset v1 d1=" << data.d1 << " d2=" << data.d2
      << " p=" << data.p << " n=" << data.n() << "\n";
  for (const Sample& s : data.samples) {
    for (double v : s.predictor.values) out << fmt17(v) << ",";
    for (double c : s.covariates) out << fmt17(c) << ",";
    out << fmt17(data.scale.to_raw(s.response)) << "\n";
  }
  write_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<int> header =
      parse_header(path, lines, "assist-dataset", {"d1", "d2", "p", "n"});
  const int d1 = header[0], d2 = header[1], p = header[2], n = header[3];
  if (d1 < 1 || d2 < 1 || p < 0) {
    fail(path, "malformed header: need d1 >= 1, d2 >= 1, p >= 0");
  }
  if (n < 1 || lines.size() == 1) {
    fail(path, "empty dataset: no sample rows");
  }
  const int expected = d1 * d2 + p + 1;
  std::vector<DenseMatrix> predictors;
  std::vector<std::vector<double>> covariates;
  std::vector<double> responses;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    auto [line_no, text] = lines[row];
    std::vector<std::string> fields = split(text, ',');
    if (static_cast<int>(fields.size()) != expected) {
      fail_at(path, line_no,
              "expected " + std::to_string(expected) + " fields, found " +
                  std::to_string(fields.size()));
    }
    DenseMatrix x(d1, d2);
    int k = 0;
    for (double& v : x.values) v = parse_double(fields[k++], path, line_no);
    std::vector<double> w(p);
    for (double& c : w) c = parse_double(fields[k++], path, line_no);
    responses.push_back(parse_double(fields[k], path, line_no));
    predictors.push_back(std::move(x));
    covariates.push_back(std::move(w));
  }
  if (static_cast<int>(predictors.size()) != n) {
    fail(path, "dimension mismatch: header declares n=" + std::to_string(n) +
                   " sample rows, found " +
                   std::to_string(predictors.size()));
  }
  if (p == 0) covariates.clear();
  return make_dataset(std::move(predictors), std::move(covariates),
                      responses);
}

void save_triplets(const ObservedMatrix& obs, const std::string& path) {
  obs.validate();
  std::ostringstream out;
  out << "#assist-triplets v1 d1=" << obs.d1 << " d2=" << obs.d2 << "\n";
  for (const ObservedEntry& e : obs.entries) {
    out << e.i << "," << e.j << "," << fmt17(obs.scale.to_raw(e.y)) << "\n";
  }
  write_file(path, out.str());
}

ObservedMatrix load_triplets(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<int> header =
      parse_header(path, lines, "assist-triplets", {"d1", "d2"});
  const int d1 = header[0], d2 = header[1];
  if (d1 < 1 || d2 < 1) {
    fail(path, "malformed header: need d1 >= 1 and d2 >= 1");
  }
  if (lines.size() == 1) {
    fail(path, "empty observation set: no triplet rows");
  }
  std::vector<ObservedEntry> entries;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    auto [line_no, text] = lines[row];
    std::vector<std::string> fields = split(text, ',');
    if (fields.size() != 3) {
      fail_at(path, line_no, "expected 3 fields (i,j,y), found " +
                                 std::to_string(fields.size()));
    }
    ObservedEntry e;
    e.i = parse_int(fields[0], path, line_no);
    e.j = parse_int(fields[1], path, line_no);
    e.y = parse_double(fields[2], path, line_no);
    if (e.i < 0 || e.i >= d1 || e.j < 0 || e.j >= d2) {
      fail_at(path, line_no, "index out of range for a " +
                                 std::to_string(d1) + "x" +
                                 std::to_string(d2) + " matrix");
    }
    entries.push_back(e);
  }
  return make_observed(d1, d2, entries);
}

void save_matrix(const DenseMatrix& m, const std::string& path) {
  if (m.rows < 1 || m.cols < 1) {
    throw std::invalid_argument("save_matrix: matrix must be nonempty");
  }
  std::ostringstream out;
  out << "#assist-matrix v1 d1=" << m.rows << " d2=" << m.cols << "\n";
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      out << fmt17(m(i, j)) << (j + 1 == m.cols ? "\n" : ",");
    }
  }
  write_file(path, out.str());
}

DenseMatrix load_matrix(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<int> header =
      parse_header(path, lines, "assist-matrix", {"d1", "d2"});
  const int d1 = header[0], d2 = header[1];
  if (d1 < 1 || d2 < 1) {
    fail(path, "malformed header: need d1 >= 1 and d2 >= 1");
  }
  if (static_cast<int>(lines.size()) != d1 + 1) {
    fail(path, "dimension mismatch: header declares " + std::to_string(d1) +
                   " rows, found " + std::to_string(lines.size() - 1));
  }
  DenseMatrix m(d1, d2);
  for (int i = 0; i < d1; ++i) {
    auto [line_no, text] = lines[i + 1];
    std::vector<std::string> fields = split(text, ',');
    if (static_cast<int>(fields.size()) != d2) {
      fail_at(path, line_no, "expected " + std::to_string(d2) +
                                 " fields, found " +
                                 std::to_string(fields.size()));
    }
    for (int j = 0; j < d2; ++j) {
      m(i, j) = parse_double(fields[j], path, line_no);
    }
  }
  return m;
}

void save_values(const std::vector<double>& values, const std::string& path) {
  std::ostringstream out;
  out << "#assist-values v1 n=" << values.size() << "\n";
  for (double v : values) out << fmt17(v) << "\n";
  write_file(path, out.str());
}

std::vector<double> load_values(const std::string& path) {
  auto lines = read_lines(path);
  std::vector<int> header = parse_header(path, lines, "assist-values", {"n"});
  const int n = header[0];
  if (n < 0) fail(path, "malformed header: need n >= 0");
  if (static_cast<int>(lines.size()) != n + 1) {
    fail(path, "dimension mismatch: header declares n=" + std::to_string(n) +
                   " values, found " + std::to_string(lines.size() - 1));
  }
  std::vector<double> values;
  values.reserve(n);
  for (int k = 0; k < n; ++k) {
    auto [line_no, text] = lines[k + 1];
    values.push_back(parse_double(text, path, line_no));
  }
  return values;
}

void save_model(const SignSeriesModel& model, const std::string& path) {
  json j = model_envelope("sign_series");
  j["d1"] = model.d1;
  j["d2"] = model.d2;
  j["p"] = model.p;
  j["H"] = model.grid.H;
  j["scale"] = {{"shift", model.scale.shift}, {"span", model.scale.span}};
  json classifiers = json::array();
  for (const TraceFunction& tf : model.classifiers) {
    json c;
    c["level"] = tf.level;
    c["rank_budget"] = tf.rank_budget;
    c["s1"] = tf.s1;
    c["s2"] = tf.s2;
    c["intercept"] = tf.intercept;
    c["covariate_coeffs"] = tf.covariate_coeffs;
    c["u"] = matrix_json(tf.u);
    c["v"] = matrix_json(tf.v);
    classifiers.push_back(std::move(c));
  }
  j["classifiers"] = std::move(classifiers);
  write_file(path, j.dump(2) + "\n");
}

void save_model(const CompletionModel& model, const std::string& path) {
  json j = model_envelope("completion");
  j["d1"] = model.d1;
  j["d2"] = model.d2;
  j["H"] = model.grid.H;
  j["scale"] = {{"shift", model.scale.shift}, {"span", model.scale.span}};
  json levels = json::array();
  for (const CompletionLevel& level : model.sign_factors) {
    json c;
    c["u"] = matrix_json(level.u);
    c["v"] = matrix_json(level.v);
    levels.push_back(std::move(c));
  }
  j["levels"] = std::move(levels);
  write_file(path, j.dump(2) + "\n");
}

ModelKind peek_model_kind(const std::string& path) {
  json j = load_model_json(path);
  std::string kind = require(j, "kind", path).get<std::string>();
  if (kind == "sign_series") return ModelKind::sign_series;
  if (kind == "completion") return ModelKind::completion;
  fail(path, "unknown model kind '" + kind + "'");
}

SignSeriesModel load_sign_model(const std::string& path) {
  json j = load_model_json(path);
  try {
    if (require(j, "kind", path).get<std::string>() != "sign_series") {
      fail(path, "model kind mismatch: expected sign_series");
    }
    SignSeriesModel model;
    model.d1 = require(j, "d1", path).get<int>();
    model.d2 = require(j, "d2", path).get<int>();
    model.p = require(j, "p", path).get<int>();
    int H = require(j, "H", path).get<int>();
    if (model.d1 < 1 || model.d2 < 1 || model.p < 0 || H < 1) {
      fail(path, "corrupted model dimensions");
    }
    model.grid = LevelGrid(H);
    model.scale = scale_from_json(j, path);
    const json& classifiers = require(j, "classifiers", path);
    if (!classifiers.is_array() ||
        classifiers.size() != model.grid.levels.size()) {
      fail(path, "corrupted model: expected " +
                     std::to_string(model.grid.levels.size()) +
                     " classifier records");
    }
    for (std::size_t k = 0; k < classifiers.size(); ++k) {
      const json& c = classifiers[k];
      TraceFunction tf;
      tf.level = require(c, "level", path).get<double>();
      if (tf.level != model.grid.levels[k]) {
        fail(path, "corrupted model: classifier level does not match grid");
      }
      tf.rank_budget = require(c, "rank_budget", path).get<int>();
      tf.s1 = require(c, "s1", path).get<int>();
      tf.s2 = require(c, "s2", path).get<int>();
      tf.intercept = require(c, "intercept", path).get<double>();
      tf.covariate_coeffs =
          require(c, "covariate_coeffs", path).get<std::vector<double>>();
      tf.u = matrix_from_json(require(c, "u", path), path, "factor");
      tf.v = matrix_from_json(require(c, "v", path), path, "factor");
      try {
        validate_trace_function(tf, model.d1, model.d2, model.p);
      } catch (const std::invalid_argument& e) {
        fail(path, std::string("corrupted classifier record: ") + e.what());
      }
      model.classifiers.push_back(std::move(tf));
    }
    return model;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid model file: ") + e.what());
  }
}

CompletionModel load_completion_model(const std::string& path) {
  json j = load_model_json(path);
  try {
    if (require(j, "kind", path).get<std::string>() != "completion") {
      fail(path, "model kind mismatch: expected completion");
    }
    CompletionModel model;
    model.d1 = require(j, "d1", path).get<int>();
    model.d2 = require(j, "d2", path).get<int>();
    int H = require(j, "H", path).get<int>();
    if (model.d1 < 1 || model.d2 < 1 || H < 1) {
      fail(path, "corrupted model dimensions");
    }
    model.grid = LevelGrid(H);
    model.scale = scale_from_json(j, path);
    const json& levels = require(j, "levels", path);
    if (!levels.is_array() || levels.size() != model.grid.levels.size()) {
      fail(path, "corrupted model: expected " +
                     std::to_string(model.grid.levels.size()) +
                     " level records");
    }
    for (const json& c : levels) {
      CompletionLevel level;
      level.u = matrix_from_json(require(c, "u", path), path, "factor");
      level.v = matrix_from_json(require(c, "v", path), path, "factor");
      if (level.u.rows != model.d1 || level.v.rows != model.d2 ||
          level.u.cols != level.v.cols || level.u.cols < 1) {
        fail(path, "corrupted factor block: shape mismatch");
      }
      model.sign_factors.push_back(std::move(level));
    }
    return model;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid model file: ") + e.what());
  }
}

void save_config(const Hyperparams& hp, const std::string& path) {
  json j;
  j["r"] = hp.r;
  j["s1"] = hp.s1;
  j["s2"] = hp.s2;
  j["H"] = hp.H;
  j["lambda"] = hp.lambda;
  j["loss"] = loss_kind_name(hp.loss);
  j["rho0"] = hp.rho0;
  j["rho_growth"] = hp.rho_growth;
  j["max_admm_iters"] = hp.max_admm_iters;
  j["max_inner_iters"] = hp.max_inner_iters;
  j["primal_tol"] = hp.primal_tol;
  j["n_starts"] = hp.n_starts;
  j["seed"] = hp.seed;
  write_file(path, j.dump(2) + "\n");
}

Hyperparams load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path, std::string("invalid config file: ") + e.what());
  }
  if (!j.is_object()) fail(path, "config must be a flat JSON object");
  Hyperparams hp;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "r") {
        hp.r = value.get<int>();
      } else if (key == "s1") {
        hp.s1 = value.get<int>();
      } else if (key == "s2") {
        hp.s2 = value.get<int>();
      } else if (key == "H") {
        hp.H = value.get<int>();
      } else if (key == "lambda") {
        hp.lambda = value.get<double>();
      } else if (key == "loss") {
        try {
          hp.loss = parse_loss_kind(value.get<std::string>());
        } catch (const std::invalid_argument& e) {
          fail(path, e.what());
        }
      } else if (key == "rho0") {
        hp.rho0 = value.get<double>();
      } else if (key == "rho_growth") {
        hp.rho_growth = value.get<double>();
      } else if (key == "max_admm_iters") {
        hp.max_admm_iters = value.get<int>();
      } else if (key == "max_inner_iters") {
        hp.max_inner_iters = value.get<int>();
      } else if (key == "primal_tol") {
        hp.primal_tol = value.get<double>();
      } else if (key == "n_starts") {
        hp.n_starts = value.get<int>();
      } else if (key == "seed") {
        hp.seed = value.get<std::uint64_t>();
      } else {
        fail(path, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(path, std::string("invalid config value: ") + e.what());
  }
  return hp;
}

}  // namespace assist
