#pragma once

// L2-regularized squared-hinge linear SVM trained by dual coordinate descent.
//
// For labels y_i in {-1, +1} and augmented inputs xb_i = (x_i, 1) the primal is
//
//   min_w  1/2 |w|^2 + C * sum_i max(0, 1 - y_i w.xb_i)^2
//
// (the last component of w is the bias, regularized like any other weight).
// Coordinate descent runs on the dual
//
//   min_{a >= 0}  1/2 a^T (Q + D) a - e^T a,   Q_ij = y_i y_j xb_i.xb_j,  D = I / (2C)
//
// keeping w = sum_i a_i y_i xb_i in sync. Each coordinate step minimizes the
// dual exactly along that coordinate, so the dual objective never increases.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "claimrev/error.hpp"
#include "claimrev/io.hpp"
#include "claimrev/matrix.hpp"

namespace claimrev::svm {

inline const std::vector<double> kDefaultGrid{0.001, 0.01, 0.1, 1.0, 10.0};

struct SvmConfig {
  double C = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-4;  // on relative dual-objective decrease per epoch
  std::uint64_t seed = 1;

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("SVM C must be positive");
    if (max_iterations < 1) throw ValidationError("SVM max_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw ValidationError("SVM tolerance must be non-negative");
  }

  bool operator==(const SvmConfig&) const = default;
};

/// Result of one binary problem.
struct BinarySolution {
  std::vector<double> weights;
  double bias = 0.0;
  int epochs = 0;
  bool converged = false;
  // Dual objective 1/2 a^T (Q + D) a - e^T a after each epoch (index 0 is the
  // starting point a = 0).
  std::vector<double> dual_objective;
};

namespace detail {

inline double dot(std::span<const double> w, std::span<const float> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * static_cast<double>(x[j]);
  return s;
}

inline void check_finite(const FeatureMatrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (float v : x.row(i)) {
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value in row " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// Primal objective 1/2 (|w|^2 + b^2) + C * sum squared hinge.
inline double primal_objective(const FeatureMatrix& x, std::span<const std::int8_t> y, std::span<const double> w,
                               double b, double C) {
  double reg = b * b;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double margin = 1.0 - y[i] * (detail::dot(w, x.row(i)) + b);
    if (margin > 0.0) loss += margin * margin;
  }
  return 0.5 * reg + C * loss;
}

/// Solves one binary problem with labels in {-1, +1}. Sample order is
/// reshuffled every epoch from a generator seeded with cfg.seed.
inline BinarySolution solve_binary(const FeatureMatrix& x, std::span<const std::int8_t> y, const SvmConfig& cfg) {
  cfg.validate();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (y.size() != n) throw ValidationError("label count does not match feature rows");

  const double diag = 0.5 / cfg.C;
  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 1.0 + diag;  // bias feature contributes 1
    for (float v : x.row(i)) s += static_cast<double>(v) * v;
    qd[i] = s;
  }

  BinarySolution sol;
  sol.weights.assign(d, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);

  auto dual = [&]() {
    double reg = sol.bias * sol.bias;
    for (double v : sol.weights) reg += v * v;
    double a2 = 0.0, a1 = 0.0;
    for (double a : alpha) {
      a2 += a * a;
      a1 += a;
    }
    return 0.5 * reg + diag * 0.5 * a2 - a1;
  };

  double previous = 0.0;
  sol.dual_objective.push_back(previous);
  for (int epoch = 0; epoch < cfg.max_iterations; ++epoch) {
    for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[static_cast<std::size_t>(rng() % k)]);
    for (std::size_t i : order) {
      const auto xi = x.row(i);
      const double yi = y[i];
      const double g = yi * (detail::dot(sol.weights, xi) + sol.bias) - 1.0 + alpha[i] * diag;
      const double pg = alpha[i] == 0.0 ? std::min(g, 0.0) : g;
      if (std::abs(pg) <= 1e-12) continue;
      const double old = alpha[i];
      alpha[i] = std::max(old - g / qd[i], 0.0);
      const double step = (alpha[i] - old) * yi;
      for (std::size_t j = 0; j < d; ++j) sol.weights[j] += step * xi[j];
      sol.bias += step;
    }
    const double current = dual();
    sol.dual_objective.push_back(current);
    sol.epochs = epoch + 1;
    if (previous - current <= cfg.tolerance * std::abs(current)) {
      sol.converged = true;
      break;
    }
    previous = current;
  }
  return sol;
}

struct SvmModel {
  // Binary: classes = {negative, positive} with a single weight vector whose
  // positive score means classes[1]. Otherwise one vector per class.
  std::vector<std::string> classes;
  std::size_t dim = 0;
  std::vector<std::vector<float>> weights;
  std::vector<float> biases;
  SvmConfig config;
  std::vector<int> epochs;
  std::vector<bool> converged;

  bool is_binary() const noexcept { return weights.size() == 1; }

  bool operator==(const SvmModel&) const = default;
};

namespace detail {

inline std::vector<std::string> resolve_classes(std::span<const std::string> labels, std::vector<std::string> classes) {
  std::set<std::string> present(labels.begin(), labels.end());
  if (classes.empty()) {
    classes.assign(present.begin(), present.end());
  } else {
    std::set<std::string> declared(classes.begin(), classes.end());
    if (declared.size() != classes.size()) throw ValidationError("duplicate class names");
    for (const auto& l : present) {
      if (!declared.contains(l)) throw ValidationError("label '" + l + "' is not a declared class");
    }
    for (const auto& c : classes) {
      if (!present.contains(c)) throw ValidationError("class '" + c + "' is absent from the training data");
    }
  }
  if (classes.size() < 2) throw ValidationError("training needs at least two distinct labels");
  return classes;
}

inline void store(SvmModel& model, const BinarySolution& s) {
  model.weights.emplace_back(s.weights.begin(), s.weights.end());
  model.biases.push_back(static_cast<float>(s.bias));
  model.epochs.push_back(s.epochs);
  model.converged.push_back(s.converged);
}

inline void check_inputs(const FeatureMatrix& x, std::span<const std::string> labels) {
  if (labels.size() != x.rows()) throw ValidationError("label count does not match feature rows");
  check_finite(x);
}

}  // namespace detail

/// One weight vector per class, each trained class-vs-rest with the same
/// seed. Classes train on up to `jobs` threads; the result is independent
/// of `jobs`.
inline SvmModel train_one_vs_rest(const FeatureMatrix& x, std::span<const std::string> labels, const SvmConfig& cfg,
                                  std::vector<std::string> classes = {}, unsigned jobs = 1) {
  detail::check_inputs(x, labels);
  SvmModel model;
  model.classes = detail::resolve_classes(labels, std::move(classes));
  model.dim = x.cols();
  model.config = cfg;
  const std::size_t k = model.classes.size();
  std::vector<BinarySolution> solutions(k);
  std::vector<std::exception_ptr> errors(k);
  auto solve = [&](std::size_t c) {
    try {
      std::vector<std::int8_t> y(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == model.classes[c] ? 1 : -1;
      solutions[c] = solve_binary(x, y, cfg);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  jobs = std::max(1u, jobs);
  for (std::size_t first = 0; first < k; first += jobs) {
    std::vector<std::jthread> pool;
    for (std::size_t c = first; c < std::min(k, first + jobs); ++c) {
      if (jobs == 1) {
        solve(c);
      } else {
        pool.emplace_back(solve, c);
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& s : solutions) detail::store(model, s);
  return model;
}

/// Binary model for two classes, one-vs-rest for more.
inline SvmModel train(const FeatureMatrix& x, std::span<const std::string> labels, const SvmConfig& cfg,
                      std::vector<std::string> classes = {}, unsigned jobs = 1) {
  detail::check_inputs(x, labels);
  auto resolved = detail::resolve_classes(labels, std::move(classes));
  if (resolved.size() > 2) return train_one_vs_rest(x, labels, cfg, std::move(resolved), jobs);
  SvmModel model;
  model.classes = std::move(resolved);
  model.dim = x.cols();
  model.config = cfg;
  std::vector<std::int8_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == model.classes[1] ? 1 : -1;
  detail::store(model, solve_binary(x, y, cfg));
  return model;
}

/// Per-class scores, one row per input. A binary model with score s reports
/// {-s, s}, so argmax agrees with the sign rule.
inline std::vector<std::vector<double>> decision_values(const SvmModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.dim) {
    throw ValidationError("feature dimension " + std::to_string(x.cols()) + " does not match model dimension " +
                          std::to_string(model.dim));
  }
  std::vector<std::vector<double>> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    std::vector<double> scores;
    for (std::size_t c = 0; c < model.weights.size(); ++c) {
      double s = model.biases[c];
      for (std::size_t j = 0; j < xi.size(); ++j) s += static_cast<double>(model.weights[c][j]) * xi[j];
      scores.push_back(s);
    }
    if (model.is_binary()) scores = {-scores[0], scores[0]};
    out[i] = std::move(scores);
  }
  return out;
}

/// Index into model.classes of each prediction: sign rule for binary models
/// (score 0 -> class 0), argmax with ties to the lowest index otherwise.
inline std::vector<std::size_t> predict_indices(const SvmModel& model, const FeatureMatrix& x) {
  const auto scores = decision_values(model, x);
  std::vector<std::size_t> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores[i].size(); ++c) {
      if (scores[i][c] > scores[i][best]) best = c;
    }
    out[i] = best;
  }
  return out;
}

inline std::vector<std::string> predict(const SvmModel& model, const FeatureMatrix& x) {
  std::vector<std::string> out;
  for (std::size_t idx : predict_indices(model, x)) out.push_back(model.classes[idx]);
  return out;
}

inline double accuracy(std::span<const std::string> predicted, std::span<const std::string> gold) {
  if (predicted.size() != gold.size() || gold.empty()) throw ValidationError("accuracy needs equal, non-empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predicted[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

struct GridResult {
  double best_C = 0.0;
  SvmModel model;
  std::vector<std::pair<double, double>> dev_accuracy;  // (C, accuracy), ascending C
};

/// Trains one model per C and keeps the one with the best dev accuracy;
/// ties go to the smaller C.
inline GridResult grid_select(const FeatureMatrix& train_x, std::span<const std::string> train_y,
                              const FeatureMatrix& dev_x, std::span<const std::string> dev_y,
                              std::vector<double> grid, const SvmConfig& base, std::vector<std::string> classes = {},
                              unsigned jobs = 1) {
  if (dev_x.rows() == 0) throw ValidationError("grid selection needs a non-empty dev set");
  if (grid.empty()) throw ValidationError("empty regularization grid");
  std::sort(grid.begin(), grid.end());
  GridResult result;
  double best = -1.0;
  for (double C : grid) {
    SvmConfig cfg = base;
    cfg.C = C;
    SvmModel model = train(train_x, train_y, cfg, classes, jobs);
    const double acc = accuracy(predict(model, dev_x), dev_y);
    result.dev_accuracy.emplace_back(C, acc);
    if (acc > best) {
      best = acc;
      result.best_C = C;
      result.model = std::move(model);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json to_json(const SvmConfig& cfg) {
  nlohmann::ordered_json j;
  j["C"] = cfg.C;
  j["max_iterations"] = cfg.max_iterations;
  j["tolerance"] = cfg.tolerance;
  j["loss"] = "squared_hinge";
  j["seed"] = cfg.seed;
  return j;
}

inline SvmConfig config_from_json(const nlohmann::json& j) {
  SvmConfig cfg;
  cfg.C = j.at("C").get<double>();
  cfg.max_iterations = j.at("max_iterations").get<int>();
  cfg.tolerance = j.at("tolerance").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("loss") && j.at("loss") != "squared_hinge") throw ValidationError("unsupported loss");
  return cfg;
}

namespace detail {

inline std::string encode_floats(std::span<const float> values) {
  std::string bytes;
  for (float v : values) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  return io::base64_encode({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
}

inline std::vector<float> decode_floats(const std::string& text, std::size_t expected) {
  const auto bytes = io::base64_decode(text);
  if (bytes.size() != expected * 4) throw ValidationError("weight block has the wrong length");
  std::vector<float> out(expected);
  for (std::size_t k = 0; k < expected; ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * k + b]) << (8 * b);
    out[k] = std::bit_cast<float>(bits);
  }
  return out;
}

}  // namespace detail

/// JSON model file: header fields plus base64 little-endian f32 blocks.
inline std::string serialize_model(const SvmModel& model, const std::string& config_hash = {}) {
  nlohmann::ordered_json j;
  j["format"] = "claimrev-svm-model";
  j["version"] = kModelFormatVersion;
  j["tool_version"] = io::kToolVersion;
  j["config_hash"] = config_hash;
  j["classes"] = model.classes;
  j["dim"] = model.dim;
  j["config"] = to_json(model.config);
  j["epochs"] = model.epochs;
  j["converged"] = model.converged;
  j["weights"] = nlohmann::ordered_json::array();
  for (const auto& w : model.weights) j["weights"].push_back(detail::encode_floats(w));
  j["biases"] = detail::encode_floats(model.biases);
  return j.dump(2) + "\n";
}

inline SvmModel parse_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("model file: malformed JSON: ") + e.what(), FormatError::Unit::byte, e.byte);
  }
  try {
    if (j.at("format") != "claimrev-svm-model") throw ValidationError("not a claimrev SVM model file");
    if (j.at("version").get<int>() != kModelFormatVersion) throw ValidationError("unsupported model file version");
    SvmModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.dim = j.at("dim").get<std::size_t>();
    m.config = config_from_json(j.at("config"));
    m.epochs = j.at("epochs").get<std::vector<int>>();
    m.converged = j.at("converged").get<std::vector<bool>>();
    for (const auto& w : j.at("weights")) m.weights.push_back(detail::decode_floats(w.get<std::string>(), m.dim));
    m.biases = detail::decode_floats(j.at("biases").get<std::string>(), m.weights.size());
    const bool shape_ok = m.classes.size() >= 2 &&
                          (m.weights.size() == m.classes.size() || (m.classes.size() == 2 && m.weights.size() == 1));
    if (!shape_ok) throw ValidationError("model file: weight vectors do not match classes");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

inline void write_model(const SvmModel& model, const std::filesystem::path& path, const std::string& config_hash = {}) {
  io::write_file_atomic(path, serialize_model(model, config_hash));
}

inline SvmModel read_model(const std::filesystem::path& path) { return parse_model(io::read_file(path)); }

}  // namespace claimrev::svm
