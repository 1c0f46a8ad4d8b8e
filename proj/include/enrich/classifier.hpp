#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "enrich/features.hpp"

namespace enrich {

struct Hyperparams {
  double lambda = 0.1;  // L2 strength on the weights; the bias is unregularized
  int max_iters = 500;
  double tol = 1e-6;  // relative loss change that counts as converged
  std::uint64_t seed = 0;

  void check() const;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

nlohmann::json to_json(const Hyperparams& h);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

// Parameters of a multinomial logistic regression, flattened as
// [W (classes x dim, row-major) | b (classes)] so the optimizer can treat
// them as one vector.
class SoftmaxParams {
 public:
  SoftmaxParams() = default;
  SoftmaxParams(std::size_t n_classes, std::size_t dim);

  std::size_t n_classes() const { return n_classes_; }
  std::size_t dim() const { return dim_; }

  std::span<double> flat() { return theta_; }
  std::span<const double> flat() const { return theta_; }
  std::span<double> weights() { return std::span(theta_).first(n_classes_ * dim_); }
  std::span<const double> weights() const { return std::span(theta_).first(n_classes_ * dim_); }
  std::span<double> row(std::size_t c) { return weights().subspan(c * dim_, dim_); }
  std::span<const double> row(std::size_t c) const { return weights().subspan(c * dim_, dim_); }
  std::span<double> bias() { return std::span(theta_).subspan(n_classes_ * dim_); }
  std::span<const double> bias() const { return std::span(theta_).subspan(n_classes_ * dim_); }

  friend bool operator==(const SoftmaxParams&, const SoftmaxParams&) = default;

 private:
  std::size_t n_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> theta_;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_w;  // classes x dim, row-major
  std::vector<double> grad_b;
};

// Mean negative log-likelihood plus (lambda/2)*||W||_F^2 and its exact
// gradient. Labels are class indices in [0, n_classes).
LossGradient loss_and_gradient(const SoftmaxParams& params, const SparseMatrix& x, std::span<const int> y,
                               double lambda);

double loss_value(const SoftmaxParams& params, const SparseMatrix& x, std::span<const int> y, double lambda);

// softmax(W x + b), computed with max subtraction.
std::vector<double> softmax_scores(const SoftmaxParams& params, const SparseVector& x);

struct TrainingInfo {
  std::size_t n_train = 0;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  // loss after every accepted step, starting at the initial loss
};

struct SoftmaxFit {
  SoftmaxParams params;
  TrainingInfo info;
};

// Full-batch gradient descent from zero with Armijo backtracking; the trial
// step is the Barzilai-Borwein estimate from the previous step. A single
// class returns the zero model untouched.
SoftmaxFit fit_softmax(const SparseMatrix& x, std::span<const int> y, std::size_t n_classes, const Hyperparams& hyper);

struct Prediction {
  std::string value;
  double prob = 0.0;
};

struct TrainedModel {
  std::string attribute;
  std::vector<std::string> classes;
  SoftmaxParams params;
  Vocabulary vocab;
  Hyperparams hyper;
  TrainingInfo info;

  // Throws ValidationError when x.dim differs from the vocabulary size.
  std::vector<double> predict_proba(const SparseVector& x) const;
  // argmax of predict_proba; exact ties go to the earlier class.
  Prediction predict(const SparseVector& x) const;
  Prediction predict_text(std::string_view text) const;
};

// Classes present in `labels`, in `class_order` order; labels missing from
// `class_order` are appended in sorted order.
std::vector<std::string> present_classes(std::span<const std::string> labels,
                                         std::span<const std::string> class_order);

TrainedModel train(std::string attribute, Vocabulary vocab, const SparseMatrix& x, std::span<const std::string> labels,
                   std::span<const std::string> class_order, const Hyperparams& hyper);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace enrich
