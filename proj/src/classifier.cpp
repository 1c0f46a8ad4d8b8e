#include "enrich/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "enrich/error.hpp"
#include "enrich/io.hpp"
#include "enrich/kernels.hpp"

namespace enrich {

using nlohmann::json;

void Hyperparams::check() const {
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
  if (max_iters < 0) throw ValidationError("max_iters must be >= 0");
}

json to_json(const Hyperparams& h) {
  return {{"lambda", h.lambda}, {"max_iters", h.max_iters}, {"tol", h.tol}, {"seed", h.seed}};
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams h;
  h.lambda = j.value("lambda", h.lambda);
  h.max_iters = j.value("max_iters", h.max_iters);
  h.tol = j.value("tol", h.tol);
  h.seed = j.value("seed", h.seed);
  h.check();
  return h;
}

SoftmaxParams::SoftmaxParams(std::size_t n_classes, std::size_t dim)
    : n_classes_(n_classes), dim_(dim), theta_(n_classes * dim + n_classes, 0.0) {}

namespace {

void check_shapes(const SoftmaxParams& params, const SparseMatrix& x, std::span<const int> y) {
  if (x.size() == 0) throw ValidationError("loss needs at least one example");
  if (x.size() != y.size()) throw ValidationError("feature rows and labels differ in length");
  if (x.dim != params.dim()) throw ValidationError("feature dimension does not match the weights");
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= params.n_classes()) {
      throw ValidationError("label index out of range");
    }
  }
}

// Fills `scores` with W x + b and returns log-sum-exp of the scores.
double scores_and_lse(const SoftmaxParams& params, const SparseVector& x, std::vector<double>& scores) {
  const auto& k = kernels::active();
  const std::size_t c_n = params.n_classes();
  scores.resize(c_n);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < c_n; ++c) {
    scores[c] = params.bias()[c] + k.sparse_dot(x.indices.data(), x.values.data(), x.nnz(), params.row(c).data());
    mx = std::max(mx, scores[c]);
  }
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - mx);
  return mx + std::log(sum);
}

}  // namespace

LossGradient loss_and_gradient(const SoftmaxParams& params, const SparseMatrix& x, std::span<const int> y,
                               double lambda) {
  check_shapes(params, x, y);
  const std::size_t c_n = params.n_classes();
  const std::size_t dim = params.dim();
  const double inv_n = 1.0 / static_cast<double>(x.size());

  LossGradient out;
  out.grad_w.assign(c_n * dim, 0.0);
  out.grad_b.assign(c_n, 0.0);
  std::vector<double> scores;
  double nll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const SparseVector& row = x.rows[i];
    const double lse = scores_and_lse(params, row, scores);
    nll += lse - scores[static_cast<std::size_t>(y[i])];
    for (std::size_t c = 0; c < c_n; ++c) {
      const double p = std::exp(scores[c] - lse);
      const double coef = (p - (static_cast<int>(c) == y[i] ? 1.0 : 0.0)) * inv_n;
      out.grad_b[c] += coef;
      double* g = out.grad_w.data() + c * dim;
      for (std::size_t k = 0; k < row.nnz(); ++k) g[row.indices[k]] += coef * row.values[k];
    }
  }
  out.loss = nll * inv_n + 0.5 * lambda * kernels::squared_norm(params.weights());
  if (lambda != 0.0) kernels::axpy(lambda, params.weights(), out.grad_w);
  return out;
}

double loss_value(const SoftmaxParams& params, const SparseMatrix& x, std::span<const int> y, double lambda) {
  check_shapes(params, x, y);
  std::vector<double> scores;
  double nll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lse = scores_and_lse(params, x.rows[i], scores);
    nll += lse - scores[static_cast<std::size_t>(y[i])];
  }
  return nll / static_cast<double>(x.size()) + 0.5 * lambda * kernels::squared_norm(params.weights());
}

std::vector<double> softmax_scores(const SoftmaxParams& params, const SparseVector& x) {
  std::vector<double> scores;
  const double lse = scores_and_lse(params, x, scores);
  double sum = 0.0;
  for (auto& s : scores) {
    s = std::exp(s - lse);
    sum += s;
  }
  for (auto& s : scores) s /= sum;
  return scores;
}

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-20;
constexpr double kMaxStep = 1e10;

std::vector<double> flatten(const LossGradient& lg) {
  std::vector<double> g = lg.grad_w;
  g.insert(g.end(), lg.grad_b.begin(), lg.grad_b.end());
  return g;
}

}  // namespace

SoftmaxFit fit_softmax(const SparseMatrix& x, std::span<const int> y, std::size_t n_classes, const Hyperparams& hyper) {
  hyper.check();
  if (n_classes == 0) throw ValidationError("training needs at least one class");
  SoftmaxFit fit{SoftmaxParams(n_classes, x.dim), {}};
  fit.info.n_train = x.size();
  if (n_classes == 1) {
    if (x.size() > 0) fit.info.final_loss = loss_value(fit.params, x, y, hyper.lambda);
    fit.info.converged = true;
    fit.info.loss_history.push_back(fit.info.final_loss);
    return fit;
  }

  const auto& k = kernels::active();
  LossGradient lg = loss_and_gradient(fit.params, x, y, hyper.lambda);
  std::vector<double> grad = flatten(lg);
  double loss = lg.loss;
  fit.info.loss_history.push_back(loss);

  const std::size_t n = grad.size();
  SoftmaxParams trial = fit.params;
  std::vector<double> step_diff(n), grad_diff(n);
  double step = 1.0;

  for (int iter = 0; iter < hyper.max_iters; ++iter) {
    const double gnorm2 = k.squared_norm(grad.data(), n);
    if (!(gnorm2 > 1e-300)) {
      fit.info.converged = true;
      break;
    }
    double t = step;
    double trial_loss = 0.0;
    bool accepted = false;
    while (t >= kMinStep) {
      k.scaled_sum(fit.params.flat().data(), -t, grad.data(), trial.flat().data(), n);
      trial_loss = loss_value(trial, x, y, hyper.lambda);
      if (trial_loss <= loss - kArmijo * t * gnorm2) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No representable decrease along -grad: at the optimum to machine precision.
      fit.info.converged = true;
      break;
    }
    LossGradient next = loss_and_gradient(trial, x, y, hyper.lambda);
    std::vector<double> next_grad = flatten(next);

    k.scaled_sum(trial.flat().data(), -1.0, fit.params.flat().data(), step_diff.data(), n);
    k.scaled_sum(next_grad.data(), -1.0, grad.data(), grad_diff.data(), n);
    const double sy = k.dot(step_diff.data(), grad_diff.data(), n);
    const double ss = k.squared_norm(step_diff.data(), n);
    step = sy > 0.0 ? std::clamp(ss / sy, kMinStep, kMaxStep) : std::min(2.0 * t, kMaxStep);

    const double previous = loss;
    std::swap(fit.params, trial);
    grad = std::move(next_grad);
    loss = next.loss;
    fit.info.loss_history.push_back(loss);
    fit.info.iterations = iter + 1;
    if ((previous - loss) <= hyper.tol * std::max(std::abs(previous), 1e-12)) {
      fit.info.converged = true;
      break;
    }
  }
  fit.info.final_loss = loss;
  return fit;
}

std::vector<double> TrainedModel::predict_proba(const SparseVector& x) const {
  if (x.dim != vocab.size() || x.dim != params.dim()) {
    throw ValidationError("feature vector has dimension " + std::to_string(x.dim) + ", model expects " +
                          std::to_string(params.dim()));
  }
  return softmax_scores(params, x);
}

Prediction TrainedModel::predict(const SparseVector& x) const {
  auto probs = predict_proba(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return {classes.at(best), probs[best]};
}

Prediction TrainedModel::predict_text(std::string_view text) const { return predict(vectorize(text, vocab)); }

std::vector<std::string> present_classes(std::span<const std::string> labels, std::span<const std::string> class_order) {
  std::set<std::string> seen(labels.begin(), labels.end());
  std::vector<std::string> out;
  for (const auto& c : class_order) {
    if (seen.erase(c) > 0) out.push_back(c);
  }
  out.insert(out.end(), seen.begin(), seen.end());
  return out;
}

TrainedModel train(std::string attribute, Vocabulary vocab, const SparseMatrix& x, std::span<const std::string> labels,
                   std::span<const std::string> class_order, const Hyperparams& hyper) {
  if (labels.empty()) throw ValidationError("training needs at least one example");
  if (x.size() != labels.size()) throw ValidationError("feature rows and labels differ in length");
  if (x.dim != vocab.size()) throw ValidationError("feature dimension does not match the vocabulary");
  TrainedModel m;
  m.attribute = std::move(attribute);
  m.classes = present_classes(labels, class_order);
  std::vector<int> y;
  y.reserve(labels.size());
  for (const auto& l : labels) {
    y.push_back(static_cast<int>(std::find(m.classes.begin(), m.classes.end(), l) - m.classes.begin()));
  }
  SoftmaxFit fit = fit_softmax(x, y, m.classes.size(), hyper);
  m.params = std::move(fit.params);
  m.info = std::move(fit.info);
  m.vocab = std::move(vocab);
  m.hyper = hyper;
  return m;
}

json model_to_json(const TrainedModel& model) {
  json vocab = json::object();
  for (std::size_t i = 0; i < model.vocab.size(); ++i) vocab[model.vocab.terms()[i]] = i;
  json weights = json::array();
  for (std::size_t c = 0; c < model.params.n_classes(); ++c) {
    auto row = model.params.row(c);
    weights.push_back(std::vector<double>(row.begin(), row.end()));
  }
  auto bias = model.params.bias();
  return {{"format_version", kModelFormatVersion},
          {"attribute", model.attribute},
          {"classes", model.classes},
          {"vocab", vocab},
          {"doc_freq", model.vocab.doc_freq()},
          {"feature_config", to_json(model.vocab.config())},
          {"weights", weights},
          {"bias", std::vector<double>(bias.begin(), bias.end())},
          {"hyperparams", to_json(model.hyper)},
          {"metadata",
           {{"n_train", model.info.n_train},
            {"final_loss", model.info.final_loss},
            {"iterations", model.info.iterations},
            {"converged", model.info.converged}}}};
}

TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw ParseError("unsupported model format_version " + j.at("format_version").dump());
    }
    TrainedModel m;
    m.attribute = j.at("attribute").get<std::string>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    const json& vocab = j.at("vocab");
    std::vector<std::string> terms(vocab.size());
    std::vector<bool> filled(vocab.size(), false);
    for (const auto& [term, idx] : vocab.items()) {
      auto i = idx.get<std::size_t>();
      if (i >= terms.size() || filled[i]) throw ParseError("vocabulary indices are not a bijection onto [0, |V|)");
      terms[i] = term;
      filled[i] = true;
    }
    std::vector<std::uint32_t> df = j.contains("doc_freq") ? j["doc_freq"].get<std::vector<std::uint32_t>>()
                                                           : std::vector<std::uint32_t>(terms.size(), 0);
    m.vocab = Vocabulary(std::move(terms), std::move(df), feature_config_from_json(j.at("feature_config")));
    m.hyper = hyperparams_from_json(j.at("hyperparams"));
    const json& w = j.at("weights");
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (w.size() != m.classes.size() || bias.size() != m.classes.size()) {
      throw ParseError("weights/bias rows do not match the class list");
    }
    m.params = SoftmaxParams(m.classes.size(), m.vocab.size());
    for (std::size_t c = 0; c < m.classes.size(); ++c) {
      auto row = w[c].get<std::vector<double>>();
      if (row.size() != m.vocab.size()) throw ParseError("weight row length does not match the vocabulary size");
      std::copy(row.begin(), row.end(), m.params.row(c).begin());
      m.params.bias()[c] = bias[c];
    }
    const json& meta = j.at("metadata");
    m.info.n_train = meta.value("n_train", std::size_t{0});
    m.info.final_loss = meta.value("final_loss", 0.0);
    m.info.iterations = meta.value("iterations", 0);
    m.info.converged = meta.value("converged", false);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, model_to_json(model).dump() + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": corrupted model file: " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace enrich
