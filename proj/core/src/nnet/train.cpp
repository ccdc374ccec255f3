#include "mdhar/nnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace mdhar::nnet {
namespace {

// Decorrelates the shuffling stream from the weight-initialisation stream.
constexpr std::uint64_t kShuffleSalt = 0x9E3779B97F4A7C15ULL;

void sort_by_id(std::vector<std::size_t>& idx, std::span<const LabeledExample> data) {
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (data[a].id != data[b].id) return data[a].id < data[b].id;
    return data[a].label < data[b].label;
  });
}

std::string class_display(std::size_t c, std::size_t classes) {
  if (classes == kNumClasses) return std::string(class_name(class_from_index(c)));
  return "class " + std::to_string(c);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("train: split fraction must lie in (0, 1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("train: invalid Adam hyper-parameters");
  }
  arch.validate();
}

Split split_per_class(std::span<const LabeledExample> dataset, double fraction,
                      std::uint64_t seed, std::size_t classes) {
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].label >= classes) {
      throw std::invalid_argument("split: example '" + dataset[i].id + "' has label " +
                                  std::to_string(dataset[i].label) + " outside " +
                                  std::to_string(classes) + " classes");
    }
    members[dataset[i].label].push_back(i);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (members[c].size() == 1) {
      throw std::invalid_argument("split: class " + class_display(c, classes) +
                                  " has fewer than two examples");
    }
  }
  std::mt19937_64 rng(seed);
  Split split;
  for (std::size_t c = 0; c < classes; ++c) {
    auto& m = members[c];
    if (m.empty()) continue;
    sort_by_id(m, dataset);
    std::shuffle(m.begin(), m.end(), rng);
    const auto n = static_cast<long long>(m.size());
    const long long keep = std::clamp(std::llround(fraction * static_cast<double>(n)), 1LL, n - 1);
    split.train.insert(split.train.end(), m.begin(), m.begin() + keep);
    split.test.insert(split.test.end(), m.begin() + keep, m.end());
  }
  sort_by_id(split.train, dataset);
  sort_by_id(split.test, dataset);
  return split;
}

namespace {

TrainResult fit(std::span<const LabeledExample> dataset, std::vector<std::size_t> order,
                const TrainConfig& cfg) {
  TrainResult result{CnnModel<float>::random(cfg.arch, cfg.seed), {}, {}};
  auto adam = AdamState<float>::for_model(result.model);
  const AdamConfig adam_cfg = cfg.adam();
  std::mt19937_64 rng(cfg.seed ^ kShuffleSalt);
  ParamBuffers<float> grads;
  std::vector<LabeledExample> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> perm = order;
    std::shuffle(perm.begin(), perm.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t off = 0; off < perm.size(); off += cfg.batch_size) {
      const std::size_t end = std::min(off + cfg.batch_size, perm.size());
      batch.clear();
      for (std::size_t i = off; i < end; ++i) batch.push_back(dataset[perm[i]]);
      const float loss = loss_and_grad<float>(result.model, batch, grads);
      epoch_loss += static_cast<double>(loss) * static_cast<double>(batch.size());
      adam_step(adam, result.model.params(), grads, adam_cfg);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(perm.size()));
  }
  return result;
}

}  // namespace

TrainResult train(std::span<const LabeledExample> dataset, const TrainConfig& cfg) {
  cfg.validate();
  Split split = split_per_class(dataset, cfg.split_fraction, cfg.seed, cfg.arch.classes);
  if (split.train.empty()) throw std::invalid_argument("train: empty dataset");
  TrainResult result = fit(dataset, split.train, cfg);
  result.split = std::move(split);
  return result;
}

TrainResult train_on(std::span<const LabeledExample> train_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty dataset");
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  sort_by_id(order, train_set);
  TrainResult result = fit(train_set, order, cfg);
  result.split.train = order;
  return result;
}

EvalReport confusion_report(std::span<const std::size_t> truth,
                            std::span<const std::size_t> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("confusion_report: label/prediction count mismatch");
  }
  EvalReport r;
  r.counts = Matrix<std::size_t>(classes, classes, 0);
  r.confusion = Matrix<double>(classes, classes, 0.0);
  r.predicted.assign(predicted.begin(), predicted.end());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predicted[i] >= classes) {
      throw std::invalid_argument("confusion_report: class index out of range");
    }
    ++r.counts(truth[i], predicted[i]);
    if (truth[i] == predicted[i]) ++correct;
  }
  for (std::size_t i = 0; i < classes; ++i) {
    std::size_t row_total = 0;
    for (std::size_t j = 0; j < classes; ++j) row_total += r.counts(i, j);
    if (row_total == 0) continue;
    for (std::size_t j = 0; j < classes; ++j) {
      r.confusion(i, j) = 100.0 * static_cast<double>(r.counts(i, j)) / static_cast<double>(row_total);
    }
  }
  r.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
  return r;
}

EvalReport evaluate(const CnnModel<float>& model, std::span<const LabeledExample> dataset) {
  if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::vector<std::size_t> truth, pred;
  truth.reserve(dataset.size());
  pred.reserve(dataset.size());
  for (const auto& ex : dataset) {
    const auto probs = forward(model, ex);
    truth.push_back(ex.label);
    pred.push_back(argmax(std::span<const float>(probs)));
  }
  return confusion_report(truth, pred, model.arch().classes);
}

}  // namespace mdhar::nnet
