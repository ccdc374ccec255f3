#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdhar/matrix.hpp"
#include "mdhar/nnet/adam.hpp"
#include "mdhar/nnet/model.hpp"

namespace mdhar::nnet {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t epochs = 25;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 16;
  double split_fraction = 0.8;
  std::uint64_t seed = 1;
  Architecture arch{};

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;  // indices into the dataset
  std::vector<std::size_t> test;
};

/// Per-class split: each class keeps round(fraction * n) examples (at least
/// one, leaving at least one) for training. Independent of dataset order:
/// members are ordered by id before the seeded shuffle.
Split split_per_class(std::span<const LabeledExample> dataset, double fraction,
                      std::uint64_t seed, std::size_t classes = kNumClasses);

struct TrainResult {
  CnnModel<float> model;
  std::vector<double> loss_history;  // mean training loss per epoch
  Split split;
};

/// Splits, initialises from cfg.seed and runs cfg.epochs of shuffled Adam
/// mini-batches. Throws std::invalid_argument naming any class with fewer
/// than two examples.
TrainResult train(std::span<const LabeledExample> dataset, const TrainConfig& cfg);

/// Trains on exactly the given examples, no split.
TrainResult train_on(std::span<const LabeledExample> train_set, const TrainConfig& cfg);

struct EvalReport {
  double accuracy = 0.0;
  Matrix<double> confusion;            // percent, row = true class
  Matrix<std::size_t> counts;          // raw counts, row = true class
  std::vector<std::size_t> predicted;  // per example
};

/// Confusion from labels and predictions; rows without examples stay zero.
EvalReport confusion_report(std::span<const std::size_t> truth,
                            std::span<const std::size_t> predicted,
                            std::size_t classes = kNumClasses);

EvalReport evaluate(const CnnModel<float>& model, std::span<const LabeledExample> dataset);

}  // namespace mdhar::nnet
