#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mdhar/error.hpp"
#include "mdhar/nnet/checkpoint.hpp"
#include "mdhar/nnet/train.hpp"
#include "temp_dir.hpp"

using namespace mdhar;
using namespace mdhar::nnet;

namespace {

Architecture tiny() {
  Architecture a;
  a.input_size = 16;
  a.filters = 4;
  a.conv_layers = 2;
  a.hidden = 16;
  a.classes = 2;
  return a;
}

// Constant-bright (label 1) versus constant-dark (label 0) images with mild noise.
std::vector<LabeledExample> bright_dark(const Architecture& a, std::size_t per_class,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> jitter(-0.05f, 0.05f);
  std::vector<LabeledExample> out;
  for (std::size_t label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < per_class; ++i) {
      LabeledExample ex;
      ex.id = (label ? "bright_" : "dark_") + std::to_string(100 + i);
      ex.label = label;
      const float level = label ? 0.9f : 0.1f;
      for (std::size_t b = 0; b < a.branches; ++b) {
        std::vector<float> x(a.input_elements());
        for (auto& v : x) v = level + jitter(rng);
        ex.branches.push_back(std::move(x));
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.arch = tiny();
  return cfg;
}

}  // namespace

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.learning_rate, 1e-4);
  EXPECT_EQ(cfg.epochs, 25u);
  EXPECT_EQ(cfg.beta1, 0.9);
  EXPECT_EQ(cfg.beta2, 0.999);
  EXPECT_EQ(cfg.epsilon, 1e-8);
  EXPECT_EQ(cfg.split_fraction, 0.8);
  EXPECT_NO_THROW(cfg.validate());
  cfg.split_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SplitPerClass, EightyTwentyAndOrderIndependent) {
  auto data = bright_dark(tiny(), 20, 1);
  const auto split = split_per_class(data, 0.8, 5, 2);
  EXPECT_EQ(split.train.size(), 32u);
  EXPECT_EQ(split.test.size(), 8u);
  std::size_t bright = 0;
  for (auto i : split.train) bright += data[i].label;
  EXPECT_EQ(bright, 16u);

  std::vector<std::string> train_ids;
  for (auto i : split.train) train_ids.push_back(data[i].id);
  std::mt19937_64 rng(9);
  std::shuffle(data.begin(), data.end(), rng);
  const auto split2 = split_per_class(data, 0.8, 5, 2);
  std::vector<std::string> train_ids2;
  for (auto i : split2.train) train_ids2.push_back(data[i].id);
  EXPECT_EQ(train_ids, train_ids2);
}

TEST(SplitPerClass, SingletonClassIsNamed) {
  auto data = bright_dark(tiny(), 3, 1);
  data.resize(4);  // three dark, one bright
  try {
    split_per_class(data, 0.8, 1, 2);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("class 1"), std::string::npos) << e.what();
  }
  std::vector<LabeledExample> nine(1);
  nine[0].id = "x";
  nine[0].label = 3;
  try {
    split_per_class(nine, 0.8, 1);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("WalkBack0"), std::string::npos) << e.what();
  }
}

TEST(Train, SeparableClassesReachFullTrainingAccuracy) {
  // Full-size branches with default hyper-parameters; only the class count differs.
  TrainConfig cfg;
  cfg.arch.classes = 2;
  const auto data = bright_dark(cfg.arch, 20, 2);
  const auto result = train(data, cfg);
  ASSERT_EQ(result.loss_history.size(), 25u);
  for (double l : result.loss_history) ASSERT_TRUE(std::isfinite(l));
  EXPECT_LT(result.loss_history.back(), result.loss_history.front());

  std::vector<LabeledExample> train_set, test_set;
  for (auto i : result.split.train) train_set.push_back(data[i]);
  for (auto i : result.split.test) test_set.push_back(data[i]);
  EXPECT_EQ(evaluate(result.model, train_set).accuracy, 1.0);
  EXPECT_EQ(evaluate(result.model, test_set).accuracy, 1.0);
}

TEST(Train, IdenticalSeedsAreBitwiseReproducible) {
  const auto data = bright_dark(tiny(), 6, 3);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 4;
  cfg.batch_size = 3;
  const auto a = train(data, cfg);
  const auto b = train(data, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  for (std::size_t i = 0; i < a.model.params().size(); ++i) {
    EXPECT_EQ(a.model.params()[i].value, b.model.params()[i].value);
  }
  cfg.seed = 2;
  EXPECT_NE(train(data, cfg).loss_history, a.loss_history);
}

TEST(Train, PermutedDatasetGivesIdenticalModel) {
  auto data = bright_dark(tiny(), 6, 4);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;
  cfg.batch_size = 100;  // full batch
  const auto a = train(data, cfg);
  std::reverse(data.begin(), data.end());
  const auto b = train(data, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  for (std::size_t i = 0; i < a.model.params().size(); ++i) {
    EXPECT_EQ(a.model.params()[i].value, b.model.params()[i].value);
  }
}

TEST(Evaluate, ConstantPredictorFillsOneColumn) {
  std::vector<std::size_t> truth, pred;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (int k = 0; k < 3; ++k) {
      truth.push_back(c);
      pred.push_back(class_index(ActivityClass::WalkBackM30));
    }
  }
  const auto r = confusion_report(truth, pred);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      EXPECT_EQ(r.confusion(i, j), j == 4 ? 100.0 : 0.0);
      row += r.confusion(i, j);
    }
    EXPECT_NEAR(row, 100.0, 0.1);
  }
  EXPECT_NEAR(r.accuracy, 1.0 / 9.0, 1e-12);
}

TEST(Evaluate, PerfectPredictionsGiveIdentity) {
  std::vector<std::size_t> truth = {0, 1, 2, 3, 3, 4, 5, 6, 7, 8, 8, 8};
  const auto r = confusion_report(truth, truth);
  EXPECT_EQ(r.accuracy, 1.0);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) EXPECT_EQ(r.confusion(i, j), i == j ? 100.0 : 0.0);
  }
  EXPECT_EQ(r.counts(8, 8), 3u);
  EXPECT_EQ(r.confusion(class_index(ActivityClass::WalkBack0), class_index(ActivityClass::WalkBack0)),
            100.0);
}

TEST(Evaluate, RowsSumToHundred) {
  std::vector<std::size_t> truth = {0, 0, 0, 1, 1, 1, 1, 1, 1, 1};
  std::vector<std::size_t> pred = {0, 1, 2, 1, 1, 0, 3, 1, 1, 2};
  const auto r = confusion_report(truth, pred, 4);
  for (std::size_t i = 0; i < 2; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 4; ++j) row += r.confusion(i, j);
    EXPECT_NEAR(row, 100.0, 0.1);
  }
  EXPECT_NEAR(r.confusion(1, 1), 400.0 / 7.0, 1e-12);
  EXPECT_THROW(confusion_report(truth, std::vector<std::size_t>{0}, 4), std::invalid_argument);
}

TEST(Checkpoint, RoundTripIsExact) {
  test::TempDir dir;
  const auto model = CnnModel<float>::random(tiny(), 77);
  save_checkpoint(model, dir / "m.mdn");
  const auto back = load_checkpoint(dir / "m.mdn");
  EXPECT_EQ(back.arch(), model.arch());
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    EXPECT_EQ(back.params()[i].name, model.params()[i].name);
    EXPECT_EQ(back.params()[i].shape, model.params()[i].shape);
    EXPECT_EQ(back.params()[i].value, model.params()[i].value);
  }
  const auto bytes = test::read_bytes(dir / "m.mdn");
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MDN1");
}

TEST(Checkpoint, RejectsCorruptFiles) {
  test::TempDir dir;
  {
    std::ofstream out(dir / "bad.mdn", std::ios::binary);
    out << "XXXX0000";
  }
  EXPECT_THROW(load_checkpoint(dir / "bad.mdn"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "missing.mdn"), DataError);

  save_checkpoint(CnnModel<float>::random(tiny(), 1), dir / "ok.mdn");
  auto bytes = test::read_bytes(dir / "ok.mdn");
  bytes.resize(bytes.size() - 10);
  {
    std::ofstream out(dir / "short.mdn", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  EXPECT_THROW(load_checkpoint(dir / "short.mdn"), DataError);
}
