#pragma once

#include "ilstm/dataset.hpp"
#include "ilstm/models.hpp"
#include "ilstm/numerics.hpp"
#include "ilstm/textpipe.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilstm {

// Raised when a training step produces a non-finite loss; carries the
// epoch/batch that blew up. No silent retries.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t hidden = 50;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  std::uint64_t seed = 42;
  double clip_norm = 0.0;  // 0 disables clipping
  double val_fraction = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_main_acc = 0.0;
  std::optional<double> train_sub_acc;
  double test_main_acc = 0.0;
  std::optional<double> test_sub_acc;
};

// A question after embedding lookup, ready for the models.
struct EmbeddedExample {
  std::vector<Vector> xs;
  std::size_t main_index = 0;
  std::size_t fine_index = 0;
};

std::vector<EmbeddedExample> embed_dataset(const EmbeddingTable& table,
                                           std::span<const LabeledQuestion> data,
                                           EmbedStats* stats = nullptr);

// Per-tensor first/second-moment adaptive optimizer over a tensor registry.
class AdamOptimizer {
 public:
  AdamOptimizer(const std::vector<TensorRef>& params, double lr, double beta1,
                double beta2, double epsilon);

  // params and grads must be registry-congruent with construction.
  void step(const std::vector<TensorRef>& params,
            const std::vector<TensorRef>& grads);

  std::size_t steps() const { return t_; }

 private:
  std::vector<Vector> m_;
  std::vector<Vector> v_;
  double lr_, beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
};

struct Accuracy {
  double main = 0.0;
  std::optional<double> sub;
};

Accuracy evaluate(const ModelOne& m, std::span<const EmbeddedExample> data);
Accuracy evaluate(const ModelTwo& m, std::span<const EmbeddedExample> data);

std::vector<EpochRecord> train_model1(ModelOne& model,
                                      std::span<const EmbeddedExample> train,
                                      std::span<const EmbeddedExample> test,
                                      const TrainConfig& config);

std::vector<EpochRecord> train_model2(ModelTwo& model,
                                      std::span<const EmbeddedExample> train,
                                      std::span<const EmbeddedExample> test,
                                      const TrainConfig& config);

// One question/answer pair with the classifier outputs that condition the
// responder.
struct QaExample {
  ProbVector main_p;
  ProbVector sub_p;
  std::vector<Vector> xs;
  std::vector<std::size_t> answer_ids;
};

// Mean epoch losses, one entry per epoch.
std::vector<double> train_responder(Responder& r,
                                    std::span<const QaExample> data,
                                    const TrainConfig& config);

// ---------------------------------------------------------------------------
// Gradient checking

enum class ModelKind { one, two, responder };

ModelKind parse_model_kind(const std::string& name);
std::string model_kind_name(ModelKind kind);

struct GradCheckEntry {
  std::string tensor;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  ModelKind kind = ModelKind::one;
  double tolerance = 0.0;
  std::size_t trials = 0;
  std::vector<GradCheckEntry> entries;

  bool passed() const;
};

// Compares BPTT against central differences on randomized small instances.
// corrupt_backward flips the sign of one tensor's analytic gradient, for
// testing that the checker catches faults.
GradCheckReport grad_check(ModelKind kind, std::size_t trials,
                           double tolerance, std::uint64_t seed,
                           bool corrupt_backward = false);

// ---------------------------------------------------------------------------
// H sweep

struct SweepRow {
  std::size_t hidden = 0;
  double train_main = 0.0;
  std::optional<double> train_sub;
  double test_main = 0.0;
  std::optional<double> test_sub;
};

// One train+evaluate run per H; each run draws its seed from the master seed
// by H index.
std::vector<SweepRow> sweep_h(std::span<const std::size_t> hs, ModelKind kind,
                              const TrainConfig& base,
                              std::span<const EmbeddedExample> train,
                              std::span<const EmbeddedExample> test);

// ---------------------------------------------------------------------------
// Reporting

// "89.80%" — two decimals, percent.
std::string format_percent(double fraction);

std::string epoch_csv(std::span<const EpochRecord> records);
std::string sweep_csv(std::span<const SweepRow> rows, ModelKind kind);
std::string sweep_table(std::span<const SweepRow> rows, ModelKind kind);

}  // namespace ilstm
