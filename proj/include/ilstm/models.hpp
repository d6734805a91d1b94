#pragma once

#include "ilstm/lstm.hpp"
#include "ilstm/numerics.hpp"
#include "ilstm/textpipe.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ilstm {

// Fully-connected layer whose output is always read through softmax.
struct DenseHead {
  Matrix w;  // classes x input
  Vector b;  // classes

  std::size_t classes() const { return b.size(); }
  std::size_t in_dim() const { return w.cols; }
};

DenseHead init_head(std::size_t classes, std::size_t in_dim, Rng& rng);

// Named mutable views over a model's trainable tensors, in a fixed order.
// The optimizer, the gradient checker and the container all walk this.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
  std::vector<std::size_t> dims;

  std::span<double> span() const { return {data, size}; }
};

std::vector<TensorRef> lstm_tensors(const std::string& prefix, LstmParams& p);
std::vector<TensorRef> lstm_tensors(const std::string& prefix, LstmGrads& g);
std::vector<TensorRef> head_tensors(const std::string& prefix, DenseHead& h);

// ---------------------------------------------------------------------------
// Model 1: LSTM over the question, main class read off the final state.

struct ModelOne {
  LstmParams lstm;
  DenseHead head;  // main classes x H
};

ModelOne init_model1(std::size_t hidden, std::size_t embed_dim,
                     std::size_t main_classes, Rng& rng);

ProbVector model1_forward(const ModelOne& m, std::span<const Vector> xs);

struct Model1Grads {
  LstmGrads lstm;
  Matrix head_w;
  Vector head_b;
};

Model1Grads zero_grads(const ModelOne& m);

// Cross-entropy of the main class; gradients are accumulated into acc.
double model1_loss_grad(const ModelOne& m, std::span<const Vector> xs,
                        ClassTarget main, Model1Grads& acc);

std::vector<TensorRef> registry(ModelOne& m);
std::vector<TensorRef> registry(Model1Grads& g);

// ---------------------------------------------------------------------------
// Model 2: the question plus one zero-embedding padding element; the main
// head reads the state after the last word, the sub head reads the state
// after the padding element.

struct ModelTwo {
  LstmParams lstm;
  DenseHead head_main;  // main classes x H
  DenseHead head_sub;   // fine labels x H

  // The padding element's embedding. All zeros, never trainable.
  Vector pad(std::size_t embed_dim) const { return Vector(embed_dim, 0.0); }
};

ModelTwo init_model2(std::size_t hidden, std::size_t embed_dim,
                     std::size_t main_classes, std::size_t sub_classes,
                     Rng& rng);

std::pair<ProbVector, ProbVector> model2_forward(const ModelTwo& m,
                                                 std::span<const Vector> xs);

// Equally weighted sum of the two cross-entropies.
double model2_loss(const ModelTwo& m, std::span<const Vector> xs,
                   ClassTarget main, ClassTarget sub);

struct Model2Grads {
  LstmGrads lstm;
  Matrix head_main_w;
  Vector head_main_b;
  Matrix head_sub_w;
  Vector head_sub_b;
};

Model2Grads zero_grads(const ModelTwo& m);

double model2_loss_grad(const ModelTwo& m, std::span<const Vector> xs,
                        ClassTarget main, ClassTarget sub, Model2Grads& acc);

std::vector<TensorRef> registry(ModelTwo& m);
std::vector<TensorRef> registry(Model2Grads& g);

// ---------------------------------------------------------------------------
// Responder: class-conditioned bidirectional LSTM that emits one answer token
// per question position, greedily, until the end symbol.

// [main_p; sub_p] — the conditioning input of the responder.
Vector condition_vector(const ProbVector& main_p, const ProbVector& sub_p);

// Answer-token vocabulary built solely from training answers plus the end
// symbol.
class AnswerVocab {
 public:
  static constexpr const char* kEndSymbol = "</s>";

  static AnswerVocab build(std::span<const std::vector<Token>> answers);

  std::size_t size() const { return words_.size(); }
  std::size_t end_index() const { return end_index_; }
  const std::string& word(std::size_t id) const { return words_[id]; }
  const std::vector<std::string>& words() const { return words_; }

  // Throws on tokens outside the vocabulary (dataset build time).
  std::vector<std::size_t> encode(std::span<const Token> answer) const;

  static AnswerVocab from_words(std::vector<std::string> words);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t end_index_ = 0;
};

struct AffineMap {
  Matrix w;
  Vector b;
};

struct Responder {
  // 56 -> H projections of the conditioning vector into each direction's
  // initial state.
  AffineMap proj_h_fwd, proj_c_fwd, proj_h_bwd, proj_c_bwd;
  LstmParams fwd, bwd;
  DenseHead head;  // answer vocabulary x 2H
  AnswerVocab vocab;

  std::size_t condition_dim() const { return proj_h_fwd.w.cols; }
  std::size_t hidden() const { return fwd.hidden(); }
};

Responder init_responder(std::size_t hidden, std::size_t embed_dim,
                         std::size_t condition_dim, AnswerVocab vocab,
                         Rng& rng);

// Greedy per-position decoding; stops at the end symbol or the end of the
// question.
std::vector<Token> responder_generate(const Responder& r,
                                      const ProbVector& main_p,
                                      const ProbVector& sub_p,
                                      std::span<const Vector> xs);

// Teacher-forced mean cross-entropy over the answer tokens plus the end
// symbol (as far as the question length allows).
double responder_loss(const Responder& r, const ProbVector& main_p,
                      const ProbVector& sub_p, std::span<const Vector> xs,
                      std::span<const std::size_t> answer_ids);

struct ResponderGrads {
  AffineMap proj_h_fwd, proj_c_fwd, proj_h_bwd, proj_c_bwd;
  LstmGrads fwd, bwd;
  Matrix head_w;
  Vector head_b;
};

ResponderGrads zero_grads(const Responder& r);

double responder_loss_grad(const Responder& r, const ProbVector& main_p,
                           const ProbVector& sub_p, std::span<const Vector> xs,
                           std::span<const std::size_t> answer_ids,
                           ResponderGrads& acc);

std::vector<TensorRef> registry(Responder& r);
std::vector<TensorRef> registry(ResponderGrads& g);

}  // namespace ilstm
