#include "ilstm/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ilstm {

namespace {

Vector head_logits(const DenseHead& head, std::span<const double> h) {
  return affine(head.w, h, head.b);
}

// d(cross_entropy(softmax(z)))/dz = p - onehot.
Vector softmax_xent_dlogits(const ProbVector& p, std::size_t target) {
  Vector d = p.values();
  d[target] -= 1.0;
  return d;
}

void append_lstm_tensors(std::vector<TensorRef>& out, const std::string& prefix,
                         Matrix& wf, Matrix& wi, Matrix& wc, Matrix& wo,
                         Vector& bf, Vector& bi, Vector& bc, Vector& bo) {
  auto mat = [&](const char* name, Matrix& m) {
    out.push_back({prefix + name, m.a.data(), m.a.size(), {m.rows, m.cols}});
  };
  auto vec = [&](const char* name, Vector& v) {
    out.push_back({prefix + name, v.data(), v.size(), {v.size()}});
  };
  mat(".w_f", wf);
  mat(".w_i", wi);
  mat(".w_c", wc);
  mat(".w_o", wo);
  vec(".b_f", bf);
  vec(".b_i", bi);
  vec(".b_c", bc);
  vec(".b_o", bo);
}

}  // namespace

DenseHead init_head(std::size_t classes, std::size_t in_dim, Rng& rng) {
  if (classes == 0 || in_dim == 0) {
    throw std::invalid_argument("init_head requires classes, in_dim >= 1");
  }
  DenseHead head;
  head.w = Matrix(classes, in_dim);
  const double s = std::sqrt(6.0 / static_cast<double>(classes + in_dim));
  for (double& e : head.w.a) {
    e = rng.uniform(-s, s);
  }
  head.b = Vector(classes, 0.0);
  return head;
}

std::vector<TensorRef> lstm_tensors(const std::string& prefix, LstmParams& p) {
  std::vector<TensorRef> out;
  append_lstm_tensors(out, prefix, p.w_f, p.w_i, p.w_c, p.w_o, p.b_f, p.b_i,
                      p.b_c, p.b_o);
  return out;
}

std::vector<TensorRef> lstm_tensors(const std::string& prefix, LstmGrads& g) {
  std::vector<TensorRef> out;
  append_lstm_tensors(out, prefix, g.w_f, g.w_i, g.w_c, g.w_o, g.b_f, g.b_i,
                      g.b_c, g.b_o);
  return out;
}

std::vector<TensorRef> head_tensors(const std::string& prefix, DenseHead& h) {
  return {{prefix + ".w", h.w.a.data(), h.w.a.size(), {h.w.rows, h.w.cols}},
          {prefix + ".b", h.b.data(), h.b.size(), {h.b.size()}}};
}

// ---------------------------------------------------------------------------
// Model 1

ModelOne init_model1(std::size_t hidden, std::size_t embed_dim,
                     std::size_t main_classes, Rng& rng) {
  ModelOne m;
  m.lstm = init_params(hidden, embed_dim, rng);
  m.head = init_head(main_classes, hidden, rng);
  return m;
}

ProbVector model1_forward(const ModelOne& m, std::span<const Vector> xs) {
  const ForwardTrace trace =
      forward(m.lstm, zero_state(m.lstm.hidden()), xs);
  return softmax(head_logits(m.head, trace.states.back().h));
}

Model1Grads zero_grads(const ModelOne& m) {
  Model1Grads g;
  g.lstm = zero_grads(m.lstm);
  g.head_w = Matrix(m.head.w.rows, m.head.w.cols);
  g.head_b = Vector(m.head.b.size(), 0.0);
  return g;
}

double model1_loss_grad(const ModelOne& m, std::span<const Vector> xs,
                        ClassTarget main, Model1Grads& acc) {
  const ForwardTrace trace =
      forward(m.lstm, zero_state(m.lstm.hidden()), xs);
  const Vector& h_last = trace.states.back().h;
  const ProbVector p = softmax(head_logits(m.head, h_last));
  const double loss = cross_entropy(main, p);

  const Vector dlogits = softmax_xent_dlogits(p, main.index);
  add_outer(acc.head_w, dlogits, h_last);
  for (std::size_t k = 0; k < dlogits.size(); ++k) {
    acc.head_b[k] += dlogits[k];
  }

  std::vector<Vector> upstream(xs.size(), Vector(m.lstm.hidden(), 0.0));
  add_matvec_transposed(m.head.w, dlogits, upstream.back());
  backward(m.lstm, trace.caches, upstream, nullptr, acc.lstm);
  return loss;
}

std::vector<TensorRef> registry(ModelOne& m) {
  std::vector<TensorRef> out = lstm_tensors("lstm", m.lstm);
  for (TensorRef& t : head_tensors("head", m.head)) {
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TensorRef> registry(Model1Grads& g) {
  std::vector<TensorRef> out = lstm_tensors("lstm", g.lstm);
  out.push_back({"head.w", g.head_w.a.data(), g.head_w.a.size(),
                 {g.head_w.rows, g.head_w.cols}});
  out.push_back({"head.b", g.head_b.data(), g.head_b.size(), {g.head_b.size()}});
  return out;
}

// ---------------------------------------------------------------------------
// Model 2

ModelTwo init_model2(std::size_t hidden, std::size_t embed_dim,
                     std::size_t main_classes, std::size_t sub_classes,
                     Rng& rng) {
  ModelTwo m;
  m.lstm = init_params(hidden, embed_dim, rng);
  m.head_main = init_head(main_classes, hidden, rng);
  m.head_sub = init_head(sub_classes, hidden, rng);
  return m;
}

namespace {

// The question plus the zero padding element.
std::vector<Vector> with_pad(const ModelTwo& m, std::span<const Vector> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("model2 requires a non-empty sequence");
  }
  std::vector<Vector> extended(xs.begin(), xs.end());
  extended.push_back(m.pad(m.lstm.input()));
  return extended;
}

}  // namespace

std::pair<ProbVector, ProbVector> model2_forward(const ModelTwo& m,
                                                 std::span<const Vector> xs) {
  const std::vector<Vector> extended = with_pad(m, xs);
  const ForwardTrace trace =
      forward(m.lstm, zero_state(m.lstm.hidden()), extended);
  const std::size_t t_last = xs.size() - 1;  // after the last question token
  ProbVector main_p =
      softmax(head_logits(m.head_main, trace.states[t_last].h));
  ProbVector sub_p = softmax(head_logits(m.head_sub, trace.states.back().h));
  return {std::move(main_p), std::move(sub_p)};
}

double model2_loss(const ModelTwo& m, std::span<const Vector> xs,
                   ClassTarget main, ClassTarget sub) {
  auto [main_p, sub_p] = model2_forward(m, xs);
  return cross_entropy(main, main_p) + cross_entropy(sub, sub_p);
}

Model2Grads zero_grads(const ModelTwo& m) {
  Model2Grads g;
  g.lstm = zero_grads(m.lstm);
  g.head_main_w = Matrix(m.head_main.w.rows, m.head_main.w.cols);
  g.head_main_b = Vector(m.head_main.b.size(), 0.0);
  g.head_sub_w = Matrix(m.head_sub.w.rows, m.head_sub.w.cols);
  g.head_sub_b = Vector(m.head_sub.b.size(), 0.0);
  return g;
}

double model2_loss_grad(const ModelTwo& m, std::span<const Vector> xs,
                        ClassTarget main, ClassTarget sub, Model2Grads& acc) {
  const std::vector<Vector> extended = with_pad(m, xs);
  const ForwardTrace trace =
      forward(m.lstm, zero_state(m.lstm.hidden()), extended);
  const std::size_t t_last = xs.size() - 1;
  const Vector& h_main = trace.states[t_last].h;
  const Vector& h_sub = trace.states.back().h;

  const ProbVector main_p = softmax(head_logits(m.head_main, h_main));
  const ProbVector sub_p = softmax(head_logits(m.head_sub, h_sub));
  const double loss = cross_entropy(main, main_p) + cross_entropy(sub, sub_p);

  const Vector d_main = softmax_xent_dlogits(main_p, main.index);
  const Vector d_sub = softmax_xent_dlogits(sub_p, sub.index);

  add_outer(acc.head_main_w, d_main, h_main);
  add_outer(acc.head_sub_w, d_sub, h_sub);
  for (std::size_t k = 0; k < d_main.size(); ++k) {
    acc.head_main_b[k] += d_main[k];
  }
  for (std::size_t k = 0; k < d_sub.size(); ++k) {
    acc.head_sub_b[k] += d_sub[k];
  }

  // Both supervised outputs feed one backward pass through the shared LSTM.
  std::vector<Vector> upstream(extended.size(), Vector(m.lstm.hidden(), 0.0));
  add_matvec_transposed(m.head_main.w, d_main, upstream[t_last]);
  add_matvec_transposed(m.head_sub.w, d_sub, upstream.back());
  backward(m.lstm, trace.caches, upstream, nullptr, acc.lstm);
  return loss;
}

std::vector<TensorRef> registry(ModelTwo& m) {
  std::vector<TensorRef> out = lstm_tensors("lstm", m.lstm);
  for (TensorRef& t : head_tensors("head_main", m.head_main)) {
    out.push_back(std::move(t));
  }
  for (TensorRef& t : head_tensors("head_sub", m.head_sub)) {
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TensorRef> registry(Model2Grads& g) {
  std::vector<TensorRef> out = lstm_tensors("lstm", g.lstm);
  out.push_back({"head_main.w", g.head_main_w.a.data(), g.head_main_w.a.size(),
                 {g.head_main_w.rows, g.head_main_w.cols}});
  out.push_back({"head_main.b", g.head_main_b.data(), g.head_main_b.size(),
                 {g.head_main_b.size()}});
  out.push_back({"head_sub.w", g.head_sub_w.a.data(), g.head_sub_w.a.size(),
                 {g.head_sub_w.rows, g.head_sub_w.cols}});
  out.push_back({"head_sub.b", g.head_sub_b.data(), g.head_sub_b.size(),
                 {g.head_sub_b.size()}});
  return out;
}

// ---------------------------------------------------------------------------
// Responder

Vector condition_vector(const ProbVector& main_p, const ProbVector& sub_p) {
  Vector out;
  out.reserve(main_p.size() + sub_p.size());
  out.insert(out.end(), main_p.values().begin(), main_p.values().end());
  out.insert(out.end(), sub_p.values().begin(), sub_p.values().end());
  return out;
}

AnswerVocab AnswerVocab::build(std::span<const std::vector<Token>> answers) {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> seen;
  for (const std::vector<Token>& answer : answers) {
    for (const Token& tok : answer) {
      if (seen.emplace(tok, words.size()).second) {
        words.push_back(tok);
      }
    }
  }
  std::sort(words.begin(), words.end());
  words.push_back(kEndSymbol);
  return from_words(std::move(words));
}

AnswerVocab AnswerVocab::from_words(std::vector<std::string> words) {
  AnswerVocab v;
  v.words_ = std::move(words);
  bool has_end = false;
  for (std::size_t k = 0; k < v.words_.size(); ++k) {
    if (!v.index_.emplace(v.words_[k], k).second) {
      throw std::invalid_argument("duplicate answer-vocabulary word: " +
                                  v.words_[k]);
    }
    if (v.words_[k] == kEndSymbol) {
      v.end_index_ = k;
      has_end = true;
    }
  }
  if (!has_end) {
    throw std::invalid_argument("answer vocabulary lacks the end symbol");
  }
  return v;
}

std::vector<std::size_t> AnswerVocab::encode(
    std::span<const Token> answer) const {
  std::vector<std::size_t> ids;
  ids.reserve(answer.size());
  for (const Token& tok : answer) {
    auto it = index_.find(tok);
    if (it == index_.end()) {
      throw std::invalid_argument("answer token `" + tok +
                                  "` outside the answer vocabulary");
    }
    ids.push_back(it->second);
  }
  return ids;
}

Responder init_responder(std::size_t hidden, std::size_t embed_dim,
                         std::size_t condition_dim, AnswerVocab vocab,
                         Rng& rng) {
  if (hidden == 0 || embed_dim == 0 || condition_dim == 0) {
    throw std::invalid_argument("init_responder requires positive sizes");
  }
  Responder r;
  const double s =
      std::sqrt(6.0 / static_cast<double>(condition_dim + hidden));
  for (AffineMap* proj :
       {&r.proj_h_fwd, &r.proj_c_fwd, &r.proj_h_bwd, &r.proj_c_bwd}) {
    proj->w = Matrix(hidden, condition_dim);
    for (double& e : proj->w.a) {
      e = rng.uniform(-s, s);
    }
    proj->b = Vector(hidden, 0.0);
  }
  r.fwd = init_params(hidden, embed_dim, rng);
  r.bwd = init_params(hidden, embed_dim, rng);
  r.head = init_head(vocab.size(), 2 * hidden, rng);
  r.vocab = std::move(vocab);
  return r;
}

namespace {

struct ConditionedStates {
  LstmState fwd;
  LstmState bwd;
};

ConditionedStates project_condition(const Responder& r, const Vector& u) {
  if (u.size() != r.condition_dim()) {
    throw std::invalid_argument(
        "condition vector has length " + std::to_string(u.size()) +
        ", responder expects " + std::to_string(r.condition_dim()));
  }
  ConditionedStates s;
  s.fwd.h = affine(r.proj_h_fwd.w, u, r.proj_h_fwd.b);
  s.fwd.c = affine(r.proj_c_fwd.w, u, r.proj_c_fwd.b);
  s.bwd.h = affine(r.proj_h_bwd.w, u, r.proj_h_bwd.b);
  s.bwd.c = affine(r.proj_c_bwd.w, u, r.proj_c_bwd.b);
  return s;
}

}  // namespace

std::vector<Token> responder_generate(const Responder& r,
                                      const ProbVector& main_p,
                                      const ProbVector& sub_p,
                                      std::span<const Vector> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("responder_generate requires a non-empty "
                                "question");
  }
  const Vector u = condition_vector(main_p, sub_p);
  const ConditionedStates init = project_condition(r, u);
  const BiTrace trace = bi_forward(r.fwd, r.bwd, init.fwd, init.bwd, xs);

  std::vector<Token> out;
  for (std::size_t t = 0; t < trace.length; ++t) {
    const Vector logits = affine(r.head.w, trace.output(t), r.head.b);
    const std::size_t id = argmax_lowest(logits);
    if (id == r.vocab.end_index()) {
      break;
    }
    out.push_back(r.vocab.word(id));
  }
  return out;
}

double responder_loss(const Responder& r, const ProbVector& main_p,
                      const ProbVector& sub_p, std::span<const Vector> xs,
                      std::span<const std::size_t> answer_ids) {
  ResponderGrads scratch = zero_grads(r);
  return responder_loss_grad(r, main_p, sub_p, xs, answer_ids, scratch);
}

ResponderGrads zero_grads(const Responder& r) {
  ResponderGrads g;
  for (auto [dst, src] :
       {std::pair{&g.proj_h_fwd, &r.proj_h_fwd},
        std::pair{&g.proj_c_fwd, &r.proj_c_fwd},
        std::pair{&g.proj_h_bwd, &r.proj_h_bwd},
        std::pair{&g.proj_c_bwd, &r.proj_c_bwd}}) {
    dst->w = Matrix(src->w.rows, src->w.cols);
    dst->b = Vector(src->b.size(), 0.0);
  }
  g.fwd = zero_grads(r.fwd);
  g.bwd = zero_grads(r.bwd);
  g.head_w = Matrix(r.head.w.rows, r.head.w.cols);
  g.head_b = Vector(r.head.b.size(), 0.0);
  return g;
}

double responder_loss_grad(const Responder& r, const ProbVector& main_p,
                           const ProbVector& sub_p, std::span<const Vector> xs,
                           std::span<const std::size_t> answer_ids,
                           ResponderGrads& acc) {
  if (xs.empty()) {
    throw std::invalid_argument("responder loss requires a non-empty question");
  }
  if (answer_ids.size() > xs.size()) {
    throw std::invalid_argument(
        "answer has " + std::to_string(answer_ids.size()) +
        " tokens but only " + std::to_string(xs.size()) +
        " positions are decodable");
  }
  for (std::size_t id : answer_ids) {
    if (id >= r.vocab.size()) {
      throw std::invalid_argument("answer id out of vocabulary range");
    }
  }

  const Vector u = condition_vector(main_p, sub_p);
  const ConditionedStates init = project_condition(r, u);
  const BiTrace trace = bi_forward(r.fwd, r.bwd, init.fwd, init.bwd, xs);

  // Supervise the answer tokens and, when a position remains, the end symbol.
  const std::size_t supervised =
      std::min(answer_ids.size() + 1, trace.length);
  double loss = 0.0;
  std::vector<Vector> upstream(trace.length,
                               Vector(trace.output_dim(), 0.0));
  for (std::size_t t = 0; t < supervised; ++t) {
    const Vector y = trace.output(t);
    const ProbVector p = softmax(affine(r.head.w, y, r.head.b));
    const std::size_t target =
        t < answer_ids.size() ? answer_ids[t] : r.vocab.end_index();
    loss += cross_entropy({target}, p);

    Vector dlogits = softmax_xent_dlogits(p, target);
    for (double& v : dlogits) {
      v /= static_cast<double>(supervised);
    }
    add_outer(acc.head_w, dlogits, y);
    for (std::size_t k = 0; k < dlogits.size(); ++k) {
      acc.head_b[k] += dlogits[k];
    }
    add_matvec_transposed(r.head.w, dlogits, upstream[t]);
  }
  loss /= static_cast<double>(supervised);

  BiGrads bi = {zero_grads(r.fwd), zero_grads(r.bwd)};
  bi_backward(r.fwd, r.bwd, trace, upstream, bi);

  // Fold the direction gradients into the accumulator and push the initial
  // state gradients through the conditioning projections.
  auto accumulate = [](LstmGrads& dst, const LstmGrads& src) {
    auto add_all = [](Vector& d, const Vector& s) {
      for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] += s[k];
      }
    };
    auto add_mat = [](Matrix& d, const Matrix& s) {
      for (std::size_t k = 0; k < d.a.size(); ++k) {
        d.a[k] += s.a[k];
      }
    };
    add_mat(dst.w_f, src.w_f);
    add_mat(dst.w_i, src.w_i);
    add_mat(dst.w_c, src.w_c);
    add_mat(dst.w_o, src.w_o);
    add_all(dst.b_f, src.b_f);
    add_all(dst.b_i, src.b_i);
    add_all(dst.b_c, src.b_c);
    add_all(dst.b_o, src.b_o);
    add_all(dst.init_h, src.init_h);
    add_all(dst.init_c, src.init_c);
  };
  accumulate(acc.fwd, bi.fwd);
  accumulate(acc.bwd, bi.bwd);

  auto project_back = [&u](AffineMap& proj, const Vector& d_init) {
    add_outer(proj.w, d_init, u);
    for (std::size_t k = 0; k < d_init.size(); ++k) {
      proj.b[k] += d_init[k];
    }
  };
  project_back(acc.proj_h_fwd, bi.fwd.init_h);
  project_back(acc.proj_c_fwd, bi.fwd.init_c);
  project_back(acc.proj_h_bwd, bi.bwd.init_h);
  project_back(acc.proj_c_bwd, bi.bwd.init_c);
  return loss;
}

namespace {

template <typename ProjLike>
void append_proj(std::vector<TensorRef>& out, const std::string& prefix,
                 ProjLike& proj) {
  out.push_back({prefix + ".w", proj.w.a.data(), proj.w.a.size(),
                 {proj.w.rows, proj.w.cols}});
  out.push_back({prefix + ".b", proj.b.data(), proj.b.size(),
                 {proj.b.size()}});
}

}  // namespace

std::vector<TensorRef> registry(Responder& r) {
  std::vector<TensorRef> out;
  append_proj(out, "proj_h_fwd", r.proj_h_fwd);
  append_proj(out, "proj_c_fwd", r.proj_c_fwd);
  append_proj(out, "proj_h_bwd", r.proj_h_bwd);
  append_proj(out, "proj_c_bwd", r.proj_c_bwd);
  for (TensorRef& t : lstm_tensors("lstm_fwd", r.fwd)) {
    out.push_back(std::move(t));
  }
  for (TensorRef& t : lstm_tensors("lstm_bwd", r.bwd)) {
    out.push_back(std::move(t));
  }
  for (TensorRef& t : head_tensors("head", r.head)) {
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TensorRef> registry(ResponderGrads& g) {
  std::vector<TensorRef> out;
  append_proj(out, "proj_h_fwd", g.proj_h_fwd);
  append_proj(out, "proj_c_fwd", g.proj_c_fwd);
  append_proj(out, "proj_h_bwd", g.proj_h_bwd);
  append_proj(out, "proj_c_bwd", g.proj_c_bwd);
  for (TensorRef& t : lstm_tensors("lstm_fwd", g.fwd)) {
    out.push_back(std::move(t));
  }
  for (TensorRef& t : lstm_tensors("lstm_bwd", g.bwd)) {
    out.push_back(std::move(t));
  }
  out.push_back({"head.w", g.head_w.a.data(), g.head_w.a.size(),
                 {g.head_w.rows, g.head_w.cols}});
  out.push_back({"head.b", g.head_b.data(), g.head_b.size(),
                 {g.head_b.size()}});
  return out;
}

}  // namespace ilstm
