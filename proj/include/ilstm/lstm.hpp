#pragma once

#include "ilstm/numerics.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ilstm {

// The four gate weight matrices act on the concatenation [h_prev; x], so each
// W is H x (H+E) and each bias has length H.
struct LstmParams {
  Matrix w_f, w_i, w_c, w_o;
  Vector b_f, b_i, b_c, b_o;

  std::size_t hidden() const { return b_f.size(); }
  std::size_t input() const { return w_f.cols - b_f.size(); }
};

// Uniform(-s, s) weights with s = sqrt(6 / (H + E + H)), zero biases except
// the forget bias at 1.
LstmParams init_params(std::size_t hidden, std::size_t input, Rng& rng);

struct LstmState {
  Vector h;
  Vector c;
};

LstmState zero_state(std::size_t hidden);

// Everything the backward pass needs about one timestep.
struct StepCache {
  Vector x;
  Vector h_prev, c_prev;
  Vector f, i, g, o;  // gate activations; g is the tanh candidate
  Vector tanh_c;      // tanh of the updated cell
};

// One application of the cell equations.
std::pair<LstmState, StepCache> step(const LstmParams& params,
                                     const LstmState& state,
                                     std::span<const double> x);

struct ForwardTrace {
  std::vector<LstmState> states;  // states[t] is the state after step t
  std::vector<StepCache> caches;
};

// Left fold of step over a non-empty sequence.
ForwardTrace forward(const LstmParams& params, const LstmState& init,
                     std::span<const Vector> xs);

struct LstmGrads {
  Matrix w_f, w_i, w_c, w_o;
  Vector b_f, b_i, b_c, b_o;
  Vector init_h, init_c;
};

LstmGrads zero_grads(const LstmParams& params);

// Exact reverse-mode gradients of forward. upstream_h has one gradient per
// timestep's h (zeros allowed); upstream_final_c may be null. Accumulates
// into out so batch members can share one buffer.
void backward(const LstmParams& params, std::span<const StepCache> caches,
              std::span<const Vector> upstream_h,
              const Vector* upstream_final_c, LstmGrads& out);

// Convenience form returning fresh gradients.
LstmGrads backward(const LstmParams& params, std::span<const StepCache> caches,
                   std::span<const Vector> upstream_h,
                   const Vector* upstream_final_c = nullptr);

// Both directions over the same sequence; the reverse direction runs over the
// reversed input and its outputs are re-aligned to input positions.
struct BiTrace {
  ForwardTrace fwd;  // over xs
  ForwardTrace bwd;  // over reversed xs
  std::size_t length = 0;

  // [h_fwd(t); h_bwd(t)] at input position t.
  Vector output(std::size_t t) const;
  std::size_t output_dim() const;
};

BiTrace bi_forward(const LstmParams& fwd_params, const LstmParams& bwd_params,
                   const LstmState& init_fwd, const LstmState& init_bwd,
                   std::span<const Vector> xs);

struct BiGrads {
  LstmGrads fwd;
  LstmGrads bwd;
};

// upstream[t] is the gradient on the concatenated output at position t.
void bi_backward(const LstmParams& fwd_params, const LstmParams& bwd_params,
                 const BiTrace& trace, std::span<const Vector> upstream,
                 BiGrads& out);

}  // namespace ilstm
