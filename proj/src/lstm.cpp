#include "ilstm/lstm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ilstm {

namespace {

void check_param_shapes(const LstmParams& p) {
  const std::size_t h = p.b_f.size();
  const std::size_t joint = p.w_f.cols;
  const bool ok = h > 0 && joint > h &&
                  p.w_f.rows == h && p.w_i.rows == h && p.w_c.rows == h &&
                  p.w_o.rows == h && p.w_i.cols == joint &&
                  p.w_c.cols == joint && p.w_o.cols == joint &&
                  p.b_i.size() == h && p.b_c.size() == h && p.b_o.size() == h;
  if (!ok) {
    throw std::invalid_argument("inconsistent LSTM parameter shapes");
  }
}

}  // namespace

LstmParams init_params(std::size_t hidden, std::size_t input, Rng& rng) {
  if (hidden == 0 || input == 0) {
    throw std::invalid_argument("init_params requires hidden, input >= 1");
  }
  const std::size_t joint = hidden + input;
  const double s = std::sqrt(6.0 / static_cast<double>(joint + hidden));

  LstmParams p;
  for (Matrix* w : {&p.w_f, &p.w_i, &p.w_c, &p.w_o}) {
    *w = Matrix(hidden, joint);
    for (double& e : w->a) {
      e = rng.uniform(-s, s);
    }
  }
  p.b_f = Vector(hidden, 1.0);  // forget bias 1 for early gradient flow
  p.b_i = Vector(hidden, 0.0);
  p.b_c = Vector(hidden, 0.0);
  p.b_o = Vector(hidden, 0.0);
  return p;
}

LstmState zero_state(std::size_t hidden) {
  return {Vector(hidden, 0.0), Vector(hidden, 0.0)};
}

std::pair<LstmState, StepCache> step(const LstmParams& params,
                                     const LstmState& state,
                                     std::span<const double> x) {
  check_param_shapes(params);
  const std::size_t h = params.hidden();
  const std::size_t e = params.input();
  if (state.h.size() != h || state.c.size() != h || x.size() != e) {
    throw std::invalid_argument(
        "step shape mismatch: params expect H=" + std::to_string(h) +
        ", E=" + std::to_string(e) + "; got h=" + std::to_string(state.h.size()) +
        ", c=" + std::to_string(state.c.size()) +
        ", x=" + std::to_string(x.size()));
  }

  // z = [h_prev; x]
  Vector z(h + e);
  std::copy(state.h.begin(), state.h.end(), z.begin());
  std::copy(x.begin(), x.end(), z.begin() + static_cast<std::ptrdiff_t>(h));

  StepCache cache;
  cache.x.assign(x.begin(), x.end());
  cache.h_prev = state.h;
  cache.c_prev = state.c;
  cache.f = sigmoid(affine(params.w_f, z, params.b_f));
  cache.i = sigmoid(affine(params.w_i, z, params.b_i));
  cache.g = tanh_act(affine(params.w_c, z, params.b_c));
  cache.o = sigmoid(affine(params.w_o, z, params.b_o));

  LstmState next;
  next.c.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    next.c[k] = cache.f[k] * state.c[k] + cache.i[k] * cache.g[k];
  }
  cache.tanh_c = tanh_act(next.c);
  next.h.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    next.h[k] = cache.o[k] * cache.tanh_c[k];
  }
  return {std::move(next), std::move(cache)};
}

ForwardTrace forward(const LstmParams& params, const LstmState& init,
                     std::span<const Vector> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("forward requires a non-empty sequence");
  }
  ForwardTrace trace;
  trace.states.reserve(xs.size());
  trace.caches.reserve(xs.size());
  const LstmState* current = &init;
  for (const Vector& x : xs) {
    auto [next, cache] = step(params, *current, x);
    trace.states.push_back(std::move(next));
    trace.caches.push_back(std::move(cache));
    current = &trace.states.back();
  }
  return trace;
}

LstmGrads zero_grads(const LstmParams& params) {
  LstmGrads g;
  const std::size_t h = params.hidden();
  const std::size_t joint = h + params.input();
  for (Matrix* w : {&g.w_f, &g.w_i, &g.w_c, &g.w_o}) {
    *w = Matrix(h, joint);
  }
  g.b_f = g.b_i = g.b_c = g.b_o = Vector(h, 0.0);
  g.init_h = Vector(h, 0.0);
  g.init_c = Vector(h, 0.0);
  return g;
}

void backward(const LstmParams& params, std::span<const StepCache> caches,
              std::span<const Vector> upstream_h,
              const Vector* upstream_final_c, LstmGrads& out) {
  if (caches.size() != upstream_h.size()) {
    throw std::invalid_argument(
        "backward: " + std::to_string(caches.size()) + " cached steps but " +
        std::to_string(upstream_h.size()) + " upstream h gradients");
  }
  if (caches.empty()) {
    throw std::invalid_argument("backward requires at least one step");
  }
  const std::size_t h = params.hidden();
  const std::size_t e = params.input();

  Vector dh_next(h, 0.0);
  Vector dc_next(h, 0.0);
  if (upstream_final_c) {
    if (upstream_final_c->size() != h) {
      throw std::invalid_argument("backward: upstream final-c gradient has "
                                  "wrong length");
    }
    dc_next = *upstream_final_c;
  }

  Vector dh(h), dc(h), da_f(h), da_i(h), da_c(h), da_o(h), z(h + e),
      dz(h + e);
  for (std::size_t t = caches.size(); t-- > 0;) {
    const StepCache& sc = caches[t];
    if (upstream_h[t].size() != h) {
      throw std::invalid_argument("backward: upstream h gradient at step " +
                                  std::to_string(t) + " has wrong length");
    }
    for (std::size_t k = 0; k < h; ++k) {
      dh[k] = upstream_h[t][k] + dh_next[k];
      const double tc = sc.tanh_c[k];
      dc[k] = dc_next[k] + dh[k] * sc.o[k] * (1.0 - tc * tc);

      const double d_o = dh[k] * tc;
      da_o[k] = d_o * sc.o[k] * (1.0 - sc.o[k]);
      const double d_f = dc[k] * sc.c_prev[k];
      da_f[k] = d_f * sc.f[k] * (1.0 - sc.f[k]);
      const double d_i = dc[k] * sc.g[k];
      da_i[k] = d_i * sc.i[k] * (1.0 - sc.i[k]);
      const double d_g = dc[k] * sc.i[k];
      da_c[k] = d_g * (1.0 - sc.g[k] * sc.g[k]);

      dc_next[k] = dc[k] * sc.f[k];
    }

    std::copy(sc.h_prev.begin(), sc.h_prev.end(), z.begin());
    std::copy(sc.x.begin(), sc.x.end(),
              z.begin() + static_cast<std::ptrdiff_t>(h));

    add_outer(out.w_f, da_f, z);
    add_outer(out.w_i, da_i, z);
    add_outer(out.w_c, da_c, z);
    add_outer(out.w_o, da_o, z);
    for (std::size_t k = 0; k < h; ++k) {
      out.b_f[k] += da_f[k];
      out.b_i[k] += da_i[k];
      out.b_c[k] += da_c[k];
      out.b_o[k] += da_o[k];
    }

    std::fill(dz.begin(), dz.end(), 0.0);
    add_matvec_transposed(params.w_f, da_f, dz);
    add_matvec_transposed(params.w_i, da_i, dz);
    add_matvec_transposed(params.w_c, da_c, dz);
    add_matvec_transposed(params.w_o, da_o, dz);
    std::copy(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(h),
              dh_next.begin());
  }

  for (std::size_t k = 0; k < h; ++k) {
    out.init_h[k] += dh_next[k];
    out.init_c[k] += dc_next[k];
  }
}

LstmGrads backward(const LstmParams& params, std::span<const StepCache> caches,
                   std::span<const Vector> upstream_h,
                   const Vector* upstream_final_c) {
  LstmGrads out = zero_grads(params);
  backward(params, caches, upstream_h, upstream_final_c, out);
  return out;
}

Vector BiTrace::output(std::size_t t) const {
  const Vector& hf = fwd.states[t].h;
  const Vector& hb = bwd.states[length - 1 - t].h;
  Vector out;
  out.reserve(hf.size() + hb.size());
  out.insert(out.end(), hf.begin(), hf.end());
  out.insert(out.end(), hb.begin(), hb.end());
  return out;
}

std::size_t BiTrace::output_dim() const {
  return fwd.states[0].h.size() + bwd.states[0].h.size();
}

BiTrace bi_forward(const LstmParams& fwd_params, const LstmParams& bwd_params,
                   const LstmState& init_fwd, const LstmState& init_bwd,
                   std::span<const Vector> xs) {
  if (fwd_params.input() != bwd_params.input()) {
    throw std::invalid_argument("bi_forward: directions disagree on input "
                                "width");
  }
  std::vector<Vector> reversed(xs.rbegin(), xs.rend());
  BiTrace trace;
  trace.fwd = forward(fwd_params, init_fwd, xs);
  trace.bwd = forward(bwd_params, init_bwd, reversed);
  trace.length = xs.size();
  return trace;
}

void bi_backward(const LstmParams& fwd_params, const LstmParams& bwd_params,
                 const BiTrace& trace, std::span<const Vector> upstream,
                 BiGrads& out) {
  if (upstream.size() != trace.length) {
    throw std::invalid_argument("bi_backward: upstream length mismatch");
  }
  const std::size_t hf = fwd_params.hidden();
  const std::size_t hb = bwd_params.hidden();

  std::vector<Vector> up_fwd(trace.length);
  std::vector<Vector> up_bwd(trace.length);
  for (std::size_t t = 0; t < trace.length; ++t) {
    if (upstream[t].size() != hf + hb) {
      throw std::invalid_argument("bi_backward: upstream gradient at position " +
                                  std::to_string(t) + " has wrong length");
    }
    up_fwd[t].assign(upstream[t].begin(),
                     upstream[t].begin() + static_cast<std::ptrdiff_t>(hf));
    // position t of the reversed run corresponds to input position L-1-t
    up_bwd[trace.length - 1 - t].assign(
        upstream[t].begin() + static_cast<std::ptrdiff_t>(hf),
        upstream[t].end());
  }
  backward(fwd_params, trace.fwd.caches, up_fwd, nullptr, out.fwd);
  backward(bwd_params, trace.bwd.caches, up_bwd, nullptr, out.bwd);
}

}  // namespace ilstm
