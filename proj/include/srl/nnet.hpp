#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "srl/error.hpp"
#include "srl/rng.hpp"
#include "srl/tensor.hpp"

namespace srl::nn {

template <typename T>
inline T sigmoid(T x) {
  return T{1} / (T{1} + std::exp(-x));
}

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

template <typename T>
struct GateParams {
  Tensor<T> w_x;  // hidden x input
  Tensor<T> w_h;  // hidden x hidden
  Tensor<T> b;    // hidden
};

/// Standard LSTM without peepholes. Forget-gate bias is initialized to one,
/// everything else follows the caller's initializer.
template <typename T>
struct LstmParams {
  GateParams<T> input, forget, output, candidate;
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;

  static LstmParams sized(std::size_t in, std::size_t hidden) {
    LstmParams p;
    p.input_size = in;
    p.hidden_size = hidden;
    for (GateParams<T>* g : {&p.input, &p.forget, &p.output, &p.candidate}) {
      g->w_x = Tensor<T>::matrix(hidden, in);
      g->w_h = Tensor<T>::matrix(hidden, hidden);
      g->b = Tensor<T>::vector(hidden);
    }
    return p;
  }

  LstmParams zeros_like() const {
    return sized(input_size, hidden_size);
  }

  template <typename F>
  void for_each(const std::string& prefix, F&& f) {
    f(prefix + ".i.w_x", input.w_x);
    f(prefix + ".i.w_h", input.w_h);
    f(prefix + ".i.b", input.b);
    f(prefix + ".f.w_x", forget.w_x);
    f(prefix + ".f.w_h", forget.w_h);
    f(prefix + ".f.b", forget.b);
    f(prefix + ".o.w_x", output.w_x);
    f(prefix + ".o.w_h", output.w_h);
    f(prefix + ".o.b", output.b);
    f(prefix + ".g.w_x", candidate.w_x);
    f(prefix + ".g.w_h", candidate.w_h);
    f(prefix + ".g.b", candidate.b);
  }

  template <typename F>
  void for_each(const std::string& prefix, F&& f) const {
    const_cast<LstmParams*>(this)->for_each(
        prefix, [&](const std::string& n, Tensor<T>& t) {
          f(n, static_cast<const Tensor<T>&>(t));
        });
  }
};

template <typename T>
struct LstmStepTrace {
  Tensor<T> x;
  Tensor<T> i, f, o, g, c, tanh_c, h;
};

template <typename T>
struct LstmTrace {
  std::vector<LstmStepTrace<T>> steps;
  const Tensor<T>& h(std::size_t t) const { return steps[t].h; }
  const Tensor<T>& final_h() const { return steps.back().h; }
  std::size_t length() const { return steps.size(); }
};

/// One LSTM step: i,f,o = sigmoid(..), g = tanh(..),
/// c = f*c_prev + i*g, h = o*tanh(c). h_prev/c_prev may be null at t=0.
template <typename T>
inline LstmStepTrace<T> lstm_step(
    const LstmParams<T>& p, const Tensor<T>& x,
    const Tensor<std::type_identity_t<T>>* h_prev = nullptr,
    const Tensor<std::type_identity_t<T>>* c_prev = nullptr) {
  if (x.size() != p.input_size)
    throw NumericError("lstm_step: input has " + std::to_string(x.size()) +
                       " entries, expected " + std::to_string(p.input_size));
  const std::size_t H = p.hidden_size;
  LstmStepTrace<T> s;
  s.x = x;
  auto gate = [&](const GateParams<T>& g) {
    Tensor<T> a = g.b;
    matvec_add(g.w_x, x, a);
    if (h_prev != nullptr) matvec_add(g.w_h, *h_prev, a);
    return a;
  };
  s.i = gate(p.input);
  s.f = gate(p.forget);
  s.o = gate(p.output);
  s.g = gate(p.candidate);
  for (std::size_t k = 0; k < H; ++k) {
    s.i[k] = sigmoid(s.i[k]);
    s.f[k] = sigmoid(s.f[k]);
    s.o[k] = sigmoid(s.o[k]);
    s.g[k] = std::tanh(s.g[k]);
  }
  s.c = Tensor<T>::vector(H);
  for (std::size_t k = 0; k < H; ++k) {
    const T prev = c_prev != nullptr ? (*c_prev)[k] : T{0};
    s.c[k] = s.f[k] * prev + s.i[k] * s.g[k];
  }
  s.tanh_c = Tensor<T>::vector(H);
  s.h = Tensor<T>::vector(H);
  for (std::size_t k = 0; k < H; ++k) {
    s.tanh_c[k] = std::tanh(s.c[k]);
    s.h[k] = s.o[k] * s.tanh_c[k];
  }
  return s;
}

template <typename T>
inline LstmTrace<T> lstm_forward(const LstmParams<T>& p,
                                 const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw NumericError("lstm_forward: empty input sequence");
  LstmTrace<T> trace;
  trace.steps.reserve(xs.size());
  const Tensor<T>* h_prev = nullptr;
  const Tensor<T>* c_prev = nullptr;
  for (const Tensor<T>& x : xs) {
    trace.steps.push_back(lstm_step(p, x, h_prev, c_prev));
    h_prev = &trace.steps.back().h;
    c_prev = &trace.steps.back().c;
  }
  return trace;
}

/// Backpropagation through time. `dh` carries the loss gradient wrt h_t per
/// step (zeros where the loss does not touch a step). Parameter gradients
/// accumulate into `grads`; per-step input gradients accumulate into `dx`.
template <typename T>
inline void lstm_backward(const LstmParams<T>& p, const LstmTrace<T>& trace,
                          const std::vector<Tensor<T>>& dh,
                          LstmParams<T>& grads, std::vector<Tensor<T>>& dx) {
  const std::size_t H = p.hidden_size;
  const std::size_t n = trace.steps.size();
  if (dh.size() != n) throw NumericError("lstm_backward: dh length mismatch");
  if (dx.size() != n) throw NumericError("lstm_backward: dx length mismatch");
  Tensor<T> dc = Tensor<T>::vector(H);
  Tensor<T> dh_chain = Tensor<T>::vector(H);
  Tensor<T> d_i(std::vector<std::size_t>{H}), d_f(std::vector<std::size_t>{H}),
      d_o(std::vector<std::size_t>{H}), d_g(std::vector<std::size_t>{H});
  for (std::size_t ti = n; ti-- > 0;) {
    const LstmStepTrace<T>& s = trace.steps[ti];
    const Tensor<T>* h_prev = ti > 0 ? &trace.steps[ti - 1].h : nullptr;
    const Tensor<T>* c_prev = ti > 0 ? &trace.steps[ti - 1].c : nullptr;
    for (std::size_t k = 0; k < H; ++k) {
      const T dht = dh[ti][k] + dh_chain[k];
      const T dok = dht * s.tanh_c[k];
      dc[k] += dht * s.o[k] * (T{1} - s.tanh_c[k] * s.tanh_c[k]);
      const T dik = dc[k] * s.g[k];
      const T dgk = dc[k] * s.i[k];
      const T prev = c_prev != nullptr ? (*c_prev)[k] : T{0};
      const T dfk = dc[k] * prev;
      d_i[k] = dik * s.i[k] * (T{1} - s.i[k]);
      d_f[k] = dfk * s.f[k] * (T{1} - s.f[k]);
      d_o[k] = dok * s.o[k] * (T{1} - s.o[k]);
      d_g[k] = dgk * (T{1} - s.g[k] * s.g[k]);
      dc[k] *= s.f[k];
    }
    dh_chain.fill(T{0});
    auto backprop_gate = [&](const GateParams<T>& gp, GateParams<T>& gg,
                             const Tensor<T>& da) {
      outer_add(da, s.x, gg.w_x);
      if (h_prev != nullptr) outer_add(da, *h_prev, gg.w_h);
      add(da, gg.b);
      matvec_transposed_add(gp.w_x, da, dx[ti]);
      if (h_prev != nullptr) matvec_transposed_add(gp.w_h, da, dh_chain);
    };
    backprop_gate(p.input, grads.input, d_i);
    backprop_gate(p.forget, grads.forget, d_f);
    backprop_gate(p.output, grads.output, d_o);
    backprop_gate(p.candidate, grads.candidate, d_g);
  }
}

// ---------------------------------------------------------------------------
// Bidirectional wrapper
// ---------------------------------------------------------------------------

/// Forward LSTM over xs left-to-right plus a second LSTM over the reversed
/// sequence. Per-position states and the final state of each direction are
/// both exposed.
template <typename T>
struct BiLstmTrace {
  LstmTrace<T> fwd;
  LstmTrace<T> bwd;  // runs over reversed input
  std::size_t length() const { return fwd.length(); }
  const Tensor<T>& h_fwd(std::size_t t) const { return fwd.steps[t].h; }
  const Tensor<T>& h_bwd(std::size_t t) const {
    return bwd.steps[length() - 1 - t].h;
  }
  const Tensor<T>& final_fwd() const { return fwd.final_h(); }
  const Tensor<T>& final_bwd() const { return bwd.final_h(); }
};

template <typename T>
inline BiLstmTrace<T> bilstm_forward(const LstmParams<T>& fwd,
                                     const LstmParams<T>& bwd,
                                     const std::vector<Tensor<T>>& xs) {
  if (xs.empty()) throw NumericError("bilstm: empty input sequence");
  BiLstmTrace<T> trace;
  trace.fwd = lstm_forward(fwd, xs);
  std::vector<Tensor<T>> rev(xs.rbegin(), xs.rend());
  trace.bwd = lstm_forward(bwd, rev);
  return trace;
}

/// dh_fwd/dh_bwd are per ORIGINAL position; dx accumulates both directions.
template <typename T>
inline void bilstm_backward(const LstmParams<T>& fwd, const LstmParams<T>& bwd,
                            const BiLstmTrace<T>& trace,
                            const std::vector<Tensor<T>>& dh_fwd,
                            const std::vector<Tensor<T>>& dh_bwd,
                            LstmParams<T>& fwd_grads, LstmParams<T>& bwd_grads,
                            std::vector<Tensor<T>>& dx) {
  const std::size_t n = trace.length();
  lstm_backward(fwd, trace.fwd, dh_fwd, fwd_grads, dx);
  std::vector<Tensor<T>> dh_rev(dh_bwd.rbegin(), dh_bwd.rend());
  std::vector<Tensor<T>> dx_rev(n, Tensor<T>::vector(dx[0].size()));
  lstm_backward(bwd, trace.bwd, dh_rev, bwd_grads, dx_rev);
  for (std::size_t t = 0; t < n; ++t) add(dx_rev[n - 1 - t], dx[t]);
}

// ---------------------------------------------------------------------------
// Dense layer, softmax, losses
// ---------------------------------------------------------------------------

template <typename T>
inline Tensor<T> linear(const Tensor<T>& w, const Tensor<T>& b,
                        const Tensor<T>& x) {
  if (b.size() != w.rows())
    throw NumericError("linear: bias/weight shape mismatch");
  Tensor<T> y = b;
  matvec_add(w, x, y);
  return y;
}

template <typename T>
inline Tensor<T> log_softmax(const Tensor<T>& z) {
  Tensor<T> out = z;
  T mx = z[0];
  for (std::size_t i = 1; i < z.size(); ++i) mx = std::max(mx, z[i]);
  T sum{0};
  for (std::size_t i = 0; i < z.size(); ++i) sum += std::exp(z[i] - mx);
  const T lse = mx + std::log(sum);
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

template <typename T>
inline Tensor<T> softmax(const Tensor<T>& z) {
  Tensor<T> out = log_softmax(z);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return out;
}

template <typename T>
inline T nll(const Tensor<T>& probs, std::size_t gold) {
  if (gold >= probs.size()) throw NumericError("nll: gold index out of range");
  return -std::log(probs[gold]);
}

template <typename T>
inline T nll_from_log(const Tensor<T>& logp, std::size_t gold) {
  if (gold >= logp.size()) throw NumericError("nll: gold index out of range");
  return -logp[gold];
}

/// Gradient of nll(softmax(z), gold) wrt z, given log-probabilities.
template <typename T>
inline Tensor<T> nll_softmax_backward(const Tensor<T>& logp, std::size_t gold) {
  Tensor<T> dz = Tensor<T>::vector(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) dz[i] = std::exp(logp[i]);
  dz[gold] -= T{1};
  return dz;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

/// Orthogonal matrix via Householder QR of a seeded Gaussian draw. For
/// non-square shapes the leading rows/columns of the square factor are kept,
/// so the smaller dimension stays orthonormal.
template <typename T>
inline Tensor<T> orthogonal_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0)
    throw NumericError("orthogonal_init: empty shape");
  const std::size_t m = std::max(rows, cols);
  const std::size_t n = std::min(rows, cols);
  Tensor<double> a = Tensor<double>::matrix(m, n);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.gaussian();

  // Householder vectors stored per column.
  std::vector<std::vector<double>> vs(n);
  std::vector<double> diag(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < m; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      diag[k] = 0.0;
      continue;
    }
    const double alpha = a(k, k) > 0 ? -norm : norm;
    std::vector<double> v(m - k, 0.0);
    v[0] = a(k, k) - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = a(i, k);
    double vtv = 0.0;
    for (double x : v) vtv += x * x;
    if (vtv > 0.0) {
      for (std::size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i - k] * a(i, j);
        s *= 2.0 / vtv;
        for (std::size_t i = k; i < m; ++i) a(i, j) -= s * v[i - k];
      }
    }
    diag[k] = a(k, k);
    vs[k] = std::move(v);
  }

  // Q = H_0 .. H_{n-1} applied to the first n columns of the identity.
  Tensor<double> q = Tensor<double>::matrix(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t k = n; k-- > 0;) {
    if (vs[k].empty()) continue;
    double vtv = 0.0;
    for (double x : vs[k]) vtv += x * x;
    if (vtv == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += vs[k][i - k] * q(i, j);
      s *= 2.0 / vtv;
      for (std::size_t i = k; i < m; ++i) q(i, j) -= s * vs[k][i - k];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (diag[j] < 0.0)
      for (std::size_t i = 0; i < m; ++i) q(i, j) = -q(i, j);
  }

  Tensor<T> out = Tensor<T>::matrix(rows, cols);
  if (rows >= cols) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        out(i, j) = static_cast<T>(q(i, j));
  } else {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        out(i, j) = static_cast<T>(q(j, i));
  }
  return out;
}

template <typename T>
inline void orthogonal_fill(Tensor<T>& t, Rng& rng) {
  if (t.rank() != 2) throw NumericError("orthogonal_fill: rank-2 shape required");
  t = orthogonal_init<T>(t.rows(), t.cols(), rng);
}

template <typename T>
inline void gaussian_fill(Tensor<T>& t, Rng& rng, double scale) {
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = static_cast<T>(scale * rng.gaussian());
}

template <typename T>
inline void init_lstm(LstmParams<T>& p, Rng& rng) {
  for (GateParams<T>* g : {&p.input, &p.forget, &p.output, &p.candidate}) {
    orthogonal_fill(g->w_x, rng);
    orthogonal_fill(g->w_h, rng);
    g->b.fill(T{0});
  }
  p.forget.b.fill(T{1});  // conventional stabilizer
}

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

template <typename T>
inline double global_norm(const std::vector<Tensor<T>*>& grads) {
  double sq = 0.0;
  for (const Tensor<T>* g : grads)
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double v = static_cast<double>((*g)[i]);
      sq += v * v;
    }
  return std::sqrt(sq);
}

/// Rescales all gradients to `max_norm` when the global L2 norm exceeds it.
/// Returns the pre-clip norm. Non-finite gradients abort training.
template <typename T>
inline double clip_gradients(const std::vector<Tensor<T>*>& grads,
                             double max_norm) {
  const double norm = global_norm(grads);
  if (!std::isfinite(norm))
    throw NumericError("non-finite gradient norm; training aborted");
  if (norm > max_norm && norm > 0.0) {
    const T scale = static_cast<T>(max_norm / norm);
    for (Tensor<T>* g : grads)
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] *= scale;
  }
  return norm;
}

template <typename T>
inline void sgd_step(const std::vector<Tensor<T>*>& params,
                     const std::vector<const Tensor<T>*>& grads, double lr) {
  if (params.size() != grads.size())
    throw NumericError("sgd_step: parameter/gradient count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& p = *params[k];
    const Tensor<T>& g = *grads[k];
    check_same_shape(p, g, "sgd_step");
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] -= static_cast<T>(lr) * g[i];
  }
}

/// Adam with the canonical beta/epsilon defaults. Moment buffers are laid
/// out to match the parameter list given on the first call.
template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
};

template <typename T>
inline void adam_step(AdamState<T>& state,
                      const std::vector<Tensor<T>*>& params,
                      const std::vector<const Tensor<T>*>& grads, double lr) {
  if (params.size() != grads.size())
    throw NumericError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Tensor<T>* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  if (state.m.size() != params.size())
    throw NumericError("adam_step: state does not match parameter list");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& p = *params[k];
    const Tensor<T>& g = *grads[k];
    check_same_shape(p, g, "adam_step");
    Tensor<T>& m = state.m[k];
    Tensor<T>& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = state.beta1 * static_cast<double>(m[i]) +
                        (1.0 - state.beta1) * gi;
      const double vi = state.beta2 * static_cast<double>(v[i]) +
                        (1.0 - state.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      p[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + state.eps));
    }
  }
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking (64-bit shadow mode)
// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_name;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Central-difference check of analytic gradients. `loss` re-runs the
/// forward pass against the current parameter values; it must not depend on
/// the backward implementation being verified.
inline GradCheckResult finite_difference_check(
    const std::vector<std::pair<std::string, Tensor<double>*>>& params,
    const std::vector<std::pair<std::string, const Tensor<double>*>>& analytic,
    const std::function<double()>& loss, double step = 1e-3) {
  if (params.size() != analytic.size())
    throw NumericError("gradient check: parameter/gradient list mismatch");
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<double>& p = *params[k].second;
    const Tensor<double>& g = *analytic[k].second;
    check_same_shape(p, g, "gradient check");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + step;
      const double up = loss();
      p[i] = saved - step;
      const double down = loss();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = g[i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double err = scale < 1e-6 ? 0.0 : std::abs(a - numeric) / scale;
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_name = params[k].first + "[" + std::to_string(i) + "]";
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace srl::nn
