#include "sqn/mlp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sqn/errors.hpp"
#include "sqn/rng.hpp"

namespace sqn {

namespace {

/// First-order dual number a + b*eps. Running the backward pass in Dual
/// arithmetic with w seeded as (w, v) yields the directional derivative of
/// the gradient, i.e. the exact Hessian-vector product.
struct Dual {
  double a = 0.0;
  double b = 0.0;

  Dual() = default;
  Dual(double value) : a(value) {}  // NOLINT: implicit by design
  Dual(double value, double deriv) : a(value), b(deriv) {}
};

inline Dual operator+(Dual x, Dual y) { return {x.a + y.a, x.b + y.b}; }
inline Dual operator-(Dual x, Dual y) { return {x.a - y.a, x.b - y.b}; }
inline Dual operator-(Dual x) { return {-x.a, -x.b}; }
inline Dual operator*(Dual x, Dual y) {
  return {x.a * y.a, x.a * y.b + x.b * y.a};
}
inline Dual operator/(Dual x, Dual y) {
  const double inv = 1.0 / y.a;
  const double q = x.a * inv;
  return {q, (x.b - q * y.b) * inv};
}
inline Dual& operator+=(Dual& x, Dual y) {
  x = x + y;
  return x;
}
inline Dual exp(Dual x) {
  const double e = std::exp(x.a);
  return {e, x.b * e};
}
inline Dual log(Dual x) { return {std::log(x.a), x.b / x.a}; }

inline double primal(double x) { return x; }
inline double primal(Dual x) { return x.a; }

template <typename S>
S sigmoid(S x) {
  using std::exp;
  if (primal(x) >= 0.0) {
    const S t = exp(-x);
    return S(1.0) / (S(1.0) + t);
  }
  const S t = exp(x);
  return t / (S(1.0) + t);
}

template <typename S>
struct Workspace {
  // acts[l] holds the activations entering weight layer l; acts[L] = logits.
  std::vector<std::vector<S>> acts;
  std::vector<std::vector<S>> deltas;
  std::vector<S> probs;

  explicit Workspace(const MlpSpec& spec) {
    const std::size_t layers = spec.weight_layers();
    acts.resize(layers + 1);
    deltas.resize(layers);
    for (std::size_t l = 0; l <= layers; ++l) {
      acts[l].assign(static_cast<std::size_t>(spec.layer_sizes[l]), S(0.0));
    }
    for (std::size_t l = 0; l < layers; ++l) {
      deltas[l].assign(static_cast<std::size_t>(spec.layer_sizes[l + 1]),
                       S(0.0));
    }
    probs.assign(static_cast<std::size_t>(spec.output_dim()), S(0.0));
  }
};

/// Forward pass for one sample. Returns the softmax cross-entropy loss and
/// leaves softmax probabilities in ws.probs. Throws NumericOverflowError
/// naming the sample when the forward values go non-finite.
template <typename S>
S forward_sample(const MlpSpec& spec, std::span<const S> w, const Vector& x,
                 int label, std::size_t sample_index, Workspace<S>& ws) {
  using std::exp;
  using std::log;
  const std::size_t layers = spec.weight_layers();
  for (std::size_t i = 0; i < x.size(); ++i) ws.acts[0][i] = S(x[i]);

  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = static_cast<std::size_t>(spec.layer_sizes[l]);
    const std::size_t out = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    const S* wl = w.data() + off;
    const S* bl = wl + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      S z = bl[o];
      const S* row = wl + o * in;
      for (std::size_t i = 0; i < in; ++i) z += row[i] * ws.acts[l][i];
      ws.acts[l + 1][o] = (l + 1 < layers) ? sigmoid(z) : z;
    }
    off += in * out + out;
  }

  const std::vector<S>& logits = ws.acts[layers];
  double max_logit = primal(logits[0]);
  for (const S& z : logits) {
    if (!std::isfinite(primal(z))) {
      throw NumericOverflowError("non-finite forward value at sample " +
                                 std::to_string(sample_index));
    }
    max_logit = std::max(max_logit, primal(z));
  }

  S denom(0.0);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    ws.probs[c] = exp(logits[c] - S(max_logit));
    denom += ws.probs[c];
  }
  for (std::size_t c = 0; c < logits.size(); ++c) {
    ws.probs[c] = ws.probs[c] / denom;
  }
  // loss = logsumexp(z) - z[label]
  return log(denom) + S(max_logit) - logits[static_cast<std::size_t>(label)];
}

/// Backward pass for one sample; accumulates unscaled parameter gradients.
template <typename S>
void backward_sample(const MlpSpec& spec, std::span<const S> w, int label,
                     Workspace<S>& ws, std::span<S> grad) {
  const std::size_t layers = spec.weight_layers();
  std::vector<S>& last = ws.deltas[layers - 1];
  for (std::size_t c = 0; c < last.size(); ++c) {
    last[c] = ws.probs[c] - S(c == static_cast<std::size_t>(label) ? 1.0 : 0.0);
  }

  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(spec.layer_sizes[l]) *
               static_cast<std::size_t>(spec.layer_sizes[l + 1]) +
           static_cast<std::size_t>(spec.layer_sizes[l + 1]);
  }

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = static_cast<std::size_t>(spec.layer_sizes[l]);
    const std::size_t out = static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    const S* wl = w.data() + offsets[l];
    S* gw = grad.data() + offsets[l];
    S* gb = gw + in * out;
    const std::vector<S>& delta = ws.deltas[l];
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += delta[o];
      S* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += delta[o] * ws.acts[l][i];
      }
    }
    if (l == 0) break;
    std::vector<S>& prev = ws.deltas[l - 1];
    for (std::size_t i = 0; i < in; ++i) {
      S acc(0.0);
      for (std::size_t o = 0; o < out; ++o) {
        acc += wl[o * in + i] * delta[o];
      }
      const S a = ws.acts[l][i];  // sigmoid output of layer l-1
      prev[i] = acc * a * (S(1.0) - a);
    }
  }
}

/// Mean loss over the index set; fills grad (mean) when non-empty.
template <typename S>
S loss_and_grad(const MlpSpec& spec, std::span<const S> w, const Dataset& data,
                std::span<const int> indices, std::span<S> grad) {
  Workspace<S> ws(spec);
  for (S& g : grad) g = S(0.0);
  S total(0.0);
  for (int idx : indices) {
    const std::size_t i = static_cast<std::size_t>(idx);
    total += forward_sample(spec, w, data.inputs[i], data.labels[i], i, ws);
    if (!grad.empty()) backward_sample(spec, w, data.labels[i], ws, grad);
  }
  const S inv_n(1.0 / static_cast<double>(indices.size()));
  for (S& g : grad) g = g * inv_n;
  return total * inv_n;
}

std::vector<int> all_indices(std::size_t n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

/// Non-finite weights can be masked by sigmoid saturation downstream, so the
/// parameter vector is checked once up front.
void require_finite_params(const Vector& w) {
  if (!all_finite(w)) {
    throw NumericOverflowError("non-finite parameter vector");
  }
}

}  // namespace

std::size_t MlpSpec::param_count() const {
  std::size_t d = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    d += static_cast<std::size_t>(layer_sizes[l]) *
             static_cast<std::size_t>(layer_sizes[l + 1]) +
         static_cast<std::size_t>(layer_sizes[l + 1]);
  }
  return d;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw ConfigError("network spec needs at least input and output sizes");
  }
  for (int s : layer_sizes) {
    if (s < 1) throw ConfigError("network layer sizes must be positive");
  }
}

Vector init_params(const MlpSpec& spec, std::uint64_t seed, double scale) {
  spec.validate();
  if (scale < 0.0) throw ConfigError("init scale must be non-negative");
  SplitMix64 rng(seed);
  Vector w(spec.param_count());
  for (double& v : w) v = rng.next_uniform(-scale, scale);
  return w;
}

LossAccuracy loss_accuracy(const MlpSpec& spec, const Vector& w,
                           const Dataset& data) {
  spec.validate();
  data.validate(spec.output_dim());
  if (w.size() != spec.param_count()) {
    throw DimensionError("parameter vector length mismatch");
  }
  Workspace<double> ws(spec);
  std::span<const double> wspan(w);
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += forward_sample<double>(spec, wspan, data.inputs[i],
                                    data.labels[i], i, ws);
    const std::vector<double>& logits = ws.acts[spec.weight_layers()];
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.size(); ++c) {
      if (logits[c] > logits[best]) best = c;
    }
    if (best == static_cast<std::size_t>(data.labels[i])) ++correct;
  }
  return {total / static_cast<double>(data.size()),
          static_cast<double>(correct) / static_cast<double>(data.size())};
}

MlpObjective::MlpObjective(MlpSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  spec_.validate();
  data_.validate(spec_.output_dim());
  if (static_cast<int>(data_.input_dim()) != spec_.input_dim()) {
    throw DimensionError("dataset width does not match network input size");
  }
}

double MlpObjective::value(const Vector& w) const {
  require_finite_params(w);
  const auto idx = all_indices(data_.size());
  return loss_and_grad<double>(spec_, w, data_, idx, {});
}

Vector MlpObjective::gradient(const Vector& w) const {
  require_finite_params(w);
  const auto idx = all_indices(data_.size());
  Vector grad(w.size(), 0.0);
  loss_and_grad<double>(spec_, w, data_, idx, grad);
  return grad;
}

Vector MlpObjective::gradient_batch(const Vector& w,
                                    std::span<const int> indices) const {
  require_finite_params(w);
  if (indices.empty()) throw DimensionError("empty mini-batch");
  Vector grad(w.size(), 0.0);
  loss_and_grad<double>(spec_, w, data_, indices, grad);
  return grad;
}

Vector MlpObjective::hvp(const Vector& w, const Vector& v) const {
  require_finite_params(w);
  const auto idx = all_indices(data_.size());
  std::vector<Dual> wd(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) wd[i] = Dual(w[i], v[i]);
  std::vector<Dual> gd(w.size());
  loss_and_grad<Dual>(spec_, wd, data_, idx, gd);
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = gd[i].b;
  return out;
}

}  // namespace sqn
