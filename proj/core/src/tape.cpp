#include "invopt/nn/tape.hpp"

#include <cmath>
#include <numbers>

namespace invopt::nn {

void GradientSet::zero() {
  for (Tensor& t : weights) t.fill(0.0);
  for (Tensor& t : biases) t.fill(0.0);
}

void GradientSet::add_scaled(const GradientSet& other, double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const RealVector& src = other.weights[l].data;
    RealVector& dst = weights[l].data;
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
    const RealVector& srcb = other.biases[l].data;
    RealVector& dstb = biases[l].data;
    for (std::size_t i = 0; i < dstb.size(); ++i) dstb[i] += s * srcb[i];
  }
}

void GradientSet::scale(double factor) {
  for (Tensor& t : weights)
    for (double& x : t.data) x *= factor;
  for (Tensor& t : biases)
    for (double& x : t.data) x *= factor;
}

GradientSet make_gradients(const NetworkSpec& spec) {
  GradientSet g;
  for (const LayerShape& s : plan_layers(spec)) {
    g.weights.emplace_back(s.weight_dims);
    g.biases.emplace_back(s.bias_dims);
  }
  return g;
}

void GradientTape::begin(const RealVector& x) {
  require(!started_, "tape: begin called twice, reset first");
  started_ = true;
  recs_.push_back({Op::leaf, -1, {}, {}, 0.0});
  cur_ = x;
}

void GradientTape::apply_fourier(const FourierMap& map) {
  require(started_, "tape: no forward recorded");
  require(fourier_ == nullptr && spec_ == nullptr, "tape: fourier must come first and once");
  Rec r;
  r.op = Op::fourier;
  r.in = cur_;
  r.out = fourier_features(map, cur_);
  cur_ = r.out;
  fourier_ = &map;
  recs_.push_back(std::move(r));
}

void GradientTape::apply_network(const NetworkSpec& spec, const NetworkState& state) {
  require(started_, "tape: no forward recorded");
  require(spec_ == nullptr, "tape: only one network per tape");
  validate_state(spec, state);
  if (static_cast<int>(cur_.size()) != spec.input_dim)
    throw ConfigError("tape: value length " + std::to_string(cur_.size()) +
                      " does not match network input_dim " + std::to_string(spec.input_dim));
  spec_ = &spec;
  state_ = &state;
  plan_ = plan_layers(spec);
  RealVector next, post;
  for (std::size_t i = 0; i < plan_.size(); ++i) {
    const LayerShape& s = plan_[i];
    Rec r;
    r.op = s.kind == LayerKind::dense ? Op::dense : Op::conv1d;
    r.layer = static_cast<int>(i);
    r.in = cur_;
    if (s.kind == LayerKind::dense)
      detail::dense_forward(state.weights[i], state.biases[i], cur_, next);
    else
      detail::conv1d_forward(state.weights[i], state.biases[i], s.in_length, cur_, next);
    recs_.push_back(std::move(r));
    if (s.is_output) {
      cur_ = next;
    } else {
      detail::activation_forward(s.activation, next, post);
      Rec a;
      a.op = Op::activation;
      a.layer = static_cast<int>(i);
      a.out = post;
      recs_.push_back(std::move(a));
      cur_ = post;
    }
  }
}

double GradientTape::scalar() const {
  require(started_, "tape: no forward recorded");
  if (cur_.size() != 1) throw ConfigError("tape: value is not scalar");
  return cur_[0];
}

const RealVector& GradientTape::value() const {
  require(started_, "tape: no forward recorded");
  return cur_;
}

void GradientTape::apply_squared_error(double target) {
  double pred = scalar();
  Rec r;
  r.op = Op::squared_error;
  r.in = {pred};
  r.a = target;
  recs_.push_back(std::move(r));
  double d = pred - target;
  cur_ = {d * d};
}

void GradientTape::apply_scale(double factor) {
  double v = scalar();
  Rec r;
  r.op = Op::scale_op;
  r.a = factor;
  recs_.push_back(std::move(r));
  cur_ = {v * factor};
}

void GradientTape::apply_expm1() {
  double v = scalar();
  Rec r;
  r.op = Op::expm1_op;
  r.out = {std::expm1(v)};
  cur_ = r.out;
  recs_.push_back(std::move(r));
}

void GradientTape::reset() {
  recs_.clear();
  cur_.clear();
  started_ = false;
  spec_ = nullptr;
  state_ = nullptr;
  fourier_ = nullptr;
  plan_.clear();
}

GradientTape::Backward GradientTape::backward() const {
  Backward out;
  backward_into(out);
  return out;
}

void GradientTape::backward_into(Backward& out) const {
  require(started_, "tape: backward before any forward");
  if (cur_.size() != 1) throw ConfigError("tape: backward requires a scalar loss");
  out.output = cur_[0];
  if (spec_ != nullptr) {
    if (out.grads.weights.size() != plan_.size()) out.grads = make_gradients(*spec_);
    out.grads.zero();
  } else {
    out.grads.weights.clear();
    out.grads.biases.clear();
  }

  RealVector g = {1.0}, gx;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  for (auto it = recs_.rbegin(); it != recs_.rend(); ++it) {
    const Rec& r = *it;
    switch (r.op) {
      case Op::expm1_op:
        g[0] *= r.out[0] + 1.0;
        break;
      case Op::scale_op:
        g[0] *= r.a;
        break;
      case Op::squared_error:
        g[0] *= 2.0 * (r.in[0] - r.a);
        break;
      case Op::activation: {
        const LayerShape& s = plan_[r.layer];
        if (s.activation == Activation::relu) {
          for (std::size_t i = 0; i < g.size(); ++i)
            if (r.out[i] <= 0.0) g[i] = 0.0;
        } else {
          for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - r.out[i] * r.out[i];
        }
        break;
      }
      case Op::dense: {
        const Tensor& w = state_->weights[r.layer];
        const int outn = w.dims[0], inn = w.dims[1];
        Tensor& dw = out.grads.weights[r.layer];
        Tensor& db = out.grads.biases[r.layer];
        for (int o = 0; o < outn; ++o) {
          const double go = g[o];
          db.data[o] += go;
          double* dwrow = dw.data.data() + static_cast<std::size_t>(o) * inn;
          for (int i = 0; i < inn; ++i) dwrow[i] += go * r.in[i];
        }
        gx.assign(inn, 0.0);
        for (int o = 0; o < outn; ++o) {
          const double go = g[o];
          const double* wrow = w.data.data() + static_cast<std::size_t>(o) * inn;
          for (int i = 0; i < inn; ++i) gx[i] += wrow[i] * go;
        }
        g.swap(gx);
        break;
      }
      case Op::conv1d: {
        const Tensor& w = state_->weights[r.layer];
        const LayerShape& s = plan_[r.layer];
        const int out_ch = w.dims[0], in_ch = w.dims[1], k = w.dims[2];
        const int len = s.in_length, pad = k / 2;
        Tensor& dw = out.grads.weights[r.layer];
        Tensor& db = out.grads.biases[r.layer];
        for (int oc = 0; oc < out_ch; ++oc) {
          const double* grow = g.data() + static_cast<std::size_t>(oc) * len;
          double acc = 0.0;
          for (int i = 0; i < len; ++i) acc += grow[i];
          db.data[oc] += acc;
          for (int ic = 0; ic < in_ch; ++ic) {
            const double* xrow = r.in.data() + static_cast<std::size_t>(ic) * len;
            for (int t = 0; t < k; ++t) {
              const int shift = t - pad;
              const int lo = std::max(0, -shift), hi = std::min(len, len - shift);
              double s_acc = 0.0;
              for (int i = lo; i < hi; ++i) s_acc += grow[i] * xrow[i + shift];
              dw.at3(oc, ic, t) += s_acc;
            }
          }
        }
        gx.assign(static_cast<std::size_t>(in_ch) * len, 0.0);
        for (int oc = 0; oc < out_ch; ++oc) {
          const double* grow = g.data() + static_cast<std::size_t>(oc) * len;
          for (int ic = 0; ic < in_ch; ++ic) {
            double* gxrow = gx.data() + static_cast<std::size_t>(ic) * len;
            for (int t = 0; t < k; ++t) {
              const double wv = w.at3(oc, ic, t);
              const int shift = t - pad;
              const int lo = std::max(0, -shift), hi = std::min(len, len - shift);
              for (int i = lo; i < hi; ++i) gxrow[i + shift] += wv * grow[i];
            }
          }
        }
        g.swap(gx);
        break;
      }
      case Op::fourier: {
        const int m = fourier_->rows(), d = fourier_->input_dim();
        gx.assign(d, 0.0);
        for (int rrow = 0; rrow < m; ++rrow) {
          const double coeff = two_pi * (r.out[m + rrow] * g[rrow] - r.out[rrow] * g[m + rrow]);
          for (int j = 0; j < d; ++j) gx[j] += coeff * fourier_->b.at2(rrow, j);
        }
        g.swap(gx);
        break;
      }
      case Op::leaf:
        out.grad_input = g;
        break;
    }
  }
}

}  // namespace invopt::nn
