#include "invopt/nn/network.hpp"

#include <cmath>
#include <sstream>

#include "invopt/rng.hpp"

namespace invopt::nn {

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  os << "]";
  return os.str();
}

void NetworkSpec::validate() const {
  require(input_dim > 0, "network: input_dim must be positive");
  require(output_dim > 0, "network: output_dim must be positive");
  require(kernel_size > 0 && kernel_size % 2 == 1, "network: kernel_size must be odd");
  for (const LayerSpec& l : hidden)
    require(l.width > 0, "network: layer width must be positive");
}

std::vector<LayerShape> plan_layers(const NetworkSpec& spec) {
  spec.validate();
  std::vector<LayerShape> plan;
  int ch = 1, len = spec.input_dim;
  for (const LayerSpec& l : spec.hidden) {
    LayerShape s;
    s.kind = l.kind;
    s.activation = l.activation;
    s.is_output = false;
    s.in_channels = ch;
    s.in_length = len;
    if (l.kind == LayerKind::dense) {
      s.out_channels = 1;
      s.out_length = l.width;
      s.weight_dims = {l.width, ch * len};
      s.bias_dims = {l.width};
    } else {
      s.out_channels = l.width;
      s.out_length = len;
      s.weight_dims = {l.width, ch, spec.kernel_size};
      s.bias_dims = {l.width};
    }
    ch = s.out_channels;
    len = s.out_length;
    plan.push_back(s);
  }
  LayerShape out;
  out.kind = LayerKind::dense;
  out.activation = Activation::tanh;
  out.is_output = true;
  out.in_channels = ch;
  out.in_length = len;
  out.out_channels = 1;
  out.out_length = spec.output_dim;
  out.weight_dims = {spec.output_dim, ch * len};
  out.bias_dims = {spec.output_dim};
  plan.push_back(out);
  return plan;
}

std::size_t parameter_count(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const LayerShape& s : plan_layers(spec)) {
    std::size_t w = 1;
    for (int d : s.weight_dims) w *= static_cast<std::size_t>(d);
    n += w + static_cast<std::size_t>(s.bias_dims[0]);
  }
  return n;
}

NetworkState init_network(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkState st;
  Rng rng = make_rng(derive_seed(seed, "weight-init"));
  for (const LayerShape& s : plan_layers(spec)) {
    Tensor w(s.weight_dims), b(s.bias_dims);
    int fan_in = s.kind == LayerKind::dense ? s.weight_dims[1]
                                            : s.weight_dims[1] * s.weight_dims[2];
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : w.data) x = uniform(rng, -bound, bound);
    st.weights.push_back(w);
    st.biases.push_back(b);
    st.m_w.emplace_back(s.weight_dims);
    st.v_w.emplace_back(s.weight_dims);
    st.m_b.emplace_back(s.bias_dims);
    st.v_b.emplace_back(s.bias_dims);
  }
  st.step_count = 0;
  return st;
}

void validate_state(const NetworkSpec& spec, const NetworkState& state) {
  const auto plan = plan_layers(spec);
  require(state.weights.size() == plan.size() && state.biases.size() == plan.size(),
          "network state: layer count mismatch");
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (state.weights[i].dims != plan[i].weight_dims ||
        state.biases[i].dims != plan[i].bias_dims)
      throw ConfigError("network state: tensor shape mismatch at layer " + std::to_string(i) +
                        ", weights " + state.weights[i].shape_string());
  }
}

namespace detail {

void dense_forward(const Tensor& w, const Tensor& b, const RealVector& x, RealVector& y) {
  const int out = w.dims[0], in = w.dims[1];
  y.assign(out, 0.0);
  const double* wp = w.data.data();
  for (int o = 0; o < out; ++o) {
    double acc = b.data[o];
    const double* row = wp + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void conv1d_forward(const Tensor& w, const Tensor& b, int in_len, const RealVector& x,
                    RealVector& y) {
  const int out_ch = w.dims[0], in_ch = w.dims[1], k = w.dims[2];
  const int pad = k / 2;
  y.assign(static_cast<std::size_t>(out_ch) * in_len, 0.0);
  for (int oc = 0; oc < out_ch; ++oc) {
    double* yrow = y.data() + static_cast<std::size_t>(oc) * in_len;
    for (int i = 0; i < in_len; ++i) yrow[i] = b.data[oc];
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* xrow = x.data() + static_cast<std::size_t>(ic) * in_len;
      for (int t = 0; t < k; ++t) {
        const double wv = w.at3(oc, ic, t);
        const int shift = t - pad;
        const int lo = std::max(0, -shift), hi = std::min(in_len, in_len - shift);
        for (int i = lo; i < hi; ++i) yrow[i] += wv * xrow[i + shift];
      }
    }
  }
}

void activation_forward(Activation act, const RealVector& pre, RealVector& post) {
  post.resize(pre.size());
  if (act == Activation::relu) {
    for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
  } else {
    for (std::size_t i = 0; i < pre.size(); ++i) post[i] = std::tanh(pre[i]);
  }
}

}  // namespace detail

RealVector forward(const NetworkSpec& spec, const NetworkState& state, const RealVector& input) {
  const auto plan = plan_layers(spec);
  validate_state(spec, state);
  if (static_cast<int>(input.size()) != spec.input_dim)
    throw ConfigError("forward: input length " + std::to_string(input.size()) +
                      " does not match input_dim " + std::to_string(spec.input_dim));
  RealVector cur = input, next, post;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const LayerShape& s = plan[i];
    if (s.kind == LayerKind::dense)
      detail::dense_forward(state.weights[i], state.biases[i], cur, next);
    else
      detail::conv1d_forward(state.weights[i], state.biases[i], s.in_length, cur, next);
    if (s.is_output) {
      cur = next;
    } else {
      detail::activation_forward(s.activation, next, post);
      cur = post;
    }
  }
  return cur;
}

}  // namespace invopt::nn
