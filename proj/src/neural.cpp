#include "plab/neural.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "plab/errors.hpp"
#include "plab/rng.hpp"

namespace plab::nn {
namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using ConstMap = Eigen::Map<const Mat>;
using MutMap = Eigen::Map<Mat>;
using ConstVecMap = Eigen::Map<const Vec>;
using MutVecMap = Eigen::Map<Vec>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

struct LstmLayerLayout {
  std::size_t in = 0;
  std::size_t w = 0;  // (in + h) x 4h, column-major
  std::size_t b = 0;  // 4h
};

struct LstmLayout {
  std::vector<LstmLayerLayout> layers;
  std::size_t head_w = 0;
  std::size_t head_b = 0;
  std::size_t total = 0;
};

LstmLayout lstm_layout(const LSTMSpec& s) {
  LstmLayout out;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < s.num_layers; ++l) {
    LstmLayerLayout layer;
    layer.in = l == 0 ? s.input_dim : s.hidden;
    layer.w = offset;
    offset += (layer.in + s.hidden) * 4 * s.hidden;
    layer.b = offset;
    offset += 4 * s.hidden;
    out.layers.push_back(layer);
  }
  out.head_w = offset;
  offset += s.hidden;
  out.head_b = offset;
  offset += 1;
  out.total = offset;
  return out;
}

void check_params(const NetSpec& spec, std::span<const double> params) {
  if (params.size() != count_params(spec)) {
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, spec needs " +
                     std::to_string(count_params(spec)));
  }
}

void check_data(const NetSpec& spec, std::size_t steps, std::size_t features) {
  std::visit(Overloaded{[&](const MLPSpec& s) {
                          if (steps != 1 || features != s.layer_widths.front()) {
                            throw ShapeError("MLP expects inputs of width " +
                                             std::to_string(s.layer_widths.front()));
                          }
                        },
                        [&](const LSTMSpec& s) {
                          if (steps < 1 || features != s.input_dim) {
                            throw ShapeError("LSTM expects sequences with " + std::to_string(s.input_dim) +
                                             " features");
                          }
                        }},
             spec);
}

// ---------------------------------------------------------------- MLP ----

Mat gather_rows(const SampleSet& data, std::span<const std::size_t> batch) {
  Mat x(batch.size(), data.features());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto in = data.input(batch[r]);
    for (std::size_t f = 0; f < data.features(); ++f) x(r, f) = in[f];
  }
  return x;
}

struct MlpPass {
  std::vector<Mat> pre;   // pre-activations per layer
  std::vector<Mat> post;  // post[0] = input, post[l+1] = activation of layer l
};

MlpPass mlp_forward(const MLPSpec& s, const double* p, Mat x) {
  MlpPass pass;
  const std::size_t layers = s.layer_widths.size() - 1;
  pass.post.push_back(std::move(x));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(s.layer_widths[l]);
    const auto out = static_cast<Eigen::Index>(s.layer_widths[l + 1]);
    ConstMap w(p + offset, in, out);
    offset += static_cast<std::size_t>(in * out);
    ConstVecMap b(p + offset, out);
    offset += static_cast<std::size_t>(out);
    Mat z = pass.post.back() * w;
    z.rowwise() += b.transpose();
    pass.post.push_back(l + 1 < layers ? Mat(z.cwiseMax(0.0)) : z);
    pass.pre.push_back(std::move(z));
  }
  return pass;
}

void mlp_backward(const MLPSpec& s, const double* p, const MlpPass& pass, Mat dz, double* g) {
  const std::size_t layers = s.layer_widths.size() - 1;
  std::vector<std::size_t> offsets(layers);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += s.layer_widths[l] * s.layer_widths[l + 1] + s.layer_widths[l + 1];
  }
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(s.layer_widths[l]);
    const auto out = static_cast<Eigen::Index>(s.layer_widths[l + 1]);
    MutMap gw(g + offsets[l], in, out);
    MutVecMap gb(g + offsets[l] + static_cast<std::size_t>(in * out), out);
    gw.noalias() += pass.post[l].transpose() * dz;
    gb += dz.colwise().sum().transpose();
    if (l > 0) {
      ConstMap w(p + offsets[l], in, out);
      Mat da = dz * w.transpose();
      dz = da.cwiseProduct((pass.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
}

// --------------------------------------------------------------- LSTM ----

// Inputs of every step stacked by time: rows [t * B, (t + 1) * B) hold step t.
Mat gather_steps(const SampleSet& data, std::span<const std::size_t> batch) {
  const std::size_t f_count = data.features();
  const std::size_t bsz = batch.size();
  Mat x(static_cast<Eigen::Index>(data.steps() * bsz), static_cast<Eigen::Index>(f_count));
  for (std::size_t r = 0; r < bsz; ++r) {
    const auto in = data.input(batch[r]);
    for (std::size_t t = 0; t < data.steps(); ++t) {
      for (std::size_t f = 0; f < f_count; ++f) {
        x(static_cast<Eigen::Index>(t * bsz + r), static_cast<Eigen::Index>(f)) = in[t * f_count + f];
      }
    }
  }
  return x;
}

// Per-layer activations, each stacked by time like gather_steps.
struct LstmLayerCache {
  Mat input;   // T*B x in
  Mat gates;   // T*B x 4h, activated i f g o
  Mat c_prev;  // T*B x h, cell state entering each step
  Mat h_prev;  // T*B x h, hidden state entering each step
  Mat tanh_c;  // T*B x h
  Mat output;  // T*B x h
};

struct LstmPass {
  std::vector<LstmLayerCache> layers;
  Mat top;  // relu(h_T) of the last layer
  Vec output;
};

LstmPass lstm_forward(const LSTMSpec& s, const LstmLayout& lay, const double* p, const SampleSet& data,
                      std::span<const std::size_t> batch) {
  const auto bsz = static_cast<Eigen::Index>(batch.size());
  const auto h = static_cast<Eigen::Index>(s.hidden);
  const auto steps = static_cast<Eigen::Index>(data.steps());
  LstmPass pass;
  pass.layers.resize(s.num_layers);

  Mat layer_in = gather_steps(data, batch);
  for (std::size_t l = 0; l < s.num_layers; ++l) {
    LstmLayerCache& cache = pass.layers[l];
    const auto in = static_cast<Eigen::Index>(lay.layers[l].in);
    ConstMap w(p + lay.layers[l].w, in + h, 4 * h);
    ConstVecMap b(p + lay.layers[l].b, 4 * h);

    cache.input = std::move(layer_in);
    cache.gates.noalias() = cache.input * w.topRows(in);
    cache.gates.rowwise() += b.transpose();
    cache.c_prev.resize(steps * bsz, h);
    cache.h_prev.resize(steps * bsz, h);
    cache.tanh_c.resize(steps * bsz, h);
    cache.output.resize(steps * bsz, h);

    Mat hprev = Mat::Zero(bsz, h);
    Mat cprev = Mat::Zero(bsz, h);
    for (Eigen::Index t = 0; t < steps; ++t) {
      auto g = cache.gates.middleRows(t * bsz, bsz);
      g.noalias() += hprev * w.bottomRows(h);
      g.leftCols(2 * h) = (1.0 + (-g.leftCols(2 * h).array()).exp()).inverse().matrix();
      g.middleCols(2 * h, h) = g.middleCols(2 * h, h).array().tanh().matrix();
      g.rightCols(h) = (1.0 + (-g.rightCols(h).array()).exp()).inverse().matrix();
      cache.c_prev.middleRows(t * bsz, bsz) = cprev;
      cache.h_prev.middleRows(t * bsz, bsz) = hprev;
      cprev = g.middleCols(h, h).cwiseProduct(cprev) + g.leftCols(h).cwiseProduct(g.middleCols(2 * h, h));
      auto tc = cache.tanh_c.middleRows(t * bsz, bsz);
      tc = cprev.array().tanh().matrix();
      hprev = g.rightCols(h).cwiseProduct(tc);
      cache.output.middleRows(t * bsz, bsz) = hprev;
    }
    layer_in = cache.output;
  }

  pass.top = layer_in.bottomRows(bsz).cwiseMax(0.0);
  ConstVecMap hw(p + lay.head_w, h);
  pass.output = pass.top * hw;
  pass.output.array() += p[lay.head_b];
  return pass;
}

void lstm_backward(const LSTMSpec& s, const LstmLayout& lay, const double* p, const LstmPass& pass,
                   const Vec& dy, double* g) {
  const auto h = static_cast<Eigen::Index>(s.hidden);
  const Eigen::Index bsz = dy.size();
  const Eigen::Index steps = pass.layers.front().gates.rows() / bsz;

  ConstVecMap hw(p + lay.head_w, h);
  MutVecMap ghw(g + lay.head_w, h);
  ghw.noalias() += pass.top.transpose() * dy;
  g[lay.head_b] += dy.sum();

  // Gradient arriving at each layer's hidden output, stacked by time.
  Mat d_above = Mat::Zero(steps * bsz, h);
  d_above.bottomRows(bsz) =
      (dy * hw.transpose()).cwiseProduct((pass.top.array() > 0.0).cast<double>().matrix());

  for (std::size_t l = s.num_layers; l-- > 0;) {
    const LstmLayerCache& cache = pass.layers[l];
    const auto in = static_cast<Eigen::Index>(lay.layers[l].in);
    ConstMap w(p + lay.layers[l].w, in + h, 4 * h);
    MutMap gw(g + lay.layers[l].w, in + h, 4 * h);
    MutVecMap gb(g + lay.layers[l].b, 4 * h);

    Mat dg(steps * bsz, 4 * h);
    Mat dh_next = Mat::Zero(bsz, h);
    Eigen::ArrayXXd dc_next = Eigen::ArrayXXd::Zero(bsz, h);
    for (Eigen::Index t = steps; t-- > 0;) {
      const auto gates = cache.gates.middleRows(t * bsz, bsz);
      const auto gi = gates.leftCols(h).array();
      const auto gf = gates.middleCols(h, h).array();
      const auto gg = gates.middleCols(2 * h, h).array();
      const auto go = gates.rightCols(h).array();
      const auto tc = cache.tanh_c.middleRows(t * bsz, bsz).array();

      const Eigen::ArrayXXd dh = d_above.middleRows(t * bsz, bsz).array() + dh_next.array();
      const Eigen::ArrayXXd dc = dc_next + dh * go * (1.0 - tc.square());
      auto dgt = dg.middleRows(t * bsz, bsz);
      dgt.rightCols(h) = (dh * tc * go * (1.0 - go)).matrix();
      dgt.leftCols(h) = (dc * gg * gi * (1.0 - gi)).matrix();
      dgt.middleCols(h, h) = (dc * cache.c_prev.middleRows(t * bsz, bsz).array() * gf * (1.0 - gf)).matrix();
      dgt.middleCols(2 * h, h) = (dc * gi * (1.0 - gg.square())).matrix();
      dc_next = dc * gf;
      dh_next.noalias() = dgt * w.bottomRows(h).transpose();
    }

    gw.topRows(in).noalias() += cache.input.transpose() * dg;
    gw.bottomRows(h).noalias() += cache.h_prev.transpose() * dg;
    gb += dg.colwise().sum().transpose();
    if (l > 0) d_above.noalias() = dg * w.topRows(in).transpose();
  }
}

// ------------------------------------------------------------ shared ----

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

Vec batch_outputs(const NetSpec& spec, const double* p, const SampleSet& data,
                  std::span<const std::size_t> batch) {
  return std::visit(Overloaded{[&](const MLPSpec& s) -> Vec {
                                 MlpPass pass = mlp_forward(s, p, gather_rows(data, batch));
                                 return pass.post.back().col(0);
                               },
                               [&](const LSTMSpec& s) -> Vec {
                                 return lstm_forward(s, lstm_layout(s), p, data, batch).output;
                               }},
                    spec);
}

constexpr std::size_t kEvalChunk = 512;

}  // namespace

// ---------------------------------------------------------- public API ----

void validate(const NetSpec& spec) {
  std::visit(Overloaded{[](const MLPSpec& s) {
                          if (s.layer_widths.size() < 2) throw SpecError("MLP needs at least 2 layer widths");
                          for (std::size_t w : s.layer_widths) {
                            if (w == 0) throw SpecError("MLP layer widths must be positive");
                          }
                        },
                        [](const LSTMSpec& s) {
                          if (s.input_dim == 0 || s.hidden == 0 || s.num_layers == 0) {
                            throw SpecError("LSTM dimensions must be positive");
                          }
                        }},
             spec);
}

std::size_t count_params(const NetSpec& spec) {
  validate(spec);
  return std::visit(Overloaded{[](const MLPSpec& s) {
                                 std::size_t total = 0;
                                 for (std::size_t l = 0; l + 1 < s.layer_widths.size(); ++l) {
                                   total += s.layer_widths[l] * s.layer_widths[l + 1] + s.layer_widths[l + 1];
                                 }
                                 return total;
                               },
                               [](const LSTMSpec& s) { return lstm_layout(s).total; }},
                    spec);
}

Params init(const NetSpec& spec, std::uint64_t seed) {
  Params params(count_params(spec), 0.0);
  rng::Stream stream(rng::derive(seed, {0x1417}));
  std::visit(Overloaded{[&](const MLPSpec& s) {
                          std::size_t offset = 0;
                          for (std::size_t l = 0; l + 1 < s.layer_widths.size(); ++l) {
                            const std::size_t in = s.layer_widths[l];
                            const std::size_t out = s.layer_widths[l + 1];
                            const double limit = std::sqrt(6.0 / static_cast<double>(in));
                            for (std::size_t k = 0; k < in * out; ++k) params[offset + k] = stream.uniform(-limit, limit);
                            offset += in * out + out;
                          }
                        },
                        [&](const LSTMSpec& s) {
                          const double limit = 1.0 / std::sqrt(static_cast<double>(s.hidden));
                          for (double& v : params) v = stream.uniform(-limit, limit);
                        }},
             spec);
  return params;
}

SampleSet::SampleSet(std::size_t steps, std::size_t features) : steps_(steps), features_(features) {
  if (steps == 0 || features == 0) throw ShapeError("sample shape must be non-empty");
}

void SampleSet::add(std::span<const double> input, double target) {
  if (input.size() != steps_ * features_) {
    throw ShapeError("sample has " + std::to_string(input.size()) + " values, expected " +
                     std::to_string(steps_ * features_));
  }
  inputs_.insert(inputs_.end(), input.begin(), input.end());
  targets_.push_back(target);
}

void SampleSet::reserve(std::size_t n) {
  inputs_.reserve(n * steps_ * features_);
  targets_.reserve(n);
}

std::span<const double> SampleSet::input(std::size_t i) const {
  return std::span<const double>(inputs_).subspan(i * steps_ * features_, steps_ * features_);
}

SampleSet SampleSet::subset(std::span<const std::size_t> indices) const {
  SampleSet out(steps_, features_);
  out.reserve(indices.size());
  for (std::size_t i : indices) out.add(input(i), target(i));
  return out;
}

double forward(const NetSpec& spec, std::span<const double> params, std::span<const double> input) {
  check_params(spec, params);
  const std::size_t features = std::visit(
      Overloaded{[](const MLPSpec& s) { return s.layer_widths.front(); },
                 [](const LSTMSpec& s) { return s.input_dim; }},
      spec);
  if (input.empty() || input.size() % features != 0) {
    throw ShapeError("input of " + std::to_string(input.size()) + " values does not match the spec");
  }
  SampleSet one(input.size() / features, features);
  check_data(spec, one.steps(), one.features());
  one.add(input, 0.0);
  const std::size_t idx = 0;
  return batch_outputs(spec, params.data(), one, std::span(&idx, 1))(0);
}

std::vector<double> predict(const NetSpec& spec, std::span<const double> params, const SampleSet& data) {
  check_params(spec, params);
  check_data(spec, data.steps(), data.features());
  std::vector<double> out(data.size());
  const auto all = iota_indices(data.size());
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, data.size() - start);
    const Vec y = batch_outputs(spec, params.data(), data, std::span(all).subspan(start, n));
    for (std::size_t i = 0; i < n; ++i) out[start + i] = y(static_cast<Eigen::Index>(i));
  }
  return out;
}

double mse(const NetSpec& spec, std::span<const double> params, const SampleSet& data) {
  if (data.empty()) throw ArgError("MSE of an empty sample set");
  const auto y = predict(spec, params, data);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - data.target(i);
    sum += e * e;
  }
  return sum / static_cast<double>(y.size());
}

double loss_and_gradient(const NetSpec& spec, std::span<const double> params, const SampleSet& data,
                         std::span<const std::size_t> batch, std::span<double> grad) {
  check_params(spec, params);
  check_data(spec, data.steps(), data.features());
  if (batch.empty()) throw ArgError("empty batch");
  if (grad.size() != params.size()) throw ShapeError("gradient buffer size mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);

  const double scale = 2.0 / static_cast<double>(batch.size());
  Vec targets(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t r = 0; r < batch.size(); ++r) targets(static_cast<Eigen::Index>(r)) = data.target(batch[r]);

  return std::visit(
      Overloaded{[&](const MLPSpec& s) {
                   MlpPass pass = mlp_forward(s, params.data(), gather_rows(data, batch));
                   const Vec err = pass.post.back().col(0) - targets;
                   const double loss = err.squaredNorm() / static_cast<double>(batch.size());
                   if (!std::isfinite(loss)) throw TrainError("non-finite loss", 0);
                   mlp_backward(s, params.data(), pass, Mat(err * scale), grad.data());
                   return loss;
                 },
                 [&](const LSTMSpec& s) {
                   const LstmLayout lay = lstm_layout(s);
                   LstmPass pass = lstm_forward(s, lay, params.data(), data, batch);
                   const Vec err = pass.output - targets;
                   const double loss = err.squaredNorm() / static_cast<double>(batch.size());
                   if (!std::isfinite(loss)) throw TrainError("non-finite loss", 0);
                   lstm_backward(s, lay, params.data(), pass, Vec(err * scale), grad.data());
                   return loss;
                 }},
      spec);
}

std::vector<double> backward(const NetSpec& spec, std::span<const double> params, const SampleSet& data) {
  std::vector<double> grad(params.size());
  const auto all = iota_indices(data.size());
  loss_and_gradient(spec, params, data, all, grad);
  return grad;
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw ArgError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(Optimizer optimizer) { return optimizer == Optimizer::sgd ? "sgd" : "adam"; }

TrainReport train(const NetSpec& spec, const SampleSet& train_data, const SampleSet& val,
                  const TrainConfig& config) {
  return train_from(spec, init(spec, config.seed), train_data, val, config);
}

TrainReport train_from(const NetSpec& spec, Params initial, const SampleSet& train_data, const SampleSet& val,
                       const TrainConfig& config) {
  check_params(spec, initial);
  check_data(spec, train_data.steps(), train_data.features());
  if (train_data.empty()) throw ArgError("training data is empty");
  if (!(config.learning_rate > 0.0)) throw ArgError("learning rate must be > 0");
  if (!(config.final_lr_fraction > 0.0 && config.final_lr_fraction <= 1.0)) {
    throw ArgError("final_lr_fraction must lie in (0, 1]");
  }
  if (config.batch_size == 0) throw ArgError("batch size must be positive");

  // Validation: provided, or a seeded 15% hold-out of the training data.
  const SampleSet* fit = &train_data;
  const SampleSet* check = &val;
  SampleSet derived_fit(train_data.steps(), train_data.features());
  SampleSet derived_val(train_data.steps(), train_data.features());
  if (val.empty() && config.track_validation) {
    auto order = iota_indices(train_data.size());
    rng::Stream split_stream(rng::derive(config.seed, {0x5a11}));
    rng::shuffle(std::span(order), split_stream);
    const std::size_t n_val = train_data.size() * 15 / 100;
    if (n_val == 0) {
      check = &train_data;
    } else {
      derived_val = train_data.subset(std::span(order).first(n_val));
      derived_fit = train_data.subset(std::span(order).subspan(n_val));
      fit = &derived_fit;
      check = &derived_val;
    }
  }

  TrainReport report;
  report.final_params = std::move(initial);
  Params& params = report.final_params;
  std::vector<double> grad(params.size());
  std::vector<double> m(params.size(), 0.0);
  std::vector<double> v(params.size(), 0.0);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  std::size_t step = 0;

  auto order = iota_indices(fit->size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng::Stream stream(rng::derive(config.seed, {0xe90c, epoch}));
    rng::shuffle(std::span(order), stream);
    const double lr =
        config.epochs > 1
            ? config.learning_rate * std::pow(config.final_lr_fraction, static_cast<double>(epoch) /
                                                                          static_cast<double>(config.epochs - 1))
            : config.learning_rate;
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      const auto batch = std::span(order).subspan(start, n);
      double loss = 0.0;
      try {
        loss = loss_and_gradient(spec, params, *fit, batch, grad);
      } catch (const TrainError&) {
        throw TrainError("non-finite training loss", epoch);
      }
      weighted += loss * static_cast<double>(n);
      ++step;
      if (config.optimizer == Optimizer::sgd) {
        for (std::size_t k = 0; k < params.size(); ++k) params[k] -= lr * grad[k];
      } else {
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        for (std::size_t k = 0; k < params.size(); ++k) {
          m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grad[k];
          v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
          params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + kEps);
        }
      }
    }
    const double train_loss = weighted / static_cast<double>(order.size());
    if (!std::isfinite(train_loss)) throw TrainError("training diverged", epoch);
    report.train_loss_curve.push_back(train_loss);
    if (config.track_validation) {
      const double val_loss = mse(spec, params, *check);
      if (!std::isfinite(val_loss)) throw TrainError("validation loss diverged", epoch);
      report.val_loss_curve.push_back(val_loss);
    }
  }
  return report;
}

// ------------------------------------------------------- serialization ----

namespace {

constexpr char kMagic[8] = {'P', 'E', 'R', 'L', 'N', 'N', '1', '\0'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw ArgError("truncated parameter file");
  return to_little(v);
}

}  // namespace

void save_params(const std::filesystem::path& path, const NetSpec& spec, std::span<const double> params) {
  check_params(spec, params);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgError("cannot open '" + path.string() + "' for writing");
  os.write(kMagic, sizeof kMagic);
  std::visit(Overloaded{[&](const MLPSpec& s) {
                          put_u64(os, 0);
                          put_u64(os, s.layer_widths.size());
                          for (std::size_t w : s.layer_widths) put_u64(os, w);
                        },
                        [&](const LSTMSpec& s) {
                          put_u64(os, 1);
                          put_u64(os, s.input_dim);
                          put_u64(os, s.hidden);
                          put_u64(os, s.num_layers);
                        }},
             spec);
  for (double p : params) put_u64(os, std::bit_cast<std::uint64_t>(p));
  if (!os) throw ArgError("failed writing '" + path.string() + "'");
}

std::pair<NetSpec, Params> load_params(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgError("cannot open '" + path.string() + "'");
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ArgError("'" + path.string() + "' is not a PERLNN1 parameter file");
  }
  NetSpec spec;
  const std::uint64_t kind = get_u64(is);
  if (kind == 0) {
    MLPSpec s;
    const std::uint64_t count = get_u64(is);
    if (count > 1024) throw ArgError("implausible layer count in parameter file");
    for (std::uint64_t i = 0; i < count; ++i) s.layer_widths.push_back(get_u64(is));
    spec = s;
  } else if (kind == 1) {
    LSTMSpec s;
    s.input_dim = get_u64(is);
    s.hidden = get_u64(is);
    s.num_layers = get_u64(is);
    spec = s;
  } else {
    throw ArgError("unknown network kind in parameter file");
  }
  validate(spec);
  Params params(count_params(spec));
  for (double& p : params) p = std::bit_cast<double>(get_u64(is));
  if (is.peek() != std::char_traits<char>::eof()) throw ArgError("trailing bytes in parameter file");
  return {spec, params};
}

}  // namespace plab::nn
