#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace plab::nn {

// Fully connected network: ReLU on hidden layers, identity on the output.
// layer_widths lists input, hidden..., output widths.
struct MLPSpec {
  std::vector<std::size_t> layer_widths;
  friend bool operator==(const MLPSpec&, const MLPSpec&) = default;
};

// Stacked LSTM (gates i, f, g, o with sigmoid/tanh) whose last hidden state
// passes through a ReLU and a linear head to a scalar.
struct LSTMSpec {
  std::size_t input_dim = 5;
  std::size_t hidden = 32;
  std::size_t num_layers = 2;
  friend bool operator==(const LSTMSpec&, const LSTMSpec&) = default;
};

using NetSpec = std::variant<MLPSpec, LSTMSpec>;
using Params = std::vector<double>;

// Throws SpecError for empty or zero widths.
void validate(const NetSpec& spec);

// MLP: sum of w_in * w_out + w_out. LSTM layer: 4 (h (h + i) + h); upper
// layers take i = h; head h + 1.
std::size_t count_params(const NetSpec& spec);

// Deterministic in (spec, seed). MLP weights are He-uniform
// (+-sqrt(6 / fan_in)) with zero biases; every LSTM weight, bias and the head
// are uniform in +-1/sqrt(hidden).
Params init(const NetSpec& spec, std::uint64_t seed);

// n inputs of shape steps x features (row-major, contiguous) with one scalar
// target each. MLP inputs have steps == 1 and features == input width.
class SampleSet {
 public:
  SampleSet(std::size_t steps, std::size_t features);

  void add(std::span<const double> input, double target);
  void reserve(std::size_t n);

  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }
  std::size_t steps() const { return steps_; }
  std::size_t features() const { return features_; }
  std::span<const double> input(std::size_t i) const;
  double target(std::size_t i) const { return targets_[i]; }
  std::span<const double> targets() const { return targets_; }
  void set_target(std::size_t i, double value) { targets_[i] = value; }

  // New set holding the given samples in order.
  SampleSet subset(std::span<const std::size_t> indices) const;

 private:
  std::size_t steps_;
  std::size_t features_;
  std::vector<double> inputs_;
  std::vector<double> targets_;
};

// Throws ShapeError when params or input do not match the spec.
double forward(const NetSpec& spec, std::span<const double> params, std::span<const double> input);

// Outputs for every sample in the set.
std::vector<double> predict(const NetSpec& spec, std::span<const double> params, const SampleSet& data);

double mse(const NetSpec& spec, std::span<const double> params, const SampleSet& data);

// Mean squared error over batch (indices into data) and its exact gradient,
// written into grad. Throws TrainError (epoch 0) on a non-finite loss.
double loss_and_gradient(const NetSpec& spec, std::span<const double> params, const SampleSet& data,
                         std::span<const std::size_t> batch, std::span<double> grad);

// Gradient of the mean MSE over the whole set.
std::vector<double> backward(const NetSpec& spec, std::span<const double> params, const SampleSet& data);

enum class Optimizer { sgd, adam };

Optimizer parse_optimizer(std::string_view name);
std::string_view to_string(Optimizer optimizer);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;  // Adam uses beta1 0.9, beta2 0.999, eps 1e-8
  // The step size decays geometrically from learning_rate to
  // learning_rate * final_lr_fraction at the last epoch.
  double final_lr_fraction = 1.0;
  // When false no validation loss is computed and val_loss_curve stays empty.
  bool track_validation = true;
};

struct TrainReport {
  std::vector<double> train_loss_curve;  // sample-weighted mean of the epoch's minibatch losses
  std::vector<double> val_loss_curve;    // MSE on the validation set after each epoch
  Params final_params;
};

// Seeded shuffle + minibatch steps per epoch. When val is empty (and
// validation is tracked), 15% of the training samples (seeded) are held out;
// sets too small for a hold-out validate on the training data. Throws TrainError
// with the epoch index on divergence.
TrainReport train(const NetSpec& spec, const SampleSet& train_data, const SampleSet& val,
                  const TrainConfig& config);

// Same, starting from the given parameters instead of init(spec, seed).
TrainReport train_from(const NetSpec& spec, Params initial, const SampleSet& train_data,
                       const SampleSet& val, const TrainConfig& config);

// Binary parameter file: "PERLNN1\0", a spec descriptor (u64 LE kind 0 = MLP
// followed by the width count and widths; kind 1 = LSTM followed by
// input_dim, hidden, num_layers), then the parameters as f64 LE in layer
// order.
void save_params(const std::filesystem::path& path, const NetSpec& spec, std::span<const double> params);
std::pair<NetSpec, Params> load_params(const std::filesystem::path& path);

}  // namespace plab::nn
