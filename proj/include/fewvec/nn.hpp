#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fewvec/error.hpp"

namespace fewvec {

// One-hidden-layer perceptron: y = W2 * relu(W1 * x + b1) + b2.
struct Mlp {
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  std::size_t out_dim = 0;
  std::vector<double> w1;  // hidden x in_dim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // out_dim x hidden, row-major
  std::vector<double> b2;  // out_dim

  // Uniform init in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static Mlp init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
                  std::uint64_t seed);

  std::size_t parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
};

std::vector<double> forward(const Mlp& mlp, std::span<const double> x);

// Mean of squared componentwise differences.
double mse_loss(std::span<const double> pred, std::span<const double> target);

struct MlpGradients {
  std::vector<double> w1, b1, w2, b2;
};

// Analytic gradients of mse_loss(forward(mlp, x), target) w.r.t. every
// parameter. The ReLU subgradient at 0 is taken as 0.
MlpGradients backward(const Mlp& mlp, std::span<const double> x,
                      std::span<const double> target);

struct AdamParams {
  double rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators for a flat parameter block.
class AdamState {
 public:
  explicit AdamState(std::size_t size, AdamParams params = {});

  void step(std::span<double> parameters, std::span<const double> gradients);

  std::int64_t steps_taken() const { return t_; }

 private:
  AdamParams params_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

struct TrainSample {
  std::vector<double> x;
  std::vector<double> target;
};

struct MlpTrainOptions {
  int epochs = 50;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  AdamParams adam;
  // Fraction of samples held out for early stopping; <= 0 disables it.
  double holdout_fraction = 0.1;
  int patience = 5;
};

// Adam over seeded-shuffled mini-batches. Returns whichever of (trained,
// initial) parameters has the lower loss on the full sample set, so
// training can never make the model worse than its starting point.
Mlp train_mlp(Mlp mlp, const std::vector<TrainSample>& samples,
              const MlpTrainOptions& options);

// Mean mse_loss over a sample set.
double mean_loss(const Mlp& mlp, const std::vector<TrainSample>& samples);

}  // namespace fewvec
