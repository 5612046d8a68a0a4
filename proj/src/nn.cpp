#include "fewvec/nn.hpp"

#include <algorithm>
#include <cmath>

#include "fewvec/rng.hpp"

namespace fewvec {

namespace {

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(std::string(what) + ": dimension " + std::to_string(got) +
                ", expected " + std::to_string(want));
  }
}

// Hidden pre-activations W1 x + b1.
std::vector<double> hidden_pre(const Mlp& mlp, std::span<const double> x) {
  std::vector<double> z(mlp.hidden);
  for (std::size_t h = 0; h < mlp.hidden; ++h) {
    double acc = mlp.b1[h];
    const double* row = mlp.w1.data() + h * mlp.in_dim;
    for (std::size_t i = 0; i < mlp.in_dim; ++i) acc += row[i] * x[i];
    z[h] = acc;
  }
  return z;
}

}  // namespace

Mlp Mlp::init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
              std::uint64_t seed) {
  if (in_dim < 1 || hidden < 1 || out_dim < 1) {
    throw Error("mlp dimensions must be >= 1");
  }
  Mlp mlp;
  mlp.in_dim = in_dim;
  mlp.hidden = hidden;
  mlp.out_dim = out_dim;
  mlp.w1.resize(hidden * in_dim);
  mlp.b1.assign(hidden, 0.0);
  mlp.w2.resize(out_dim * hidden);
  mlp.b2.assign(out_dim, 0.0);

  Rng rng(seed);
  double bound1 = std::sqrt(6.0 / static_cast<double>(in_dim + hidden));
  for (double& w : mlp.w1) w = rng.uniform(-bound1, bound1);
  double bound2 = std::sqrt(6.0 / static_cast<double>(hidden + out_dim));
  for (double& w : mlp.w2) w = rng.uniform(-bound2, bound2);
  return mlp;
}

std::vector<double> forward(const Mlp& mlp, std::span<const double> x) {
  check_dim(x.size(), mlp.in_dim, "forward input");
  std::vector<double> z = hidden_pre(mlp, x);
  for (double& v : z) v = std::max(v, 0.0);
  std::vector<double> y(mlp.out_dim);
  for (std::size_t o = 0; o < mlp.out_dim; ++o) {
    double acc = mlp.b2[o];
    const double* row = mlp.w2.data() + o * mlp.hidden;
    for (std::size_t h = 0; h < mlp.hidden; ++h) acc += row[h] * z[h];
    y[o] = acc;
  }
  return y;
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  check_dim(pred.size(), target.size(), "mse_loss");
  double acc = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

MlpGradients backward(const Mlp& mlp, std::span<const double> x,
                      std::span<const double> target) {
  check_dim(x.size(), mlp.in_dim, "backward input");
  check_dim(target.size(), mlp.out_dim, "backward target");

  std::vector<double> z = hidden_pre(mlp, x);
  std::vector<double> a(z);
  for (double& v : a) v = std::max(v, 0.0);

  // dL/dy for L = mean((y - t)^2)
  std::vector<double> dy(mlp.out_dim);
  for (std::size_t o = 0; o < mlp.out_dim; ++o) {
    double acc = mlp.b2[o];
    const double* row = mlp.w2.data() + o * mlp.hidden;
    for (std::size_t h = 0; h < mlp.hidden; ++h) acc += row[h] * a[h];
    dy[o] = 2.0 * (acc - target[o]) / static_cast<double>(mlp.out_dim);
  }

  MlpGradients g;
  g.w2.resize(mlp.w2.size());
  g.b2.resize(mlp.out_dim);
  for (std::size_t o = 0; o < mlp.out_dim; ++o) {
    g.b2[o] = dy[o];
    double* grow = g.w2.data() + o * mlp.hidden;
    for (std::size_t h = 0; h < mlp.hidden; ++h) grow[h] = dy[o] * a[h];
  }

  std::vector<double> dz(mlp.hidden, 0.0);
  for (std::size_t h = 0; h < mlp.hidden; ++h) {
    if (z[h] <= 0.0) continue;  // relu subgradient at 0 is 0
    double acc = 0;
    for (std::size_t o = 0; o < mlp.out_dim; ++o) {
      acc += dy[o] * mlp.w2[o * mlp.hidden + h];
    }
    dz[h] = acc;
  }

  g.w1.resize(mlp.w1.size());
  g.b1.resize(mlp.hidden);
  for (std::size_t h = 0; h < mlp.hidden; ++h) {
    g.b1[h] = dz[h];
    double* grow = g.w1.data() + h * mlp.in_dim;
    for (std::size_t i = 0; i < mlp.in_dim; ++i) grow[i] = dz[h] * x[i];
  }
  return g;
}

AdamState::AdamState(std::size_t size, AdamParams params)
    : params_(params), m_(size, 0.0), v_(size, 0.0) {}

void AdamState::step(std::span<double> parameters,
                     std::span<const double> gradients) {
  check_dim(parameters.size(), m_.size(), "adam parameters");
  check_dim(gradients.size(), m_.size(), "adam gradients");
  ++t_;
  double c1 = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    double g = gradients[i];
    m_[i] = params_.beta1 * m_[i] + (1.0 - params_.beta1) * g;
    v_[i] = params_.beta2 * v_[i] + (1.0 - params_.beta2) * g * g;
    double mhat = m_[i] / c1;
    double vhat = v_[i] / c2;
    parameters[i] -= params_.rate * mhat / (std::sqrt(vhat) + params_.epsilon);
  }
}

double mean_loss(const Mlp& mlp, const std::vector<TrainSample>& samples) {
  if (samples.empty()) throw Error("mean_loss over empty sample set");
  double acc = 0;
  for (const TrainSample& s : samples) {
    acc += mse_loss(forward(mlp, s.x), s.target);
  }
  return acc / static_cast<double>(samples.size());
}

namespace {

struct FlatView {
  // Concatenated parameter order: w1, b1, w2, b2.
  static std::vector<double> gather(const Mlp& mlp) {
    std::vector<double> flat;
    flat.reserve(mlp.parameter_count());
    flat.insert(flat.end(), mlp.w1.begin(), mlp.w1.end());
    flat.insert(flat.end(), mlp.b1.begin(), mlp.b1.end());
    flat.insert(flat.end(), mlp.w2.begin(), mlp.w2.end());
    flat.insert(flat.end(), mlp.b2.begin(), mlp.b2.end());
    return flat;
  }
  static void scatter(std::span<const double> flat, Mlp& mlp) {
    auto it = flat.begin();
    std::copy(it, it + mlp.w1.size(), mlp.w1.begin());
    it += mlp.w1.size();
    std::copy(it, it + mlp.b1.size(), mlp.b1.begin());
    it += mlp.b1.size();
    std::copy(it, it + mlp.w2.size(), mlp.w2.begin());
    it += mlp.w2.size();
    std::copy(it, it + mlp.b2.size(), mlp.b2.begin());
  }
  static std::vector<double> gather_grads(const MlpGradients& g) {
    std::vector<double> flat;
    flat.reserve(g.w1.size() + g.b1.size() + g.w2.size() + g.b2.size());
    flat.insert(flat.end(), g.w1.begin(), g.w1.end());
    flat.insert(flat.end(), g.b1.begin(), g.b1.end());
    flat.insert(flat.end(), g.w2.begin(), g.w2.end());
    flat.insert(flat.end(), g.b2.begin(), g.b2.end());
    return flat;
  }
};

}  // namespace

Mlp train_mlp(Mlp mlp, const std::vector<TrainSample>& samples,
              const MlpTrainOptions& options) {
  if (samples.empty()) throw Error("train_mlp: empty sample set");
  for (const TrainSample& s : samples) {
    check_dim(s.x.size(), mlp.in_dim, "train_mlp sample input");
    check_dim(s.target.size(), mlp.out_dim, "train_mlp sample target");
  }
  if (options.epochs <= 0) return mlp;
  std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);

  const Mlp initial = mlp;
  Rng rng(options.seed);

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::size_t holdout = 0;
  if (options.holdout_fraction > 0) {
    holdout = static_cast<std::size_t>(
        std::ceil(options.holdout_fraction * static_cast<double>(samples.size())));
    if (holdout >= samples.size()) holdout = 0;  // too few samples to split
  }
  std::vector<std::size_t> val(order.begin(), order.begin() + holdout);
  std::vector<std::size_t> train(order.begin() + holdout, order.end());

  auto loss_over = [&](const Mlp& model, const std::vector<std::size_t>& idx) {
    double acc = 0;
    for (std::size_t i : idx) {
      acc += mse_loss(forward(model, samples[i].x), samples[i].target);
    }
    return acc / static_cast<double>(idx.size());
  };

  AdamState adam(mlp.parameter_count(), options.adam);
  std::vector<double> flat = FlatView::gather(mlp);
  std::vector<double> grad(flat.size());

  Mlp best = mlp;
  double best_val = val.empty() ? 0.0 : loss_over(mlp, val);
  int stale_epochs = 0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(train);
    for (std::size_t start = 0; start < train.size(); start += batch_size) {
      std::size_t end = std::min(train.size(), start + batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const TrainSample& s = samples[train[b]];
        MlpGradients g = backward(mlp, s.x, s.target);
        std::vector<double> flat_g = FlatView::gather_grads(g);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += flat_g[i];
      }
      double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= inv;
      adam.step(flat, grad);
      FlatView::scatter(flat, mlp);
    }
    if (!val.empty()) {
      double v = loss_over(mlp, val);
      if (v < best_val) {
        best_val = v;
        best = mlp;
        stale_epochs = 0;
      } else if (++stale_epochs >= options.patience) {
        mlp = best;
        break;
      }
    }
  }
  if (!val.empty()) mlp = best;

  // Never return parameters worse than the starting point.
  if (mean_loss(mlp, samples) > mean_loss(initial, samples)) return initial;
  return mlp;
}

}  // namespace fewvec
