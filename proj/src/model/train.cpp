#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "slicefix/eval.hpp"
#include "slicefix/model.hpp"

namespace slicefix {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Adam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<double> m, v;
  long t = 0;

  explicit Adam(double rate, std::size_t n) : lr(rate), m(n, 0.0), v(n, 0.0) {}

  void step(std::vector<double> &theta, const std::vector<double> &g) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    const long n = static_cast<long>(theta.size());
    for (long j = 0; j < n; ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      theta[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
    }
  }
};

} // namespace

double top1_accuracy(const std::vector<Sample> &samples, const ModelParams &params, const Vocabulary &vocab) {
  if (samples.empty()) return 0.0;
  const int n = static_cast<int>(samples.size());
  std::vector<char> hit(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Prediction p = beam_infer(samples[i].graph, params, vocab, 1);
    hit[i] = !p.ranked.empty() && exact_match(p.ranked[0].edit, samples[i].gold).overall;
  }
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / n;
}

TrainResult train(const std::vector<Sample> &train_set, const std::vector<Sample> &val_set,
                  const Vocabulary &vocab, const ModelConfig &config, const EpochCallback &on_epoch) {
  config.validate();
  if (train_set.empty() || val_set.empty()) throw std::invalid_argument("training and validation sets must be nonempty");
  TrainResult result;
  ModelParams params = init_params(vocab, config);
  Adam adam(config.learning_rate, params.theta.size());
  const Exec exec = config.parallel ? Exec::Parallel : Exec::Serial;

  result.params = params;
  double best = -1.0;
  std::vector<int> order(train_set.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(splitmix(config.seed) ^ static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const Sample *> batch;
      std::vector<std::optional<std::uint64_t>> seeds;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(&train_set[order[i]]);
        seeds.push_back(splitmix(config.seed ^ splitmix((static_cast<std::uint64_t>(epoch) << 32) + order[i])));
      }
      LossGrad lg = batch_loss_grad(batch, params, seeds, exec);
      if (!std::isfinite(lg.loss))
        throw TrainingDiverged("non-finite loss in epoch " + std::to_string(epoch) + " at batch starting with " +
                               batch.front()->id);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (double &g : lg.grad) g *= scale;
      adam.step(params.theta, lg.grad);
      epoch_loss += lg.loss;
    }
    for (double x : params.theta)
      if (!std::isfinite(x)) throw TrainingDiverged("non-finite parameter after epoch " + std::to_string(epoch));
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    rec.val_top1 = top1_accuracy(val_set, params, vocab);
    result.history.push_back(rec);
    if (rec.val_top1 >= best) {
      best = rec.val_top1;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

} // namespace slicefix
