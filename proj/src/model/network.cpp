#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "slicefix/model.hpp"

namespace slicefix {

void ModelConfig::validate() const {
  if (d < 1) throw std::invalid_argument("embedding dimension must be at least 1");
  if (layers < 1) throw std::invalid_argument("layer count must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (edit_steps < 1) throw std::invalid_argument("edit steps must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

bool edit_has_kind(EditOp op) { return op == EditOp::AddNode || op == EditOp::RepType; }

ParamLayout ParamLayout::make(int d, int layers, int kinds, int values) {
  ParamLayout p;
  p.d = d;
  p.layers = layers;
  p.kinds = kinds;
  p.values = values;
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  std::size_t at = 0;
  auto block = [&](const std::string &name, std::size_t size) {
    p.blocks.push_back(ParamBlock{name, at, size});
    std::size_t off = at;
    at += size;
    return off;
  };
  p.kind_emb = block("kind_embedding", static_cast<std::size_t>(kinds) * d);
  p.value_emb = block("value_embedding", static_cast<std::size_t>(values) * d);
  for (int l = 0; l < layers; ++l) {
    p.self.push_back(block("U" + std::to_string(l), dd));
    std::array<std::size_t, Adjacency::kChannels> w{};
    for (int c = 0; c < Adjacency::kChannels; ++c) {
      std::string name = "W" + std::to_string(l) + "_" + std::string(edge_type_name(static_cast<EdgeType>(c / 2))) +
                         (c % 2 ? "_in" : "_out");
      w[c] = block(name, dd);
    }
    p.message.push_back(w);
  }
  p.query = block("location_query", dd);
  auto head = [&](const std::string &name, int out) {
    HeadLayout h;
    h.out = out;
    h.w1 = block(name + "_w1", 2 * dd);
    h.b1 = block(name + "_b1", static_cast<std::size_t>(d));
    h.w2 = block(name + "_w2", static_cast<std::size_t>(out) * d);
    h.b2 = block(name + "_b2", static_cast<std::size_t>(out));
    return h;
  };
  p.op = head("op", kOpCount);
  p.kind = head("kind", kinds);
  p.value = head("value", values);
  p.total = at;
  return p;
}

ModelParams init_params(const Vocabulary &vocab, const ModelConfig &config) {
  if (config.d < 1 || config.layers < 0) throw std::invalid_argument("invalid model shape");
  ModelParams m;
  m.config = config;
  m.layout = ParamLayout::make(config.d, config.layers, vocab.kind_count(), vocab.value_count());
  m.vocab_hash = vocab.hash();
  m.theta.resize(m.layout.total);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (double &x : m.theta) x = u(rng);
  return m;
}

namespace {

void log_softmax(std::vector<double> &z) {
  if (z.empty()) return;
  double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  double lse = mx + std::log(s);
  for (double &v : z) v -= lse;
}

struct Forward {
  int n = 0, S = 0, d = 0, L = 0;
  Adjacency adj;
  std::vector<std::vector<double>> h; // L+1 layers of n x d
  std::vector<std::array<std::vector<double>, Adjacency::kChannels>> agg;
  std::vector<std::vector<int>> argmax; // per layer, per dim
  std::vector<double> g, q, loc_logp;
};

LayerWeights layer_weights(const ModelParams &m, int l) {
  LayerWeights w;
  w.U = m.theta.data() + m.layout.self[l];
  for (int c = 0; c < Adjacency::kChannels; ++c) w.W[c] = m.theta.data() + m.layout.message[l][c];
  return w;
}

Forward run_forward(const CodeGraph &graph, const ModelParams &m, Exec exec) {
  const ParamLayout &P = m.layout;
  Forward f;
  f.n = graph.size();
  f.S = graph.syntax_nodes;
  f.d = P.d;
  f.L = P.layers;
  const int d = f.d;
  f.adj = build_adjacency(graph);
  f.h.assign(static_cast<std::size_t>(f.L) + 1, std::vector<double>(static_cast<std::size_t>(f.n) * d));
  const double *theta = m.theta.data();
  for (int v = 0; v < f.n; ++v) {
    const GraphNode &node = graph.nodes[v];
    double *h0 = f.h[0].data() + static_cast<std::size_t>(v) * d;
    const double *ke = theta + P.kind_emb + static_cast<std::size_t>(node.kind_id) * d;
    for (int i = 0; i < d; ++i) h0[i] = ke[i];
    if (node.value_id) {
      const double *ve = theta + P.value_emb + static_cast<std::size_t>(*node.value_id) * d;
      for (int i = 0; i < d; ++i) h0[i] += ve[i];
    }
  }
  f.agg.resize(static_cast<std::size_t>(f.L));
  for (int l = 0; l < f.L; ++l)
    propagate_forward(f.adj, layer_weights(m, l), d, f.h[l].data(), f.agg[l], f.h[l + 1].data(), exec);

  f.g.assign(static_cast<std::size_t>(d), 0.0);
  f.argmax.assign(static_cast<std::size_t>(f.L) + 1, std::vector<int>(static_cast<std::size_t>(d), 0));
  const double inv_layers = 1.0 / (f.L + 1);
  for (int l = 0; l <= f.L; ++l) {
    for (int i = 0; i < d; ++i) {
      int best = 0;
      double bv = f.h[l][i];
      for (int v = 1; v < f.n; ++v) {
        double x = f.h[l][static_cast<std::size_t>(v) * d + i];
        if (x > bv) {
          bv = x;
          best = v;
        }
      }
      f.argmax[l][i] = best;
      f.g[i] += bv * inv_layers;
    }
  }
  f.q.assign(static_cast<std::size_t>(d), 0.0);
  const double *A = theta + P.query;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) f.q[i] += A[static_cast<std::size_t>(i) * d + j] * f.g[j];
  f.loc_logp.assign(static_cast<std::size_t>(f.S), 0.0);
  const double *hL = f.h[f.L].data();
  for (int v = 0; v < f.S; ++v) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += hL[static_cast<std::size_t>(v) * d + i] * f.q[i];
    f.loc_logp[v] = s;
  }
  log_softmax(f.loc_logp);
  return f;
}

struct HeadRun {
  std::vector<double> hid, mask, logp;
};

std::vector<double> head_input(const Forward &f, int loc) {
  std::vector<double> x(2 * static_cast<std::size_t>(f.d));
  std::copy(f.g.begin(), f.g.end(), x.begin());
  const double *h = f.h[f.L].data() + static_cast<std::size_t>(loc) * f.d;
  std::copy(h, h + f.d, x.begin() + f.d);
  return x;
}

HeadRun head_forward(const ModelParams &m, const HeadLayout &H, const std::vector<double> &x,
                     std::mt19937_64 *rng) {
  const int d = m.layout.d;
  const double *theta = m.theta.data();
  HeadRun r;
  r.hid.assign(static_cast<std::size_t>(d), 0.0);
  r.mask.assign(static_cast<std::size_t>(d), 1.0);
  for (int i = 0; i < d; ++i) {
    double s = theta[H.b1 + i];
    const double *row = theta + H.w1 + static_cast<std::size_t>(i) * 2 * d;
    for (int j = 0; j < 2 * d; ++j) s += row[j] * x[j];
    r.hid[i] = std::tanh(s);
  }
  const double p = m.config.dropout;
  if (rng && p > 0.0) {
    std::bernoulli_distribution keep(1.0 - p);
    for (int i = 0; i < d; ++i) r.mask[i] = keep(*rng) ? 1.0 / (1.0 - p) : 0.0;
  }
  r.logp.assign(static_cast<std::size_t>(H.out), 0.0);
  for (int o = 0; o < H.out; ++o) {
    double s = theta[H.b2 + o];
    const double *row = theta + H.w2 + static_cast<std::size_t>(o) * d;
    for (int i = 0; i < d; ++i) s += row[i] * r.hid[i] * r.mask[i];
    r.logp[o] = s;
  }
  log_softmax(r.logp);
  return r;
}

// Backward of -logp[gold]; accumulates into grad and dx (size 2d).
void head_backward(const ModelParams &m, const HeadLayout &H, const std::vector<double> &x, const HeadRun &r,
                   int gold, double *grad, std::vector<double> &dx) {
  const int d = m.layout.d;
  const double *theta = m.theta.data();
  std::vector<double> dhid(static_cast<std::size_t>(d), 0.0);
  for (int o = 0; o < H.out; ++o) {
    double dl = std::exp(r.logp[o]) - (o == gold ? 1.0 : 0.0);
    grad[H.b2 + o] += dl;
    double *grow = grad + H.w2 + static_cast<std::size_t>(o) * d;
    const double *row = theta + H.w2 + static_cast<std::size_t>(o) * d;
    for (int i = 0; i < d; ++i) {
      grow[i] += dl * r.hid[i] * r.mask[i];
      dhid[i] += dl * row[i];
    }
  }
  for (int i = 0; i < d; ++i) {
    double dpre = dhid[i] * r.mask[i] * (1.0 - r.hid[i] * r.hid[i]);
    if (dpre == 0.0) continue;
    grad[H.b1 + i] += dpre;
    double *grow = grad + H.w1 + static_cast<std::size_t>(i) * 2 * d;
    const double *row = theta + H.w1 + static_cast<std::size_t>(i) * 2 * d;
    for (int j = 0; j < 2 * d; ++j) {
      grow[j] += dpre * x[j];
      dx[j] += dpre * row[j];
    }
  }
}

void check_location(const CodeGraph &graph, int loc) {
  if (loc < 0 || loc >= graph.syntax_nodes)
    throw std::out_of_range("gold location " + std::to_string(loc) + " is not a syntax node");
}

double loss_impl(const CodeGraph &graph, const IndexedEdit &gold, const ModelParams &m, std::mt19937_64 *rng,
                 Exec exec, double *grad, std::vector<std::vector<int>> *pooling = nullptr) {
  check_location(graph, gold.location);
  Forward f = run_forward(graph, m, exec);
  if (pooling) *pooling = f.argmax;
  const ParamLayout &P = m.layout;
  const int d = f.d;
  const int loc = gold.location;
  std::vector<double> x = head_input(f, loc);

  double total = -f.loc_logp[loc];
  struct Term {
    const HeadLayout *layout;
    int gold;
  };
  std::vector<Term> terms{{&P.op, static_cast<int>(gold.op)}};
  if (edit_has_kind(gold.op) && gold.kind_id) terms.push_back({&P.kind, *gold.kind_id});
  if (gold.value_id) terms.push_back({&P.value, *gold.value_id});
  std::vector<HeadRun> runs;
  for (const Term &t : terms) {
    runs.push_back(head_forward(m, *t.layout, x, rng));
    total -= runs.back().logp[t.gold];
  }
  if (!grad) return total;

  std::vector<double> dx(2 * static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) head_backward(m, *terms[i].layout, x, runs[i], terms[i].gold, grad, dx);

  std::vector<std::vector<double>> dh(static_cast<std::size_t>(f.L) + 1,
                                      std::vector<double>(static_cast<std::size_t>(f.n) * d, 0.0));
  std::vector<double> dg(dx.begin(), dx.begin() + d);
  double *dhL = dh[f.L].data();
  for (int i = 0; i < d; ++i) dhL[static_cast<std::size_t>(loc) * d + i] += dx[d + i];

  // Location scores s_v = h_v . q with q = A g.
  std::vector<double> dq(static_cast<std::size_t>(d), 0.0);
  const double *hL = f.h[f.L].data();
  for (int v = 0; v < f.S; ++v) {
    double ds = std::exp(f.loc_logp[v]) - (v == loc ? 1.0 : 0.0);
    for (int i = 0; i < d; ++i) {
      dhL[static_cast<std::size_t>(v) * d + i] += ds * f.q[i];
      dq[i] += ds * hL[static_cast<std::size_t>(v) * d + i];
    }
  }
  const double *A = m.theta.data() + P.query;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      grad[P.query + static_cast<std::size_t>(i) * d + j] += dq[i] * f.g[j];
      dg[j] += A[static_cast<std::size_t>(i) * d + j] * dq[i];
    }

  // Pooling routes each dimension to its argmax node.
  const double inv_layers = 1.0 / (f.L + 1);
  for (int l = 0; l <= f.L; ++l)
    for (int i = 0; i < d; ++i) dh[l][static_cast<std::size_t>(f.argmax[l][i]) * d + i] += dg[i] * inv_layers;

  std::vector<double> dprev(static_cast<std::size_t>(f.n) * d);
  for (int l = f.L - 1; l >= 0; --l) {
    LayerGrads lg;
    lg.U = grad + P.self[l];
    for (int c = 0; c < Adjacency::kChannels; ++c) lg.W[c] = grad + P.message[l][c];
    propagate_backward(f.adj, layer_weights(m, l), d, f.h[l].data(), f.agg[l], f.h[l + 1].data(), dh[l + 1].data(),
                       lg, dprev.data(), exec);
    for (std::size_t j = 0; j < dprev.size(); ++j) dh[l][j] += dprev[j];
  }

  for (int v = 0; v < f.n; ++v) {
    const GraphNode &node = graph.nodes[v];
    const double *src = dh[0].data() + static_cast<std::size_t>(v) * d;
    double *ke = grad + P.kind_emb + static_cast<std::size_t>(node.kind_id) * d;
    for (int i = 0; i < d; ++i) ke[i] += src[i];
    if (node.value_id) {
      double *ve = grad + P.value_emb + static_cast<std::size_t>(*node.value_id) * d;
      for (int i = 0; i < d; ++i) ve[i] += src[i];
    }
  }
  return total;
}

} // namespace

Embedding embed(const CodeGraph &graph, const ModelParams &params, Exec exec) {
  Forward f = run_forward(graph, params, exec);
  Embedding e;
  e.d = f.d;
  e.graph_vec = f.g;
  e.node_mat = std::move(f.h[f.L]);
  return e;
}

EditDistribution score(const CodeGraph &graph, const ModelParams &params, std::optional<int> location) {
  Forward f = run_forward(graph, params, Exec::Serial);
  EditDistribution out;
  out.location = f.loc_logp;
  int loc = location ? *location : static_cast<int>(std::max_element(f.loc_logp.begin(), f.loc_logp.end()) -
                                                    f.loc_logp.begin());
  check_location(graph, loc);
  out.conditioned_on = loc;
  std::vector<double> x = head_input(f, loc);
  out.op = head_forward(params, params.layout.op, x, nullptr).logp;
  out.kind = head_forward(params, params.layout.kind, x, nullptr).logp;
  out.value = head_forward(params, params.layout.value, x, nullptr).logp;
  return out;
}

std::vector<EditDistribution> score_all(const CodeGraph &graph, const ModelParams &params) {
  Forward f = run_forward(graph, params, Exec::Serial);
  std::vector<EditDistribution> out(static_cast<std::size_t>(f.S));
  for (int loc = 0; loc < f.S; ++loc) {
    EditDistribution &e = out[loc];
    e.location = f.loc_logp;
    e.conditioned_on = loc;
    std::vector<double> x = head_input(f, loc);
    e.op = head_forward(params, params.layout.op, x, nullptr).logp;
    e.kind = head_forward(params, params.layout.kind, x, nullptr).logp;
    e.value = head_forward(params, params.layout.value, x, nullptr).logp;
  }
  return out;
}

double loss(const CodeGraph &graph, const IndexedEdit &gold, const ModelParams &params) {
  return loss_impl(graph, gold, params, nullptr, Exec::Serial, nullptr);
}

LossGrad loss_and_grad(const CodeGraph &graph, const IndexedEdit &gold, const ModelParams &params,
                       std::optional<std::uint64_t> dropout_seed, Exec exec) {
  LossGrad r;
  r.grad.assign(params.theta.size(), 0.0);
  std::optional<std::mt19937_64> rng;
  if (dropout_seed) rng.emplace(*dropout_seed);
  r.loss = loss_impl(graph, gold, params, rng ? &*rng : nullptr, exec, r.grad.data());
  return r;
}

LossGrad batch_loss_grad(const std::vector<const Sample *> &batch, const ModelParams &params,
                         const std::vector<std::optional<std::uint64_t>> &dropout_seeds, Exec exec) {
  const int b = static_cast<int>(batch.size());
  std::vector<std::vector<double>> grads(static_cast<std::size_t>(b));
  std::vector<double> losses(static_cast<std::size_t>(b), 0.0);
  if (exec == Exec::Serial) {
    for (int i = 0; i < b; ++i) {
      LossGrad lg = loss_and_grad(batch[i]->graph, batch[i]->gold, params, dropout_seeds[i], Exec::Serial);
      losses[i] = lg.loss;
      grads[i] = std::move(lg.grad);
    }
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < b; ++i) {
      LossGrad lg = loss_and_grad(batch[i]->graph, batch[i]->gold, params, dropout_seeds[i], Exec::Serial);
      losses[i] = lg.loss;
      grads[i] = std::move(lg.grad);
    }
  }
  LossGrad out;
  for (double l : losses) out.loss += l;
  if (b == 0) {
    out.grad.assign(params.theta.size(), 0.0);
    return out;
  }
  sum_gradients(grads, out.grad, exec);
  return out;
}

GradCheckResult grad_check(const ModelParams &params, const CodeGraph &graph, const IndexedEdit &gold,
                           double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
  LossGrad analytic = loss_and_grad(graph, gold, params);
  GradCheckResult res;
  ModelParams probe = params;
  std::vector<std::vector<int>> base, at_up, at_down;
  loss_impl(graph, gold, params, nullptr, Exec::Serial, nullptr, &base);
  for (const ParamBlock &b : params.layout.blocks) {
    for (std::size_t j = b.offset; j < b.offset + b.size; ++j) {
      const double orig = probe.theta[j];
      probe.theta[j] = orig + epsilon;
      double up = loss_impl(graph, gold, probe, nullptr, Exec::Serial, nullptr, &at_up);
      probe.theta[j] = orig - epsilon;
      double down = loss_impl(graph, gold, probe, nullptr, Exec::Serial, nullptr, &at_down);
      probe.theta[j] = orig;
      if (at_up != base || at_down != base) {
        // A pooling argmax switches inside [-eps, eps]: the loss has a kink
        // there and the central difference does not estimate the derivative.
        ++res.kinks;
        continue;
      }
      double numeric = (up - down) / (2.0 * epsilon);
      double a = analytic.grad[j];
      double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
      ++res.checked;
      if (rel > res.max_relative_error || !std::isfinite(rel)) {
        res.max_relative_error = std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity();
        res.worst_block = b.name;
        res.worst_index = j - b.offset;
      }
    }
  }
  return res;
}

} // namespace slicefix
