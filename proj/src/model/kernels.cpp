#include "slicefix/kernels.hpp"

#include <cmath>

namespace slicefix {

Adjacency build_adjacency(const CodeGraph &g) {
  Adjacency adj;
  const int n = g.size();
  adj.n = n;
  std::array<std::vector<std::vector<int>>, Adjacency::kChannels> lists;
  for (auto &l : lists) l.assign(static_cast<std::size_t>(n), {});
  for (const auto &e : g.edges) {
    const int t = static_cast<int>(e.type);
    lists[2 * t][e.dst].push_back(e.src);
    lists[2 * t + 1][e.src].push_back(e.dst);
  }
  for (int c = 0; c < Adjacency::kChannels; ++c) {
    adj.offsets[c].assign(static_cast<std::size_t>(n) + 1, 0);
    for (int v = 0; v < n; ++v) {
      adj.offsets[c][v + 1] = adj.offsets[c][v] + static_cast<int>(lists[c][v].size());
      adj.neighbours[c].insert(adj.neighbours[c].end(), lists[c][v].begin(), lists[c][v].end());
    }
  }
  return adj;
}

namespace {

// y += M x for a d x d row-major M.
inline void matvec_add(const double *M, const double *x, double *y, int d) {
  for (int i = 0; i < d; ++i) {
    const double *row = M + static_cast<std::size_t>(i) * d;
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += row[j] * x[j];
    y[i] += s;
  }
}

// y += M^T x.
inline void matvec_t_add(const double *M, const double *x, double *y, int d) {
  for (int i = 0; i < d; ++i) {
    const double xi = x[i];
    const double *row = M + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) y[j] += row[j] * xi;
  }
}

void forward_node(const Adjacency &adj, const LayerWeights &w, int d, const double *H,
                  std::array<std::vector<double>, Adjacency::kChannels> &agg, double *out, int v) {
  double *o = out + static_cast<std::size_t>(v) * d;
  for (int i = 0; i < d; ++i) o[i] = 0.0;
  matvec_add(w.U, H + static_cast<std::size_t>(v) * d, o, d);
  for (int c = 0; c < Adjacency::kChannels; ++c) {
    double *a = agg[c].data() + static_cast<std::size_t>(v) * d;
    for (int i = 0; i < d; ++i) a[i] = 0.0;
    const int deg = adj.degree(c, v);
    if (deg == 0) continue;
    for (int k = adj.offsets[c][v]; k < adj.offsets[c][v + 1]; ++k) {
      const double *hu = H + static_cast<std::size_t>(adj.neighbours[c][k]) * d;
      for (int i = 0; i < d; ++i) a[i] += hu[i];
    }
    const double inv = 1.0 / deg;
    for (int i = 0; i < d; ++i) a[i] *= inv;
    matvec_add(w.W[c], a, o, d);
  }
  for (int i = 0; i < d; ++i) o[i] = std::tanh(o[i]);
}

// dZ for node v: dOut * (1 - out^2).
inline void pre_activation_grad(const double *out, const double *dOut, double *dz, int d, int v) {
  const double *o = out + static_cast<std::size_t>(v) * d;
  const double *g = dOut + static_cast<std::size_t>(v) * d;
  double *z = dz + static_cast<std::size_t>(v) * d;
  for (int i = 0; i < d; ++i) z[i] = g[i] * (1.0 - o[i] * o[i]);
}

// dH_u = U^T dz_u + sum over channels of W_c^T times the dz of every node
// that averaged u on channel c. Node v averages u on channel c iff u lists
// v on the opposite channel (c ^ 1).
void backward_input_node(const Adjacency &adj, const LayerWeights &w, int d, const double *dz,
                         double *dH, int u) {
  double *out = dH + static_cast<std::size_t>(u) * d;
  for (int i = 0; i < d; ++i) out[i] = 0.0;
  matvec_t_add(w.U, dz + static_cast<std::size_t>(u) * d, out, d);
  std::vector<double> acc(static_cast<std::size_t>(d));
  for (int c = 0; c < Adjacency::kChannels; ++c) {
    const int opp = c ^ 1;
    if (adj.degree(opp, u) == 0) continue;
    for (int i = 0; i < d; ++i) acc[i] = 0.0;
    for (int k = adj.offsets[opp][u]; k < adj.offsets[opp][u + 1]; ++k) {
      const int v = adj.neighbours[opp][k];
      const double inv = 1.0 / adj.degree(c, v);
      const double *zv = dz + static_cast<std::size_t>(v) * d;
      for (int i = 0; i < d; ++i) acc[i] += zv[i] * inv;
    }
    matvec_t_add(w.W[c], acc.data(), out, d);
  }
}

// Row i of dM += sum_v dz_v[i] * x_v, summed over v in index order.
void outer_row(const double *dz, const double *X, int n, int d, int i, double *dM) {
  double *row = dM + static_cast<std::size_t>(i) * d;
  for (int v = 0; v < n; ++v) {
    const double g = dz[static_cast<std::size_t>(v) * d + i];
    if (g == 0.0) continue;
    const double *x = X + static_cast<std::size_t>(v) * d;
    for (int j = 0; j < d; ++j) row[j] += g * x[j];
  }
}

} // namespace

void propagate_forward(const Adjacency &adj, const LayerWeights &w, int d, const double *H,
                       std::array<std::vector<double>, Adjacency::kChannels> &agg, double *out,
                       Exec exec) {
  const int n = adj.n;
  for (auto &a : agg) a.assign(static_cast<std::size_t>(n) * d, 0.0);
  if (exec == Exec::Serial) {
    for (int v = 0; v < n; ++v) forward_node(adj, w, d, H, agg, out, v);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int v = 0; v < n; ++v) forward_node(adj, w, d, H, agg, out, v);
}

void propagate_backward(const Adjacency &adj, const LayerWeights &w, int d, const double *H,
                        const std::array<std::vector<double>, Adjacency::kChannels> &agg,
                        const double *out, const double *dOut, LayerGrads &grads, double *dH,
                        Exec exec) {
  const int n = adj.n;
  std::vector<double> dz(static_cast<std::size_t>(n) * d);
  if (exec == Exec::Serial) {
    for (int v = 0; v < n; ++v) pre_activation_grad(out, dOut, dz.data(), d, v);
    for (int i = 0; i < d; ++i) {
      outer_row(dz.data(), H, n, d, i, grads.U);
      for (int c = 0; c < Adjacency::kChannels; ++c) outer_row(dz.data(), agg[c].data(), n, d, i, grads.W[c]);
    }
    for (int u = 0; u < n; ++u) backward_input_node(adj, w, d, dz.data(), dH, u);
    return;
  }
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (int v = 0; v < n; ++v) pre_activation_grad(out, dOut, dz.data(), d, v);
#pragma omp for schedule(static)
    for (int i = 0; i < d; ++i) {
      outer_row(dz.data(), H, n, d, i, grads.U);
      for (int c = 0; c < Adjacency::kChannels; ++c) outer_row(dz.data(), agg[c].data(), n, d, i, grads.W[c]);
    }
#pragma omp for schedule(static)
    for (int u = 0; u < n; ++u) backward_input_node(adj, w, d, dz.data(), dH, u);
  }
}

void sum_gradients(const std::vector<std::vector<double>> &parts, std::vector<double> &out, Exec exec) {
  if (parts.empty()) return;
  const long m = static_cast<long>(parts.front().size());
  out.assign(static_cast<std::size_t>(m), 0.0);
  if (exec == Exec::Serial) {
    for (long j = 0; j < m; ++j)
      for (const auto &p : parts) out[j] += p[j];
    return;
  }
#pragma omp parallel for schedule(static)
  for (long j = 0; j < m; ++j)
    for (const auto &p : parts) out[j] += p[j];
}

} // namespace slicefix
