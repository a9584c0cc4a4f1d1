// Message-passing kernels. Each has a serial reference version and an OpenMP
// version; both sum in the same order, so their results are bit-identical.
#pragma once

#include <array>
#include <vector>

#include "slicefix/graph.hpp"

namespace slicefix {

enum class Exec { Serial, Parallel };

/// Neighbour lists per (edge type, direction) in CSR form. Channel
/// 2*type receives along the edge (src -> dst), 2*type+1 against it.
struct Adjacency {
  static constexpr int kChannels = 2 * kEdgeTypeCount;
  int n = 0;
  std::array<std::vector<int>, kChannels> offsets;
  std::array<std::vector<int>, kChannels> neighbours;

  int degree(int channel, int v) const { return offsets[channel][v + 1] - offsets[channel][v]; }
};

Adjacency build_adjacency(const CodeGraph &g);

/// Per-layer weights: U (d x d) and one W (d x d) per channel, row-major.
struct LayerWeights {
  const double *U = nullptr;
  std::array<const double *, Adjacency::kChannels> W{};
};

struct LayerGrads {
  double *U = nullptr;
  std::array<double *, Adjacency::kChannels> W{};
};

/// agg[c] = per-node neighbour mean of H on channel c (zero without
/// neighbours); out = tanh(U h + sum_c W_c agg_c). All matrices n x d.
void propagate_forward(const Adjacency &adj, const LayerWeights &w, int d, const double *H,
                       std::array<std::vector<double>, Adjacency::kChannels> &agg, double *out,
                       Exec exec);

/// Given dOut (gradient w.r.t. the layer output), accumulates weight
/// gradients and writes dH (gradient w.r.t. the layer input, overwritten).
void propagate_backward(const Adjacency &adj, const LayerWeights &w, int d, const double *H,
                        const std::array<std::vector<double>, Adjacency::kChannels> &agg,
                        const double *out, const double *dOut, LayerGrads &grads, double *dH,
                        Exec exec);

/// Sums per-sample gradient buffers in sample order into `out`.
void sum_gradients(const std::vector<std::vector<double>> &parts, std::vector<double> &out, Exec exec);

} // namespace slicefix
