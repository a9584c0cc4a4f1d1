// Graph neural repair model: typed message passing over a CodeGraph, pooled
// graph vector, factored one-step edit distribution (location, op, kind,
// value), training with Adam and exact top-k beam inference.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicefix/graph.hpp"
#include "slicefix/kernels.hpp"

namespace slicefix {

struct ModelConfig {
  int d = 64;
  int layers = 4;
  double learning_rate = 0.001;
  double dropout = 0.1;
  int batch_size = 10;
  int epochs = 50;
  std::uint64_t seed = 0;
  int edit_steps = 1;
  // Parallelise across the datapoints of a batch. Results do not depend on it.
  bool parallel = true;

  /// Throws std::invalid_argument on d < 1, layers < 1, dropout outside
  /// [0,1), edit_steps < 1, batch_size < 1, epochs < 0 or lr <= 0.
  void validate() const;
};

struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// A two-layer classifier on [graph_vec ; h_loc]: tanh hidden layer of
/// width d, then a linear map to `out` logits.
struct HeadLayout {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
  int out = 0;
};

/// Offsets of every tensor inside the flat parameter vector. Matrices are
/// row-major; embedding tables have one row of width d per id.
struct ParamLayout {
  int d = 0, layers = 0, kinds = 0, values = 0;
  std::size_t kind_emb = 0, value_emb = 0, query = 0;
  std::vector<std::size_t> self;                                  // U^l
  std::vector<std::array<std::size_t, Adjacency::kChannels>> message; // W^l per channel
  HeadLayout op, kind, value;
  std::size_t total = 0;
  std::vector<ParamBlock> blocks;

  static ParamLayout make(int d, int layers, int kinds, int values);
};

struct ModelParams {
  ModelConfig config;
  ParamLayout layout;
  std::vector<double> theta;
  std::uint64_t vocab_hash = 0;
};

inline constexpr int kOpCount = 4;

/// Entries uniform in [-0.1, 0.1] from a generator seeded with config.seed.
/// layers = 0 is accepted here (embedding only).
ModelParams init_params(const Vocabulary &vocab, const ModelConfig &config);

struct Embedding {
  std::vector<double> graph_vec; // d
  std::vector<double> node_mat;  // |V| x d, row-major: h^L
  int d = 0;
};

Embedding embed(const CodeGraph &graph, const ModelParams &params, Exec exec = Exec::Serial);

/// Log-probabilities of each factor. The op/kind/value factors are
/// conditioned on `location`.
struct EditDistribution {
  std::vector<double> location; // over syntax nodes
  int conditioned_on = 0;
  std::vector<double> op;       // indexed by EditOp
  std::vector<double> kind;
  std::vector<double> value;
};

/// Distribution at `location`, or at the most likely location when empty.
EditDistribution score(const CodeGraph &graph, const ModelParams &params,
                       std::optional<int> location = std::nullopt);

/// One forward pass, heads evaluated at every syntax node. Element i is
/// the distribution conditioned on location i.
std::vector<EditDistribution> score_all(const CodeGraph &graph, const ModelParams &params);

/// Applicability of the kind and value factors for an edit.
bool edit_has_kind(EditOp op);

/// Summed negative log-likelihood of the gold edit. Throws std::out_of_range
/// when the gold location is not a syntax node.
double loss(const CodeGraph &graph, const IndexedEdit &gold, const ModelParams &params);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Loss and its gradient with respect to theta. With `dropout_seed` set,
/// head hidden units are dropped using a generator seeded with it.
LossGrad loss_and_grad(const CodeGraph &graph, const IndexedEdit &gold, const ModelParams &params,
                       std::optional<std::uint64_t> dropout_seed = std::nullopt,
                       Exec exec = Exec::Serial);

/// Sum of per-sample losses and gradients, computed per sample in parallel
/// (Exec::Parallel) or in sequence, always summed in sample order.
LossGrad batch_loss_grad(const std::vector<const Sample *> &batch, const ModelParams &params,
                         const std::vector<std::optional<std::uint64_t>> &dropout_seeds, Exec exec);

struct ScoredEdit {
  IndexedEdit edit;
  double log_prob = 0.0;
};

struct Prediction {
  std::vector<ScoredEdit> ranked;
};

/// Exact top-k valid one-step edits by joint log-probability. Ties go to
/// the smaller (location, op, value id, kind id). ADD_NODE inserts at the
/// end of the child list.
Prediction beam_infer(const CodeGraph &graph, const ModelParams &params, const Vocabulary &vocab, int k);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0; // mean per datapoint
  double val_top1 = 0.0;
};

struct TrainResult {
  ModelParams params; // best validation top-1 (latest epoch on ties)
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

class TrainingDiverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

TrainResult train(const std::vector<Sample> &train_set, const std::vector<Sample> &val_set,
                  const Vocabulary &vocab, const ModelConfig &config, const EpochCallback &on_epoch = {});

/// Top-1 exact-match rate of the model over samples.
double top1_accuracy(const std::vector<Sample> &samples, const ModelParams &params, const Vocabulary &vocab);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::size_t kinks = 0; // partials skipped because max pooling switches within epsilon
};

/// Compares every partial derivative with a central difference of step
/// epsilon. The relative error is |a - n| / max(|a|, |n|, 1e-4). Partials
/// whose +-epsilon probes change a max-pooling argmax are counted in
/// `kinks` and left out.
/// Throws std::invalid_argument when epsilon <= 0.
GradCheckResult grad_check(const ModelParams &params, const CodeGraph &graph, const IndexedEdit &gold,
                           double epsilon = 1e-4);

class CheckpointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint layout, all little-endian:
///   "SFCK", u32 version (1),
///   i32 d, i32 layers, i32 edit_steps, i32 batch_size, i32 epochs,
///   f64 learning_rate, f64 dropout, u64 seed,
///   u64 vocabulary hash, u64 n, n bytes of vocabulary JSON,
///   i32 kind count, i32 value count, u64 parameter count, f64 parameters.
void save_checkpoint(const std::string &path, const ModelParams &params, const Vocabulary &vocab);
std::pair<ModelParams, Vocabulary> load_checkpoint(const std::string &path);

} // namespace slicefix
