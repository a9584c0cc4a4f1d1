#include <algorithm>
#include <numeric>

#include "slicefix/model.hpp"

namespace slicefix {

namespace {

// Ids of `logp` ordered by (log-prob desc, id asc), keeping those accepted
// by `keep`, at most `limit` of them.
template <class Keep>
std::vector<int> top_ids(const std::vector<double> &logp, int limit, Keep keep) {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(logp.size()); ++i)
    if (keep(i)) ids.push_back(i);
  auto better = [&](int a, int b) { return logp[a] != logp[b] ? logp[a] > logp[b] : a < b; };
  if (static_cast<int>(ids.size()) > limit) {
    std::partial_sort(ids.begin(), ids.begin() + limit, ids.end(), better);
    ids.resize(static_cast<std::size_t>(limit));
  } else {
    std::sort(ids.begin(), ids.end(), better);
  }
  return ids;
}

bool ranks_before(const ScoredEdit &a, const ScoredEdit &b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.edit.location != b.edit.location) return a.edit.location < b.edit.location;
  if (a.edit.op != b.edit.op) return a.edit.op < b.edit.op;
  int va = a.edit.value_id.value_or(-1), vb = b.edit.value_id.value_or(-1);
  if (va != vb) return va < vb;
  return a.edit.kind_id.value_or(-1) < b.edit.kind_id.value_or(-1);
}

} // namespace

Prediction beam_infer(const CodeGraph &graph, const ModelParams &params, const Vocabulary &vocab, int k) {
  if (k < 1) throw std::invalid_argument("beam width must be at least 1");
  // -1: not a real kind; otherwise whether the kind carries a value.
  std::vector<int> kind_value(static_cast<std::size_t>(vocab.kind_count()), -1);
  for (int id = 2; id < vocab.kind_count(); ++id)
    if (auto kd = kind_from_name(vocab.kinds[id])) kind_value[id] = kind_has_value(*kd) ? 1 : 0;

  std::vector<EditDistribution> all = score_all(graph, params);
  std::vector<ScoredEdit> pool;
  for (int loc = 0; loc < graph.syntax_nodes; ++loc) {
    const EditDistribution &dist = all[loc];
    const double lp_loc = dist.location[loc];
    const int own_kind = graph.nodes[loc].kind_id;
    const bool has_value = graph.has_value[loc] != 0;
    auto base = [&](EditOp op) { return lp_loc + dist.op[static_cast<int>(op)]; };

    auto push = [&](IndexedEdit e, double lp) {
      if (edit_valid(e, graph, vocab)) pool.push_back(ScoredEdit{std::move(e), lp});
    };

    std::vector<int> values = top_ids(dist.value, k, [](int) { return true; });
    std::vector<int> value_kinds = top_ids(dist.kind, k, [&](int id) { return kind_value[id] == 1; });
    std::vector<int> plain_kinds = top_ids(dist.kind, k, [&](int id) { return kind_value[id] == 0; });
    const int position = graph.child_count[loc];
    for (int kd : value_kinds)
      for (int v : values)
        push(IndexedEdit{EditOp::AddNode, loc, position, kd, v},
             base(EditOp::AddNode) + dist.kind[kd] + dist.value[v]);
    for (int kd : plain_kinds)
      push(IndexedEdit{EditOp::AddNode, loc, position, kd, std::nullopt}, base(EditOp::AddNode) + dist.kind[kd]);

    if (loc != 0 && graph.child_count[loc] == 0)
      push(IndexedEdit{EditOp::DelNode, loc, -1, std::nullopt, std::nullopt}, base(EditOp::DelNode));

    std::vector<int> types = top_ids(dist.kind, k, [&](int id) {
      return kind_value[id] == (has_value ? 1 : 0) && id != own_kind;
    });
    for (int kd : types)
      push(IndexedEdit{EditOp::RepType, loc, -1, kd, std::nullopt}, base(EditOp::RepType) + dist.kind[kd]);

    if (has_value) {
      const int current = *graph.nodes[graph.value_node[loc]].value_id;
      std::vector<int> repl = top_ids(dist.value, k, [&](int id) {
        return id != current || current == Vocabulary::kUnknownValue;
      });
      for (int v : repl)
        push(IndexedEdit{EditOp::RepVal, loc, -1, std::nullopt, v}, base(EditOp::RepVal) + dist.value[v]);
    }
  }
  const std::size_t keep = std::min(pool.size(), static_cast<std::size_t>(k));
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), ranks_before);
  pool.resize(keep);
  return Prediction{std::move(pool)};
}

} // namespace slicefix
