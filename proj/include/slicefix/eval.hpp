// Exact-match top-k accuracy, run comparison and context statistics.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "slicefix/graph.hpp"

namespace slicefix {

struct ModelParams;

struct MatchVerdict {
  bool location_match = false;
  bool op_match = false;
  bool kind_match = true;  // true when the op has no kind
  bool value_match = true; // true when the op has no value
  bool overall = false;
};

/// Componentwise comparison. Kinds are compared for ADD_NODE/REP_TYPE and
/// values for ADD_NODE/REP_VAL. A predicted UNKNOWN value or unknown kind
/// never matches. The ADD_NODE child position is not compared.
MatchVerdict exact_match(const IndexedEdit &pred, const IndexedEdit &gold);

struct AccuracyReport {
  std::vector<int> ks;
  int total = 0;
  std::map<int, int> correct;                          // per k
  std::map<std::string, int> op_total;                 // per gold op
  std::map<std::string, std::map<int, int>> op_correct; // per gold op, per k
  std::vector<std::string> ids;
  std::vector<std::map<int, bool>> hits; // per datapoint, per k

  double rate(int k) const;
  std::string to_json() const;
  std::string to_text() const;
};

/// Runs beam search at max(ks) once per sample; a sample is correct at k
/// when one of its first k predictions matches gold exactly.
AccuracyReport topk_accuracy(const ModelParams &params, const Vocabulary &vocab,
                             const std::vector<Sample> &samples, std::vector<int> ks = {1, 3, 5});

struct Overlap {
  int both = 0;
  int only_a = 0;
  int only_b = 0;
  int neither = 0;
  std::string to_json() const;
};

/// Throws std::invalid_argument when the reports cover different samples.
Overlap compare_runs(const AccuracyReport &a, const AccuracyReport &b, int k = 1);

struct ContextRow {
  std::string id;
  int lines_before = 0;
  int lines_after = 0;
  int tokens_before = 0;
  int tokens_after = 0;
  int leaves_before = 0;
  int leaves_after = 0;
  bool used_control_flow = false;
  bool used_fallback = false;
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  int max = 0;
  int min = 0;
};

Summary summarize(std::vector<int> values);

/// Lines are source lines holding at least one token; tokens are lexical
/// tokens with whitespace and comments stripped (punctuation included).
struct ContextStats {
  std::vector<ContextRow> rows;
  Summary lines_before, lines_after, tokens_before, tokens_after, line_reduction, token_reduction;
  double control_flow_fraction = 0.0;
  int skipped = 0; // datapoints without the requested slice

  std::string to_json() const;
  std::string to_text() const;
  std::string to_csv() const;
};

/// Statistics of the buggy side: whole file against its slice for `mode`
/// (Single or Dual).
ContextStats context_stats(const std::vector<Datapoint> &points, SliceMode mode);

/// Lines holding at least one token, and the token count.
std::pair<int, int> line_and_token_count(const std::string &source);

} // namespace slicefix
