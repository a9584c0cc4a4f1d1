#include "slicefix/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "slicefix/model.hpp"

namespace slicefix {

using Json = nlohmann::ordered_json;

MatchVerdict exact_match(const IndexedEdit &pred, const IndexedEdit &gold) {
  MatchVerdict v;
  v.location_match = pred.location == gold.location;
  v.op_match = pred.op == gold.op;
  if (gold.op == EditOp::AddNode || gold.op == EditOp::RepType)
    v.kind_match = pred.kind_id == gold.kind_id && pred.kind_id.value_or(Vocabulary::kUnknownKind) >= 2;
  if (gold.op == EditOp::AddNode || gold.op == EditOp::RepVal) {
    v.value_match = pred.value_id == gold.value_id;
    if (pred.value_id == Vocabulary::kUnknownValue) v.value_match = false;
  }
  v.overall = v.location_match && v.op_match && v.kind_match && v.value_match;
  return v;
}

double AccuracyReport::rate(int k) const {
  if (total == 0) return 0.0;
  auto it = correct.find(k);
  return it == correct.end() ? 0.0 : static_cast<double>(it->second) / total;
}

std::string AccuracyReport::to_json() const {
  Json j;
  j["total"] = total;
  Json at = Json::object();
  for (int k : ks) at["top" + std::to_string(k)] = {{"correct", correct.at(k)}, {"rate", rate(k)}};
  j["accuracy"] = at;
  Json ops = Json::object();
  for (const auto &[op, n] : op_total) {
    Json o;
    o["total"] = n;
    for (int k : ks) o["top" + std::to_string(k)] = op_correct.at(op).at(k);
    ops[op] = o;
  }
  j["per_op"] = ops;
  return j.dump(2);
}

std::string AccuracyReport::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(12) << "op" << std::right << std::setw(7) << "total";
  for (int k : ks) out << std::setw(9) << ("top-" + std::to_string(k));
  out << '\n';
  auto row = [&](const std::string &name, int n, auto count) {
    out << std::left << std::setw(12) << name << std::right << std::setw(7) << n;
    for (int k : ks) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << (n ? 100.0 * count(k) / n : 0.0) << '%';
      out << std::setw(9) << cell.str();
    }
    out << '\n';
  };
  for (const auto &[op, n] : op_total) row(op, n, [&](int k) { return op_correct.at(op).at(k); });
  row("all", total, [&](int k) { return correct.at(k); });
  return out.str();
}

AccuracyReport topk_accuracy(const ModelParams &params, const Vocabulary &vocab, const std::vector<Sample> &samples,
                             std::vector<int> ks) {
  if (ks.empty()) throw std::invalid_argument("no beam sizes given");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() < 1) throw std::invalid_argument("beam sizes must be positive");
  const int kmax = ks.back();
  const int n = static_cast<int>(samples.size());
  // First rank (1-based) at which the prediction matches; 0 when none does.
  std::vector<int> first_hit(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Prediction p = beam_infer(samples[i].graph, params, vocab, kmax);
    for (std::size_t r = 0; r < p.ranked.size(); ++r)
      if (exact_match(p.ranked[r].edit, samples[i].gold).overall) {
        first_hit[i] = static_cast<int>(r) + 1;
        break;
      }
  }
  AccuracyReport rep;
  rep.ks = ks;
  rep.total = n;
  for (int k : ks) rep.correct[k] = 0;
  for (int i = 0; i < n; ++i) {
    std::string op(op_name(samples[i].gold.op));
    ++rep.op_total[op];
    auto &per = rep.op_correct[op];
    std::map<int, bool> hit;
    for (int k : ks) {
      bool h = first_hit[i] >= 1 && first_hit[i] <= k;
      hit[k] = h;
      per[k] += h;
      rep.correct[k] += h;
    }
    rep.ids.push_back(samples[i].id);
    rep.hits.push_back(std::move(hit));
  }
  return rep;
}

std::string Overlap::to_json() const {
  Json j;
  j["both"] = both;
  j["only_a"] = only_a;
  j["only_b"] = only_b;
  j["neither"] = neither;
  return j.dump(2);
}

Overlap compare_runs(const AccuracyReport &a, const AccuracyReport &b, int k) {
  if (a.ids != b.ids) throw std::invalid_argument("reports cover different test sets");
  Overlap o;
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    auto ha = a.hits[i].find(k), hb = b.hits[i].find(k);
    if (ha == a.hits[i].end() || hb == b.hits[i].end())
      throw std::invalid_argument("beam size " + std::to_string(k) + " missing from a report");
    if (ha->second && hb->second) ++o.both;
    else if (ha->second) ++o.only_a;
    else if (hb->second) ++o.only_b;
    else ++o.neither;
  }
  return o;
}

Summary summarize(std::vector<int> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (int v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::pair<int, int> line_and_token_count(const std::string &source) {
  std::vector<Token> tokens = tokenize(source);
  std::set<int> lines;
  int count = 0;
  for (const Token &t : tokens) {
    if (t.type == TokenType::EndOfFile) continue;
    ++count;
    lines.insert(t.span.line);
  }
  return {static_cast<int>(lines.size()), count};
}

ContextStats context_stats(const std::vector<Datapoint> &points, SliceMode mode) {
  if (mode == SliceMode::None) throw std::invalid_argument("context statistics need a slicing mode");
  const int n = static_cast<int>(points.size());
  std::vector<std::optional<ContextRow>> slots(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const Datapoint &dp = points[i];
    const auto &side = mode == SliceMode::Single ? dp.sliced_single : dp.sliced_dual;
    if (!side) continue;
    try {
      ContextRow row;
      row.id = dp.id;
      std::tie(row.lines_before, row.tokens_before) = line_and_token_count(dp.buggy_source);
      std::tie(row.lines_after, row.tokens_after) = line_and_token_count(side->buggy);
      row.leaves_before = static_cast<int>(leaves(buggy_tree(dp)).size());
      row.leaves_after = static_cast<int>(leaves(parse(side->buggy)).size());
      row.used_control_flow = side->buggy_slice.used_control_flow;
      row.used_fallback = side->buggy_slice.used_fallback;
      slots[i] = row;
    } catch (const std::exception &) {
    }
  }
  ContextStats st;
  for (auto &s : slots) {
    if (s) st.rows.push_back(std::move(*s));
    else ++st.skipped;
  }
  std::vector<int> lb, la, tb, ta, lr, tr;
  int control = 0;
  for (const auto &r : st.rows) {
    lb.push_back(r.lines_before);
    la.push_back(r.lines_after);
    tb.push_back(r.tokens_before);
    ta.push_back(r.tokens_after);
    lr.push_back(r.lines_before - r.lines_after);
    tr.push_back(r.tokens_before - r.tokens_after);
    control += r.used_control_flow;
  }
  st.lines_before = summarize(lb);
  st.lines_after = summarize(la);
  st.tokens_before = summarize(tb);
  st.tokens_after = summarize(ta);
  st.line_reduction = summarize(lr);
  st.token_reduction = summarize(tr);
  st.control_flow_fraction = st.rows.empty() ? 0.0 : static_cast<double>(control) / st.rows.size();
  return st;
}

namespace {

Json summary_json(const Summary &s) { return {{"mean", s.mean}, {"median", s.median}, {"max", s.max}, {"min", s.min}}; }

} // namespace

std::string ContextStats::to_json() const {
  Json j;
  j["datapoints"] = rows.size();
  j["skipped"] = skipped;
  j["token_definition"] = "lexical tokens, whitespace and comments stripped, punctuation included";
  j["lines_before"] = summary_json(lines_before);
  j["lines_after"] = summary_json(lines_after);
  j["tokens_before"] = summary_json(tokens_before);
  j["tokens_after"] = summary_json(tokens_after);
  j["line_reduction"] = summary_json(line_reduction);
  j["token_reduction"] = summary_json(token_reduction);
  j["control_flow_fraction"] = control_flow_fraction;
  j["reference"] = {{"lines_mean", "39 -> 15"},
                    {"lines_median", "33 -> 9"},
                    {"lines_max", "1087 -> 636"},
                    {"control_flow_fraction", 0.2696}};
  Json rs = Json::array();
  for (const auto &r : rows)
    rs.push_back({{"id", r.id},
                  {"lines_before", r.lines_before},
                  {"lines_after", r.lines_after},
                  {"tokens_before", r.tokens_before},
                  {"tokens_after", r.tokens_after},
                  {"leaves_before", r.leaves_before},
                  {"leaves_after", r.leaves_after},
                  {"used_control_flow", r.used_control_flow},
                  {"used_fallback", r.used_fallback}});
  j["rows"] = rs;
  return j.dump(2);
}

std::string ContextStats::to_text() const {
  std::ostringstream out;
  out << "datapoints " << rows.size();
  if (skipped) out << " (" << skipped << " without slice)";
  out << "\n\n";
  out << std::left << std::setw(16) << "" << std::right << std::setw(10) << "mean" << std::setw(10) << "median"
      << std::setw(8) << "max" << std::setw(8) << "min" << '\n';
  auto row = [&](const char *name, const Summary &s) {
    out << std::left << std::setw(16) << name << std::right << std::fixed << std::setprecision(2) << std::setw(10)
        << s.mean << std::setw(10) << s.median << std::setw(8) << s.max << std::setw(8) << s.min << '\n';
  };
  row("lines before", lines_before);
  row("lines after", lines_after);
  row("line reduction", line_reduction);
  row("tokens before", tokens_before);
  row("tokens after", tokens_after);
  row("token reduction", token_reduction);
  out << "\ncontrol flow used: " << std::setprecision(2) << 100.0 * control_flow_fraction << "%\n";
  out << "reference: lines mean 39 -> 15, median 33 -> 9, max 1087 -> 636; control flow 26.96%\n";
  return out.str();
}

std::string ContextStats::to_csv() const {
  std::ostringstream out;
  out << "id,lines_before,lines_after,tokens_before,tokens_after,leaves_before,leaves_after,used_control_flow,"
         "used_fallback\n";
  for (const auto &r : rows)
    out << r.id << ',' << r.lines_before << ',' << r.lines_after << ',' << r.tokens_before << ',' << r.tokens_after
        << ',' << r.leaves_before << ',' << r.leaves_after << ',' << r.used_control_flow << ',' << r.used_fallback
        << '\n';
  return out.str();
}

} // namespace slicefix
