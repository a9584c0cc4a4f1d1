#include "slicefix/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <variant>
#include <cmath>

#include <json.hpp>

namespace slicefix {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::optional<std::string> read_optional(const fs::path &p) {
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json edit_json(const GraphEdit &e) {
  Json j;
  j["op"] = op_name(e.op);
  j["location"] = e.location;
  if (e.op == EditOp::AddNode) j["position"] = e.position;
  if (e.kind_label) j["kind_label"] = *e.kind_label;
  if (e.value_token) j["value_token"] = *e.value_token;
  return j;
}

GraphEdit edit_from(const Json &j) {
  GraphEdit e;
  auto op = op_from_name(j.at("op").get<std::string>());
  if (!op) throw std::invalid_argument("unknown op " + j.at("op").get<std::string>());
  e.op = *op;
  e.location = j.at("location").get<int>();
  if (j.contains("position")) e.position = j.at("position").get<int>();
  if (j.contains("kind_label")) e.kind_label = j.at("kind_label").get<std::string>();
  if (j.contains("value_token")) e.value_token = j.at("value_token").get<std::string>();
  std::string problem = e.check_fields();
  if (!problem.empty()) throw std::invalid_argument(problem);
  return e;
}

Json slice_json(const ContextSlice &s) {
  Json j;
  j["criterion"] = s.criterion.line;
  j["context"] = std::vector<int>(s.context_lines.begin(), s.context_lines.end());
  j["used_control_flow"] = s.used_control_flow;
  j["used_fallback"] = s.used_fallback;
  return j;
}

ContextSlice slice_from(const Json &j) {
  ContextSlice s;
  s.criterion.line = j.at("criterion").get<int>();
  for (int l : j.at("context").get<std::vector<int>>()) s.context_lines.insert(l);
  s.used_control_flow = j.at("used_control_flow").get<bool>();
  s.used_fallback = j.at("used_fallback").get<bool>();
  return s;
}

Json pair_json(const SlicedPair &p) {
  Json j;
  j["buggy"] = p.buggy;
  j["fixed"] = p.fixed;
  j["buggy_slice"] = slice_json(p.buggy_slice);
  j["fixed_slice"] = slice_json(p.fixed_slice);
  return j;
}

SlicedPair pair_from(const Json &j) {
  SlicedPair p;
  p.buggy = j.at("buggy").get<std::string>();
  p.fixed = j.at("fixed").get<std::string>();
  p.buggy_slice = slice_from(j.at("buggy_slice"));
  p.fixed_slice = slice_from(j.at("fixed_slice"));
  return p;
}

// Rejection reason for one pair, or the datapoint it yields.
std::variant<RejectReason, Datapoint> examine(const RawPair &raw) {
  if (is_minified(raw.buggy) || is_minified(raw.fixed)) return RejectReason::Minified;
  SyntaxTree b, f;
  try {
    b = load_tree(raw.buggy, raw.buggy_estree);
    f = load_tree(raw.fixed, raw.fixed_estree);
  } catch (const ParseError &) {
    return RejectReason::Unparseable;
  }
  DiffOutcome d = ast_diff(b, f);
  if (d.status == DiffStatus::NoDifference) return RejectReason::NoDifference;
  if (d.status == DiffStatus::NotOneNode) return RejectReason::NotOneNode;
  Datapoint dp;
  dp.id = raw.id;
  dp.buggy_source = raw.buggy.content;
  dp.fixed_source = raw.fixed.content;
  dp.buggy_line = d.result->buggy_line;
  dp.fixed_line = d.result->fixed_line;
  dp.edit = d.result->edit;
  dp.buggy_estree = raw.buggy_estree;
  dp.fixed_estree = raw.fixed_estree;
  return dp;
}

} // namespace

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
  case RejectReason::Minified:
    return "minified";
  case RejectReason::Unparseable:
    return "unparseable";
  case RejectReason::NoDifference:
    return "no_difference";
  case RejectReason::NotOneNode:
    return "not_one_node";
  }
  return "unknown";
}

int FilterReport::rejected_total() const {
  int n = 0;
  for (const auto &[_, c] : rejected) n += c;
  return n;
}

std::string FilterReport::to_json() const {
  Json j;
  j["input"] = input;
  j["kept"] = kept;
  j["rejected"] = rejected;
  j["edit_ops"] = edit_ops;
  return j.dump(2);
}

bool is_minified(const SourceFile &file) {
  for (const auto &l : file.lines)
    if (l.size() > 1000) return true;
  return file.lines.size() <= 2 && file.content.size() > 500;
}

SyntaxTree load_tree(const SourceFile &source, const std::optional<std::string> &estree) {
  try {
    return parse(source);
  } catch (const ParseError &) {
    if (!estree) throw;
  }
  SyntaxTree t = ingest_estree(*estree);
  t.source_lines = source.lines;
  return t;
}

SyntaxTree buggy_tree(const Datapoint &dp) {
  return load_tree(SourceFile::from_text(dp.id + "/buggy.js", dp.buggy_source), dp.buggy_estree);
}

SyntaxTree fixed_tree(const Datapoint &dp) {
  return load_tree(SourceFile::from_text(dp.id + "/fixed.js", dp.fixed_source), dp.fixed_estree);
}

FilterResult filter_pairs(const std::vector<RawPair> &pairs) {
  const int n = static_cast<int>(pairs.size());
  std::vector<std::variant<RejectReason, Datapoint>> results(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) results[i] = examine(pairs[i]);

  FilterResult out;
  out.report.input = n;
  for (auto &r : results) {
    if (auto *reason = std::get_if<RejectReason>(&r)) {
      ++out.report.rejected[std::string(reject_reason_name(*reason))];
      continue;
    }
    Datapoint &dp = std::get<Datapoint>(r);
    ++out.report.edit_ops[std::string(op_name(dp.edit.op))];
    out.kept.push_back(std::move(dp));
  }
  out.report.kept = static_cast<int>(out.kept.size());
  return out;
}

std::vector<RawPair> load_pair_directory(const std::string &root) {
  std::vector<fs::path> dirs;
  for (const auto &entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<RawPair> out;
  for (const auto &d : dirs) {
    if (!fs::exists(d / "buggy.js") || !fs::exists(d / "fixed.js")) continue;
    RawPair p;
    p.id = d.filename().string();
    p.buggy = SourceFile::load((d / "buggy.js").string());
    p.fixed = SourceFile::load((d / "fixed.js").string());
    p.origin = read_optional(d / "origin.txt");
    p.buggy_estree = read_optional(d / "buggy.json");
    p.fixed_estree = read_optional(d / "fixed.json");
    out.push_back(std::move(p));
  }
  return out;
}

std::string normalize_source(const std::string &source) {
  std::string out;
  std::istringstream in(source);
  std::string line;
  while (std::getline(in, line)) {
    auto end = line.find_last_not_of(" \t\r\f\v");
    out += end == std::string::npos ? std::string() : line.substr(0, end + 1);
    out += '\n';
  }
  return out;
}

std::vector<Datapoint> dedup(const std::vector<Datapoint> &points) {
  std::set<std::string> seen;
  std::vector<Datapoint> out;
  for (const auto &p : points) {
    std::string key = normalize_source(p.buggy_source);
    key += '\0';
    key += normalize_source(p.fixed_source);
    if (seen.insert(std::move(key)).second) out.push_back(p);
  }
  return out;
}

Split split(const std::vector<Datapoint> &points, const SplitSpec &spec) {
  const std::size_t n = points.size();
  if (n < 3) throw std::invalid_argument("corpus of " + std::to_string(n) + " points is too small to split");
  if (spec.train < 0 || spec.test < 0 || spec.validation < 0 ||
      std::abs(spec.train + spec.test + spec.validation - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Explicit Fisher-Yates so the permutation is the same with every
  // standard library.
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
  const double dn = static_cast<double>(n);
  auto n_test = static_cast<std::size_t>(dn * spec.test + 1e-9);
  auto n_val = static_cast<std::size_t>(dn * spec.validation + 1e-9);
  // Flooring both held-out parts can leave training more than one point
  // over its share; hand the excess back, larger remainder first.
  while (static_cast<double>(n - n_test - n_val) - dn * spec.train > 1.0 + 1e-9) {
    double rt = dn * spec.test - static_cast<double>(n_test);
    double rv = dn * spec.validation - static_cast<double>(n_val);
    if (rt >= rv) ++n_test;
    else ++n_val;
  }
  Split out;
  for (std::size_t k = 0; k < n; ++k) {
    const Datapoint &p = points[order[k]];
    if (k < n_test) out.test.push_back(p);
    else if (k < n_test + n_val) out.validation.push_back(p);
    else out.train.push_back(p);
  }
  return out;
}

void attach_slices(std::vector<Datapoint> &points, bool single, bool dual) {
  const int n = static_cast<int>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    Datapoint &dp = points[i];
    dp.sliced_single.reset();
    dp.sliced_dual.reset();
    try {
      SyntaxTree b = buggy_tree(dp);
      SyntaxTree f = fixed_tree(dp);
      DiffResult d{dp.edit, dp.buggy_line, dp.fixed_line};
      if (single) {
        try {
          dp.sliced_single = single_slice(b, f, d);
        } catch (const std::exception &) {
        }
      }
      if (dual) {
        try {
          dp.sliced_dual = dual_slice(b, f, d);
        } catch (const std::exception &) {
        }
      }
    } catch (const std::exception &) {
    }
  }
}

CorpusFormatError::CorpusFormatError(int line, const std::string &message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string datapoint_to_json(const Datapoint &dp) {
  Json j;
  j["id"] = dp.id;
  j["buggy_source"] = dp.buggy_source;
  j["fixed_source"] = dp.fixed_source;
  j["buggy_line"] = dp.buggy_line;
  j["fixed_line"] = dp.fixed_line;
  j["edit"] = edit_json(dp.edit);
  if (dp.sliced_single) j["sliced_single"] = pair_json(*dp.sliced_single);
  if (dp.sliced_dual) j["sliced_dual"] = pair_json(*dp.sliced_dual);
  if (dp.buggy_estree) j["buggy_estree"] = *dp.buggy_estree;
  if (dp.fixed_estree) j["fixed_estree"] = *dp.fixed_estree;
  return j.dump();
}

Datapoint datapoint_from_json(const std::string &text, int line) {
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("record is not an object");
    Datapoint dp;
    dp.id = j.at("id").get<std::string>();
    dp.buggy_source = j.at("buggy_source").get<std::string>();
    dp.fixed_source = j.at("fixed_source").get<std::string>();
    dp.buggy_line = j.at("buggy_line").get<int>();
    dp.fixed_line = j.at("fixed_line").get<int>();
    dp.edit = edit_from(j.at("edit"));
    if (j.contains("sliced_single")) dp.sliced_single = pair_from(j.at("sliced_single"));
    if (j.contains("sliced_dual")) dp.sliced_dual = pair_from(j.at("sliced_dual"));
    if (j.contains("buggy_estree")) dp.buggy_estree = j.at("buggy_estree").get<std::string>();
    if (j.contains("fixed_estree")) dp.fixed_estree = j.at("fixed_estree").get<std::string>();
    return dp;
  } catch (const CorpusFormatError &) {
    throw;
  } catch (const std::exception &e) {
    throw CorpusFormatError(line, e.what());
  }
}

void write_jsonl(const std::vector<Datapoint> &points, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto &p : points) out << datapoint_to_json(p) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Datapoint> read_jsonl(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Datapoint> out;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(datapoint_from_json(text, line));
  }
  return out;
}

} // namespace slicefix
