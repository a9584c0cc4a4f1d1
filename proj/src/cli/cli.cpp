#include "slicefix/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "slicefix/eval.hpp"
#include "slicefix/model.hpp"

namespace slicefix::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class InputError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class InvariantError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << x;
  return s.str();
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << x;
  return s.str();
}

struct Options {
  std::string config_file;
  int threads = 0;
  ModelConfig model;
  std::string mode = "single";
  int vocab_size = 5000;
  int k = 5;
  std::string out;

  std::string file, fixed, corpus, data, dataset, checkpoint, checkpoint_b, mode_b, manifest, emit_csv;
  std::string side = "buggy";
  int line = -1; // unset
  bool dual = false;
  bool emit_lines = false;
  bool emit_source = false;
  bool json = false;
  int limit = 10;
  double epsilon = 1e-4;
};

class Run {
public:
  Run(std::vector<std::string> args, std::ostream &out) : args_(std::move(args)), out_(out) {}

  void input(const std::string &path) { inputs_.push_back(path); }

  void write(const Options &o, const std::string &name, const std::string &content) {
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / name, std::ios::binary);
    if (!f) throw InputError("cannot write " + (fs::path(o.out) / name).string());
    f << content;
    outputs_.push_back(name);
  }

  void manifest(const Options &o, const std::string &command) {
    if (o.out.empty()) return;
    Json j;
    j["command"] = command;
    j["args"] = args_;
    j["cwd"] = fs::current_path().string();
    j["threads"] = o.threads;
    j["seed"] = o.model.seed;
    j["mode"] = o.mode;
    Json cfg;
    cfg["d"] = o.model.d;
    cfg["layers"] = o.model.layers;
    cfg["lr"] = o.model.learning_rate;
    cfg["dropout"] = o.model.dropout;
    cfg["batch"] = o.model.batch_size;
    cfg["epochs"] = o.model.epochs;
    cfg["edit_steps"] = o.model.edit_steps;
    cfg["vocab_size"] = o.vocab_size;
    cfg["k"] = o.k;
    j["config"] = cfg;
    Json ins = Json::object();
    for (const auto &p : inputs_) ins[p] = hex(path_hash(p));
    j["inputs"] = ins;
    Json outs = Json::object();
    for (const auto &name : outputs_) outs[name] = hex(path_hash((fs::path(o.out) / name).string()));
    j["outputs"] = outs;
    fs::create_directories(o.out);
    std::ofstream f(fs::path(o.out) / "manifest.json", std::ios::binary);
    f << j.dump(2) << '\n';
  }

  std::ostream &out() { return out_; }

private:
  std::vector<std::string> args_;
  std::ostream &out_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

SliceMode parse_mode(const std::string &name) {
  auto m = slice_mode_from_name(name);
  if (!m) throw UsageError("unknown mode " + name);
  return *m;
}

SyntaxTree parse_file(const std::string &path, SourceFile &file) {
  try {
    file = SourceFile::load(path);
  } catch (const std::exception &) {
    throw InputError("cannot read " + path);
  }
  return parse(file);
}

std::string join_lines(const std::set<int> &lines) {
  std::string s;
  for (int l : lines) s += (s.empty() ? "" : ",") + std::to_string(l);
  return s;
}

// ---------------------------------------------------------------- slice

int cmd_slice(const Options &o, Run &run) {
  SourceFile bf;
  SyntaxTree buggy = parse_file(o.file, bf);
  run.input(o.file);
  const int lines = file_line_count(buggy);
  std::string text;
  if (o.fixed.empty()) {
    if (o.dual) throw UsageError("--dual needs --fixed");
    if (o.line < 1 || o.line > lines)
      throw UsageError("line " + std::to_string(o.line) + " outside 1.." + std::to_string(lines));
    ContextSlice cs = slice_with_fallback(buggy, o.line);
    text = o.emit_lines ? join_lines(cs.context_lines) + "\n" : reconstruct_statements(buggy, cs.context_lines);
  } else {
    SourceFile ff;
    SyntaxTree fixed = parse_file(o.fixed, ff);
    run.input(o.fixed);
    DiffOutcome d = ast_diff(buggy, fixed);
    if (d.status != DiffStatus::OneNode) throw InputError("the pair does not differ in exactly one node");
    DiffResult diff = *d.result;
    if (o.line != -1) {
      if (o.line < 1 || o.line > lines)
        throw UsageError("line " + std::to_string(o.line) + " outside 1.." + std::to_string(lines));
      diff.buggy_line = o.line;
    }
    SlicedPair pair = o.dual ? dual_slice(buggy, fixed, diff) : single_slice(buggy, fixed, diff);
    auto side_text = [&](bool fixed_side) {
      if (!o.emit_lines) return fixed_side ? pair.fixed : pair.buggy;
      const ContextSlice &cs = fixed_side ? pair.fixed_slice : pair.buggy_slice;
      return join_lines(cs.context_lines) + "\n";
    };
    if (o.side == "buggy") text = side_text(false);
    else if (o.side == "fixed") text = side_text(true);
    else text = "// buggy\n" + side_text(false) + "// fixed\n" + side_text(true);
  }
  run.out() << text;
  if (!o.out.empty()) run.write(o, "slice.txt", text);
  run.manifest(o, "slice");
  return kOk;
}

// ---------------------------------------------------------------- dataset

void attach_for_mode(std::vector<Datapoint> &pts, SliceMode mode) {
  if (mode == SliceMode::None) return;
  attach_slices(pts, true, mode == SliceMode::Dual);
}

std::string jsonl(const std::vector<Datapoint> &pts) {
  std::string s;
  for (const auto &dp : pts) s += datapoint_to_json(dp) + "\n";
  return s;
}

int cmd_dataset(const Options &o, Run &run) {
  if (o.out.empty()) throw UsageError("dataset needs --out");
  SliceMode mode = parse_mode(o.mode);
  if (!fs::is_directory(o.corpus)) throw InputError("cannot read corpus directory " + o.corpus);
  run.input(o.corpus);
  FilterResult fr = filter_pairs(load_pair_directory(o.corpus));
  std::vector<Datapoint> pts = dedup(fr.kept);
  SplitSpec spec;
  spec.seed = o.model.seed;
  Split sp;
  try {
    sp = split(pts, spec);
  } catch (const std::invalid_argument &e) {
    throw InputError(std::string("cannot split corpus: ") + e.what());
  }
  attach_for_mode(sp.train, mode);
  attach_for_mode(sp.validation, mode);
  attach_for_mode(sp.test, mode);
  run.write(o, "train.jsonl", jsonl(sp.train));
  run.write(o, "validation.jsonl", jsonl(sp.validation));
  run.write(o, "test.jsonl", jsonl(sp.test));
  Json rep = Json::parse(fr.report.to_json());
  rep["duplicates"] = static_cast<int>(fr.kept.size() - pts.size());
  rep["split"] = {{"train", sp.train.size()}, {"validation", sp.validation.size()}, {"test", sp.test.size()}};
  rep["mode"] = o.mode;
  run.write(o, "filter_report.json", rep.dump(2) + "\n");
  run.out() << rep.dump(2) << "\n";
  run.manifest(o, "dataset");
  return kOk;
}

// ---------------------------------------------------------------- train / tune

// A dataset directory stands for its test split.
std::vector<Datapoint> read_points(std::string path, Run &run) {
  if (fs::is_directory(path)) path = (fs::path(path) / "test.jsonl").string();
  if (!fs::is_regular_file(path)) throw InputError("cannot read " + path);
  run.input(path);
  return read_jsonl(path);
}

std::vector<Sample> samples_or_throw(const std::vector<Datapoint> &pts, SliceMode mode, const Vocabulary &v,
                                     const std::string &what) {
  auto s = make_samples(pts, mode, v);
  if (s.empty()) throw InputError("no usable " + what + " samples");
  return s;
}

Json history_json(const TrainResult &r) {
  Json h = Json::array();
  for (const auto &e : r.history)
    h.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_top1", e.val_top1}});
  return h;
}

int cmd_train(const Options &o, Run &run) {
  if (o.out.empty()) throw UsageError("train needs --out");
  SliceMode mode = parse_mode(o.mode);
  auto train_pts = read_points((fs::path(o.data) / "train.jsonl").string(), run);
  auto val_pts = read_points((fs::path(o.data) / "validation.jsonl").string(), run);
  Vocabulary vocab = build_vocab(train_pts, o.vocab_size, mode);
  auto tr = samples_or_throw(train_pts, mode, vocab, "training");
  auto va = samples_or_throw(val_pts, mode, vocab, "validation");
  TrainResult r = train(tr, va, vocab, o.model, [&](const EpochRecord &e) {
    run.out() << "epoch " << e.epoch << " loss " << fmt(e.train_loss) << " val_top1 " << fmt(e.val_top1, 4) << "\n";
  });
  const std::string ckpt = (fs::path(o.out) / "model.sfck").string();
  fs::create_directories(o.out);
  save_checkpoint(ckpt, r.params, vocab);
  run.write(o, "vocab.json", vocab.to_json() + "\n");
  Json summary;
  summary["best_epoch"] = r.best_epoch;
  summary["train_samples"] = tr.size();
  summary["validation_samples"] = va.size();
  summary["kinds"] = vocab.kind_count();
  summary["values"] = vocab.value_count();
  summary["history"] = history_json(r);
  run.write(o, "history.json", summary.dump(2) + "\n");
  // Registered after the fact so that the manifest hashes it.
  run.write(o, "model.sfck", read_file(ckpt));
  run.out() << "best epoch " << r.best_epoch << "\n";
  run.manifest(o, "train");
  return kOk;
}

int cmd_tune(const Options &o, Run &run) {
  if (o.out.empty()) throw UsageError("tune needs --out");
  SliceMode mode = parse_mode(o.mode);
  auto train_pts = read_points((fs::path(o.data) / "train.jsonl").string(), run);
  auto val_pts = read_points((fs::path(o.data) / "validation.jsonl").string(), run);
  Vocabulary vocab = build_vocab(train_pts, o.vocab_size, mode);
  auto tr = samples_or_throw(train_pts, mode, vocab, "training");
  auto va = samples_or_throw(val_pts, mode, vocab, "validation");
  Json rows = Json::array();
  std::ostringstream table;
  table << std::setw(7) << "layers" << std::setw(8) << "lr" << std::setw(9) << "dropout" << std::setw(10) << "val_top1"
        << std::setw(6) << "best" << std::setw(12) << "final_loss" << "  status\n";
  for (int layers : {2, 3, 4})
    for (double lr : {0.1, 0.01, 0.001})
      for (double dropout : {0.0, 0.1, 0.2}) {
        ModelConfig c = o.model;
        c.layers = layers;
        c.learning_rate = lr;
        c.dropout = dropout;
        Json row{{"layers", layers}, {"lr", lr}, {"dropout", dropout}};
        std::string status = "ok";
        double best = 0.0, final_loss = 0.0;
        int best_epoch = 0;
        try {
          TrainResult r = train(tr, va, vocab, c);
          best_epoch = r.best_epoch;
          for (const auto &e : r.history) best = std::max(best, e.val_top1);
          if (!r.history.empty()) final_loss = r.history.back().train_loss;
        } catch (const TrainingDiverged &) {
          status = "diverged";
        }
        row["val_top1"] = best;
        row["best_epoch"] = best_epoch;
        row["final_train_loss"] = final_loss;
        row["status"] = status;
        rows.push_back(row);
        table << std::setw(7) << layers << std::setw(8) << lr << std::setw(9) << dropout << std::setw(10)
              << fmt(best, 4) << std::setw(6) << best_epoch << std::setw(12) << fmt(final_loss, 4) << "  " << status
              << "\n";
      }
  run.write(o, "tune.json", rows.dump(2) + "\n");
  run.write(o, "tune.txt", table.str());
  run.out() << table.str();
  run.manifest(o, "tune");
  return kOk;
}

// ---------------------------------------------------------------- infer / eval

std::pair<ModelParams, Vocabulary> load_model(const std::string &path, Run &run) {
  run.input(path);
  return load_checkpoint(path);
}

std::string describe(const ScoredEdit &s, const CodeGraph &g, const Vocabulary &v, const SyntaxTree *tree) {
  std::ostringstream line;
  const IndexedEdit &e = s.edit;
  line << fmt(s.log_prob) << "\t" << op_name(e.op) << "\tnode " << e.location << " "
       << v.kinds[g.nodes[e.location].kind_id];
  if (tree) line << " line " << tree->nodes[e.location].span.line;
  if (e.op == EditOp::AddNode) line << "\tposition " << e.position;
  if (e.kind_id) line << "\tkind " << v.kinds[*e.kind_id];
  if (e.value_id) line << "\tvalue " << v.values[*e.value_id];
  return line.str();
}

int cmd_infer(const Options &o, Run &run) {
  SliceMode mode = parse_mode(o.mode);
  auto [params, vocab] = load_model(o.checkpoint, run);
  std::ostringstream text;
  if (!o.dataset.empty()) {
    auto pts = read_points(o.dataset, run);
    for (const auto &dp : pts) {
      auto s = make_sample(dp, mode, vocab);
      text << "# " << dp.id << "\n";
      if (!s) {
        text << "no sample\n";
        continue;
      }
      Prediction p = beam_infer(s->graph, params, vocab, o.k);
      for (std::size_t r = 0; r < p.ranked.size(); ++r)
        text << (exact_match(p.ranked[r].edit, s->gold).overall ? "* " : "  ") << r + 1 << "\t"
             << describe(p.ranked[r], s->graph, vocab, nullptr) << "\n";
    }
  } else {
    SourceFile f;
    SyntaxTree tree = parse_file(o.file, f);
    run.input(o.file);
    SyntaxTree input = tree;
    if (mode != SliceMode::None) {
      const int lines = file_line_count(tree);
      if (o.line < 1 || o.line > lines)
        throw UsageError("line " + std::to_string(o.line) + " outside 1.." + std::to_string(lines));
      ContextSlice cs = slice_with_fallback(tree, o.line);
      input = parse(reconstruct_statements(tree, cs.context_lines));
    }
    CodeGraph g = build_graph(input, vocab);
    Prediction p = beam_infer(g, params, vocab, o.k);
    for (std::size_t r = 0; r < p.ranked.size(); ++r)
      text << r + 1 << "\t" << describe(p.ranked[r], g, vocab, &input) << "\n";
  }
  run.out() << text.str();
  if (!o.out.empty()) run.write(o, "predictions.txt", text.str());
  run.manifest(o, "infer");
  return kOk;
}

int cmd_eval(const Options &o, Run &run) {
  auto pts = read_points(o.dataset, run);
  auto evaluate = [&](const std::string &ckpt, const std::string &mode_name) {
    SliceMode mode = parse_mode(mode_name);
    auto [params, vocab] = load_model(ckpt, run);
    auto samples = samples_or_throw(pts, mode, vocab, "evaluation");
    return topk_accuracy(params, vocab, samples, {1, 3, 5});
  };
  AccuracyReport a = evaluate(o.checkpoint, o.mode);
  run.out() << a.to_text();
  if (!o.out.empty()) {
    run.write(o, "report.json", a.to_json() + "\n");
    run.write(o, "report.txt", a.to_text());
  }
  if (!o.checkpoint_b.empty()) {
    AccuracyReport b = evaluate(o.checkpoint_b, o.mode_b.empty() ? o.mode : o.mode_b);
    run.out() << "\n" << b.to_text();
    Json ov = Json::object();
    for (int k : {1, 3, 5}) {
      Overlap x = compare_runs(a, b, k);
      ov["top" + std::to_string(k)] = Json::parse(x.to_json());
      run.out() << "top-" << k << ": both " << x.both << ", only A " << x.only_a << ", only B " << x.only_b
                << ", neither " << x.neither << "\n";
    }
    if (!o.out.empty()) {
      run.write(o, "report_b.json", b.to_json() + "\n");
      run.write(o, "overlap.json", ov.dump(2) + "\n");
    }
  }
  run.manifest(o, "eval");
  return kOk;
}

// ---------------------------------------------------------------- stats / grad-check

std::vector<Datapoint> corpus_points(const Options &o, Run &run, SliceMode mode) {
  std::vector<Datapoint> pts;
  if (!o.dataset.empty()) {
    pts = read_points(o.dataset, run);
  } else {
    if (!fs::is_directory(o.corpus)) throw InputError("cannot read corpus directory " + o.corpus);
    run.input(o.corpus);
    pts = dedup(filter_pairs(load_pair_directory(o.corpus)).kept);
  }
  bool need = false;
  for (const auto &dp : pts)
    need = need || (mode == SliceMode::Dual ? !dp.sliced_dual : !dp.sliced_single);
  if (need) attach_for_mode(pts, mode);
  return pts;
}

int cmd_stats(const Options &o, Run &run) {
  SliceMode mode = parse_mode(o.mode);
  if (mode == SliceMode::None) throw UsageError("stats needs --mode single or dual");
  auto pts = corpus_points(o, run, mode);
  ContextStats st = context_stats(pts, mode);
  for (const auto &r : st.rows)
    if (r.lines_after > r.lines_before || r.tokens_after > r.tokens_before)
      throw InvariantError("slice of " + r.id + " is larger than its file");
  run.out() << (o.json ? st.to_json() + "\n" : st.to_text());
  if (!o.out.empty()) {
    run.write(o, "stats.json", st.to_json() + "\n");
    run.write(o, "stats.txt", st.to_text());
  }
  if (!o.emit_csv.empty()) {
    std::ofstream f(o.emit_csv, std::ios::binary);
    if (!f) throw InputError("cannot write " + o.emit_csv);
    f << st.to_csv();
  }
  run.manifest(o, "stats");
  return kOk;
}

int cmd_gradcheck(const Options &o, Run &run) {
  SliceMode mode = parse_mode(o.mode);
  auto pts = corpus_points(o, run, mode);
  Vocabulary vocab = build_vocab(pts, o.vocab_size, mode);
  auto samples = make_samples(pts, mode, vocab);
  if (samples.empty()) throw InputError("no usable samples");
  if (static_cast<int>(samples.size()) > o.limit) samples.resize(static_cast<std::size_t>(o.limit));
  ModelConfig c = o.model;
  c.validate();
  ModelParams params = init_params(vocab, c);
  double worst = 0.0;
  std::ostringstream text;
  for (const auto &s : samples) {
    GradCheckResult r = grad_check(params, s.graph, s.gold, o.epsilon);
    worst = std::max(worst, r.max_relative_error);
    text << s.id << "\t" << r.checked << " partials\t" << r.kinks << " at pooling kinks\tmax relative error " << std::scientific << std::setprecision(3)
         << r.max_relative_error << std::defaultfloat << "\t" << r.worst_block << "\n";
  }
  text << "max relative error " << std::scientific << std::setprecision(3) << worst << "\n";
  run.out() << text.str();
  if (!o.out.empty()) run.write(o, "gradcheck.txt", text.str());
  run.manifest(o, "grad-check");
  if (worst >= 1e-3) throw InvariantError("gradient check failed");
  return kOk;
}

// ---------------------------------------------------------------- replay

int cmd_replay(const Options &o, std::ostream &out, std::ostream &err) {
  if (o.out.empty()) throw UsageError("replay needs --out");
  Json m;
  try {
    m = Json::parse(read_file(o.manifest));
  } catch (const Json::exception &e) {
    throw InputError(std::string("bad manifest: ") + e.what());
  }
  std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
  std::vector<std::string> next;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string &a = args[i];
    if (a == "--out" || a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--threads=", 0) == 0) continue;
    next.push_back(a);
  }
  const fs::path out_dir = fs::absolute(o.out);
  next.insert(next.end(), {"--out", out_dir.string(), "--threads", "1"});
  const fs::path here = fs::current_path();
  fs::current_path(m.at("cwd").get<std::string>());
  std::ostringstream sink;
  int code = run(next, sink, err);
  fs::current_path(here);
  if (code != kOk) return code;
  int differing = 0;
  for (const auto &[name, h] : m.at("outputs").items()) {
    fs::path p = out_dir / name;
    std::string now = fs::exists(p) ? hex(path_hash(p.string())) : "missing";
    bool same = now == h.get<std::string>();
    differing += !same;
    out << (same ? "identical " : "differs   ") << name << "\n";
  }
  return differing == 0 ? kOk : kInternalError;
}

// ---------------------------------------------------------------- config

std::map<std::string, std::string> read_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void add_model_options(CLI::App *sub, Options &o) {
  sub->add_option("--d", o.model.d, "embedding dimension");
  sub->add_option("--layers", o.model.layers, "message-passing layers");
  sub->add_option("--lr", o.model.learning_rate, "learning rate");
  sub->add_option("--dropout", o.model.dropout, "dropout on head hidden units");
  sub->add_option("--batch", o.model.batch_size, "batch size");
  sub->add_option("--epochs", o.model.epochs, "training epochs");
  sub->add_option("--edit-steps", o.model.edit_steps, "edit steps T");
  sub->add_option("--vocab-size", o.vocab_size, "value vocabulary size K");
}

void add_mode(CLI::App *sub, Options &o) {
  sub->add_option("--mode", o.mode, "slicing mode")->check(CLI::IsMember({"single", "dual", "none"}));
}

} // namespace

std::uint64_t path_hash(const std::string &path) {
  std::uint64_t h = 1469598103934665603ULL;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto &e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
      h = fnv(h, fs::relative(f, path).generic_string());
      h = fnv(h, read_file(f.string()));
    }
    return h;
  }
  return fnv(h, read_file(path));
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  Options o;
  CLI::App app{"slicing-based context extraction and graph-edit repair"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config_file, "key=value configuration file");
  app.add_option("--threads", o.threads, "worker threads (0 keeps the OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.model.seed, "random seed");
  app.add_option("--out", o.out, "output directory");

  auto *slice = app.add_subcommand("slice", "print the backward-slice context of a line");
  slice->add_option("file", o.file, "buggy source file")->required();
  slice->add_option("--line", o.line, "criterion line");
  slice->add_option("--fixed", o.fixed, "fixed source file");
  slice->add_flag("--dual", o.dual, "slice the fixed side from its own changed line");
  slice->add_option("--side", o.side, "side to print")->check(CLI::IsMember({"buggy", "fixed", "both"}));
  auto *emit_lines = slice->add_flag("--emit-lines", o.emit_lines, "print context line numbers");
  slice->add_flag("--emit-source", o.emit_source, "print reconstructed source (default)")->excludes(emit_lines);

  auto *dataset = app.add_subcommand("dataset", "filter, deduplicate, split and slice a pair corpus");
  dataset->add_option("corpus", o.corpus, "corpus directory")->required();
  add_mode(dataset, o);

  auto *trn = app.add_subcommand("train", "train a model on a dataset directory");
  trn->add_option("--data", o.data, "dataset directory")->required();
  add_mode(trn, o);
  add_model_options(trn, o);

  auto *tune = app.add_subcommand("tune", "3x3x3 grid over layers, learning rate and dropout");
  tune->add_option("--data", o.data, "dataset directory")->required();
  add_mode(tune, o);
  add_model_options(tune, o);

  auto *infer = app.add_subcommand("infer", "top-k patches for a file or a dataset");
  infer->add_option("--checkpoint", o.checkpoint, "model checkpoint")->required();
  infer->add_option("--input", o.file, "buggy source file");
  infer->add_option("--line", o.line, "buggy line");
  infer->add_option("--dataset", o.dataset, "JSONL dataset");
  infer->add_option("--k", o.k, "beam width")->check(CLI::PositiveNumber);
  add_mode(infer, o);

  auto *evl = app.add_subcommand("eval", "top-1/3/5 exact-match accuracy");
  evl->add_option("--checkpoint", o.checkpoint, "model checkpoint")->required();
  evl->add_option("--dataset", o.dataset, "JSONL test set")->required();
  evl->add_option("--checkpoint-b", o.checkpoint_b, "second model to compare");
  evl->add_option("--mode-b", o.mode_b, "slicing mode of the second model")
      ->check(CLI::IsMember({"single", "dual", "none"}));
  add_mode(evl, o);

  auto *stats = app.add_subcommand("stats", "context reduction statistics");
  stats->add_option("--corpus", o.corpus, "corpus directory");
  stats->add_option("--dataset", o.dataset, "JSONL dataset");
  stats->add_option("--emit-csv", o.emit_csv, "per-datapoint CSV path");
  stats->add_flag("--json", o.json, "print JSON instead of a table");
  add_mode(stats, o);

  auto *gc = app.add_subcommand("grad-check", "finite-difference gradient check");
  gc->add_option("--corpus", o.corpus, "corpus directory");
  gc->add_option("--dataset", o.dataset, "JSONL dataset");
  gc->add_option("--limit", o.limit, "samples to check")->check(CLI::PositiveNumber);
  gc->add_option("--epsilon", o.epsilon, "finite-difference step");
  add_mode(gc, o);
  add_model_options(gc, o);

  auto *replay = app.add_subcommand("replay", "re-run a manifest single-threaded and compare outputs");
  replay->add_option("manifest", o.manifest, "manifest.json")->required();

  Run state(args, out);
  struct ThreadGuard {
    int saved = omp_get_max_threads();
    ~ThreadGuard() { omp_set_num_threads(saved); }
  } thread_guard;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (!o.config_file.empty()) {
      state.input(o.config_file);
      CLI::App *sub = app.get_subcommands().front();
      for (const auto &[key, value] : read_config(o.config_file)) {
        CLI::Option *opt = sub->get_option_no_throw("--" + key);
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt) throw UsageError("unknown config key " + key);
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
      }
    }
    if (o.threads > 0) omp_set_num_threads(o.threads);
    CLI::App *sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "grad-check" && o.corpus.empty() && o.dataset.empty())
      throw UsageError("grad-check needs --corpus or --dataset");
    if (name == "stats" && o.corpus.empty() && o.dataset.empty()) throw UsageError("stats needs --corpus or --dataset");
    if (name == "infer" && o.dataset.empty() && o.file.empty()) throw UsageError("infer needs --input or --dataset");
    if (name == "train" || name == "tune") o.model.validate();
    if (name == "slice") return cmd_slice(o, state);
    if (name == "dataset") return cmd_dataset(o, state);
    if (name == "train") return cmd_train(o, state);
    if (name == "tune") return cmd_tune(o, state);
    if (name == "infer") return cmd_infer(o, state);
    if (name == "eval") return cmd_eval(o, state);
    if (name == "stats") return cmd_stats(o, state);
    if (name == "grad-check") return cmd_gradcheck(o, state);
    if (name == "replay") return cmd_replay(o, out, err);
    return kUsageError;
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::Error &e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InputError &e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParseError &e) {
    err << "error: parse failure at " << e.line() << ":" << e.col() << ": " << e.message() << "\n";
    return kInputError;
  } catch (const CorpusFormatError &e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const CheckpointError &e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvariantError &e) {
    err << "error: " << e.what() << "\n";
    return kInternalError;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

} // namespace slicefix::cli
