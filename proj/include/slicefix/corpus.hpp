// Pair ingestion, filtering, deduplication, splitting and JSONL persistence.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "slicefix/diff.hpp"
#include "slicefix/slicer.hpp"
#include "slicefix/syntax.hpp"

namespace slicefix {

struct RawPair {
  std::string id;
  SourceFile buggy;
  SourceFile fixed;
  std::optional<std::string> origin;
  // ESTree documents used when the subset parser rejects a file.
  std::optional<std::string> buggy_estree;
  std::optional<std::string> fixed_estree;
};

struct Datapoint {
  std::string id;
  std::string buggy_source;
  std::string fixed_source;
  int buggy_line = 0;
  int fixed_line = 0;
  GraphEdit edit;
  std::optional<SlicedPair> sliced_single;
  std::optional<SlicedPair> sliced_dual;
  std::optional<std::string> buggy_estree;
  std::optional<std::string> fixed_estree;
};

enum class RejectReason { Minified, Unparseable, NoDifference, NotOneNode };
std::string_view reject_reason_name(RejectReason r);

struct FilterReport {
  int input = 0;
  int kept = 0;
  std::map<std::string, int> rejected; // by reason name
  std::map<std::string, int> edit_ops; // kept datapoints by op name

  int rejected_total() const;
  std::string to_json() const;
};

/// Any line longer than 1000 characters, or at most two lines and more
/// than 500 bytes.
bool is_minified(const SourceFile &file);

/// Parses `source`, falling back to the ESTree document when given. The
/// returned tree always carries the source lines.
SyntaxTree load_tree(const SourceFile &source, const std::optional<std::string> &estree);
SyntaxTree buggy_tree(const Datapoint &dp);
SyntaxTree fixed_tree(const Datapoint &dp);

struct FilterResult {
  std::vector<Datapoint> kept;
  FilterReport report;
};
FilterResult filter_pairs(const std::vector<RawPair> &pairs);

/// Reads `<root>/<id>/buggy.js` and `<root>/<id>/fixed.js` (plus optional
/// `buggy.json`/`fixed.json` ESTree documents), ordered by id.
std::vector<RawPair> load_pair_directory(const std::string &root);

/// Trailing whitespace on each line is ignored.
std::string normalize_source(const std::string &source);
std::vector<Datapoint> dedup(const std::vector<Datapoint> &points);

struct SplitSpec {
  double train = 0.8;
  double test = 0.1;
  double validation = 0.1;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<Datapoint> train;
  std::vector<Datapoint> test;
  std::vector<Datapoint> validation;
};

/// test = floor(n * test), validation = floor(n * validation), the rest is
/// training, moving points to the held-out parts while training would exceed
/// its share by more than one. Throws std::invalid_argument for n < 3 or bad fractions.
Split split(const std::vector<Datapoint> &points, const SplitSpec &spec);

/// Computes the requested sliced pairs. A side whose slice fails to
/// reconstruct is left empty.
void attach_slices(std::vector<Datapoint> &points, bool single, bool dual);

class CorpusFormatError : public std::runtime_error {
public:
  CorpusFormatError(int line, const std::string &message);
  int line() const { return line_; }

private:
  int line_;
};

std::string datapoint_to_json(const Datapoint &dp);
/// Throws CorpusFormatError citing `line`.
Datapoint datapoint_from_json(const std::string &text, int line = 1);
void write_jsonl(const std::vector<Datapoint> &points, const std::string &path);
std::vector<Datapoint> read_jsonl(const std::string &path);

} // namespace slicefix
