// Typed code graphs (AST backbone, SuccToken chain, value nodes), the
// kind/value vocabularies and edits indexed against graph numbering.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slicefix/corpus.hpp"
#include "slicefix/diff.hpp"
#include "slicefix/syntax.hpp"

namespace slicefix {

enum class EdgeType : std::uint8_t { AstChild, SuccToken, ValueLink };
inline constexpr int kEdgeTypeCount = 3;
std::string_view edge_type_name(EdgeType t);

struct Vocabulary {
  static constexpr int kUnknownKind = 0;  // "<unk>"
  static constexpr int kValueKind = 1;    // kind of every value node
  static constexpr int kUnknownValue = 0; // "<UNKNOWN>"

  std::vector<std::string> kinds;
  std::vector<std::string> values;
  int K = 5000;

  int kind_id(std::string_view label) const;
  int value_id(std::string_view lexeme) const;
  int kind_count() const { return static_cast<int>(kinds.size()); }
  int value_count() const { return static_cast<int>(values.size()); }

  std::string to_json() const;
  static Vocabulary from_json(const std::string &text);
  /// FNV-1a over the JSON form, for checkpoints and manifests.
  std::uint64_t hash() const;

  /// Rebuilds the lookup maps after `kinds`/`values` change.
  void reindex();

private:
  std::map<std::string, int, std::less<>> kind_index_;
  std::map<std::string, int, std::less<>> value_index_;
};

/// Empty vocabulary: the reserved kinds and the UNKNOWN value only.
Vocabulary empty_vocabulary(int K);

/// Counts lexemes over `value_sources` (most frequent first, ties
/// lexicographic, at most K) and collects every kind in `kind_sources`.
Vocabulary build_vocab_from_trees(const std::vector<const SyntaxTree *> &value_sources,
                                  const std::vector<const SyntaxTree *> &kind_sources, int K);

struct GraphNode {
  int kind_id = 0;
  std::optional<int> value_id; // set on value nodes only
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  EdgeType type = EdgeType::AstChild;
};

/// Nodes 0..syntax_nodes-1 are the tree nodes in preorder; value nodes
/// follow in the order of their owners.
struct CodeGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  int syntax_nodes = 0;
  // Per syntax node, for edit validity checks.
  std::vector<int> child_count;
  std::vector<char> has_value;
  std::vector<int> value_node; // -1 when the node has no value

  int size() const { return static_cast<int>(nodes.size()); }
  std::string to_json() const;
};

CodeGraph build_graph(const SyntaxTree &tree, const Vocabulary &vocab);

/// Rebuilds the kind-labelled tree from AstChild edges (kinds are vocabulary
/// labels, values come from the value nodes).
struct GraphTreeNode {
  int kind_id = 0;
  std::optional<int> value_id;
  std::vector<int> children;
};
std::vector<GraphTreeNode> graph_tree(const CodeGraph &g);

struct IndexedEdit {
  EditOp op = EditOp::AddNode;
  int location = 0;
  int position = -1;
  std::optional<int> kind_id;
  std::optional<int> value_id;

  friend bool operator==(const IndexedEdit &, const IndexedEdit &) = default;
};

/// Throws std::out_of_range when the location is not a syntax node of the graph.
IndexedEdit index_edit(const GraphEdit &edit, const CodeGraph &graph, const Vocabulary &vocab);
/// Whether the edit could be applied to the graph's tree.
bool edit_valid(const IndexedEdit &edit, const CodeGraph &graph, const Vocabulary &vocab);

enum class SliceMode { Single, Dual, None };
std::string_view slice_mode_name(SliceMode m);
std::optional<SliceMode> slice_mode_from_name(std::string_view name);

/// Sources whose lexemes feed the value vocabulary for a datapoint: the
/// buggy side, plus the fixed side in dual mode.
std::vector<std::string> vocab_sources(const Datapoint &dp, SliceMode mode);
/// Parses vocab_sources over a training set (unparseable sources skipped).
Vocabulary build_vocab(const std::vector<Datapoint> &train, int K, SliceMode mode);

struct Sample {
  std::string id;
  CodeGraph graph;
  GraphEdit edit; // against the tree the graph was built from
  IndexedEdit gold;
};

/// Graph of the model input for `mode` and the gold edit expressed on it.
/// Empty when the needed slice is missing or the edit cannot be recovered.
std::optional<Sample> make_sample(const Datapoint &dp, SliceMode mode, const Vocabulary &vocab);
std::vector<Sample> make_samples(const std::vector<Datapoint> &points, SliceMode mode,
                                 const Vocabulary &vocab);

} // namespace slicefix
