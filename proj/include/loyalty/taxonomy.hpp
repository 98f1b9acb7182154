#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace loyalty::tax {

enum class TaxonomyErrorKind {
    empty_document,
    multiple_roots,
    bad_indentation,
    duplicate_label,
    non_uniform_leaf_depth,
};

struct TaxonomyError : std::runtime_error {
    TaxonomyErrorKind kind;
    TaxonomyError(TaxonomyErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
};

struct ChainResult {
    bool valid = false;
    size_t start_depth = 0;  // depth of the first (most specific) label
    std::string reason;      // set when invalid
};

// Rooted tree of product categories with uniform leaf depth. Immutable
// after parse; free to share across threads.
class Taxonomy {
  public:
    Taxonomy() = default;  // empty; only parse() yields a usable tree

    // Document format: one node per line, two spaces of indent per tree
    // level, root first. Blank lines and '#' comments are skipped.
    static Taxonomy parse(const std::string& document);

    bool empty() const { return labels_.empty(); }
    const std::string& root() const { return labels_.at(0); }
    size_t leaf_depth() const { return leaf_depth_; }  // d
    bool contains(const std::string& label) const;
    bool is_leaf(const std::string& label) const;
    size_t depth(const std::string& label) const;            // distance from root
    const std::string& parent(const std::string& label) const;  // label != root

    // m-th ancestor; m = 0 is the identity. Throws std::out_of_range
    // when m exceeds the node's depth.
    const std::string& generalize(const std::string& label, size_t m) const;

    // [label, parent(label), ..., root]
    std::vector<std::string> path_to_root(const std::string& label) const;

    // Valid iff the labels form a contiguous child->parent chain ending
    // at the root.
    ChainResult validate_chain(const std::vector<std::string>& labels) const;

    std::vector<std::string> leaves() const;
    size_t size() const { return labels_.size(); }

    // Deterministic re-serialization (children sorted by label).
    std::string canonical_text() const;

  private:
    size_t index_of(const std::string& label) const;  // throws on unknown

    std::vector<std::string> labels_;      // index 0 is the root
    std::vector<size_t> parent_;           // parent index; root points to itself
    std::vector<size_t> depth_;
    std::vector<std::vector<size_t>> children_;
    std::unordered_map<std::string, size_t> index_;
    size_t leaf_depth_ = 0;
};

}  // namespace loyalty::tax
