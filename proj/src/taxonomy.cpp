#include "loyalty/taxonomy.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace loyalty::tax {

Taxonomy Taxonomy::parse(const std::string& document) {
    Taxonomy t;
    std::istringstream in(document);
    std::string line;
    std::vector<size_t> stack;  // node index per depth, stack.size() == current depth + 1
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t indent = 0;
        while (indent < line.size() && line[indent] == ' ') ++indent;
        std::string label = line.substr(indent);
        if (label.empty() || label[0] == '#') continue;
        if (indent % 2 != 0)
            throw TaxonomyError(TaxonomyErrorKind::bad_indentation,
                                "line " + std::to_string(lineno) + ": odd indentation");
        size_t depth = indent / 2;
        if (t.labels_.empty()) {
            if (depth != 0)
                throw TaxonomyError(TaxonomyErrorKind::bad_indentation,
                                    "line " + std::to_string(lineno) + ": first node must be the root");
        } else if (depth == 0) {
            throw TaxonomyError(TaxonomyErrorKind::multiple_roots,
                                "line " + std::to_string(lineno) + ": second root '" + label + "'");
        } else if (depth > stack.size()) {
            throw TaxonomyError(TaxonomyErrorKind::bad_indentation,
                                "line " + std::to_string(lineno) + ": indentation skips a level");
        }
        if (t.index_.count(label))
            throw TaxonomyError(TaxonomyErrorKind::duplicate_label,
                                "line " + std::to_string(lineno) + ": duplicate label '" + label + "'");
        size_t idx = t.labels_.size();
        t.labels_.push_back(label);
        t.depth_.push_back(depth);
        t.children_.emplace_back();
        t.index_[label] = idx;
        if (depth == 0) {
            t.parent_.push_back(idx);
        } else {
            size_t parent = stack[depth - 1];
            t.parent_.push_back(parent);
            t.children_[parent].push_back(idx);
        }
        stack.resize(depth);
        stack.push_back(idx);
    }
    if (t.labels_.empty())
        throw TaxonomyError(TaxonomyErrorKind::empty_document, "empty taxonomy document");
    // uniform leaf depth
    bool first = true;
    for (size_t i = 0; i < t.labels_.size(); ++i) {
        if (!t.children_[i].empty()) continue;
        if (first) {
            t.leaf_depth_ = t.depth_[i];
            first = false;
        } else if (t.depth_[i] != t.leaf_depth_) {
            throw TaxonomyError(TaxonomyErrorKind::non_uniform_leaf_depth,
                                "leaf '" + t.labels_[i] + "' at depth " +
                                    std::to_string(t.depth_[i]) + ", expected " +
                                    std::to_string(t.leaf_depth_));
        }
    }
    return t;
}

size_t Taxonomy::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw std::out_of_range("unknown label '" + label + "'");
    return it->second;
}

bool Taxonomy::contains(const std::string& label) const { return index_.count(label) != 0; }

bool Taxonomy::is_leaf(const std::string& label) const {
    return children_[index_of(label)].empty();
}

size_t Taxonomy::depth(const std::string& label) const { return depth_[index_of(label)]; }

const std::string& Taxonomy::parent(const std::string& label) const {
    size_t i = index_of(label);
    if (i == 0) throw std::out_of_range("root has no parent");
    return labels_[parent_[i]];
}

const std::string& Taxonomy::generalize(const std::string& label, size_t m) const {
    size_t i = index_of(label);
    if (m > depth_[i])
        throw std::out_of_range("generalization level " + std::to_string(m) +
                                " exceeds depth of '" + label + "'");
    for (size_t k = 0; k < m; ++k) i = parent_[i];
    return labels_[i];
}

std::vector<std::string> Taxonomy::path_to_root(const std::string& label) const {
    size_t i = index_of(label);
    std::vector<std::string> path;
    path.reserve(depth_[i] + 1);
    for (;;) {
        path.push_back(labels_[i]);
        if (i == 0) break;
        i = parent_[i];
    }
    return path;
}

ChainResult Taxonomy::validate_chain(const std::vector<std::string>& labels) const {
    if (labels.empty()) return {false, 0, "empty chain"};
    for (const auto& l : labels)
        if (!contains(l)) return {false, 0, "unknown label '" + l + "'"};
    if (labels.back() != root()) return {false, 0, "chain does not end at the root"};
    for (size_t i = 0; i + 1 < labels.size(); ++i) {
        size_t idx = index_of(labels[i]);
        if (idx == 0 || labels_[parent_[idx]] != labels[i + 1])
            return {false, 0, "broken chain: '" + labels[i + 1] + "' is not the parent of '" +
                                  labels[i] + "'"};
    }
    return {true, depth_[index_of(labels[0])], ""};
}

std::vector<std::string> Taxonomy::leaves() const {
    std::vector<std::string> out;
    for (size_t i = 0; i < labels_.size(); ++i)
        if (children_[i].empty()) out.push_back(labels_[i]);
    return out;
}

std::string Taxonomy::canonical_text() const {
    std::string out;
    std::function<void(size_t)> emit = [&](size_t i) {
        out.append(depth_[i] * 2, ' ');
        out += labels_[i];
        out += '\n';
        auto kids = children_[i];
        std::sort(kids.begin(), kids.end(),
                  [&](size_t a, size_t b) { return labels_[a] < labels_[b]; });
        for (size_t k : kids) emit(k);
    };
    emit(0);
    return out;
}

}  // namespace loyalty::tax
