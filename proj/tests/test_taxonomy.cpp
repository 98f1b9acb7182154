#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>

#include "fixtures.hpp"
#include "loyalty/rng.hpp"
#include "loyalty/taxonomy.hpp"

using namespace loyalty;
using namespace loyalty::tax;

TEST_CASE("movie fragment parses with the documented generalizations") {
    auto t = Taxonomy::parse(fixtures::kMovieTaxonomy);
    CHECK(t.root() == "Product");
    CHECK(t.leaf_depth() == 4);
    CHECK(t.is_leaf("Inception"));
    CHECK_FALSE(t.is_leaf("ActionMovie"));
    CHECK(t.generalize("Inception", 0) == "Inception");
    CHECK(t.generalize("Inception", 1) == "ActionMovie");
    CHECK(t.generalize("Inception", 2) == "Movie");
    CHECK(t.generalize("Inception", 3) == "DigitalMedia");
    CHECK(t.generalize("Inception", 4) == "Product");
    CHECK_THROWS_AS(t.generalize("Inception", 5), std::out_of_range);
    CHECK_THROWS_AS(t.generalize("NoSuchThing", 0), std::out_of_range);
    auto path = t.path_to_root("Inception");
    CHECK(path == std::vector<std::string>{"Inception", "ActionMovie", "Movie", "DigitalMedia",
                                           "Product"});
    CHECK(t.path_to_root("Product") == std::vector<std::string>{"Product"});
    for (const auto& leaf : t.leaves()) CHECK(t.path_to_root(leaf).size() == t.leaf_depth() + 1);
}

TEST_CASE("single-node document is a valid degenerate taxonomy") {
    auto t = Taxonomy::parse("Root\n");
    CHECK(t.root() == "Root");
    CHECK(t.leaf_depth() == 0);
    CHECK(t.is_leaf("Root"));
    CHECK(t.validate_chain({"Root"}).valid);
}

TEST_CASE("parse rejections carry distinct error kinds") {
    auto kind_of = [](const std::string& doc) {
        try {
            Taxonomy::parse(doc);
        } catch (const TaxonomyError& e) {
            return e.kind;
        }
        throw std::logic_error("expected parse failure");
    };
    CHECK(kind_of("") == TaxonomyErrorKind::empty_document);
    CHECK(kind_of("# only comments\n\n") == TaxonomyErrorKind::empty_document);
    CHECK(kind_of("A\nB\n") == TaxonomyErrorKind::multiple_roots);
    CHECK(kind_of("A\n    B\n") == TaxonomyErrorKind::bad_indentation);
    CHECK(kind_of("A\n B\n") == TaxonomyErrorKind::bad_indentation);
    CHECK(kind_of("  A\n") == TaxonomyErrorKind::bad_indentation);
    CHECK(kind_of("A\n  B\n  B\n") == TaxonomyErrorKind::duplicate_label);
    // leaves at depth 2 and 1
    CHECK(kind_of("A\n  B\n    C\n  D\n") == TaxonomyErrorKind::non_uniform_leaf_depth);
}

TEST_CASE("comments and blank lines are ignored") {
    auto t = Taxonomy::parse("# catalog\nA\n\n  # sub\n  B\n    C\n  D\n    E\n");
    CHECK(t.size() == 5);
    CHECK(t.leaf_depth() == 2);
}

TEST_CASE("validate_chain: the documented level-2 submission") {
    auto t = Taxonomy::parse(fixtures::kMovieTaxonomy);
    auto ok = t.validate_chain({"Movie", "DigitalMedia", "Product"});
    CHECK(ok.valid);
    CHECK(ok.start_depth == 2);
    // skipping an interior node breaks contiguity
    auto skip = t.validate_chain({"Inception", "Movie", "DigitalMedia", "Product"});
    CHECK_FALSE(skip.valid);
    // chains must reach the root
    auto noroot = t.validate_chain({"Movie", "DigitalMedia"});
    CHECK_FALSE(noroot.valid);
    CHECK_FALSE(t.validate_chain({}).valid);
    CHECK_FALSE(t.validate_chain({"Nope", "Product"}).valid);
    // a chain that ends at the root but started in another branch
    CHECK_FALSE(t.validate_chain({"Apple", "Dairy", "Grocery", "PhysicalGood", "Product"}).valid);
    // full path and bare root are both fine
    CHECK(t.validate_chain(t.path_to_root("Inception")).valid);
    auto root_only = t.validate_chain({"Product"});
    CHECK(root_only.valid);
    CHECK(root_only.start_depth == 0);
}

TEST_CASE("canonical serialization is stable and re-parses") {
    auto t = Taxonomy::parse(fixtures::kMovieTaxonomy);
    auto text = t.canonical_text();
    auto t2 = Taxonomy::parse(text);
    CHECK(t2.canonical_text() == text);
    CHECK(t2.size() == t.size());
    CHECK(t2.leaf_depth() == t.leaf_depth());
    // children are emitted sorted
    auto a = Taxonomy::parse("R\n  B\n    X\n  A\n    Y\n");
    CHECK(a.canonical_text() == "R\n  A\n    Y\n  B\n    X\n");
}

namespace {

// random uniform-depth taxonomy; returns the document
std::string random_taxonomy_doc(SeededRandom& rng, size_t depth, size_t max_children) {
    std::string doc;
    size_t counter = 0;
    auto next_label = [&] { return "n" + std::to_string(counter++); };
    std::function<void(size_t)> emit = [&](size_t d) {
        doc += std::string(d * 2, ' ') + next_label() + "\n";
        if (d == depth) return;
        uint8_t b;
        rng.fill(&b, 1);
        size_t kids = 1 + b % max_children;
        for (size_t i = 0; i < kids; ++i) emit(d + 1);
    };
    emit(0);
    return doc;
}

}  // namespace

TEST_CASE("property: random taxonomies parse; suffix chains validate; gaps reject") {
    SeededRandom rng(99);
    for (int iter = 0; iter < 30; ++iter) {
        auto doc = random_taxonomy_doc(rng, 1 + iter % 4, 3);
        auto t = Taxonomy::parse(doc);
        CHECK(t.leaf_depth() == size_t(1 + iter % 4));
        for (const auto& leaf : t.leaves()) {
            auto path = t.path_to_root(leaf);
            // every suffix ending at the root is a valid chain
            for (size_t start = 0; start < path.size(); ++start) {
                std::vector<std::string> suffix(path.begin() + start, path.end());
                auto res = t.validate_chain(suffix);
                CHECK(res.valid);
                CHECK(res.start_depth == t.depth(suffix.front()));
            }
            // dropping any interior element breaks the chain
            if (path.size() >= 3) {
                for (size_t omit = 1; omit + 1 < path.size(); ++omit) {
                    auto gap = path;
                    gap.erase(gap.begin() + omit);
                    CHECK_FALSE(t.validate_chain(gap).valid);
                }
            }
        }
        // every node generalizes to the root at its depth
        for (const auto& leaf : t.leaves())
            CHECK(t.generalize(leaf, t.depth(leaf)) == t.root());
    }
}

TEST_CASE("property: single-line mutation changes the tree or breaks the parse") {
    SeededRandom rng(7);
    auto doc = random_taxonomy_doc(rng, 3, 3);
    auto canon = Taxonomy::parse(doc).canonical_text();
    // push the second node one level deeper
    auto pos = doc.find("\n") + 1;
    std::string mutated = doc.substr(0, pos) + "  " + doc.substr(pos);
    try {
        auto t2 = Taxonomy::parse(mutated);
        CHECK(t2.canonical_text() != canon);
    } catch (const TaxonomyError&) {
        // rejection is acceptable
    }
}
