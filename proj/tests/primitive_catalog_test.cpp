#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <string>

#include "hexplan/primitive_catalog.hpp"

using namespace hexplan;

namespace {

std::vector<HexCell> cells_from_moves(const std::vector<int>& moves)
{
    std::vector<HexCell> cells{{0, 0}};
    for (int m : moves) cells.push_back(neighbor(cells.back(), Direction(m)));
    return cells;
}

// Independent reference: brute-force all 27 strings and apply the c3 rule by hand.
std::set<std::string> brute_force_admissible()
{
    std::set<std::string> out;
    const std::string a = "SLR";
    for (char x : a)
        for (char y : a)
            for (char z : a) {
                const bool bad = (x != 'S' && x == y) || (y != 'S' && y == z);
                if (!bad) out.insert(std::string{x, y, z});
            }
    return out;
}

std::string swap_lr(std::string s)
{
    for (char& c : s) c = c == 'L' ? 'R' : (c == 'R' ? 'L' : c);
    return s;
}

nlohmann::json builtin_doc() { return nlohmann::json::parse(kBuiltinCatalogDocument); }

} // namespace

TEST(Turns, TurnBetween)
{
    EXPECT_EQ(turn_between(Direction(0), Direction(0)), Turn::S);
    EXPECT_EQ(turn_between(Direction(0), Direction(1)), Turn::L);
    EXPECT_EQ(turn_between(Direction(0), Direction(5)), Turn::R);
    EXPECT_EQ(turn_between(Direction(5), Direction(0)), Turn::L);
    for (int delta : {2, 3, 4}) EXPECT_FALSE(turn_between(Direction(1), Direction(1 + delta)).has_value());
}

TEST(Turns, WindowSignatureExamples)
{
    auto sig = window_signature(cells_from_moves({0, 0, 0, 0}));
    ASSERT_TRUE(sig);
    EXPECT_EQ(sig->str(), "SSS");

    sig = window_signature(std::vector<HexCell>{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {3, 1}});
    ASSERT_TRUE(sig);
    EXPECT_EQ(sig->str(), "SSR");

    EXPECT_FALSE(window_signature(std::vector<HexCell>{{0, 0}, {1, 0}, {0, 0}, {1, 0}, {2, 0}}));
    EXPECT_THROW(window_signature(std::vector<HexCell>{{0, 0}, {2, 0}, {3, 0}}), NotAPath);
}

TEST(Catalog, EnumerationHasSeventeenSignaturesInNineClasses)
{
    const auto reference = brute_force_admissible();
    EXPECT_EQ(reference.size(), 17u);
    std::set<std::set<std::string>> classes;
    for (const auto& s : reference) classes.insert({s, swap_lr(s)});
    EXPECT_EQ(classes.size(), 9u);

    std::set<std::string> library;
    for (const auto& s : admissible_signatures(3)) library.insert(s.str());
    EXPECT_EQ(library, reference);
}

TEST(Catalog, BuiltinPartitionsTheAdmissibleSet)
{
    const Catalog& cat = builtin_catalog();
    EXPECT_EQ(cat.size(), 9u);
    EXPECT_EQ(cat.window_cells(), 5u);
    EXPECT_EQ(cat.expanded().size(), 17u);
    EXPECT_EQ(cat.primitive(1).canonical.str(), "SSS");
    std::set<std::string> expanded;
    for (const auto& [sig, cls] : cat.expanded()) expanded.insert(sig.str());
    EXPECT_EQ(expanded, brute_force_admissible());
}

TEST(Catalog, StructuralConstraintsOnNumbering)
{
    const Catalog& cat = builtin_catalog();
    auto reversed = [](const TurnSignature& s) {
        std::string r(s.str().rbegin(), s.str().rend());
        return TurnSignature(r).mirrored();
    };
    auto same_class = [&](const TurnSignature& a, int id) { return cat.classify(a).id == id; };
    // 4 is 3 driven backwards, 8 is 2 driven backwards.
    EXPECT_TRUE(same_class(reversed(cat.primitive(3).canonical), 4));
    EXPECT_TRUE(same_class(reversed(cat.primitive(2).canonical), 8));
    // 3 and 6 hold two consecutive changes of direction; 6 is the zig-zag.
    EXPECT_EQ(cat.primitive(6).canonical.direction_changes(), 3);
    EXPECT_FALSE(cat.primitive(6).canonical.str().find('S') != std::string::npos);
    EXPECT_NE(cat.primitive(3).canonical.str().find("LR"), std::string::npos);
}

TEST(Catalog, ClassifyExamplesAndMirrorConsistency)
{
    const Catalog& cat = builtin_catalog();
    EXPECT_EQ(cat.classify(TurnSignature("SSS")), (Classification{1, false}));
    const int ssl = cat.classify(TurnSignature("SSL")).id;
    EXPECT_EQ(cat.classify(TurnSignature("SSR")), (Classification{ssl, true}));
    EXPECT_THROW(cat.classify(TurnSignature("LLS")), NotInCatalog);
    for (const auto& [sig, cls] : cat.expanded()) {
        if (sig.mirrored() == sig) continue;
        const Classification m = cat.classify(sig.mirrored());
        EXPECT_EQ(m.id, cls.id);
        EXPECT_NE(m.mirrored, cls.mirrored);
    }
}

TEST(Catalog, WindowSignatureAgreesWithPairwiseRuleExhaustively)
{
    const Catalog& cat = builtin_catalog();
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
            for (int c = 0; c < 6; ++c) {
                const std::vector<int> moves{0, a, b, c};
                const auto cells = cells_from_moves(moves);
                bool pairwise_ok = true;
                std::string turns;
                for (std::size_t i = 1; i < moves.size(); ++i) {
                    const int delta = (moves[i] - moves[i - 1] + 6) % 6;
                    if (delta != 0 && delta != 1 && delta != 5) pairwise_ok = false;
                    turns.push_back(delta == 0 ? 'S' : (delta == 1 ? 'L' : 'R'));
                }
                for (std::size_t i = 1; pairwise_ok && i < turns.size(); ++i)
                    if (turns[i] != 'S' && turns[i] == turns[i - 1]) pairwise_ok = false;

                const auto sig = window_signature(cells);
                EXPECT_EQ(sig.has_value(), pairwise_ok) << a << b << c;
                if (sig) {
                    EXPECT_TRUE(cat.try_classify(*sig).has_value());
                }

                // Extension check on the first four cells agrees with the full window.
                const std::vector<HexCell> trailing(cells.begin(), cells.end() - 1);
                const bool prefix_ok = window_signature(trailing).has_value();
                if (prefix_ok) {
                    EXPECT_EQ(admissible_extension(trailing, cells.back()), sig.has_value());
                }
            }
}

TEST(Catalog, AdmissibleExtensionExamples)
{
    const std::vector<HexCell> straight{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    EXPECT_TRUE(admissible_extension(straight, {4, 0}));
    EXPECT_TRUE(admissible_extension(std::vector<HexCell>{{0, 0}}, {0, 1}));
    // Two successive +60 degree turns.
    const std::vector<HexCell> one_left = cells_from_moves({0, 0, 1});
    EXPECT_FALSE(admissible_extension(one_left, neighbor(one_left.back(), Direction(2))));
    // Reversal onto the second-to-last cell.
    EXPECT_FALSE(admissible_extension(straight, {2, 0}));
    // Short prefix: only existing turns are checked.
    EXPECT_TRUE(admissible_extension(std::vector<HexCell>{{0, 0}, {1, 0}}, {1, 1}));
    EXPECT_FALSE(admissible_extension(cells_from_moves({1}), neighbor(cells_from_moves({1}).back(), Direction(3))));
    EXPECT_THROW(admissible_extension(straight, {9, 9}), NotAPath);
}

TEST(Catalog, LayoutCellsReproducesSignature)
{
    for (const Primitive& p : builtin_catalog().primitives()) {
        const auto cells = layout_cells(p.canonical);
        ASSERT_EQ(cells.size(), 5u);
        EXPECT_EQ(window_signature(cells)->str(), p.canonical.str());
    }
}

TEST(Catalog, ShippedFileMatchesEmbeddedCatalog)
{
    const Catalog file = load_catalog_file(std::string(HEXPLAN_DATA_DIR) + "/catalog_c3.json");
    EXPECT_EQ(catalog_to_json(file), catalog_to_json(builtin_catalog()));
}

TEST(Catalog, RejectsCorruptedDocuments)
{
    auto doc = builtin_doc();
    doc["primitives"].erase(6); // id 7
    EXPECT_THROW(load_catalog(doc), InvalidCatalog);

    doc = builtin_doc();
    doc["primitives"][4]["id"] = 3; // duplicate id
    EXPECT_THROW(load_catalog(doc), InvalidCatalog);

    doc = builtin_doc();
    doc["primitives"][4]["turns"] = "RLS"; // mirror of primitive 4
    EXPECT_THROW(load_catalog(doc), InvalidCatalog);

    doc = builtin_doc();
    doc["primitives"][8]["turns"] = "LLS"; // double turn
    EXPECT_THROW(load_catalog(doc), InvalidCatalog);

    doc = builtin_doc();
    doc["primitives"][0]["turns"] = "SSL";
    doc["primitives"][1]["turns"] = "SSS"; // id 1 not straight
    EXPECT_THROW(load_catalog(doc), InvalidCatalog);

    EXPECT_THROW(load_catalog(std::string_view("{not json")), InvalidCatalog);
}

TEST(Catalog, AcceptsUserCatalogWithShorterWindow)
{
    const auto doc = nlohmann::json::parse(R"({"name":"c2","ratio_regime":{"lower":1.0,"upper":2.6457513110645907},
        "primitives":[{"id":1,"turns":"S"},{"id":2,"turns":"L"}]})");
    const Catalog cat = load_catalog(doc);
    EXPECT_EQ(cat.window_cells(), 3u);
    EXPECT_EQ(cat.classify(TurnSignature("R")), (Classification{2, true}));
    EXPECT_TRUE(admissible_extension(cells_from_moves({0, 1}), neighbor(cells_from_moves({0, 1}).back(), Direction(2)), cat));
}
