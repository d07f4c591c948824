#include <catch2/catch_amalgamated.hpp>

#include "mcgp/background.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <vector>

using namespace mcgp;

namespace {

Hypothesis H(int var, const char* atom, int stamp,
             Origin origin = Origin::Plain) {
    return Hypothesis{var, Formula::atom(atom), stamp, origin};
}

Background L(Hypothesis h) { return Background::leaf(std::move(h)); }

// ── Oracle 1: every relaxation, by enumeration ─────────────────────────────
// relaxations(bg) = all trees obtained by turning any subset of NonComm
// nodes into Comm. relaxes_to must agree with membership in this set.

std::vector<Background> relaxations(const Background& bg) {
    switch (bg.kind()) {
        case BackgroundKind::Empty:
        case BackgroundKind::Leaf: return {bg};
        default: {
            std::vector<Background> out;
            for (const Background& a : relaxations(bg.first()))
                for (const Background& b : relaxations(bg.second())) {
                    out.push_back(Background::comm(a, b));
                    if (bg.kind() == BackgroundKind::NonComm)
                        out.push_back(Background::noncomm(a, b));
                }
            return out;
        }
    }
}

bool oracle_relaxes_to(const Background& from, const Background& to) {
    for (const Background& r : relaxations(from))
        if (r == to) return true;
    return false;
}

// ── Oracle 2: product pairs via a region table ─────────────────────────────
// Independently decomposes the tree into numbered regions: an internal node
// starts a new region unless its parent has the same kind; a child of a
// region node with a different kind (or a leaf) is an element of that region,
// ordered by in-order traversal. Candidates are read off the table and the
// lexicographically greatest (max stamp, min stamp) wins.

struct RegionTable {
    struct Region {
        BackgroundKind kind;
        std::vector<Background> elements;
    };
    std::vector<Region> regions;

    void build(const Background& node, int region) {
        for (const Background& child : {node.first(), node.second()}) {
            if (child.kind() == node.kind()) {
                build(child, region);
            } else {
                regions[region].elements.push_back(child);
                if (child.kind() == BackgroundKind::Comm ||
                    child.kind() == BackgroundKind::NonComm) {
                    regions.push_back({child.kind(), {}});
                    build(child, static_cast<int>(regions.size()) - 1);
                }
            }
        }
    }

    explicit RegionTable(const Background& bg) {
        if (bg.kind() == BackgroundKind::Comm ||
            bg.kind() == BackgroundKind::NonComm) {
            regions.push_back({bg.kind(), {}});
            build(bg, 0);
        }
    }
};

std::optional<ProductPair> oracle_find_pair(const Background& bg,
                                            FormulaKind kind, const Formula& X,
                                            const Formula& Y) {
    RegionTable table(bg);
    BackgroundKind want = kind == FormulaKind::CommProd
                              ? BackgroundKind::Comm
                              : BackgroundKind::NonComm;
    std::optional<ProductPair> best;
    auto better = [&](const Hypothesis& hx, const Hypothesis& hy) {
        if (!best) return true;
        auto rank = [](const ProductPair& p) {
            return std::pair(std::max(p.x.stamp, p.y.stamp),
                             std::min(p.x.stamp, p.y.stamp));
        };
        return std::pair(std::max(hx.stamp, hy.stamp),
                         std::min(hx.stamp, hy.stamp)) > rank(*best);
    };
    for (const auto& region : table.regions) {
        if (region.kind != want) continue;
        const auto& es = region.elements;
        for (std::size_t i = 0; i < es.size(); ++i) {
            for (std::size_t j = 0; j < es.size(); ++j) {
                if (i == j) continue;
                if (es[i].kind() != BackgroundKind::Leaf ||
                    es[j].kind() != BackgroundKind::Leaf)
                    continue;
                bool ok = want == BackgroundKind::Comm ? true : j == i + 1;
                if (!ok) continue;
                if (es[i].hyp().formula == X && es[j].hyp().formula == Y &&
                    better(es[i].hyp(), es[j].hyp()))
                    best = ProductPair{es[i].hyp(), es[j].hyp(), kind};
            }
        }
    }
    return best;
}

// ── Random trees ───────────────────────────────────────────────────────────

Background random_tree(std::mt19937& rng, const std::vector<Hypothesis>& hyps,
                       std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return L(hyps[lo]);
    std::uniform_int_distribution<std::size_t> split(lo + 1, hi - 1);
    std::size_t mid = split(rng);
    Background a = random_tree(rng, hyps, lo, mid);
    Background b = random_tree(rng, hyps, mid, hi);
    return rng() % 2 ? Background::comm(a, b) : Background::noncomm(a, b);
}

Background random_background(std::mt19937& rng, int max_leaves,
                             int var_base = 0) {
    static const char* atoms[] = {"c", "d", "k", "v"};
    std::uniform_int_distribution<int> n_dist(1, max_leaves);
    int n = n_dist(rng);
    std::vector<Hypothesis> hyps;
    std::vector<int> stamps(n);
    for (int i = 0; i < n; ++i) stamps[i] = var_base + i;
    std::shuffle(stamps.begin(), stamps.end(), rng);
    for (int i = 0; i < n; ++i)
        hyps.push_back(H(var_base + i, atoms[rng() % 4], stamps[i]));
    return random_tree(rng, hyps, 0, hyps.size());
}

bool well_formed(const Background& bg) {
    switch (bg.kind()) {
        case BackgroundKind::Empty:
        case BackgroundKind::Leaf: return true;
        default:
            return !bg.first().is_empty() && !bg.second().is_empty() &&
                   well_formed(bg.first()) && well_formed(bg.second());
    }
}

// All shapes over a fixed leaf sequence, both node kinds at every split.
std::vector<Background> all_trees(const std::vector<Hypothesis>& hyps,
                                  std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return {L(hyps[lo])};
    std::vector<Background> out;
    for (std::size_t mid = lo + 1; mid < hi; ++mid)
        for (const Background& a : all_trees(hyps, lo, mid))
            for (const Background& b : all_trees(hyps, mid, hi)) {
                out.push_back(Background::comm(a, b));
                out.push_back(Background::noncomm(a, b));
            }
    return out;
}

}  // namespace

TEST_CASE("composition constructors treat Empty as a unit") {
    Background e = Background::empty();
    Background a = L(H(0, "d", 1));
    CHECK(Background::comm(e, a) == a);
    CHECK(Background::comm(a, e) == a);
    CHECK(Background::noncomm(e, a) == a);
    CHECK(Background::noncomm(a, e) == a);
    CHECK(Background::comm(e, e).is_empty());
    CHECK(Background::noncomm(e, e).is_empty());

    Background two = Background::comm(a, L(H(1, "k", 2)));
    CHECK(two.kind() == BackgroundKind::Comm);
    CHECK(two.first() == a);
    CHECK_FALSE(two == a);
}

TEST_CASE("leaves come out left to right") {
    Background bg = Background::comm(
        L(H(0, "d", 5)),
        Background::comm(L(H(1, "k", 4)),
                         Background::noncomm(L(H(2, "V", 2)), L(H(3, "v", 3)))));
    auto ls = leaves(bg);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0].var == 0);
    CHECK(ls[1].var == 1);
    CHECK(ls[2].var == 2);
    CHECK(ls[3].var == 3);
    CHECK(background_vars(bg) == std::set<int>{0, 1, 2, 3});
    REQUIRE(find_leaf(bg, 2).has_value());
    CHECK(find_leaf(bg, 2)->formula == Formula::atom("V"));
    CHECK_FALSE(find_leaf(bg, 9).has_value());
}

TEST_CASE("restamp renumbers in leaf order and keeps everything else") {
    Background bg = Background::comm(
        L(H(0, "d", 5, Origin::HostSpec)),
        Background::comm(L(H(1, "k", 4)),
                         Background::noncomm(L(H(2, "V", 2)),
                                             L(H(3, "v", 3, Origin::Package)))));
    int next = 10;
    Background out = restamp(bg, next);
    CHECK(next == 14);
    auto ls = leaves(out);
    REQUIRE(ls.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(ls[i].stamp == 10 + i);
        CHECK(ls[i].var == i);
    }
    CHECK(ls[0].origin == Origin::HostSpec);
    CHECK(ls[3].origin == Origin::Package);

    Background tagged = with_origin(out, Origin::HostComp);
    for (const Hypothesis& h : leaves(tagged))
        CHECK(h.origin == Origin::HostComp);
}

TEST_CASE("order relaxation: worked cases") {
    Background a = L(H(0, "c", 1)), b = L(H(1, "d", 2)), c = L(H(2, "k", 3));

    CHECK(relaxes_to(Background::noncomm(a, b), Background::comm(a, b)));
    CHECK_FALSE(relaxes_to(Background::comm(a, b), Background::noncomm(a, b)));
    CHECK(relaxes_to(Background::comm(a, b), Background::comm(a, b)));
    // Pointwise: flipping leaf order is not a relaxation.
    CHECK_FALSE(relaxes_to(Background::comm(a, b), Background::comm(b, a)));

    Background nn = Background::noncomm(Background::noncomm(a, b), c);
    CHECK(relaxes_to(nn, Background::comm(Background::noncomm(a, b), c)));
    CHECK(relaxes_to(nn, Background::noncomm(Background::comm(a, b), c)));
    CHECK(relaxes_to(nn, Background::comm(Background::comm(a, b), c)));
    CHECK_FALSE(relaxes_to(Background::comm(Background::comm(a, b), c), nn));
    // Shape must match exactly.
    CHECK_FALSE(relaxes_to(nn, Background::comm(a, Background::comm(b, c))));
    CHECK(relaxes_to(Background::empty(), Background::empty()));
    CHECK_FALSE(relaxes_to(Background::empty(), a));
}

TEST_CASE("order relaxation agrees with the enumeration oracle") {
    std::vector<Hypothesis> hyps = {H(0, "c", 1), H(1, "d", 2), H(2, "k", 3)};
    auto trees3 = all_trees(hyps, 0, 3);
    REQUIRE(trees3.size() == 8);
    for (const Background& x : trees3)
        for (const Background& y : trees3) {
            bool expected = oracle_relaxes_to(x, y);
            REQUIRE(relaxes_to(x, y) == expected);
            // Antisymmetry up to equality.
            if (expected && oracle_relaxes_to(y, x)) CHECK(x == y);
        }

    hyps.push_back(H(3, "v", 4));
    auto trees4 = all_trees(hyps, 0, 4);
    REQUIRE(trees4.size() == 40);
    for (const Background& x : trees4)
        for (const Background& y : trees4)
            REQUIRE(relaxes_to(x, y) == oracle_relaxes_to(x, y));

    // Transitivity on the 3-leaf universe.
    for (const Background& x : trees3)
        for (const Background& y : trees3)
            for (const Background& z : trees3)
                if (relaxes_to(x, y) && relaxes_to(y, z))
                    CHECK(relaxes_to(x, z));
}

TEST_CASE("pair search: three hypotheses, newest wins") {
    // d(w) k(v) d(u), introduced in that order, all commutatively related.
    Background bg = Background::comm(
        Background::comm(L(H(0, "d", 1)), L(H(1, "k", 2))), L(H(2, "d", 3)));
    auto pair = find_product_pair(bg, FormulaKind::CommProd,
                                  Formula::atom("k"), Formula::atom("d"));
    REQUIRE(pair.has_value());
    CHECK(pair->x.var == 1);  // v:k
    CHECK(pair->y.var == 2);  // u:d, not the older w:d
    auto oracle = oracle_find_pair(bg, FormulaKind::CommProd,
                                   Formula::atom("k"), Formula::atom("d"));
    REQUIRE(oracle.has_value());
    CHECK(oracle->x.var == pair->x.var);
    CHECK(oracle->y.var == pair->y.var);

    // Splicing the pair out leaves the hole next to w:d.
    Background hole = splice_pair(bg, *pair, Background::empty());
    CHECK(hole == L(H(0, "d", 1)));
    Background filled =
        splice_pair(bg, *pair,
                    L(Hypothesis{9, parse_formula("k (x) d"), 7}));
    CHECK(render_background(filled, {{0, "w"}, {9, "z"}}) == "w:d, z:k (x) d");
}

TEST_CASE("pair search: four hypotheses, both stamps count") {
    // k(v1) d(u1) k(v2) d(u2) with stamps 1 < 2 < 3 < 4: the newest pair is
    // (v2, u2) because ties on the maximum never arise and (v2, u2)
    // dominates (v1, u2) on the minimum.
    Background bg = Background::comm(
        Background::comm(Background::comm(L(H(0, "k", 1)), L(H(1, "d", 2))),
                         L(H(2, "k", 3))),
        L(H(3, "d", 4)));
    auto pair = find_product_pair(bg, FormulaKind::CommProd,
                                  Formula::atom("k"), Formula::atom("d"));
    REQUIRE(pair.has_value());
    CHECK(pair->x.var == 2);
    CHECK(pair->y.var == 3);
}

TEST_CASE("pair search respects region boundaries and order") {
    Background a = L(H(0, "a", 1)), b = L(H(1, "b", 2)), c = L(H(2, "c", 3));
    Formula A = Formula::atom("a"), B = Formula::atom("b"),
            C = Formula::atom("c");

    // Comm(a, NonComm(b, c)): a and b share no region.
    Background mixed = Background::comm(a, Background::noncomm(b, c));
    CHECK_FALSE(
        find_product_pair(mixed, FormulaKind::CommProd, A, B).has_value());
    auto bc = find_product_pair(mixed, FormulaKind::NonCommProd, B, C);
    REQUIRE(bc.has_value());
    CHECK(bc->x.var == 1);
    CHECK(bc->y.var == 2);

    // NonComm pairs must be adjacent and in order.
    Background chain =
        Background::noncomm(Background::noncomm(a, b), c);  // [a ; b ; c]
    CHECK(find_product_pair(chain, FormulaKind::NonCommProd, A, B).has_value());
    CHECK(find_product_pair(chain, FormulaKind::NonCommProd, B, C).has_value());
    CHECK_FALSE(
        find_product_pair(chain, FormulaKind::NonCommProd, A, C).has_value());
    CHECK_FALSE(
        find_product_pair(chain, FormulaKind::NonCommProd, B, A).has_value());
    // Association does not change the region.
    Background chain2 = Background::noncomm(a, Background::noncomm(b, c));
    CHECK(
        find_product_pair(chain2, FormulaKind::NonCommProd, A, B).has_value());

    // Comm pairs work in either arrangement, aligned to the product.
    Background swapped = Background::comm(b, a);
    auto ab = find_product_pair(swapped, FormulaKind::CommProd, A, B);
    REQUIRE(ab.has_value());
    CHECK(ab->x.var == 0);
    CHECK(ab->y.var == 1);

    // A non-leaf element is not a hypothesis.
    Background nested = Background::comm(Background::noncomm(a, b), c);
    CHECK_FALSE(
        find_product_pair(nested, FormulaKind::CommProd, A, C).has_value());
}

TEST_CASE("pair search and splice agree with the region-table oracle") {
    static const char* atoms[] = {"c", "d", "k", "v"};
    std::mt19937 rng(77701);
    int found = 0;
    for (int iter = 0; iter < 10000; ++iter) {
        Background bg = random_background(rng, 6);
        FormulaKind kind =
            rng() % 2 ? FormulaKind::CommProd : FormulaKind::NonCommProd;
        Formula X = Formula::atom(atoms[rng() % 4]);
        Formula Y = Formula::atom(atoms[rng() % 4]);
        auto got = find_product_pair(bg, kind, X, Y);
        auto expected = oracle_find_pair(bg, kind, X, Y);
        REQUIRE(got.has_value() == expected.has_value());
        if (!got) continue;
        ++found;
        REQUIRE(got->x.var == expected->x.var);
        REQUIRE(got->y.var == expected->y.var);
        CHECK(got->x.formula == X);
        CHECK(got->y.formula == Y);

        // Splice with a random replacement; check the leaf sequence.
        Background repl = rng() % 4 == 0 ? Background::empty()
                                         : random_background(rng, 3, 100);
        Background out = splice_pair(bg, *got, repl);
        CHECK(well_formed(out));

        // The replacement lands where the pair leaf that comes first in
        // leaf order used to sit.
        std::vector<int> expect_vars;
        int earlier = -1;
        for (const Hypothesis& h : leaves(bg))
            if (h.var == got->x.var || h.var == got->y.var) {
                earlier = h.var;
                break;
            }
        for (const Hypothesis& h : leaves(bg)) {
            if (h.var == earlier)
                for (const Hypothesis& r : leaves(repl))
                    expect_vars.push_back(r.var);
            if (h.var == got->x.var || h.var == got->y.var) continue;
            expect_vars.push_back(h.var);
        }
        std::vector<int> got_vars;
        for (const Hypothesis& h : leaves(out)) got_vars.push_back(h.var);
        REQUIRE(got_vars == expect_vars);
    }
    CHECK(found > 500);  // the sweep exercised real matches
}

TEST_CASE("splice rebuilds regions left-nested and collapses singletons") {
    // w:d, v:k, [x1:V ; x2:v] — substitute u:d for the NonComm pair.
    Background bg = Background::comm(
        L(H(0, "d", 5)),
        Background::comm(L(H(1, "k", 4)),
                         Background::noncomm(L(H(2, "V", 2)), L(H(3, "v", 3)))));
    auto pair = find_product_pair(bg, FormulaKind::NonCommProd,
                                  Formula::atom("V"), Formula::atom("v"));
    REQUIRE(pair.has_value());
    Background out = splice_pair(bg, *pair, L(H(4, "d", 6)));
    AliasMap names{{0, "w"}, {1, "v"}, {2, "x1"}, {3, "x2"}, {4, "u"}};
    CHECK(render_background(out, names) == "w:d, v:k, u:d");

    // On the rebuilt background the newest k/d pair is (v, u): re-stamping
    // of the inserted leaf made it newer than w.
    auto next = find_product_pair(out, FormulaKind::CommProd,
                                  Formula::atom("k"), Formula::atom("d"));
    REQUIRE(next.has_value());
    CHECK(next->x.var == 1);
    CHECK(next->y.var == 4);
    Background after = splice_pair(out, *next, Background::empty());
    CHECK(after == L(H(0, "d", 5)));

    // Emptying a whole nested region makes it vanish.
    Background hole = splice_pair(bg, *pair, Background::empty());
    CHECK(render_background(hole, names) == "w:d, v:k");

    // Four-element region: removal keeps left-nesting and insertion point.
    Background four = Background::comm(
        Background::comm(Background::comm(L(H(0, "k", 1)), L(H(1, "d", 2))),
                         L(H(2, "k", 3))),
        L(H(3, "d", 4)));
    auto p4 = find_product_pair(four, FormulaKind::CommProd,
                                Formula::atom("k"), Formula::atom("d"));
    REQUIRE(p4.has_value());
    Background out4 = splice_pair(four, *p4, L(H(9, "t", 10)));
    AliasMap n4{{0, "v1"}, {1, "u1"}, {9, "z"}};
    CHECK(render_background(out4, n4) == "v1:k, u1:d, z:t");
    CHECK(out4 == Background::comm(
                      Background::comm(L(H(0, "k", 1)), L(H(1, "d", 2))),
                      L(H(9, "t", 10))));
}

TEST_CASE("background rendering") {
    AliasMap names{{0, "w"}, {1, "v"}, {2, "x1"}, {3, "x2"}};
    CHECK(render_background(Background::empty()) == "");
    CHECK(render_background(L(H(0, "d", 1)), names) == "w:d");
    CHECK(render_background(L(Hypothesis{1, parse_formula("k (x) d"), 1}),
                            names) == "v:k (x) d");

    Background nc = Background::noncomm(L(H(2, "V", 1)), L(H(3, "v", 2)));
    CHECK(render_background(nc, names) == "[x1:V ; x2:v]");

    Background top = Background::comm(L(H(0, "d", 3)),
                                      Background::comm(L(H(1, "k", 4)), nc));
    CHECK(render_background(top, names) == "w:d, v:k, [x1:V ; x2:v]");

    // Comm nested inside NonComm is parenthesized.
    Background inv = Background::noncomm(
        Background::comm(L(H(0, "d", 1)), L(H(1, "k", 2))), L(H(2, "V", 3)));
    CHECK(render_background(inv, names) == "[(w:d, v:k) ; x1:V]");

    // Unknown variables render with their id.
    CHECK(render_background(L(H(7, "d", 1))) == "?7:d");
}
