#include <catch2/catch_amalgamated.hpp>

#include "mcgp/label.hpp"

#include <algorithm>
#include <random>
#include <vector>

using namespace mcgp;

namespace {

Token V(int id) { return Token::variable(id); }
Token P(const char* w) { return Token::phon(w); }

// ── Oracle: equality modulo renaming by exhaustive search ──────────────────
// Tries every injective map vars(a) -> vars(b). Exponential, fine for the
// small labels used here; the production routine must agree with it.

bool oracle_equal_mod_renaming(const Label& a, const Label& b) {
    std::set<int> va_set = label_vars(a), vb_set = label_vars(b);
    if (va_set.size() != vb_set.size()) return false;
    std::vector<int> va(va_set.begin(), va_set.end());
    std::vector<int> vb(vb_set.begin(), vb_set.end());
    std::sort(vb.begin(), vb.end());
    do {
        std::map<int, int> m;
        for (std::size_t i = 0; i < va.size(); ++i) m[va[i]] = vb[i];
        if (substitute(a, renaming(m)) == b) return true;
    } while (std::next_permutation(vb.begin(), vb.end()));
    return false;
}

Label random_label(std::mt19937& rng) {
    static const char* words[] = {"a", "b", "read"};
    auto component = [&rng] {
        TokenSeq seq;
        std::uniform_int_distribution<int> len(0, 3), pick(0, 5);
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            int p = pick(rng);
            seq.push_back(p < 3 ? Token::phon(words[p]) : V(p - 3));
        }
        return seq;
    };
    return Label{component(), component(), component()};
}

Substitution random_substitution(std::mt19937& rng) {
    Substitution sub;
    static const char* words[] = {"the", "children", "book"};
    std::uniform_int_distribution<int> nvars(0, 3), len(0, 2), pick(0, 5);
    int n = nvars(rng);
    for (int v = 0; v < n; ++v) {
        TokenSeq image;
        int m = len(rng);
        for (int i = 0; i < m; ++i) {
            int p = pick(rng);
            image.push_back(p < 3 ? Token::phon(words[p]) : V(3 + p));
        }
        sub.set(v, std::move(image));
    }
    return sub;
}

}  // namespace

TEST_CASE("concatenation flattens spec, head, comp in order") {
    Label l{{P("the"), P("children")}, {P("read")}, {P("a"), P("book")}};
    TokenSeq cat = concat(l);
    REQUIRE(cat.size() == 5);
    CHECK(render_tokens(cat) == "the children read a book");

    CHECK(concat(Label::empty()).empty());
    CHECK(render_tokens(concat(Label::lexical({P("read")}))) == "read");
}

TEST_CASE("substitution is simultaneous and multi-token") {
    // Images are spliced in as-is; a variable occurring inside an image is
    // not rewritten again by the same substitution.
    Label l{{V(1)}, {P("read")}, {V(2)}};
    Substitution sub;
    sub.set(1, {V(2)});
    sub.set(2, {P("the")});
    Label out = substitute(l, sub);
    CHECK(out == Label{{V(2)}, {P("read")}, {P("the")}});

    // Unmapped variables survive untouched.
    Substitution partial;
    partial.set(2, {P("x")});
    CHECK(substitute(l, partial) == Label{{V(1)}, {P("read")}, {P("x")}});
}

TEST_CASE("movement-style substitution on a worked label") {
    // (z | read | w a book)[the children / z, eps / w]
    Label host{{V(0)}, {P("read")}, {V(1), P("a"), P("book")}};
    Substitution sub;
    sub.set(0, {P("the"), P("children")});
    sub.erase_var(1);
    Label out = substitute(host, sub);
    CHECK(render_label(out) == "(the children | read | a book)");
    CHECK(render_tokens(concat(out)) == "the children read a book");
}

TEST_CASE("equality modulo renaming: worked pair and counterexamples") {
    // (w v | read | u)  ~  (a b | read | c): both are three distinct
    // variables around the same phonological head.
    Label x{{V(7), V(3)}, {P("read")}, {V(5)}};
    Label y{{V(0), V(1)}, {P("read")}, {V(2)}};
    REQUIRE(oracle_equal_mod_renaming(x, y));
    CHECK(equal_mod_renaming(x, y));

    // Repeated variable on one side only: no injective map works.
    Label xx{{V(7), V(7)}, {P("read")}, {V(5)}};
    REQUIRE_FALSE(oracle_equal_mod_renaming(xx, y));
    CHECK_FALSE(equal_mod_renaming(xx, y));

    Label yy{{V(0), V(0)}, {P("read")}, {V(2)}};
    REQUIRE_FALSE(oracle_equal_mod_renaming(x, yy));
    CHECK_FALSE(equal_mod_renaming(x, yy));
    CHECK(equal_mod_renaming(xx, yy));

    // Same shape, different phonology.
    Label z{{V(0), V(1)}, {P("reads")}, {V(2)}};
    CHECK_FALSE(equal_mod_renaming(x, z));

    // Variable aligned against a word.
    Label w{{V(0), P("b")}, {P("read")}, {V(2)}};
    CHECK_FALSE(equal_mod_renaming(x, w));

    // Component boundaries matter even when concatenations agree.
    Label c1{{V(0)}, {P("read")}, {}};
    Label c2{{}, {P("read")}, {V(0)}};
    CHECK_FALSE(equal_mod_renaming(c1, c2));
    CHECK(render_tokens(concat(substitute(c1, Substitution{}.erase_var(0)))) ==
          render_tokens(concat(substitute(c2, Substitution{}.erase_var(0)))));
}

TEST_CASE("equality modulo renaming agrees with the exhaustive oracle") {
    std::mt19937 rng(20240711);
    int agreements_true = 0;
    for (int i = 0; i < 10000; ++i) {
        Label a = random_label(rng), b = random_label(rng);
        bool expected = oracle_equal_mod_renaming(a, b);
        if (expected) ++agreements_true;
        REQUIRE(equal_mod_renaming(a, b) == expected);
    }
    // Also exercise pairs built to be equivalent: random renamings of a base.
    for (int i = 0; i < 10000; ++i) {
        Label a = random_label(rng);
        std::vector<int> targets = {10, 11, 12};
        std::shuffle(targets.begin(), targets.end(), rng);
        std::map<int, int> m;
        int k = 0;
        for (int v : label_vars(a)) m[v] = targets[k++ % 3];
        if (m.size() > targets.size()) continue;
        bool injective = true;
        std::set<int> seen;
        for (auto& [from, to] : m) injective &= seen.insert(to).second;
        if (!injective) continue;
        Label b = substitute(a, renaming(m));
        REQUIRE(oracle_equal_mod_renaming(a, b));
        REQUIRE(equal_mod_renaming(a, b));
        ++agreements_true;
    }
    CHECK(agreements_true > 1000);  // the sweep saw real positives
}

TEST_CASE("equality modulo renaming is an equivalence relation") {
    std::mt19937 rng(97);
    for (int i = 0; i < 2000; ++i) {
        Label a = random_label(rng);
        CHECK(equal_mod_renaming(a, a));
        // Symmetric + transitive across a chain of renamings.
        std::map<int, int> m1, m2;
        int base = 20;
        for (int v : label_vars(a)) m1[v] = base++;
        Label b = substitute(a, renaming(m1));
        base = 40;
        for (int v : label_vars(b)) m2[v] = base--;
        Label c = substitute(b, renaming(m2));
        REQUIRE(equal_mod_renaming(a, b));
        CHECK(equal_mod_renaming(b, a));
        REQUIRE(equal_mod_renaming(b, c));
        CHECK(equal_mod_renaming(a, c));
    }
}

TEST_CASE("concatenation commutes with substitution") {
    std::mt19937 rng(424242);
    for (int i = 0; i < 10000; ++i) {
        Label l = random_label(rng);
        Substitution sub = random_substitution(rng);
        TokenSeq lhs = concat(substitute(l, sub));
        TokenSeq rhs = substitute(concat(l), sub);
        REQUIRE(lhs == rhs);
    }
}

TEST_CASE("label literals parse and render") {
    Label the = parse_label("( eps | the | eps )");
    CHECK(the == Label::lexical({P("the")}));

    Label silent = parse_label("( eps | - | eps )");
    CHECK(silent == Label::empty());

    Label full = parse_label("(the children | read | a book)");
    CHECK(full.spec.size() == 2);
    CHECK(full.head.size() == 1);
    CHECK(full.comp.size() == 2);
    CHECK(render_label(full) == "(the children | read | a book)");

    // `_` is an alternative empty marker; rendering uses it.
    CHECK(parse_label("(_ | read | _)") == Label::lexical({P("read")}));
    CHECK(render_label(Label::lexical({P("read")})) == "(_ | read | _)");
    CHECK(render_label(Label::empty()) == "(_ | _ | _)");

    // Apostrophes and hyphens are word characters.
    Label fancy = parse_label("( don't | re-read | eps )");
    CHECK(fancy.spec == TokenSeq{P("don't")});
    CHECK(fancy.head == TokenSeq{P("re-read")});

    // Round trip through render.
    for (const char* s : {"(_ | _ | _)", "(a | b | c)", "(a b | _ | c)",
                          "(the children | read | a book)"}) {
        CHECK(render_label(parse_label(s)) == s);
    }
}

TEST_CASE("label literal errors") {
    CHECK_THROWS_AS(parse_label("(a | b)"), ParseError);
    CHECK_THROWS_AS(parse_label("a | b | c"), ParseError);
    CHECK_THROWS_AS(parse_label("(a | b | c) x"), ParseError);
    CHECK_THROWS_AS(parse_label("(the eps | b | c)"), ParseError);
    CHECK_THROWS_AS(parse_label("(eps the | b | c)"), ParseError);
    CHECK_THROWS_AS(parse_label("(a | - b | c)"), ParseError);
    CHECK_THROWS_AS(parse_label("(a | b | c"), ParseError);
    // `-` marks emptiness only in head position.
    CHECK_THROWS_AS(parse_label("(- | b | c)"), ParseError);
}

TEST_CASE("variables render through the alias map") {
    Label l{{V(3)}, {P("read")}, {V(9), P("book")}};
    AliasMap aliases{{3, "z"}, {9, "w"}};
    CHECK(render_label(l, aliases) == "(z | read | w book)");
    CHECK(render_label(l) == "(?3 | read | ?9 book)");
    CHECK(render_tokens(concat(l), aliases) == "z read w book");
}
