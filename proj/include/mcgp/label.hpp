// Labels: triples of token sequences (specifier, head, complement).
//
// A token is either a phonological word or a variable standing for material
// still to be moved in. Variables are plain integer ids; printable names are
// aliases kept by the derivation state, so phonological text and variable
// names can never collide inside the engine.

#pragma once

#include "mcgp/formula.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mcgp {

// ── Tokens ─────────────────────────────────────────────────────────────────

struct Token {
    enum class Kind : std::uint8_t { Phon, Var };
    Kind kind;
    std::string text;  // Phon only
    int var = -1;      // Var only

    static Token phon(std::string word) {
        return Token{Kind::Phon, std::move(word), -1};
    }
    static Token variable(int id) { return Token{Kind::Var, {}, id}; }
    bool is_var() const { return kind == Kind::Var; }

    friend bool operator==(const Token& a, const Token& b) {
        if (a.kind != b.kind) return false;
        return a.is_var() ? a.var == b.var : a.text == b.text;
    }
    friend bool operator!=(const Token& a, const Token& b) { return !(a == b); }
};

using TokenSeq = std::vector<Token>;

// ── Labels ─────────────────────────────────────────────────────────────────

struct Label {
    TokenSeq spec, head, comp;

    friend bool operator==(const Label& a, const Label& b) {
        return a.spec == b.spec && a.head == b.head && a.comp == b.comp;
    }
    friend bool operator!=(const Label& a, const Label& b) { return !(a == b); }

    static Label empty() { return {}; }
    static Label lexical(TokenSeq head) { return Label{{}, std::move(head), {}}; }
};

inline TokenSeq concat(const Label& l) {
    TokenSeq out = l.spec;
    out.insert(out.end(), l.head.begin(), l.head.end());
    out.insert(out.end(), l.comp.begin(), l.comp.end());
    return out;
}

inline void collect_vars(const TokenSeq& seq, std::set<int>& out) {
    for (const Token& t : seq)
        if (t.is_var()) out.insert(t.var);
}

inline std::set<int> label_vars(const Label& l) {
    std::set<int> out;
    collect_vars(l.spec, out);
    collect_vars(l.head, out);
    collect_vars(l.comp, out);
    return out;
}

// ── Substitution ───────────────────────────────────────────────────────────

// Simultaneous: every variable is looked up against the original map once,
// images are not rewritten again. Images may themselves contain variables
// (a cyclic-move hypothesis moves as a bare variable).
struct Substitution {
    std::map<int, TokenSeq> images;

    Substitution& set(int var, TokenSeq image) {
        images[var] = std::move(image);
        return *this;
    }
    Substitution& erase_var(int var) {  // image = empty sequence
        images[var] = {};
        return *this;
    }
};

inline TokenSeq substitute(const TokenSeq& seq, const Substitution& sub) {
    TokenSeq out;
    for (const Token& t : seq) {
        if (t.is_var()) {
            auto it = sub.images.find(t.var);
            if (it != sub.images.end()) {
                out.insert(out.end(), it->second.begin(), it->second.end());
                continue;
            }
        }
        out.push_back(t);
    }
    return out;
}

inline Label substitute(const Label& l, const Substitution& sub) {
    return Label{substitute(l.spec, sub), substitute(l.head, sub),
                 substitute(l.comp, sub)};
}

// A renaming is a substitution whose images are single distinct variables.
inline Substitution renaming(const std::map<int, int>& var_map) {
    Substitution sub;
    for (const auto& [from, to] : var_map) sub.set(from, {Token::variable(to)});
    return sub;
}

// ── Equality modulo renaming ───────────────────────────────────────────────

// True iff some injective variable renaming carries a onto b. Decided by
// comparing first-occurrence patterns over the concatenated component
// sequences, which is equivalent to searching the injections.
inline bool equal_mod_renaming(const Label& a, const Label& b) {
    if (a.spec.size() != b.spec.size() || a.head.size() != b.head.size() ||
        a.comp.size() != b.comp.size())
        return false;
    std::map<int, int> fwd, rev;
    const TokenSeq* as[] = {&a.spec, &a.head, &a.comp};
    const TokenSeq* bs[] = {&b.spec, &b.head, &b.comp};
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < as[c]->size(); ++i) {
            const Token& x = (*as[c])[i];
            const Token& y = (*bs[c])[i];
            if (x.kind != y.kind) return false;
            if (!x.is_var()) {
                if (x.text != y.text) return false;
                continue;
            }
            auto f = fwd.find(x.var);
            auto r = rev.find(y.var);
            if (f == fwd.end() && r == rev.end()) {
                fwd[x.var] = y.var;
                rev[y.var] = x.var;
            } else if (f == fwd.end() || r == rev.end() || f->second != y.var) {
                return false;
            }
        }
    }
    return true;
}

// ── Notation ───────────────────────────────────────────────────────────────

using AliasMap = std::map<int, std::string>;

namespace detail {

inline void render_component(const TokenSeq& seq, const AliasMap& aliases,
                             std::string& out) {
    if (seq.empty()) {
        out += '_';
        return;
    }
    bool first = true;
    for (const Token& t : seq) {
        if (!first) out += ' ';
        first = false;
        if (t.is_var()) {
            auto it = aliases.find(t.var);
            out += it != aliases.end() ? it->second : "?" + std::to_string(t.var);
        } else {
            out += t.text;
        }
    }
}

inline bool is_word_char(char c) {
    return is_ident_char(c) || c == '-';
}

// One label component between `|` / `)` delimiters: `_` or `eps` for the
// empty sequence (`-` too where allowed: the silent-head alias), otherwise
// whitespace-separated words.
inline TokenSeq parse_component(Cursor& c, bool allow_dash_empty) {
    TokenSeq out;
    for (;;) {
        c.skip_ws();
        char ch = c.peek_char();
        if (ch == '|' || ch == ')' || ch == '\0') break;
        std::string word;
        while (is_word_char(c.raw_peek())) {
            word += c.raw_peek();
            c.seek(c.pos() + 1);
        }
        if (word.empty()) c.fail("expected label token");
        if (word == "-" && !allow_dash_empty)
            c.fail("`-` marks an empty head and is not a word");
        if (word == "eps" || word == "_" || word == "-") {
            if (!out.empty()) c.fail("empty-marker inside a nonempty component");
            c.skip_ws();
            char nxt = c.peek_char();
            if (nxt != '|' && nxt != ')' && nxt != '\0')
                c.fail("empty-marker inside a nonempty component");
            return {};
        }
        out.push_back(Token::phon(std::move(word)));
    }
    return out;
}

inline Label parse_label_at(Cursor& c) {
    c.expect("(", "`(`");
    Label l;
    l.spec = parse_component(c, false);
    c.expect("|", "`|`");
    l.head = parse_component(c, true);  // `-` marks a silent head
    c.expect("|", "`|`");
    l.comp = parse_component(c, false);
    c.expect(")", "`)`");
    return l;
}

}  // namespace detail

// Label literals: `( spec | head | comp )`, components as space-separated
// words with `_`/`eps` for empty and `-` accepted for an empty (silent) head.
// Literals denote phonological material only; variables never appear in them.
inline Label parse_label(std::string_view text) {
    detail::Cursor c(text);
    Label l = detail::parse_label_at(c);
    if (!c.at_end()) c.fail("trailing input after label");
    return l;
}

inline std::string render_label(const Label& l, const AliasMap& aliases = {}) {
    std::string out = "(";
    detail::render_component(l.spec, aliases, out);
    out += " | ";
    detail::render_component(l.head, aliases, out);
    out += " | ";
    detail::render_component(l.comp, aliases, out);
    out += ")";
    return out;
}

inline std::string render_tokens(const TokenSeq& seq, const AliasMap& aliases = {}) {
    std::string out;
    detail::render_component(seq, aliases, out);
    if (out == "_") out.clear();
    return out;
}

}  // namespace mcgp
