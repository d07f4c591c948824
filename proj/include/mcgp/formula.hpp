// Formulas of the elimination fragment used by the grammar engine.
//
// Connectives: two implications (written `\` and `/`), a commutative product
// `(x)` and a non-commutative product `(.)`. Binary connectives may carry a
// head-movement annotation (`<` / `>`); the affix-hopping annotations are
// recognized by the parser but have no rule semantics and never validate.
//
// Formulas are immutable values with shared subterms; equality is structural.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcgp {

// ── Features ───────────────────────────────────────────────────────────────

// P1 holds categories (selected and projected), P2 holds licensors (targets
// of move). Which class a name belongs to is a property of the lexicon, not
// of the formula syntax: parsing never consults the table, validation does.
enum class FeatureClass : std::uint8_t { P1, P2 };

class FeatureTable {
public:
    void declare(const std::string& name, FeatureClass cls) {
        classes_[name] = cls;
    }
    std::optional<FeatureClass> lookup(const std::string& name) const {
        auto it = classes_.find(name);
        if (it == classes_.end()) return std::nullopt;
        return it->second;
    }
    bool is(const std::string& name, FeatureClass cls) const {
        auto c = lookup(name);
        return c && *c == cls;
    }
    // Declaration order is not kept; deterministic output wants sorted names.
    std::vector<std::string> names(FeatureClass cls) const {
        std::vector<std::string> out;
        for (const auto& [n, c] : classes_)
            if (c == cls) out.push_back(n);
        return out;
    }
    bool empty() const { return classes_.empty(); }

private:
    std::map<std::string, FeatureClass> classes_;
};

// ── Formula values ─────────────────────────────────────────────────────────

enum class FormulaKind : std::uint8_t {
    Atom,         // feature name
    Left,         // first \ second   (argument to the left)
    Right,        // first / second   (argument to the right)
    CommProd,     // first (x) second
    NonCommProd,  // first (.) second
};

enum class Ann : std::uint8_t { None, HeadLeft, HeadRight, AffixLeft, AffixRight };

inline bool ann_is_head(Ann a) { return a == Ann::HeadLeft || a == Ann::HeadRight; }
inline bool ann_is_affix(Ann a) { return a == Ann::AffixLeft || a == Ann::AffixRight; }

class Formula {
public:
    Formula() : kind_(FormulaKind::Atom), ann_(Ann::None), atom_("?") {}

    static Formula atom(std::string name) {
        Formula f;
        f.atom_ = std::move(name);
        return f;
    }
    static Formula make(FormulaKind kind, Formula first, Formula second,
                        Ann ann = Ann::None) {
        Formula f;
        f.kind_ = kind;
        f.ann_ = ann;
        f.atom_.clear();
        f.a_ = std::make_shared<Formula>(std::move(first));
        f.b_ = std::make_shared<Formula>(std::move(second));
        return f;
    }
    static Formula left(Formula arg, Formula result, Ann ann = Ann::None) {
        return make(FormulaKind::Left, std::move(arg), std::move(result), ann);
    }
    static Formula right(Formula result, Formula arg, Ann ann = Ann::None) {
        return make(FormulaKind::Right, std::move(result), std::move(arg), ann);
    }
    static Formula comm_prod(Formula a, Formula b, Ann ann = Ann::None) {
        return make(FormulaKind::CommProd, std::move(a), std::move(b), ann);
    }
    static Formula noncomm_prod(Formula a, Formula b, Ann ann = Ann::None) {
        return make(FormulaKind::NonCommProd, std::move(a), std::move(b), ann);
    }

    FormulaKind kind() const { return kind_; }
    Ann ann() const { return ann_; }
    bool is_atom() const { return kind_ == FormulaKind::Atom; }
    const std::string& atom_name() const { return atom_; }
    // Components in written order: Left = (arg, result), Right = (result, arg).
    const Formula& first() const { return *a_; }
    const Formula& second() const { return *b_; }

    friend bool operator==(const Formula& x, const Formula& y) {
        if (x.kind_ != y.kind_ || x.ann_ != y.ann_) return false;
        if (x.kind_ == FormulaKind::Atom) return x.atom_ == y.atom_;
        return *x.a_ == *y.a_ && *x.b_ == *y.b_;
    }
    friend bool operator!=(const Formula& x, const Formula& y) { return !(x == y); }

    int connective_count() const {
        if (is_atom()) return 0;
        return 1 + a_->connective_count() + b_->connective_count();
    }

private:
    FormulaKind kind_;
    Ann ann_;
    std::string atom_;
    std::shared_ptr<const Formula> a_, b_;
};

// ── Parsing ────────────────────────────────────────────────────────────────

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(std::string msg, std::size_t pos)
        : std::runtime_error(std::move(msg)), position(pos) {}
};

namespace detail {

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
}

// Character cursor shared by the formula, label, background and script
// parsers. Connective tokens are recognized greedily and must not contain
// spaces: `(x)` is three adjacent characters, `/<` two.
class Cursor {
public:
    explicit Cursor(std::string_view text, std::size_t pos = 0)
        : text_(text), pos_(pos) {}

    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }

    void skip_ws() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }
    char peek_char() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    char raw_peek() const {  // no whitespace skipping
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool lookahead(std::string_view s) {
        skip_ws();
        return text_.substr(pos_, s.size()) == s;
    }
    bool eat(std::string_view s) {
        if (!lookahead(s)) return false;
        pos_ += s.size();
        return true;
    }
    void expect(std::string_view s, const char* what) {
        if (!eat(s))
            throw ParseError(std::string("expected ") + what, pos_);
    }
    std::string ident() {
        skip_ws();
        if (pos_ >= text_.size() || !is_ident_start(text_[pos_]))
            throw ParseError("expected identifier", pos_);
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError(msg, pos_);
    }

private:
    std::string_view text_;
    std::size_t pos_;
};

// Connective token classes at each precedence level.
struct ConnTok {
    FormulaKind kind;
    Ann ann;
};

// `\` family: \  \<  >\  <\  \>
inline std::optional<ConnTok> eat_under(Cursor& c) {
    if (c.eat("\\<")) return ConnTok{FormulaKind::Left, Ann::HeadLeft};
    if (c.eat("\\>")) return ConnTok{FormulaKind::Left, Ann::AffixRight};
    if (c.eat("\\")) return ConnTok{FormulaKind::Left, Ann::None};
    if (c.eat(">\\")) return ConnTok{FormulaKind::Left, Ann::HeadRight};
    if (c.eat("<\\")) return ConnTok{FormulaKind::Left, Ann::AffixLeft};
    return std::nullopt;
}

// `/` family: /  /<  >/  </  />
inline std::optional<ConnTok> eat_slash(Cursor& c) {
    if (c.eat("/<")) return ConnTok{FormulaKind::Right, Ann::HeadLeft};
    if (c.eat("/>")) return ConnTok{FormulaKind::Right, Ann::AffixRight};
    if (c.eat("/")) return ConnTok{FormulaKind::Right, Ann::None};
    if (c.eat(">/")) return ConnTok{FormulaKind::Right, Ann::HeadRight};
    if (c.eat("</")) return ConnTok{FormulaKind::Right, Ann::AffixLeft};
    return std::nullopt;
}

// product family: (x)  (.)  with optional < / > suffix
inline std::optional<ConnTok> eat_prod(Cursor& c) {
    FormulaKind kind;
    if (c.eat("(x)")) kind = FormulaKind::CommProd;
    else if (c.eat("(.)")) kind = FormulaKind::NonCommProd;
    else return std::nullopt;
    Ann ann = Ann::None;
    // Suffix must be adjacent in spirit but whitespace is harmless here:
    // neither `<` nor `>` can start anything else at this point.
    if (c.eat("<")) ann = Ann::HeadLeft;
    else if (c.eat(">")) ann = Ann::HeadRight;
    return ConnTok{kind, ann};
}

Formula parse_formula_at(Cursor& c);

inline Formula parse_primary(Cursor& c) {
    // `(x)` / `(.)` never begin a formula, so a bare `(` here is grouping.
    if (c.lookahead("(") && !c.lookahead("(x)") && !c.lookahead("(.)")) {
        c.eat("(");
        Formula inner = parse_formula_at(c);
        c.expect(")", "`)`");
        return inner;
    }
    return Formula::atom(c.ident());
}

// product level binds tightest and associates to the right
inline Formula parse_prod_level(Cursor& c) {
    Formula head = parse_primary(c);
    std::size_t mark = c.pos();
    if (auto tok = eat_prod(c)) {
        Formula rest = parse_prod_level(c);
        return Formula::make(tok->kind, std::move(head), std::move(rest), tok->ann);
    }
    c.seek(mark);
    return head;
}

// `/` binds its right argument; chains associate to the left
inline Formula parse_slash_level(Cursor& c) {
    Formula acc = parse_prod_level(c);
    for (;;) {
        std::size_t mark = c.pos();
        auto tok = eat_slash(c);
        if (!tok) {
            c.seek(mark);
            return acc;
        }
        Formula arg = parse_prod_level(c);
        acc = Formula::right(std::move(acc), std::move(arg), tok->ann);
    }
}

// `\` is right-associative and binds loosest
inline Formula parse_formula_at(Cursor& c) {
    Formula head = parse_slash_level(c);
    std::size_t mark = c.pos();
    if (auto tok = eat_under(c)) {
        Formula rest = parse_formula_at(c);
        return Formula::left(std::move(head), std::move(rest), tok->ann);
    }
    c.seek(mark);
    return head;
}

}  // namespace detail

// Parse a complete formula; trailing input is an error.
inline Formula parse_formula(std::string_view text) {
    detail::Cursor c(text);
    Formula f = detail::parse_formula_at(c);
    if (!c.at_end()) c.fail("trailing input after formula");
    return f;
}

// ── Rendering ──────────────────────────────────────────────────────────────

namespace detail {

inline const char* prod_token(FormulaKind k, Ann a) {
    if (k == FormulaKind::CommProd) {
        switch (a) {
            case Ann::HeadLeft: return "(x)<";
            case Ann::HeadRight: return "(x)>";
            default: return "(x)";
        }
    }
    switch (a) {
        case Ann::HeadLeft: return "(.)<";
        case Ann::HeadRight: return "(.)>";
        default: return "(.)";
    }
}
inline const char* under_token(Ann a) {
    switch (a) {
        case Ann::HeadLeft: return "\\<";
        case Ann::HeadRight: return ">\\";
        case Ann::AffixLeft: return "<\\";
        case Ann::AffixRight: return "\\>";
        default: return "\\";
    }
}
inline const char* slash_token(Ann a) {
    switch (a) {
        case Ann::HeadLeft: return "/<";
        case Ann::HeadRight: return ">/";
        case Ann::AffixLeft: return "</";
        case Ann::AffixRight: return "/>";
        default: return "/";
    }
}

// Precedence: under(0) < slash(1) < product(2) < atom(3).
inline int formula_prec(const Formula& f) {
    switch (f.kind()) {
        case FormulaKind::Atom: return 3;
        case FormulaKind::CommProd:
        case FormulaKind::NonCommProd: return 2;
        case FormulaKind::Right: return 1;
        default: return 0;
    }
}

inline void render_formula_to(const Formula& f, std::string& out, int min_prec) {
    int prec = formula_prec(f);
    bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (f.kind()) {
        case FormulaKind::Atom:
            out += f.atom_name();
            break;
        case FormulaKind::Left:
            // right-assoc: left operand must be tighter, right may be equal
            render_formula_to(f.first(), out, 1);
            out += ' ';
            out += under_token(f.ann());
            out += ' ';
            render_formula_to(f.second(), out, 0);
            break;
        case FormulaKind::Right:
            // left-assoc: left operand may be equal, right must be tighter
            render_formula_to(f.first(), out, 1);
            out += ' ';
            out += slash_token(f.ann());
            out += ' ';
            render_formula_to(f.second(), out, 2);
            break;
        case FormulaKind::CommProd:
        case FormulaKind::NonCommProd:
            // right-assoc
            render_formula_to(f.first(), out, 3);
            out += ' ';
            out += prod_token(f.kind(), f.ann());
            out += ' ';
            render_formula_to(f.second(), out, 2);
            break;
    }
    if (parens) out += ')';
}

}  // namespace detail

// Minimal-parenthesis rendering; parse_formula(render_formula(f)) == f.
inline std::string render_formula(const Formula& f) {
    std::string out;
    detail::render_formula_to(f, out, 0);
    return out;
}

// ── Lexical validation ─────────────────────────────────────────────────────

struct ValidationResult {
    bool ok = true;
    std::string reason;  // empty when ok

    static ValidationResult good() { return {}; }
    static ValidationResult bad(std::string why) { return {false, std::move(why)}; }
};

namespace detail {

inline bool atom_of(const Formula& f, const FeatureTable& feats, FeatureClass cls) {
    return f.is_atom() && feats.is(f.atom_name(), cls);
}
inline bool atom_declared(const Formula& f, const FeatureTable& feats) {
    return f.is_atom() && feats.lookup(f.atom_name()).has_value();
}

// Grammar of lexical formulas, one function per nonterminal:
//   L ::= (B) / P1 | C
//   B ::= F \ (B) | C | D        F any declared feature
//   C ::= P2 (x) (C) | P1
//   D ::= F (.) (D) | P1
// Head annotations are admitted on `\`, `/` and `(.)`; everything else must
// be unannotated. The final component of either product chain is P1.
inline bool accept_C(const Formula& f, const FeatureTable& feats) {
    if (f.kind() == FormulaKind::CommProd)
        return f.ann() == Ann::None && atom_of(f.first(), feats, FeatureClass::P2) &&
               accept_C(f.second(), feats);
    return atom_of(f, feats, FeatureClass::P1);
}
inline bool accept_D(const Formula& f, const FeatureTable& feats) {
    if (f.kind() == FormulaKind::NonCommProd)
        return !ann_is_affix(f.ann()) && atom_declared(f.first(), feats) &&
               accept_D(f.second(), feats);
    return atom_of(f, feats, FeatureClass::P1);
}
inline bool accept_B(const Formula& f, const FeatureTable& feats) {
    if (f.kind() == FormulaKind::Left)
        return !ann_is_affix(f.ann()) && atom_declared(f.first(), feats) &&
               accept_B(f.second(), feats);
    return accept_C(f, feats) || accept_D(f, feats);
}
inline bool accept_L(const Formula& f, const FeatureTable& feats) {
    if (f.kind() == FormulaKind::Right)
        return !ann_is_affix(f.ann()) && atom_of(f.second(), feats, FeatureClass::P1) &&
               accept_B(f.first(), feats);
    return accept_C(f, feats);
}

}  // namespace detail

// Accepts exactly the lexicon-entry shapes: an optional outermost `/` whose
// argument is a P1 atom, above a `\`-chain of declared atoms, ending in a
// product chain (commutative components P2, final component P1) or a bare P1
// atom. Affix annotations and annotated `(x)` never validate.
inline ValidationResult validate_lexical_formula(const Formula& f,
                                                 const FeatureTable& feats) {
    if (detail::accept_L(f, feats)) return ValidationResult::good();
    // Diagnose the common failure modes for readable verdicts.
    if (f.kind() == FormulaKind::Right && f.first().kind() == FormulaKind::Right)
        return ValidationResult::bad("more than one / (must be outermost and unique)");
    return ValidationResult::bad("not of the lexical shape (B)/P1 or product chain");
}

// ── Exhaustive enumeration (test support) ──────────────────────────────────

// All plain (unannotated) formulas with at most max_connectives connectives
// over the given atoms. Deterministic order. Sizes beyond 8 are rejected;
// beware that the count grows like Catalan(n)*|atoms|^(2n+1).
inline std::vector<Formula> enumerate_formulas(const std::vector<std::string>& atoms,
                                               int max_connectives) {
    if (max_connectives < 0 || max_connectives > 8)
        throw std::invalid_argument("enumerate_formulas: size out of range");
    std::vector<std::vector<Formula>> by_size(
        static_cast<std::size_t>(max_connectives) + 1);
    for (const auto& a : atoms) by_size[0].push_back(Formula::atom(a));
    static constexpr FormulaKind kinds[] = {
        FormulaKind::Left, FormulaKind::Right, FormulaKind::CommProd,
        FormulaKind::NonCommProd};
    for (int n = 1; n <= max_connectives; ++n) {
        for (int i = 0; i < n; ++i) {
            int j = n - 1 - i;
            for (const auto& lhs : by_size[static_cast<std::size_t>(i)])
                for (const auto& rhs : by_size[static_cast<std::size_t>(j)])
                    for (FormulaKind k : kinds)
                        by_size[static_cast<std::size_t>(n)].push_back(
                            Formula::make(k, lhs, rhs));
        }
    }
    std::vector<Formula> out;
    for (auto& level : by_size)
        for (auto& f : level) out.push_back(std::move(f));
    return out;
}

}  // namespace mcgp
