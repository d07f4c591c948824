// Lexicons: feature declarations, a start category, and lexical items.
//
// File format (`#` starts a comment, blank lines are ignored):
//
//   P1: d v V t c n        # categories
//   P2: k                  # licensors
//   start: c
//
//   item the ( eps | the | eps ) : (k (x) d) / n
//   item mode [V ; v] ( eps | eps | eps ) : k \ d \ V
//
// An item is a name, an optional bracketed context, a label literal and a
// formula. Plain items (no context) carry a lexical formula. Items with a
// context are phase hosts: their formula is a `\`-only chain of declared
// features ending in a category, and the context must offer an adjacent
// ordered pair for a phase to consume. Context brackets group; `;` builds
// ordered chains, `,` unordered collections: `[V ; v]`, `[[a, b] ; c]`.
//
// Loading collects one verdict per problem instead of stopping at the first,
// so a whole file can be linted in one pass.

#pragma once

#include "mcgp/background.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mcgp {

// ── Data model ─────────────────────────────────────────────────────────────

struct LexicalItem {
    std::string name;
    Background context;  // feature hypotheses, var = -1 / stamp = 0 templates
    Label label;
    Formula formula;

    bool is_phase_item() const { return !context.is_empty(); }
};

struct Lexicon {
    FeatureTable features;
    std::string start;
    std::vector<LexicalItem> items;  // file order
    std::map<std::string, std::vector<std::size_t>> by_name;

    // Homographs are distinguished by their position among same-name items.
    const LexicalItem* find(const std::string& name, std::size_t index = 0) const {
        auto it = by_name.find(name);
        if (it == by_name.end() || index >= it->second.size()) return nullptr;
        return &items[it->second[index]];
    }
};

struct LexiconIssue {
    std::size_t line;  // 1-based
    std::string item;  // item name, or "" for file-level problems
    std::string message;
};

struct LexiconLoadResult {
    Lexicon lexicon;
    std::vector<LexiconIssue> issues;
    bool ok() const { return issues.empty(); }
};

// ── Context parsing ────────────────────────────────────────────────────────

namespace detail {

inline Background parse_context_content(Cursor& c);

inline Background parse_context_unit(Cursor& c) {
    if (c.eat("[")) {
        Background inner = parse_context_content(c);
        c.expect("]", "`]`");
        return inner;
    }
    std::string atom = c.ident();
    return Background::leaf(Hypothesis{-1, Formula::atom(std::move(atom)), 0});
}

inline Background parse_context_chain(Cursor& c) {
    Background out = parse_context_unit(c);
    while (c.eat(";")) out = Background::noncomm(out, parse_context_unit(c));
    return out;
}

inline Background parse_context_content(Cursor& c) {
    Background out = parse_context_chain(c);
    while (c.eat(",")) out = Background::comm(out, parse_context_chain(c));
    return out;
}

// The whole bracketed context: `[ ... ]`, never empty.
inline Background parse_context_at(Cursor& c) {
    c.expect("[", "`[`");
    Background out = parse_context_content(c);
    c.expect("]", "`]`");
    return out;
}

inline std::string render_context_inner(const Background& bg);

inline std::string render_context_unit(const Background& e) {
    if (e.kind() == BackgroundKind::Leaf) return render_formula(e.hyp().formula);
    return "[" + render_context_inner(e) + "]";
}

inline std::string render_context_inner(const Background& bg) {
    BackgroundKind k = bg.kind();
    if (k == BackgroundKind::Leaf) return render_context_unit(bg);
    std::vector<Background> elems;
    flatten_region(bg, k, elems);
    std::string out;
    const char* sep = k == BackgroundKind::Comm ? ", " : " ; ";
    for (std::size_t i = 0; i < elems.size(); ++i) {
        if (i) out += sep;
        out += render_context_unit(elems[i]);
    }
    return out;
}

}  // namespace detail

inline std::string render_context(const Background& ctx) {
    if (ctx.is_empty()) return "";
    return "[" + detail::render_context_inner(ctx) + "]";
}

// ── Item shape checks ──────────────────────────────────────────────────────

namespace detail {

// Phase-item formulas: a `\`-only spine of declared features ending in a
// category, e.g. `k \ d \ V` or bare `c`. Head annotations are allowed on
// the spine (they steer later merges); affix annotations are not.
inline bool phase_formula_ok(const Formula& f, const FeatureTable& feats,
                             std::string& why) {
    const Formula* cur = &f;
    while (cur->kind() == FormulaKind::Left) {
        if (ann_is_affix(cur->ann())) {
            why = "affix annotation has no rule semantics";
            return false;
        }
        if (!cur->first().is_atom()) {
            why = "argument of `\\` must be a declared feature";
            return false;
        }
        if (!feats.lookup(cur->first().atom_name())) {
            why = "undeclared feature `" + cur->first().atom_name() + "`";
            return false;
        }
        cur = &cur->second();
    }
    if (!cur->is_atom()) {
        why = "must be a `\\`-chain of features ending in a category";
        return false;
    }
    if (!feats.is(cur->atom_name(), FeatureClass::P1)) {
        why = "final feature `" + cur->atom_name() + "` is not a category";
        return false;
    }
    return true;
}

// A context can host a phase only if some ordered region offers two
// adjacent hypotheses.
inline bool context_has_ordered_pair(const Background& ctx) {
    std::vector<std::vector<Background>> regions;
    collect_regions(ctx, BackgroundKind::NonComm, BackgroundKind::Empty,
                    regions);
    for (const auto& elems : regions)
        for (std::size_t i = 0; i + 1 < elems.size(); ++i)
            if (elems[i].kind() == BackgroundKind::Leaf &&
                elems[i + 1].kind() == BackgroundKind::Leaf)
                return true;
    return false;
}

inline std::string first_undeclared_context_atom(const Background& ctx,
                                                 const FeatureTable& feats) {
    std::string missing;
    for_each_leaf(ctx, [&](const Hypothesis& h) {
        if (missing.empty() && !feats.lookup(h.formula.atom_name()))
            missing = h.formula.atom_name();
    });
    return missing;
}

}  // namespace detail

// ── Loading ────────────────────────────────────────────────────────────────

namespace detail {

struct RawLine {
    std::size_t number;
    std::string text;  // comment-stripped, nonempty after trimming
};

inline std::vector<RawLine> logical_lines(std::string_view text) {
    std::vector<RawLine> out;
    std::size_t lineno = 0, pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a != std::string_view::npos) {
            std::size_t b = line.find_last_not_of(" \t\r");
            out.push_back({lineno, std::string(line.substr(a, b - a + 1))});
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

inline std::string parse_item_name(Cursor& c) {
    c.skip_ws();
    std::string word;
    while (is_word_char(c.raw_peek())) {
        word += c.raw_peek();
        c.seek(c.pos() + 1);
    }
    if (word.empty()) c.fail("expected item name");
    return word;
}

}  // namespace detail

inline LexiconLoadResult load_lexicon(std::string_view text) {
    LexiconLoadResult result;
    Lexicon& lex = result.lexicon;
    auto issue = [&](std::size_t line, std::string item, std::string msg) {
        result.issues.push_back({line, std::move(item), std::move(msg)});
    };

    auto lines = detail::logical_lines(text);

    // First pass: declarations, so items may precede or follow them.
    bool saw_start = false;
    for (const auto& line : lines) {
        detail::Cursor c(line.text);
        FeatureClass cls;
        if (c.eat("P1:")) {
            cls = FeatureClass::P1;
        } else if (c.eat("P2:")) {
            cls = FeatureClass::P2;
        } else if (c.eat("start:")) {
            try {
                std::string name = c.ident();
                if (!c.at_end()) c.fail("trailing input after start category");
                if (saw_start) {
                    issue(line.number, "", "start category declared twice");
                } else {
                    saw_start = true;
                    lex.start = name;
                }
            } catch (const ParseError& e) {
                issue(line.number, "", e.what());
            }
            continue;
        } else {
            continue;  // item lines and junk are handled in the second pass
        }
        try {
            if (c.at_end()) c.fail("empty feature list");
            while (!c.at_end()) {
                std::string name = c.ident();
                if (lex.features.lookup(name))
                    issue(line.number, "", "feature `" + name +
                                               "` declared twice");
                else
                    lex.features.declare(name, cls);
            }
        } catch (const ParseError& e) {
            issue(line.number, "", e.what());
        }
    }
    if (!saw_start)
        issue(lines.empty() ? 1 : lines.back().number, "",
              "missing start category");
    else if (!lex.features.lookup(lex.start))
        issue(1, "", "start category `" + lex.start + "` is not declared");

    // Second pass: items, every problem reported against its own line.
    for (const auto& line : lines) {
        detail::Cursor c(line.text);
        if (c.eat("P1:") || c.eat("P2:") || c.eat("start:")) continue;
        if (!c.eat("item")) {
            issue(line.number, "", "unrecognized line");
            continue;
        }
        std::string name;
        try {
            name = detail::parse_item_name(c);
            LexicalItem item;
            item.name = name;
            if (c.lookahead("[")) item.context = detail::parse_context_at(c);
            item.label = detail::parse_label_at(c);
            c.expect(":", "`:`");
            // The rest of the line is the formula.
            item.formula = parse_formula(
                std::string_view(line.text).substr(c.pos()));

            if (item.is_phase_item()) {
                std::string why;
                if (!detail::phase_formula_ok(item.formula, lex.features, why))
                    issue(line.number, name, why);
                else if (std::string missing =
                             detail::first_undeclared_context_atom(
                                 item.context, lex.features);
                         !missing.empty())
                    issue(line.number, name,
                          "undeclared feature `" + missing + "` in context");
                else if (!detail::context_has_ordered_pair(item.context))
                    issue(line.number, name,
                          "context offers no adjacent ordered pair");
            } else {
                ValidationResult v =
                    validate_lexical_formula(item.formula, lex.features);
                if (!v.ok) issue(line.number, name, v.reason);
            }
            lex.by_name[item.name].push_back(lex.items.size());
            lex.items.push_back(std::move(item));
        } catch (const ParseError& e) {
            issue(line.number, name,
                  std::string(e.what()) + " (column " +
                      std::to_string(e.position + 1) + ")");
        }
    }
    return result;
}

// Canonical text: declarations first (names sorted), then items in order.
inline std::string render_lexicon(const Lexicon& lex) {
    std::string out;
    auto feature_line = [&](const char* key, FeatureClass cls) {
        auto names = lex.features.names(cls);
        if (names.empty()) return;
        out += key;
        for (const auto& n : names) {
            out += ' ';
            out += n;
        }
        out += '\n';
    };
    feature_line("P1:", FeatureClass::P1);
    feature_line("P2:", FeatureClass::P2);
    out += "start: " + lex.start + "\n\n";
    for (const LexicalItem& item : lex.items) {
        out += "item " + item.name;
        if (item.is_phase_item()) out += " " + render_context(item.context);
        out += " " + render_label(item.label);
        out += " : " + render_formula(item.formula) + "\n";
    }
    return out;
}

}  // namespace mcgp
