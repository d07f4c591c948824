#pragma once

// Derivation scripts: a bracketed notation for rule-application trees, a
// parser for it, and a checker that replays a script bottom-up through the
// rules and reports every intermediate sequent or the first step that does
// not apply.

#include "mcgp/lexicon.hpp"
#include "mcgp/rules.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mcgp {

// ── Scripts ─────────────────────────────────────────────────────────────────
//
//   step ::= (lex NAME INDEX?)                        lexical axiom
//          | (hyp FORMULA ALIAS)                      hypothesis axiom
//          | (mg TRIGGER ARGUMENT)                    merge
//          | (mv PACKAGE HOST)                        move
//          | (phase PACKAGE HOST (transfer STEP*)* MODE?)
//   MODE ::= strict | lenient
//
// `;` starts a comment running to the end of the line. A homograph index
// must be separated from the item name by whitespace: `(lex bank 1)`.
// Transfer packages discharge in the order written; an explicit MODE
// overrides the checker's default completion mode for that phase only.

struct ScriptNode {
    enum class Kind : std::uint8_t { Lex, Hyp, Merge, Move, Phase };

    Kind kind = Kind::Lex;
    std::string name;            // Lex: item name; Hyp: display alias
    std::size_t index = 0;       // Lex: homograph index
    Formula formula;             // Hyp: the assumed formula
    std::optional<PicMode> pic;  // Phase: explicit completion mode
    // Merge/Move: exactly two operands. Phase: package, host, then the
    // transfer packages in order.
    std::vector<ScriptNode> children;
};

namespace detail {

inline std::string strip_line_comments(std::string_view text, char marker) {
    std::string out(text);
    bool comment = false;
    for (char& ch : out) {
        if (ch == '\n') comment = false;
        else if (ch == marker) comment = true;
        if (comment) ch = ' ';  // keep positions stable for error reporting
    }
    return out;
}

inline bool is_digit_char(char c) { return c >= '0' && c <= '9'; }

inline ScriptNode parse_script_node(Cursor& c) {
    c.expect("(", "`(`");
    std::string op = c.ident();
    ScriptNode n;
    if (op == "lex") {
        n.kind = ScriptNode::Kind::Lex;
        n.name = parse_item_name(c);
        if (is_digit_char(c.peek_char())) {
            std::size_t v = 0;
            while (is_digit_char(c.raw_peek())) {
                v = v * 10 + static_cast<std::size_t>(c.raw_peek() - '0');
                c.seek(c.pos() + 1);
            }
            n.index = v;
        }
        c.expect(")", "`)`");
    } else if (op == "hyp") {
        n.kind = ScriptNode::Kind::Hyp;
        n.formula = parse_formula_at(c);
        n.name = c.ident();
        c.expect(")", "`)`");
    } else if (op == "mg" || op == "mv") {
        n.kind = op == "mg" ? ScriptNode::Kind::Merge : ScriptNode::Kind::Move;
        n.children.push_back(parse_script_node(c));
        n.children.push_back(parse_script_node(c));
        c.expect(")", "`)`");
    } else if (op == "phase") {
        n.kind = ScriptNode::Kind::Phase;
        n.children.push_back(parse_script_node(c));  // package
        n.children.push_back(parse_script_node(c));  // host
        while (c.peek_char() == '(') {
            c.expect("(", "`(`");
            if (std::string word = c.ident(); word != "transfer")
                c.fail("expected `transfer`, got `" + word + "`");
            while (c.peek_char() == '(')
                n.children.push_back(parse_script_node(c));
            c.expect(")", "`)` closing the transfer block");
        }
        if (is_ident_start(c.peek_char())) {
            std::string word = c.ident();
            if (word == "strict") n.pic = PicMode::Strict;
            else if (word == "lenient") n.pic = PicMode::Lenient;
            else c.fail("expected `strict` or `lenient`, got `" + word + "`");
        }
        c.expect(")", "`)`");
    } else {
        c.fail("unknown derivation step `" + op + "`");
    }
    return n;
}

}  // namespace detail

inline ScriptNode parse_script(std::string_view text) {
    std::string clean = detail::strip_line_comments(text, ';');
    detail::Cursor c(clean);
    ScriptNode root = detail::parse_script_node(c);
    if (!c.at_end()) c.fail("unexpected text after the derivation");
    return root;
}

inline std::string render_script(const ScriptNode& n) {
    switch (n.kind) {
        case ScriptNode::Kind::Lex:
            return "(lex " + n.name +
                   (n.index ? " " + std::to_string(n.index) : "") + ")";
        case ScriptNode::Kind::Hyp:
            return "(hyp " + render_formula(n.formula) + " " + n.name + ")";
        case ScriptNode::Kind::Merge:
            return "(mg " + render_script(n.children[0]) + " " +
                   render_script(n.children[1]) + ")";
        case ScriptNode::Kind::Move:
            return "(mv " + render_script(n.children[0]) + " " +
                   render_script(n.children[1]) + ")";
        default: {
            std::string out = "(phase " + render_script(n.children[0]) + " " +
                              render_script(n.children[1]);
            if (n.children.size() > 2) {
                out += " (transfer";
                for (std::size_t i = 2; i < n.children.size(); ++i)
                    out += " " + render_script(n.children[i]);
                out += ")";
            }
            if (n.pic)
                out += *n.pic == PicMode::Strict ? " strict" : " lenient";
            return out + ")";
        }
    }
    return "";  // unreachable
}

// ── Checking ────────────────────────────────────────────────────────────────

// One rule application during replay. A node's path is its position in the
// script: "root" for the whole derivation, dotted child indices below it
// ("0.1.0.1" = root's child 0, its child 1, ...). A phase node records one
// phase-sub step, one phase-trans step per transfer, and a final phase step,
// all at the phase node's own path.
struct CheckStep {
    std::string path;
    std::string rule;     // lex | hyp | merge | move | phase-sub | phase-trans | phase
    std::string mark;     // short tree tag; merges split into mg< (/-family) and mg> (\-family)
    std::string sequent;  // the sequent this step established
    std::string surface;  // its label's concatenation
};

struct CheckFailure {
    std::string path;
    // Unset for script-level problems (unknown lexical item); otherwise the
    // rule's own error kind.
    std::optional<RuleErrorKind> kind;
    std::string message;
};

struct CheckResult {
    std::vector<CheckStep> steps;  // in replay order, up to the failure
    std::optional<CheckFailure> failure;
    std::optional<LabelledSequent> final_sequent;
    AliasMap aliases;
    std::vector<std::string> notes;

    bool ok() const { return !failure.has_value(); }
};

namespace detail {

inline std::string child_path(const std::string& parent, std::size_t i) {
    return parent == "root" ? std::to_string(i)
                            : parent + "." + std::to_string(i);
}

struct Replay {
    const Lexicon& lex;
    PicMode default_mode;
    DerivationState st;
    CheckResult out;

    void fail_at(const std::string& path, std::optional<RuleErrorKind> kind,
                 std::string message) {
        out.failure = CheckFailure{path, kind, std::move(message)};
    }

    void record(const std::string& path, const char* rule, const char* mark,
                const LabelledSequent& s) {
        out.steps.push_back({path, rule, mark, render_sequent(s, st.aliases),
                             render_tokens(concat(s.label), st.aliases)});
    }

    std::optional<LabelledSequent> eval(const ScriptNode& n,
                                        const std::string& path) {
        switch (n.kind) {
            case ScriptNode::Kind::Lex: {
                const LexicalItem* item = lex.find(n.name, n.index);
                if (!item) {
                    fail_at(path, std::nullopt,
                            n.index == 0
                                ? "unknown lexical item `" + n.name + "`"
                                : "lexical item `" + n.name +
                                      "` has no homograph " +
                                      std::to_string(n.index));
                    return std::nullopt;
                }
                LabelledSequent s = lex_rule(*item, st);
                record(path, "lex", "lex", s);
                return s;
            }
            case ScriptNode::Kind::Hyp: {
                auto r = hyp_rule(n.formula, n.name, lex.features, st);
                if (!r) {
                    fail_at(path, r.failure().kind, r.failure().message);
                    return std::nullopt;
                }
                record(path, "hyp", "hyp", *r);
                return *r;
            }
            case ScriptNode::Kind::Merge: {
                auto a = eval(n.children[0], child_path(path, 0));
                if (!a) return std::nullopt;
                auto b = eval(n.children[1], child_path(path, 1));
                if (!b) return std::nullopt;
                auto r = merge_rule(*a, *b, st.aliases);
                if (!r) {
                    fail_at(path, r.failure().kind, r.failure().message);
                    return std::nullopt;
                }
                const char* mark =
                    a->formula.kind() == FormulaKind::Right ? "mg<" : "mg>";
                record(path, "merge", mark, *r);
                return *r;
            }
            case ScriptNode::Kind::Move: {
                auto a = eval(n.children[0], child_path(path, 0));
                if (!a) return std::nullopt;
                auto b = eval(n.children[1], child_path(path, 1));
                if (!b) return std::nullopt;
                auto r = move_rule(*a, *b, st);
                if (!r) {
                    fail_at(path, r.failure().kind, r.failure().message);
                    return std::nullopt;
                }
                record(path, "move", "mv", *r);
                return *r;
            }
            case ScriptNode::Kind::Phase: {
                auto p = eval(n.children[0], child_path(path, 0));
                if (!p) return std::nullopt;
                auto h = eval(n.children[1], child_path(path, 1));
                if (!h) return std::nullopt;
                auto sub = phase_substitute(*p, *h, st);
                if (!sub) {
                    fail_at(path, sub.failure().kind, sub.failure().message);
                    return std::nullopt;
                }
                record(path, "phase-sub", "phase-sub", sub->seq);
                PhaseState state = *sub;
                for (std::size_t i = 2; i < n.children.size(); ++i) {
                    auto t = eval(n.children[i], child_path(path, i));
                    if (!t) return std::nullopt;
                    auto tr = phase_transfer(state, *t, st);
                    if (!tr) {
                        fail_at(path, tr.failure().kind, tr.failure().message);
                        return std::nullopt;
                    }
                    state = *tr;
                    record(path, "phase-trans", "phase-trans", state.seq);
                }
                auto done = phase_complete(state, n.pic.value_or(default_mode),
                                           st.aliases);
                if (!done) {
                    fail_at(path, done.failure().kind,
                            done.failure().message);
                    return std::nullopt;
                }
                record(path, "phase", "phase", *done);
                return *done;
            }
        }
        return std::nullopt;  // unreachable
    }
};

}  // namespace detail

inline CheckResult check_derivation(const Lexicon& lex, const ScriptNode& root,
                                    PicMode default_mode = PicMode::Strict) {
    detail::Replay rp{lex, default_mode, {}, {}};
    auto fin = rp.eval(root, "root");
    rp.out.aliases = rp.st.aliases;
    if (fin) {
        rp.out.final_sequent = *fin;
        if (fin->bg.is_empty() &&
            (!fin->label.spec.empty() || !fin->label.comp.empty()))
            rp.out.notes.push_back(
                "final label spreads material over (spec | head | comp); "
                "the surface string is their concatenation");
    }
    return std::move(rp.out);
}

// ── Yields ──────────────────────────────────────────────────────────────────

// A derived sequent counts as a sentence only when nothing is left open:
// no undischarged hypotheses, no variables in the label, and the goal
// category proved.
enum class YieldProblem : std::uint8_t {
    None,
    OpenHypotheses,
    FreeVariables,
    WrongCategory,
};

struct YieldResult {
    YieldProblem problem = YieldProblem::None;
    std::string text;  // the label's concatenation, meaningful when ok()
    bool ok() const { return problem == YieldProblem::None; }
};

inline YieldResult sentence_yield(const LabelledSequent& s,
                                  const std::string& start,
                                  const AliasMap& aliases = {}) {
    YieldResult out;
    out.text = render_tokens(concat(s.label), aliases);
    if (!s.bg.is_empty()) out.problem = YieldProblem::OpenHypotheses;
    else if (!label_vars(s.label).empty())
        out.problem = YieldProblem::FreeVariables;
    else if (!(s.formula == Formula::atom(start)))
        out.problem = YieldProblem::WrongCategory;
    return out;
}

// ── Reports ─────────────────────────────────────────────────────────────────

// Line-per-step report. Axioms and phase completions introduce no new
// sequent, so only combinator steps (merge, move, phase-sub, phase-trans)
// are displayed. Ends with the failure line, or with the final sequent
// followed by the bare surface string — always the last line.
inline std::string render_check_report(const CheckResult& r) {
    std::string out;
    for (const CheckStep& s : r.steps) {
        if (s.rule == "lex" || s.rule == "hyp" || s.rule == "phase") continue;
        out += "[" + s.path + "] " + s.rule + ": " + s.sequent + "\n";
    }
    if (r.failure) {
        const CheckFailure& f = *r.failure;
        out += "FAIL at " + f.path + ": ";
        if (f.kind) out += std::string(rule_error_name(*f.kind)) + ": ";
        out += f.message + "\n";
        return out;
    }
    for (const std::string& n : r.notes) out += "note: " + n + "\n";
    out += "final: " + render_sequent(*r.final_sequent, r.aliases) + "\n";
    out += render_tokens(concat(r.final_sequent->label), r.aliases) + "\n";
    return out;
}

namespace detail {

inline std::string tree_node_label(const ScriptNode& n,
                                   const CheckStep* step) {
    switch (n.kind) {
        case ScriptNode::Kind::Lex:
            return "lex " + n.name +
                   (n.index ? " " + std::to_string(n.index) : "");
        case ScriptNode::Kind::Hyp: return "hyp " + n.name;
        case ScriptNode::Kind::Merge: return step ? step->mark : "mg";
        case ScriptNode::Kind::Move: return "mv";
        case ScriptNode::Kind::Phase: return "phase";
    }
    return "?";
}

inline void tree_lines(const ScriptNode& n, const std::string& path,
                       const std::map<std::string, const CheckStep*>& by_path,
                       std::size_t depth, bool transferred, bool sequents,
                       std::string& out) {
    auto it = by_path.find(path);
    const CheckStep* step = it == by_path.end() ? nullptr : it->second;
    out += std::string(2 * depth, ' ');
    if (transferred) out += "transfer ";
    out += tree_node_label(n, step);
    if (!step) out += ": (not reached)";
    else if (sequents) out += ": " + step->sequent;
    else if (!step->surface.empty()) out += ": " + step->surface;
    out += "\n";
    for (std::size_t i = 0; i < n.children.size(); ++i)
        tree_lines(n.children[i], child_path(path, i), by_path, depth + 1,
                   n.kind == ScriptNode::Kind::Phase && i >= 2, sequents,
                   out);
}

}  // namespace detail

// Indented tree view of the script: one line per node showing the surface
// string it derived. A phase node shows the newest sequent it reached, so a
// failed phase still shows how far it got.
inline std::string render_check_tree(const ScriptNode& root,
                                     const CheckResult& r) {
    std::map<std::string, const CheckStep*> by_path;
    for (const CheckStep& s : r.steps) by_path[s.path] = &s;  // last one wins
    std::string out;
    detail::tree_lines(root, "root", by_path, 0, false, false, out);
    return out;
}

// The same tree with the full sequent each node reached instead of its
// surface string.
inline std::string render_sequent_tree(const ScriptNode& root,
                                       const CheckResult& r) {
    std::map<std::string, const CheckStep*> by_path;
    for (const CheckStep& s : r.steps) by_path[s.path] = &s;  // last one wins
    std::string out;
    detail::tree_lines(root, "root", by_path, 0, false, true, out);
    return out;
}

}  // namespace mcgp
