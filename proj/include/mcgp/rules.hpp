// The labelled-sequent rules the engine derives with.
//
// A sequent is (background, label, formula). Rules either build sequents
// (lex, hyp), combine two of them (merge, move), or run the three-step
// phase protocol (substitute, transfer*, complete). Combination consumes
// the trigger's outermost connective; the label equations below say where
// each side's phonological material lands.
//
// merge, trigger r : X/Y or Y\X, argument s : Y      head goes to
//   /   (r_s | r_h        | r_c.s_s.s_h.s_c)         —
//   /<  (r_s | r_h.s_h    | r_c.s_s.s_c)             trigger then argument
//   >/  (r_s | s_h.r_h    | r_c.s_s.s_c)             argument then trigger
//   \   (s_s.s_h.s_c.r_s | r_h     | r_c)            —
//   \<  (s_s.s_c.r_s     | r_h.s_h | r_c)            trigger then argument
//   >\  (s_s.s_c.r_s     | s_h.r_h | r_c)            argument then trigger
//
// phase substitution, host r (pair X ; Y in its background), package
// s : X (.) Y — note the annotated head order is the mirror of merge:
//   (.)   (r_s.s_s | r_h     | s_h.s_c.r_c)
//   (.)<  (r_s.s_s | s_h.r_h | s_c.r_c)
//   (.)>  (r_s.s_s | r_h.s_h | s_c.r_c)
//
// move and phase transfer eliminate an (x) product: the newest matching
// pair (x:X, y:Y) leaves the background, x's label occurrences become the
// package's concatenation and y's vanish. Spliced-in hypotheses are
// re-stamped: they are new where they now sit.

#pragma once

#include "mcgp/lexicon.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace mcgp {

// ── Outcomes ───────────────────────────────────────────────────────────────

enum class RuleErrorKind {
    FormulaMismatch,    // connective or annotation does not fit the rule
    NoSuchPair,         // background offers no matching product pair
    VariableCollision,  // the two sequents share a variable
    PICViolation,       // completion with undischarged internal hypotheses
    FeatureClassViolation,  // feature undeclared or used against its class
};

struct RuleFailure {
    RuleErrorKind kind;
    std::string message;
};

inline const char* rule_error_name(RuleErrorKind k) {
    switch (k) {
        case RuleErrorKind::FormulaMismatch: return "FormulaMismatch";
        case RuleErrorKind::NoSuchPair: return "NoSuchPair";
        case RuleErrorKind::VariableCollision: return "VariableCollision";
        case RuleErrorKind::PICViolation: return "PICViolation";
        case RuleErrorKind::FeatureClassViolation:
            return "FeatureClassViolation";
    }
    return "?";
}

template <class T>
class RuleResult {
public:
    RuleResult(T value) : v_(std::move(value)) {}
    RuleResult(RuleFailure failure) : v_(std::move(failure)) {}
    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }
    const T& operator*() const { return std::get<T>(v_); }
    const T* operator->() const { return &std::get<T>(v_); }
    const RuleFailure& failure() const { return std::get<RuleFailure>(v_); }

private:
    std::variant<T, RuleFailure> v_;
};

// ── Sequents and derivation state ──────────────────────────────────────────

struct LabelledSequent {
    Background bg;
    Label label;
    Formula formula;
};

// Undischarged-hypothesis bookkeeping between phase substitution and
// completion. `internal` holds the variables that must be gone (discharged
// by transfers) before the phase may close.
struct PhaseState {
    LabelledSequent seq;
    std::set<int> internal;
};

enum class PicMode { Strict, Lenient };

// Variable ids and stamps are derivation-global; aliases are display names.
struct DerivationState {
    int next_var = 0;
    int next_stamp = 1;
    AliasMap aliases;

    int fresh_var(std::string alias) {
        aliases[next_var] = std::move(alias);
        return next_var++;
    }
};

inline std::string render_sequent(const LabelledSequent& s,
                                  const AliasMap& aliases = {}) {
    std::string bg = render_background(s.bg, aliases);
    std::string out = bg.empty() ? "" : bg + " ";
    out += "|- " + render_label(s.label, aliases) + " : " +
           render_formula(s.formula);
    return out;
}

// ── Shared checks ──────────────────────────────────────────────────────────

namespace detail {

inline std::set<int> sequent_vars(const LabelledSequent& s) {
    std::set<int> out = background_vars(s.bg);
    for (int v : label_vars(s.label)) out.insert(v);
    return out;
}

inline std::optional<RuleFailure> check_disjoint(const LabelledSequent& a,
                                                 const LabelledSequent& b,
                                                 const AliasMap& aliases) {
    std::set<int> va = sequent_vars(a);
    for (int v : sequent_vars(b))
        if (va.count(v)) {
            auto it = aliases.find(v);
            std::string name =
                it != aliases.end() ? it->second : "?" + std::to_string(v);
            return RuleFailure{RuleErrorKind::VariableCollision,
                               "both sides use variable " + name};
        }
    return std::nullopt;
}

inline std::string first_undeclared_atom(const Formula& f,
                                         const FeatureTable& feats) {
    if (f.is_atom())
        return feats.lookup(f.atom_name()) ? "" : f.atom_name();
    std::string a = first_undeclared_atom(f.first(), feats);
    return a.empty() ? first_undeclared_atom(f.second(), feats) : a;
}

inline bool any_affix(const Formula& f) {
    if (f.is_atom()) return false;
    return ann_is_affix(f.ann()) || any_affix(f.first()) ||
           any_affix(f.second());
}

// How a hypothesis prints in diagnostics: `alias:formula`.
inline std::string hyp_display(const Hypothesis& h, const AliasMap& aliases) {
    auto it = aliases.find(h.var);
    std::string name =
        it != aliases.end() ? it->second : "?" + std::to_string(h.var);
    return name + ":" + render_formula(h.formula);
}

}  // namespace detail

// ── Axioms ─────────────────────────────────────────────────────────────────

// Instantiate a lexical item: the context's feature hypotheses get fresh
// variables (aliased h<stamp>) and stamps; the label is plain phonology.
inline LabelledSequent lex_rule(const LexicalItem& item, DerivationState& st) {
    Background bg = map_leaves(item.context, [&](Hypothesis h) {
        h.stamp = st.next_stamp++;
        h.var = st.fresh_var("h" + std::to_string(h.stamp));
        h.origin = Origin::Plain;
        return h;
    });
    return LabelledSequent{std::move(bg), item.label, item.formula};
}

// Assume a formula: x:A |- (_ | x | _) : A. The hypothesis is phonologically
// a bare head that movement will later replace or erase.
inline RuleResult<LabelledSequent> hyp_rule(const Formula& formula,
                                            const std::string& alias,
                                            const FeatureTable& feats,
                                            DerivationState& st) {
    if (std::string missing = detail::first_undeclared_atom(formula, feats);
        !missing.empty())
        return RuleFailure{RuleErrorKind::FeatureClassViolation,
                           "undeclared feature `" + missing + "`"};
    if (detail::any_affix(formula))
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "affix annotations cannot be hypothesized"};
    int var = st.fresh_var(alias);
    int stamp = st.next_stamp++;
    return LabelledSequent{
        Background::leaf(Hypothesis{var, formula, stamp, Origin::Plain}),
        Label{{}, {Token::variable(var)}, {}}, formula};
}

// ── Merge ──────────────────────────────────────────────────────────────────

inline RuleResult<LabelledSequent> merge_rule(const LabelledSequent& trigger,
                                              const LabelledSequent& arg,
                                              const AliasMap& aliases = {}) {
    const Formula& f = trigger.formula;
    bool slash_right = f.kind() == FormulaKind::Right;
    bool slash_left = f.kind() == FormulaKind::Left;
    if (!slash_right && !slash_left)
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "trigger `" + render_formula(f) +
                               "` has no outermost slash"};
    if (ann_is_affix(f.ann()))
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "affix annotations have no merge rule"};
    const Formula& expected = slash_right ? f.second() : f.first();
    const Formula& result = slash_right ? f.first() : f.second();
    if (!(arg.formula == expected))
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "trigger `" + render_formula(f) + "` expects `" +
                               render_formula(expected) + "`, argument is `" +
                               render_formula(arg.formula) + "`"};
    if (auto err = detail::check_disjoint(trigger, arg, aliases)) return *err;

    const Label& r = trigger.label;
    const Label& s = arg.label;
    TokenSeq s_all = concat(s);
    TokenSeq s_rest = s.spec;  // argument minus its head
    s_rest.insert(s_rest.end(), s.comp.begin(), s.comp.end());
    auto join = [](const TokenSeq& a, const TokenSeq& b) {
        TokenSeq out = a;
        out.insert(out.end(), b.begin(), b.end());
        return out;
    };

    Label out;
    switch (f.ann()) {
        case Ann::None:
            out = slash_right ? Label{r.spec, r.head, join(r.comp, s_all)}
                              : Label{join(s_all, r.spec), r.head, r.comp};
            break;
        case Ann::HeadLeft:  // trigger head first
            out = slash_right
                      ? Label{r.spec, join(r.head, s.head), join(r.comp, s_rest)}
                      : Label{join(s_rest, r.spec), join(r.head, s.head), r.comp};
            break;
        default:  // Ann::HeadRight: argument head first
            out = slash_right
                      ? Label{r.spec, join(s.head, r.head), join(r.comp, s_rest)}
                      : Label{join(s_rest, r.spec), join(s.head, r.head), r.comp};
            break;
    }
    Background bg = slash_right ? Background::comm(trigger.bg, arg.bg)
                                : Background::comm(arg.bg, trigger.bg);
    return LabelledSequent{std::move(bg), std::move(out), result};
}

// ── Move ───────────────────────────────────────────────────────────────────

namespace detail {

// Shared core of move and phase transfer: discharge the newest (x:X, y:Y)
// pair against a package proving X (x) Y. x's occurrences in the label
// become the package's concatenation, y's disappear, and the package's
// background (re-stamped) fills the hole.
inline RuleResult<LabelledSequent> discharge_pair(
    const LabelledSequent& package, const LabelledSequent& host,
    const ProductPair& pair, DerivationState& st, Origin package_origin) {
    Background repl = with_origin(package.bg, package_origin);
    repl = restamp(repl, st.next_stamp);
    Background bg = splice_pair(host.bg, pair, repl);
    Substitution sub;
    sub.set(pair.x.var, concat(package.label));
    sub.erase_var(pair.y.var);
    return LabelledSequent{std::move(bg), substitute(host.label, sub),
                           host.formula};
}

}  // namespace detail

inline RuleResult<LabelledSequent> move_rule(const LabelledSequent& package,
                                             const LabelledSequent& host,
                                             DerivationState& st) {
    const Formula& f = package.formula;
    if (f.kind() != FormulaKind::CommProd || f.ann() != Ann::None)
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "move needs a package proving a plain `(x)` "
                           "product, got `" +
                               render_formula(f) + "`"};
    if (auto err = detail::check_disjoint(package, host, st.aliases))
        return *err;
    auto pair =
        find_product_pair(host.bg, FormulaKind::CommProd, f.first(), f.second());
    if (!pair)
        return RuleFailure{RuleErrorKind::NoSuchPair,
                           "host background offers no (" +
                               render_formula(f.first()) + ", " +
                               render_formula(f.second()) + ") pair"};
    return detail::discharge_pair(package, host, *pair, st, Origin::Plain);
}

// ── Phases ─────────────────────────────────────────────────────────────────

// Substitution step: the package (proving X (.) Y, the phase head product)
// replaces the host's adjacent (x:X ; y:Y) pair. Hypotheses the package
// brings along and host hypotheses ordered after the pair become internal:
// they must be discharged before the phase completes. Host hypotheses
// before the pair are specifier material and stay available.
inline RuleResult<PhaseState> phase_substitute(const LabelledSequent& package,
                                               const LabelledSequent& host,
                                               DerivationState& st) {
    const Formula& f = package.formula;
    if (f.kind() != FormulaKind::NonCommProd || ann_is_affix(f.ann()))
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "phase needs a package proving a `(.)` product, "
                           "got `" +
                               render_formula(f) + "`"};
    if (auto err = detail::check_disjoint(package, host, st.aliases))
        return *err;
    auto pair = find_product_pair(host.bg, FormulaKind::NonCommProd, f.first(),
                                  f.second());
    if (!pair)
        return RuleFailure{RuleErrorKind::NoSuchPair,
                           "host background offers no [" +
                               render_formula(f.first()) + " ; " +
                               render_formula(f.second()) + "] pair"};

    // Mark host origins by position relative to the pair, in leaf order.
    std::size_t x_at = 0, i = 0;
    for (const Hypothesis& h : leaves(host.bg)) {
        if (h.var == pair->x.var) x_at = i;
        ++i;
    }
    std::size_t idx = 0;
    Background host_marked = map_leaves(host.bg, [&](Hypothesis h) {
        if (h.var != pair->x.var && h.var != pair->y.var)
            h.origin = idx < x_at ? Origin::HostSpec : Origin::HostComp;
        ++idx;
        return h;
    });

    Background repl =
        restamp(with_origin(package.bg, Origin::Package), st.next_stamp);
    Background bg =
        splice_pair(host_marked, {pair->x, pair->y, pair->region}, repl);

    const Label& r = host.label;
    const Label& s = package.label;
    auto join = [](const TokenSeq& a, const TokenSeq& b) {
        TokenSeq out = a;
        out.insert(out.end(), b.begin(), b.end());
        return out;
    };
    Label out;
    switch (f.ann()) {
        case Ann::None:
            out = Label{join(r.spec, s.spec), r.head,
                        join(join(s.head, s.comp), r.comp)};
            break;
        case Ann::HeadLeft:  // package head first
            out = Label{join(r.spec, s.spec), join(s.head, r.head),
                        join(s.comp, r.comp)};
            break;
        default:  // Ann::HeadRight: host head first
            out = Label{join(r.spec, s.spec), join(r.head, s.head),
                        join(s.comp, r.comp)};
            break;
    }

    PhaseState state{
        LabelledSequent{std::move(bg), std::move(out), host.formula}, {}};
    for (const Hypothesis& h : leaves(repl)) state.internal.insert(h.var);
    for (const Hypothesis& h : leaves(host_marked))
        if (h.origin == Origin::HostComp && h.var != pair->x.var &&
            h.var != pair->y.var)
            state.internal.insert(h.var);
    return state;
}

// Transfer step: discharge an (x) pair inside the open phase. Discharged
// variables leave the internal set; hypotheses the transfer package brings
// along are marked Package but belong to the enclosing phase, not this one.
inline RuleResult<PhaseState> phase_transfer(const PhaseState& phase,
                                             const LabelledSequent& package,
                                             DerivationState& st) {
    const Formula& f = package.formula;
    if (f.kind() != FormulaKind::CommProd || f.ann() != Ann::None)
        return RuleFailure{RuleErrorKind::FormulaMismatch,
                           "transfer needs a package proving a plain `(x)` "
                           "product, got `" +
                               render_formula(f) + "`"};
    if (auto err = detail::check_disjoint(package, phase.seq, st.aliases))
        return *err;
    auto pair = find_product_pair(phase.seq.bg, FormulaKind::CommProd,
                                  f.first(), f.second());
    if (!pair)
        return RuleFailure{RuleErrorKind::NoSuchPair,
                           "phase background offers no (" +
                               render_formula(f.first()) + ", " +
                               render_formula(f.second()) + ") pair"};
    auto result = detail::discharge_pair(package, phase.seq, *pair, st,
                                         Origin::Package);
    PhaseState out{*result, phase.internal};
    out.internal.erase(pair->x.var);
    out.internal.erase(pair->y.var);
    return out;
}

// Completion: the impenetrability check. Strict mode wants every internal
// hypothesis discharged; lenient mode tolerates leftover package material
// but never leftover host-complement hypotheses.
inline RuleResult<LabelledSequent> phase_complete(const PhaseState& phase,
                                                  PicMode mode,
                                                  const AliasMap& aliases = {}) {
    std::vector<Hypothesis> leftover;
    for (int var : phase.internal) {
        auto h = find_leaf(phase.seq.bg, var);
        if (!h) continue;
        if (mode == PicMode::Strict || h->origin == Origin::HostComp)
            leftover.push_back(*h);
    }
    if (!leftover.empty()) {
        std::sort(leftover.begin(), leftover.end(),
                  [](const Hypothesis& a, const Hypothesis& b) {
                      return a.stamp < b.stamp;
                  });
        std::string msg = "undischarged internal hypotheses: ";
        for (std::size_t i = 0; i < leftover.size(); ++i) {
            if (i) msg += ", ";
            msg += detail::hyp_display(leftover[i], aliases);
        }
        return RuleFailure{RuleErrorKind::PICViolation, std::move(msg)};
    }
    return phase.seq;
}

}  // namespace mcgp
