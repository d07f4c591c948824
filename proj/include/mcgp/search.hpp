#pragma once

// Bounded bottom-up proof search: a chart/agenda parser over a lexicon.
// Items are labelled sequents (or open phase states) paired with the script
// that derives them. Combinations call the same rule functions the checker
// replays, so anything the search reports re-checks verbatim.
//
// Each item keeps its variables and hypothesis stamps in canonical form
// (variables numbered in background leaf order, stamps compressed to ranks).
// When two items combine, the right-hand operand — always the child the
// checker would replay second — has its variables and stamps shifted above
// the left's, reproducing the stamp order a fresh replay would allocate.
// Pair selection depends only on that order, so search-built sequents match
// replayed ones exactly.

#include "mcgp/derivation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mcgp {

struct SearchBounds {
    int max_hypotheses = 8;  // hypothesis axioms per derivation
    int max_depth = 40;      // derivation tree height
    int max_items = 100000;  // chart size before the search truncates
    int max_results = 10;    // parses collected before stopping early
    // Product-formula hypotheses carried across a phase edge, per phase.
    int max_cyclic_per_phase = 1;
};

struct ParseResult {
    ScriptNode script;    // replayable derivation; hyp aliases x1, x2, ...
    std::string surface;  // the surface string it derives
    std::string sequent;  // rendered final sequent
};

struct SearchOutcome {
    std::vector<ParseResult> results;
    // True when the bounded space was fully explored: the agenda drained
    // without hitting max_items and without stopping early at max_results.
    bool exhausted = false;
    int items = 0;  // chart items built
};

inline std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

namespace detail {

// Post-order renaming so emitted scripts read x1, x2, ... in replay order.
inline void uniquify_hyp_aliases(ScriptNode& n, int& counter) {
    for (ScriptNode& ch : n.children) uniquify_hyp_aliases(ch, counter);
    if (n.kind == ScriptNode::Kind::Hyp)
        n.name = "x" + std::to_string(++counter);
}

struct SearchItem {
    ScriptNode script;
    LabelledSequent seq;
    bool phase = false;       // open phase state awaiting completion
    std::set<int> internal;   // when phase: variables that must discharge
    int cyclic_count = 0;     // when phase: cyclic transfers consumed so far
    bool cyclic_seed = false; // bare product hypothesis; transfer-only
    int hyps = 0;
    int depth = 1;
    int vars = 0;    // canonical: variables are 0..vars-1
    int stamps = 0;  // canonical: stamps are 1..stamps
    std::vector<std::string> phons;  // sorted multiset of label words
    std::vector<std::pair<Formula, Formula>> comm_pairs;     // offered (x, y)
    std::vector<std::pair<Formula, Formula>> noncomm_pairs;  // adjacent [x ; y]
};

inline void bg_canonical_key(const Background& b, std::string& out) {
    switch (b.kind()) {
        case BackgroundKind::Empty: out += "E"; return;
        case BackgroundKind::Leaf: {
            const Hypothesis& h = b.hyp();
            out += "L" + std::to_string(h.var) + "," +
                   std::to_string(h.stamp) + "," +
                   std::to_string(static_cast<int>(h.origin)) + "," +
                   render_formula(h.formula);
            return;
        }
        case BackgroundKind::Comm:
        case BackgroundKind::NonComm:
            out += b.kind() == BackgroundKind::Comm ? "C(" : "N(";
            bg_canonical_key(b.first(), out);
            out += " ";
            bg_canonical_key(b.second(), out);
            out += ")";
            return;
    }
}

inline void flatten_same_kind(const Background& b, BackgroundKind k,
                              std::vector<Background>& out) {
    if (b.kind() == k) {
        flatten_same_kind(b.first(), k, out);
        flatten_same_kind(b.second(), k, out);
    } else {
        out.push_back(b);
    }
}

// Every (X, Y) pair a background can offer to a discharge rule: any two
// leaf elements of a Comm region (both arrangements), adjacent leaf
// elements of a NonComm region (in order).
inline void collect_offered_pairs(
    const Background& b, std::set<std::string>& seen,
    std::vector<std::pair<Formula, Formula>>& comm,
    std::vector<std::pair<Formula, Formula>>& noncomm) {
    if (b.is_empty() || b.kind() == BackgroundKind::Leaf) return;
    std::vector<Background> elems;
    flatten_same_kind(b, b.kind(), elems);
    if (b.kind() == BackgroundKind::Comm) {
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (elems[i].kind() != BackgroundKind::Leaf) continue;
            for (std::size_t j = 0; j < elems.size(); ++j) {
                if (i == j || elems[j].kind() != BackgroundKind::Leaf)
                    continue;
                const Formula& x = elems[i].hyp().formula;
                const Formula& y = elems[j].hyp().formula;
                std::string key =
                    "C" + render_formula(x) + "||" + render_formula(y);
                if (seen.insert(key).second) comm.emplace_back(x, y);
            }
        }
    } else {
        for (std::size_t i = 0; i + 1 < elems.size(); ++i) {
            if (elems[i].kind() != BackgroundKind::Leaf ||
                elems[i + 1].kind() != BackgroundKind::Leaf)
                continue;
            const Formula& x = elems[i].hyp().formula;
            const Formula& y = elems[i + 1].hyp().formula;
            std::string key =
                "N" + render_formula(x) + "||" + render_formula(y);
            if (seen.insert(key).second) noncomm.emplace_back(x, y);
        }
    }
    for (const Background& e : elems)
        collect_offered_pairs(e, seen, comm, noncomm);
}

inline std::string pair_key(const Formula& x, const Formula& y) {
    return render_formula(x) + "||" + render_formula(y);
}

struct Searcher {
    const Lexicon& lex;
    SearchBounds bounds;
    PicMode mode;

    bool targeted = false;
    std::vector<std::string> target_seq;     // words in order
    std::vector<std::string> target_sorted;  // the same as a sorted multiset

    std::vector<SearchItem> chart;
    std::set<std::string> seen;
    // Indexes hold chart ids; every lookup filters to partners with id <= the
    // item being processed, so each ordered combination is attempted once.
    std::map<std::string, std::vector<int>> by_formula;   // plain, non-cyclic
    std::map<std::string, std::vector<int>> by_operand;   // slash triggers
    std::map<std::string, std::vector<int>> comm_hosts;   // plain, by pair key
    std::map<std::string, std::vector<int>> noncomm_hosts;
    std::map<std::string, std::vector<int>> open_by_pair; // phases, by pair key
    std::map<std::string, std::vector<int>> cyclic_by_formula;

    std::vector<ParseResult> results;
    bool capped = false;  // max_items hit
    bool enough = false;  // max_results hit

    Formula start_atom() const { return Formula::atom(lex.start); }

    // ── Item plumbing ──────────────────────────────────────────────────────

    void canonicalize(SearchItem& it) {
        std::map<int, int> vmap;
        std::vector<int> stamps;
        for (const Hypothesis& h : leaves(it.seq.bg)) {
            if (!vmap.count(h.var))
                vmap[h.var] = static_cast<int>(vmap.size());
            stamps.push_back(h.stamp);
        }
        for (int v : label_vars(it.seq.label))
            if (!vmap.count(v)) vmap[v] = static_cast<int>(vmap.size());
        std::sort(stamps.begin(), stamps.end());
        std::map<int, int> smap;
        for (std::size_t i = 0; i < stamps.size(); ++i)
            smap[stamps[i]] = static_cast<int>(i) + 1;
        it.seq.bg = map_leaves(it.seq.bg, [&](Hypothesis h) {
            h.var = vmap[h.var];
            h.stamp = smap[h.stamp];
            return h;
        });
        it.seq.label = substitute(it.seq.label, renaming(vmap));
        std::set<int> internal;
        for (int v : it.internal) internal.insert(vmap[v]);
        it.internal = std::move(internal);
        it.vars = static_cast<int>(vmap.size());
        it.stamps = static_cast<int>(stamps.size());
        it.comm_pairs.clear();
        it.noncomm_pairs.clear();
        std::set<std::string> pair_seen;
        collect_offered_pairs(it.seq.bg, pair_seen, it.comm_pairs,
                              it.noncomm_pairs);
    }

    // Move a canonical item's variables and stamps above another item's.
    static LabelledSequent shifted_seq(const SearchItem& it, int var_off,
                                       int stamp_off) {
        std::map<int, int> vmap;
        for (int v = 0; v < it.vars; ++v) vmap[v] = v + var_off;
        LabelledSequent s = it.seq;
        s.bg = map_leaves(s.bg, [&](Hypothesis h) {
            h.var += var_off;
            h.stamp += stamp_off;
            return h;
        });
        s.label = substitute(s.label, renaming(vmap));
        return s;
    }

    std::string item_key(const SearchItem& it) const {
        std::string key = it.phase ? "P" : "S";
        if (it.phase) {
            for (int v : it.internal) key += ":" + std::to_string(v);
            key += "|" + std::to_string(it.cyclic_count);
        }
        if (it.cyclic_seed) key += "Y";
        key += "|";
        bg_canonical_key(it.seq.bg, key);
        key += "|" + render_label(it.seq.label) + "|" +
               render_formula(it.seq.formula);
        return key;
    }

    static std::vector<std::string> merged_phons(
        const std::vector<std::string>& a, const std::vector<std::string>& b) {
        std::vector<std::string> out;
        out.reserve(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(out));
        return out;
    }

    bool phons_fit(const std::vector<std::string>& phons) const {
        if (!targeted) return true;
        return std::includes(target_sorted.begin(), target_sorted.end(),
                             phons.begin(), phons.end());
    }

    bool within_caps(const SearchItem& a, const SearchItem& b) const {
        return a.hyps + b.hyps <= bounds.max_hypotheses &&
               1 + std::max(a.depth, b.depth) <= bounds.max_depth;
    }

    // ── Adding items ───────────────────────────────────────────────────────

    void add(SearchItem&& it) {
        if (capped || enough) return;
        if (static_cast<int>(chart.size()) >= bounds.max_items) {
            capped = true;
            return;
        }
        canonicalize(it);
        if (!phons_fit(it.phons)) return;
        if (!seen.insert(item_key(it)).second) return;

        int id = static_cast<int>(chart.size());
        chart.push_back(std::move(it));
        const SearchItem& item = chart[id];
        if (item.phase) {
            for (const auto& [x, y] : item.comm_pairs)
                open_by_pair[pair_key(x, y)].push_back(id);
        } else if (item.cyclic_seed) {
            cyclic_by_formula[render_formula(item.seq.formula)].push_back(id);
        } else {
            by_formula[render_formula(item.seq.formula)].push_back(id);
            const Formula& f = item.seq.formula;
            if ((f.kind() == FormulaKind::Left ||
                 f.kind() == FormulaKind::Right) &&
                !ann_is_affix(f.ann())) {
                const Formula& op = f.kind() == FormulaKind::Right
                                        ? f.second()
                                        : f.first();
                by_operand[render_formula(op)].push_back(id);
            }
            for (const auto& [x, y] : item.comm_pairs)
                comm_hosts[pair_key(x, y)].push_back(id);
            for (const auto& [x, y] : item.noncomm_pairs)
                noncomm_hosts[pair_key(x, y)].push_back(id);
            maybe_goal(item);
        }
    }

    void maybe_goal(const SearchItem& it) {
        if (!it.seq.bg.is_empty()) return;
        if (!(it.seq.formula == start_atom())) return;
        if (!label_vars(it.seq.label).empty()) return;
        if (targeted) {
            std::vector<std::string> words;
            for (const Token& t : concat(it.seq.label))
                words.push_back(t.text);
            if (words != target_seq) return;
        }
        ScriptNode script = it.script;
        int counter = 0;
        uniquify_hyp_aliases(script, counter);
        // Defense in depth: nothing is reported that the checker does not
        // accept end to end.
        CheckResult check = check_derivation(lex, script, mode);
        if (!check.ok()) return;
        YieldResult y =
            sentence_yield(*check.final_sequent, lex.start, check.aliases);
        if (!y.ok()) return;
        results.push_back({std::move(script), y.text,
                           render_sequent(*check.final_sequent,
                                          check.aliases)});
        if (static_cast<int>(results.size()) >= bounds.max_results)
            enough = true;
    }

    // ── Combinations ───────────────────────────────────────────────────────

    void try_merge(int ti, int ai) {
        const SearchItem& t = chart[ti];
        const SearchItem& a = chart[ai];
        if (!within_caps(t, a)) return;
        std::vector<std::string> phons = merged_phons(t.phons, a.phons);
        if (!phons_fit(phons)) return;
        auto r = merge_rule(t.seq, shifted_seq(a, t.vars, t.stamps));
        if (!r) return;
        SearchItem out;
        out.script.kind = ScriptNode::Kind::Merge;
        out.script.children = {t.script, a.script};
        out.seq = *r;
        out.hyps = t.hyps + a.hyps;
        out.depth = 1 + std::max(t.depth, a.depth);
        out.phons = std::move(phons);
        add(std::move(out));
    }

    void try_move(int pi, int hi) {
        const SearchItem& p = chart[pi];
        const SearchItem& h = chart[hi];
        if (!within_caps(p, h)) return;
        std::vector<std::string> phons = merged_phons(p.phons, h.phons);
        if (!phons_fit(phons)) return;
        DerivationState st;
        st.next_var = p.vars + h.vars;
        st.next_stamp = p.stamps + h.stamps + 1;
        auto r = move_rule(p.seq, shifted_seq(h, p.vars, p.stamps), st);
        if (!r) return;
        SearchItem out;
        out.script.kind = ScriptNode::Kind::Move;
        out.script.children = {p.script, h.script};
        out.seq = *r;
        out.hyps = p.hyps + h.hyps;
        out.depth = 1 + std::max(p.depth, h.depth);
        out.phons = std::move(phons);
        add(std::move(out));
    }

    void try_phase_sub(int pi, int hi) {
        const SearchItem& p = chart[pi];
        const SearchItem& h = chart[hi];
        if (!within_caps(p, h)) return;
        std::vector<std::string> phons = merged_phons(p.phons, h.phons);
        if (!phons_fit(phons)) return;
        DerivationState st;
        st.next_var = p.vars + h.vars;
        st.next_stamp = p.stamps + h.stamps + 1;
        auto r = phase_substitute(p.seq, shifted_seq(h, p.vars, p.stamps), st);
        if (!r) return;
        SearchItem out;
        out.script.kind = ScriptNode::Kind::Phase;
        out.script.children = {p.script, h.script};
        out.seq = r->seq;
        out.phase = true;
        out.internal = r->internal;
        out.hyps = p.hyps + h.hyps;
        out.depth = 1 + std::max(p.depth, h.depth);
        out.phons = std::move(phons);
        add(std::move(out));
    }

    void try_transfer(int phi, int pi) {
        const SearchItem& ph = chart[phi];
        const SearchItem& p = chart[pi];
        if (p.cyclic_seed && ph.cyclic_count >= bounds.max_cyclic_per_phase)
            return;
        if (ph.hyps + p.hyps > bounds.max_hypotheses) return;
        int depth = std::max(ph.depth, 1 + p.depth);
        if (depth > bounds.max_depth) return;
        std::vector<std::string> phons = merged_phons(ph.phons, p.phons);
        if (!phons_fit(phons)) return;
        DerivationState st;
        st.next_var = ph.vars + p.vars;
        st.next_stamp = ph.stamps + p.stamps + 1;
        PhaseState state{ph.seq, ph.internal};
        auto r =
            phase_transfer(state, shifted_seq(p, ph.vars, ph.stamps), st);
        if (!r) return;
        SearchItem out;
        out.script = ph.script;
        out.script.children.push_back(p.script);
        out.seq = r->seq;
        out.phase = true;
        out.internal = r->internal;
        out.cyclic_count = ph.cyclic_count + (p.cyclic_seed ? 1 : 0);
        out.hyps = ph.hyps + p.hyps;
        out.depth = depth;
        out.phons = std::move(phons);
        add(std::move(out));
    }

    void try_complete(int i) {
        const SearchItem& ph = chart[i];
        auto r = phase_complete(PhaseState{ph.seq, ph.internal}, mode);
        if (!r) return;
        SearchItem out;
        out.script = ph.script;
        out.seq = *r;
        out.hyps = ph.hyps;
        out.depth = ph.depth;
        out.phons = ph.phons;
        add(std::move(out));
    }

    // ── Seeding ────────────────────────────────────────────────────────────

    void seed_phons(SearchItem& it) {
        for (const Token& t : concat(it.seq.label))
            if (!t.is_var()) it.phons.push_back(t.text);
        std::sort(it.phons.begin(), it.phons.end());
    }

    void seed() {
        std::map<std::string, std::size_t> homograph;
        for (const LexicalItem& li : lex.items) {
            std::size_t index = homograph[li.name]++;
            DerivationState st;
            SearchItem it;
            it.script.kind = ScriptNode::Kind::Lex;
            it.script.name = li.name;
            it.script.index = index;
            it.seq = lex_rule(li, st);
            seed_phons(it);
            add(std::move(it));
        }

        // Hypothesis seeds: every atomic operand a lexical slash demands.
        std::vector<Formula> atoms;
        std::set<std::string> seen_atoms;
        auto collect_atoms = [&](const Formula& f, auto&& self) -> void {
            if (f.is_atom()) return;
            if (f.kind() == FormulaKind::Left ||
                f.kind() == FormulaKind::Right) {
                const Formula& op =
                    f.kind() == FormulaKind::Right ? f.second() : f.first();
                if (op.is_atom() && seen_atoms.insert(op.atom_name()).second)
                    atoms.push_back(op);
            }
            self(f.first(), self);
            self(f.second(), self);
        };
        // Cyclic seeds: plain product chains of the lexicon and their tails,
        // usable only as transfer packages.
        std::vector<Formula> chains;
        std::set<std::string> seen_chains;
        auto collect_chains = [&](const Formula& f, auto&& self) -> void {
            if (f.is_atom()) return;
            if (f.kind() == FormulaKind::CommProd && f.ann() == Ann::None) {
                for (Formula t = f; t.kind() == FormulaKind::CommProd &&
                                    t.ann() == Ann::None;
                     t = t.second())
                    if (seen_chains.insert(render_formula(t)).second)
                        chains.push_back(t);
            }
            self(f.first(), self);
            self(f.second(), self);
        };
        for (const LexicalItem& li : lex.items) {
            collect_atoms(li.formula, collect_atoms);
            collect_chains(li.formula, collect_chains);
        }

        auto seed_hyp = [&](const Formula& f, bool cyclic) {
            DerivationState st;
            auto r = hyp_rule(f, "x", lex.features, st);
            if (!r) return;
            SearchItem it;
            it.script.kind = ScriptNode::Kind::Hyp;
            it.script.name = "x";
            it.script.formula = f;
            it.seq = *r;
            it.cyclic_seed = cyclic;
            it.hyps = 1;
            add(std::move(it));
        };
        for (const Formula& f : atoms) seed_hyp(f, false);
        if (bounds.max_cyclic_per_phase > 0)
            for (const Formula& f : chains) seed_hyp(f, true);
    }

    // ── The agenda loop ────────────────────────────────────────────────────

    std::vector<int> partners(const std::map<std::string, std::vector<int>>& m,
                              const std::string& key, int limit) const {
        std::vector<int> out;
        auto it = m.find(key);
        if (it == m.end()) return out;
        for (int id : it->second)
            if (id <= limit) out.push_back(id);
        return out;
    }

    void process(int i) {
        const SearchItem it = chart[i];  // copy: the chart grows below
        if (it.phase) {
            try_complete(i);
            for (const auto& [x, y] : it.comm_pairs) {
                std::string prod =
                    render_formula(Formula::comm_prod(x, y));
                for (int j : partners(by_formula, prod, i))
                    try_transfer(i, j);
                for (int j : partners(cyclic_by_formula, prod, i))
                    try_transfer(i, j);
                if (capped || enough) return;
            }
            return;
        }
        const Formula& f = it.seq.formula;
        if (it.cyclic_seed) {
            // Transfer-only: pair up with open phases.
            for (int p : partners(open_by_pair,
                                  pair_key(f.first(), f.second()), i))
                try_transfer(p, i);
            return;
        }
        // As a merge trigger.
        if ((f.kind() == FormulaKind::Left ||
             f.kind() == FormulaKind::Right) &&
            !ann_is_affix(f.ann())) {
            const Formula& op =
                f.kind() == FormulaKind::Right ? f.second() : f.first();
            for (int j : partners(by_formula, render_formula(op), i))
                try_merge(i, j);
        }
        if (capped || enough) return;
        // As a merge argument (strictly earlier triggers; (i, i) was covered
        // above).
        for (int j : partners(by_operand, render_formula(f), i))
            if (j < i) try_merge(j, i);
        if (capped || enough) return;
        // As a discharge package.
        if (f.kind() == FormulaKind::CommProd && f.ann() == Ann::None) {
            std::string key = pair_key(f.first(), f.second());
            for (int j : partners(comm_hosts, key, i)) try_move(i, j);
            if (capped || enough) return;
            for (int p : partners(open_by_pair, key, i)) try_transfer(p, i);
        }
        if (f.kind() == FormulaKind::NonCommProd && !ann_is_affix(f.ann())) {
            for (int j : partners(noncomm_hosts,
                                  pair_key(f.first(), f.second()), i))
                try_phase_sub(i, j);
        }
        if (capped || enough) return;
        // As a host for earlier packages.
        for (const auto& [x, y] : it.comm_pairs) {
            std::string prod = render_formula(Formula::comm_prod(x, y));
            for (int j : partners(by_formula, prod, i))
                if (j < i) try_move(j, i);
            if (capped || enough) return;
        }
        for (const auto& [x, y] : it.noncomm_pairs) {
            for (Ann ann : {Ann::None, Ann::HeadLeft, Ann::HeadRight}) {
                std::string prod = render_formula(
                    Formula::make(FormulaKind::NonCommProd, x, y, ann));
                for (int j : partners(by_formula, prod, i))
                    if (j < i) try_phase_sub(j, i);
            }
            if (capped || enough) return;
        }
    }

    SearchOutcome run() {
        seed();
        std::size_t next = 0;
        while (next < chart.size() && !capped && !enough) {
            int i = static_cast<int>(next++);
            process(i);
        }
        SearchOutcome out;
        out.results = std::move(results);
        out.items = static_cast<int>(chart.size());
        out.exhausted = !capped && next >= chart.size();
        return out;
    }
};

}  // namespace detail

// Parse a word sequence: find derivations of the start category (the
// lexicon's unless overridden) whose surface string is exactly `words`,
// bottom-up within the given bounds.
inline SearchOutcome parse_sentence(const Lexicon& lex,
                                    const std::vector<std::string>& words,
                                    const SearchBounds& bounds = {},
                                    PicMode mode = PicMode::Strict,
                                    const std::string& start = "") {
    Lexicon local = lex;
    if (!start.empty()) local.start = start;
    detail::Searcher s{local, bounds, mode};
    s.targeted = true;
    s.target_seq = words;
    s.target_sorted = words;
    std::sort(s.target_sorted.begin(), s.target_sorted.end());
    return s.run();
}

// Enumerate the yields the lexicon derives within the bounds, in the order
// the search discovers them, each with one witness derivation.
inline SearchOutcome enumerate_yields(const Lexicon& lex,
                                      const SearchBounds& bounds = {},
                                      PicMode mode = PicMode::Strict,
                                      const std::string& start = "") {
    Lexicon local = lex;
    if (!start.empty()) local.start = start;
    detail::Searcher s{local, bounds, mode};
    return s.run();
}

}  // namespace mcgp
