// Backgrounds: series-parallel orders over hypotheses.
//
// A background records the hypotheses a sequent still owes, ordered by a
// series-parallel composition: NonComm imposes left-before-right order,
// Comm imposes none. Empty is a two-sided unit of both compositions and the
// constructors normalize it away, so Empty never occurs inside a tree.
//
// A *maximal region* is a largest subtree built from one composition kind:
// flattening a Comm spine yields the elements of a Comm region, likewise for
// NonComm. Product elimination looks for its two hypotheses inside a single
// region — Comm regions offer any two of their leaf elements in either
// arrangement, NonComm regions only adjacent leaf elements in order.
//
// Each hypothesis carries a stamp (derivation-wide introduction counter);
// when several pairs match, the newest wins: the pair with the greatest
// maximum stamp, then the greatest minimum. Splicing re-stamps inserted
// material, so "newest" tracks when material arrived where it now sits.

#pragma once

#include "mcgp/label.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcgp {

// ── Hypotheses ─────────────────────────────────────────────────────────────

// Where a hypothesis sat when its phase was assembled. Plain until a phase
// records it; the completion check looks at HostComp-origin hypotheses.
enum class Origin : std::uint8_t { Plain, HostSpec, HostComp, Package };

struct Hypothesis {
    int var;          // the label variable this hypothesis binds
    Formula formula;
    int stamp;        // introduction order, unique within a derivation
    Origin origin = Origin::Plain;

    friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
        return a.var == b.var && a.stamp == b.stamp && a.origin == b.origin &&
               a.formula == b.formula;
    }
    friend bool operator!=(const Hypothesis& a, const Hypothesis& b) {
        return !(a == b);
    }
};

// ── Background trees ───────────────────────────────────────────────────────

enum class BackgroundKind : std::uint8_t { Empty, Leaf, Comm, NonComm };

class Background {
public:
    Background() = default;  // Empty

    static Background empty() { return {}; }
    static Background leaf(Hypothesis h) {
        return Background(std::make_shared<const Node>(
            Node{BackgroundKind::Leaf, std::move(h), {}, {}}));
    }
    // Composition constructors: Empty is a unit on both sides.
    static Background comm(Background a, Background b) {
        return combine(BackgroundKind::Comm, std::move(a), std::move(b));
    }
    static Background noncomm(Background a, Background b) {
        return combine(BackgroundKind::NonComm, std::move(a), std::move(b));
    }

    BackgroundKind kind() const {
        return node_ ? node_->kind : BackgroundKind::Empty;
    }
    bool is_empty() const { return !node_; }
    const Hypothesis& hyp() const { return *node_->hyp; }
    Background first() const { return Background(node_->first); }
    Background second() const { return Background(node_->second); }

    friend bool operator==(const Background& a, const Background& b) {
        return equal(a.node_, b.node_);
    }
    friend bool operator!=(const Background& a, const Background& b) {
        return !(a == b);
    }

private:
    struct Node {
        BackgroundKind kind;
        std::optional<Hypothesis> hyp;            // Leaf
        std::shared_ptr<const Node> first, second;  // Comm / NonComm
    };

    explicit Background(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Background combine(BackgroundKind k, Background a, Background b) {
        if (a.is_empty()) return b;
        if (b.is_empty()) return a;
        return Background(std::make_shared<const Node>(
            Node{k, std::nullopt, std::move(a.node_), std::move(b.node_)}));
    }

    static bool equal(const std::shared_ptr<const Node>& a,
                      const std::shared_ptr<const Node>& b) {
        if (a == b) return true;
        if (!a || !b) return false;
        if (a->kind != b->kind) return false;
        if (a->kind == BackgroundKind::Leaf) return *a->hyp == *b->hyp;
        return equal(a->first, b->first) && equal(a->second, b->second);
    }

    std::shared_ptr<const Node> node_;
};

// ── Leaf traversal ─────────────────────────────────────────────────────────

// Left-to-right leaf order; this is the order re-stamping follows.
inline void for_each_leaf(const Background& bg,
                          const std::function<void(const Hypothesis&)>& fn) {
    switch (bg.kind()) {
        case BackgroundKind::Empty: return;
        case BackgroundKind::Leaf: fn(bg.hyp()); return;
        default:
            for_each_leaf(bg.first(), fn);
            for_each_leaf(bg.second(), fn);
    }
}

inline std::vector<Hypothesis> leaves(const Background& bg) {
    std::vector<Hypothesis> out;
    for_each_leaf(bg, [&](const Hypothesis& h) { out.push_back(h); });
    return out;
}

inline std::set<int> background_vars(const Background& bg) {
    std::set<int> out;
    for_each_leaf(bg, [&](const Hypothesis& h) { out.insert(h.var); });
    return out;
}

inline std::optional<Hypothesis> find_leaf(const Background& bg, int var) {
    std::optional<Hypothesis> out;
    for_each_leaf(bg, [&](const Hypothesis& h) {
        if (h.var == var && !out) out = h;
    });
    return out;
}

// Rebuild the same shape with transformed hypotheses, visited in leaf order.
inline Background map_leaves(const Background& bg,
                             const std::function<Hypothesis(Hypothesis)>& fn) {
    switch (bg.kind()) {
        case BackgroundKind::Empty: return bg;
        case BackgroundKind::Leaf: return Background::leaf(fn(bg.hyp()));
        default: {
            // Sequence the recursion explicitly: fn may be stateful (stamp
            // counters) and argument evaluation order is unspecified.
            Background a = map_leaves(bg.first(), fn);
            Background b = map_leaves(bg.second(), fn);
            return bg.kind() == BackgroundKind::Comm
                       ? Background::comm(a, b)
                       : Background::noncomm(a, b);
        }
    }
}

// Fresh stamps in leaf order. Used when spliced material arrives in a new
// surrounding: the insertion is what "introduced it here".
inline Background restamp(const Background& bg, int& next_stamp) {
    return map_leaves(bg, [&](Hypothesis h) {
        h.stamp = next_stamp++;
        return h;
    });
}

inline Background with_origin(const Background& bg, Origin origin) {
    return map_leaves(bg, [origin](Hypothesis h) {
        h.origin = origin;
        return h;
    });
}

// ── Order relaxation ───────────────────────────────────────────────────────

// True iff `to` arises from `from` by replacing zero or more NonComm nodes
// with Comm: same shape, same hypotheses (stamps and origins ignored), order
// only ever forgotten. This is the one structural weakening the logic admits.
inline bool relaxes_to(const Background& from, const Background& to) {
    BackgroundKind fk = from.kind(), tk = to.kind();
    if (fk == BackgroundKind::Empty || tk == BackgroundKind::Empty)
        return fk == tk;
    if (fk == BackgroundKind::Leaf || tk == BackgroundKind::Leaf) {
        if (fk != tk) return false;
        return from.hyp().var == to.hyp().var &&
               from.hyp().formula == to.hyp().formula;
    }
    if (fk != tk && !(fk == BackgroundKind::NonComm && tk == BackgroundKind::Comm))
        return false;
    return relaxes_to(from.first(), to.first()) &&
           relaxes_to(from.second(), to.second());
}

// ── Regions and product pairs ──────────────────────────────────────────────

struct ProductPair {
    Hypothesis x, y;    // aligned with the product's components, x ⊣ first
    FormulaKind region;  // CommProd or NonCommProd
};

namespace detail {

inline BackgroundKind region_bg_kind(FormulaKind k) {
    return k == FormulaKind::CommProd ? BackgroundKind::Comm
                                      : BackgroundKind::NonComm;
}

// Elements of the maximal region rooted at `bg` (which must have kind `k`):
// the maximal subtrees hanging off the same-kind spine.
inline void flatten_region(const Background& bg, BackgroundKind k,
                           std::vector<Background>& out) {
    if (bg.kind() == k) {
        flatten_region(bg.first(), k, out);
        flatten_region(bg.second(), k, out);
    } else {
        out.push_back(bg);
    }
}

// All maximal regions of kind `k`, each as its element list.
inline void collect_regions(const Background& bg, BackgroundKind k,
                            BackgroundKind parent,
                            std::vector<std::vector<Background>>& out) {
    BackgroundKind bk = bg.kind();
    if (bk == BackgroundKind::Empty || bk == BackgroundKind::Leaf) return;
    if (bk == k && parent != k) {
        out.emplace_back();
        flatten_region(bg, k, out.back());
    }
    collect_regions(bg.first(), k, bk, out);
    collect_regions(bg.second(), k, bk, out);
}

inline bool leaf_matches(const Background& e, const Formula& f) {
    return e.kind() == BackgroundKind::Leaf && e.hyp().formula == f;
}

}  // namespace detail

// The newest (X, Y) pair available to a product of the given kind:
//   CommProd    — any two leaf elements of one Comm region, either
//                 arrangement, returned aligned (x proves X, y proves Y);
//   NonCommProd — two adjacent leaf elements of one NonComm region, X's
//                 hypothesis immediately before Y's.
// Newest = lexicographically greatest (max stamp, min stamp).
inline std::optional<ProductPair> find_product_pair(const Background& bg,
                                                    FormulaKind kind,
                                                    const Formula& X,
                                                    const Formula& Y) {
    BackgroundKind k = detail::region_bg_kind(kind);
    std::vector<std::vector<Background>> regions;
    detail::collect_regions(bg, k, BackgroundKind::Empty, regions);

    std::optional<ProductPair> best;
    auto consider = [&](const Hypothesis& hx, const Hypothesis& hy) {
        auto rank = [](const Hypothesis& a, const Hypothesis& b) {
            return std::pair(std::max(a.stamp, b.stamp),
                             std::min(a.stamp, b.stamp));
        };
        if (!best || rank(hx, hy) > rank(best->x, best->y))
            best = ProductPair{hx, hy, kind};
    };

    for (const auto& elems : regions) {
        if (kind == FormulaKind::NonCommProd) {
            for (std::size_t i = 0; i + 1 < elems.size(); ++i)
                if (detail::leaf_matches(elems[i], X) &&
                    detail::leaf_matches(elems[i + 1], Y))
                    consider(elems[i].hyp(), elems[i + 1].hyp());
        } else {
            for (std::size_t i = 0; i < elems.size(); ++i)
                for (std::size_t j = i + 1; j < elems.size(); ++j) {
                    if (detail::leaf_matches(elems[i], X) &&
                        detail::leaf_matches(elems[j], Y))
                        consider(elems[i].hyp(), elems[j].hyp());
                    else if (detail::leaf_matches(elems[i], Y) &&
                             detail::leaf_matches(elems[j], X))
                        consider(elems[j].hyp(), elems[i].hyp());
                }
        }
    }
    return best;
}

// ── Splicing ───────────────────────────────────────────────────────────────

namespace detail {

inline Background fold_region(BackgroundKind k, std::vector<Background> elems) {
    if (elems.empty()) return Background::empty();
    Background out = elems.front();
    for (std::size_t i = 1; i < elems.size(); ++i)
        out = k == BackgroundKind::Comm ? Background::comm(out, elems[i])
                                        : Background::noncomm(out, elems[i]);
    return out;
}

inline Background splice_walk(const Background& bg, BackgroundKind k,
                              BackgroundKind parent, int xv, int yv,
                              const Background& repl, bool& done) {
    BackgroundKind bk = bg.kind();
    if (bk == BackgroundKind::Empty || bk == BackgroundKind::Leaf) return bg;
    if (bk == k && parent != k) {
        std::vector<Background> elems;
        flatten_region(bg, k, elems);
        std::size_t ix = elems.size(), iy = elems.size();
        for (std::size_t i = 0; i < elems.size(); ++i) {
            if (elems[i].kind() != BackgroundKind::Leaf) continue;
            if (elems[i].hyp().var == xv) ix = i;
            if (elems[i].hyp().var == yv) iy = i;
        }
        if (ix < elems.size() && iy < elems.size()) {
            done = true;
            std::size_t at = std::min(ix, iy);
            std::vector<Background> rebuilt;
            for (std::size_t i = 0; i < elems.size(); ++i) {
                if (i == at && !repl.is_empty()) rebuilt.push_back(repl);
                if (i == ix || i == iy) continue;
                rebuilt.push_back(elems[i]);
            }
            return fold_region(k, std::move(rebuilt));
        }
        // Pair not in this region's elements; look inside them.
    }
    Background a = splice_walk(bg.first(), k, bk, xv, yv, repl, done);
    if (done)
        return bk == BackgroundKind::Comm ? Background::comm(a, bg.second())
                                          : Background::noncomm(a, bg.second());
    Background b = splice_walk(bg.second(), k, bk, xv, yv, repl, done);
    return bk == BackgroundKind::Comm ? Background::comm(bg.first(), b)
                                      : Background::noncomm(bg.first(), b);
}

}  // namespace detail

// Remove the pair's two leaves from their shared region and put `replacement`
// where the earlier of the two sat (nothing, if it is Empty). The rebuilt
// region is folded left-nested; a single surviving element collapses to
// itself and an emptied region disappears entirely.
// The pair must come from find_product_pair on this background.
inline Background splice_pair(const Background& bg, const ProductPair& pair,
                              const Background& replacement) {
    bool done = false;
    Background out =
        detail::splice_walk(bg, detail::region_bg_kind(pair.region),
                            BackgroundKind::Empty, pair.x.var, pair.y.var,
                            replacement, done);
    if (!done)
        throw std::logic_error("splice_pair: pair not found in one region");
    return out;
}

// ── Notation ───────────────────────────────────────────────────────────────

namespace detail {

inline std::string render_bg_element(const Background& e, const AliasMap& aliases);

inline std::string render_region_elems(const Background& bg, BackgroundKind k,
                                       const AliasMap& aliases) {
    std::vector<Background> elems;
    flatten_region(bg, k, elems);
    std::string out;
    const char* sep = k == BackgroundKind::Comm ? ", " : " ; ";
    for (std::size_t i = 0; i < elems.size(); ++i) {
        if (i) out += sep;
        out += render_bg_element(elems[i], aliases);
    }
    return out;
}

inline std::string render_bg_element(const Background& e,
                                     const AliasMap& aliases) {
    switch (e.kind()) {
        case BackgroundKind::Empty: return "";
        case BackgroundKind::Leaf: {
            const Hypothesis& h = e.hyp();
            auto it = aliases.find(h.var);
            std::string name = it != aliases.end()
                                   ? it->second
                                   : "?" + std::to_string(h.var);
            return name + ":" + render_formula(h.formula);
        }
        case BackgroundKind::Comm:
            return "(" + render_region_elems(e, BackgroundKind::Comm, aliases) +
                   ")";
        default:
            return "[" +
                   render_region_elems(e, BackgroundKind::NonComm, aliases) +
                   "]";
    }
}

}  // namespace detail

// Hypotheses as `alias:formula`; Comm regions comma-separated (bare at top
// level, parenthesized when nested), NonComm regions bracketed `[a ; b]`.
// The Empty background renders as the empty string.
inline std::string render_background(const Background& bg,
                                     const AliasMap& aliases = {}) {
    if (bg.kind() == BackgroundKind::Comm)
        return detail::render_region_elems(bg, BackgroundKind::Comm, aliases);
    return detail::render_bg_element(bg, aliases);
}

}  // namespace mcgp
