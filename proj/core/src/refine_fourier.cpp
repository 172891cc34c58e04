#include "refine_util.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace lms {

using detail::rat;
using detail::require;

// ---- BSG -----------------------------------------------------------------------

namespace {

// nu^{-*4} at the given differences: sum over u of (nu*nu)(u) (nu*nu)(d-u),
// where nu is the difference count of B (symmetric, so signs do not matter).
std::vector<BigInt> four_fold_counts(const PointSet& b, const std::vector<Code>& targets) {
    const FieldSpec& f = b.field;
    auto diff = difference_histogram(b, b);
    std::vector<BigInt> nu2(f.size(), 0);
    for (const auto& [u, nu] : diff)
        for (const auto& [v, nv] : diff) nu2[f.add(u, v)] += BigInt(nu) * nv;
    std::vector<BigInt> out;
    for (Code d : targets) {
        BigInt s = 0;
        for (Code u = 0; u < f.size(); ++u)
            if (nu2[u] != 0) s += nu2[u] * nu2[f.sub(d, u)];
        out.push_back(s);
    }
    return out;
}

constexpr Code kRepresentationCountLimit = 4096;

}  // namespace

BsgOutcome bsg_extract(const LinearMScheme& sch, int b, const Rational& gamma) {
    const FieldSpec& f = sch.field();
    if (gamma <= 0) throw InputError("gamma must be positive");
    PointSet B(f, block_members(sch, {1, b}));
    const Rational nB = rat(B.size());
    BsgOutcome out;
    TraceStep pre{"bsg", "preconditions", {}, {}, {}};
    require(pre, make_inequality("m>=4", sch.m, ">=", 4), false);
    out.energy = additive_energy(B);
    Inequality energy = make_inequality("E(B)>=gamma|B|^3", rat(out.energy), ">=", gamma * nB * nB * nB);
    pre.check(energy);
    if (!energy.holds) throw EnergyTooLow(energy.label, "E(B)=" + energy.lhs + ", threshold " + energy.rhs);
    out.trace.push_back(pre);

    auto hist = difference_histogram(B, B);
    std::set<Code> T;
    for (const auto& [z, n] : hist)
        if (2 * rat(n) >= gamma * nB) T.insert(z);
    auto in_T = [&](Code z) { return T.count(z) > 0; };
    // N(x) = {y : x - y in T}; N'(y) = {x : x - y in T}.
    std::map<Code, std::vector<Code>> N;
    for (Code x : B.members)
        for (Code y : B.members)
            if (in_T(f.sub(x, y))) N[x].push_back(y);
    TraceStep nb{"bsg", "neighborhoods", {}, {}, {}};
    nb.size("|T|", T.size());
    std::optional<size_t> common;
    for (Code x : B.members) {
        size_t s = N[x].size();
        if (common && *common != s) throw AssertFailed("|N(x)| is not constant over B");
        common = s;
    }
    out.n_common = *common;
    const Rational Nsz = rat(out.n_common);
    nb.size("N", out.n_common);
    nb.check(make_inequality("N>=gamma|B|/2", Nsz, ">=", gamma * nB / 2));
    out.trace.push_back(nb);

    out.x0 = B.members.front();
    std::vector<Code> Np;  // N'(x0)
    for (Code x : B.members)
        if (in_T(f.sub(x, out.x0))) Np.push_back(x);
    if (Np.size() != out.n_common) throw AssertFailed("|N'(x0)| differs from |N(x)|");
    const Rational edge = gamma * gamma * nB / 36;
    auto common_size = [&](Code y, Code z) {
        std::vector<Code> c;
        std::set_intersection(N[y].begin(), N[y].end(), N[z].begin(), N[z].end(), std::back_inserter(c));
        return c.size();
    };
    std::vector<Code> result;
    for (Code y : Np) {
        size_t deg = 0;
        for (Code z : Np)
            if (rat(common_size(y, z)) <= edge) ++deg;
        if (3 * rat(deg) <= Nsz) result.push_back(y);
    }
    LinearMScheme fib = detail::fiber_at(sch, Tuple{{out.x0}}, 1);
    out.result_set = to_block_set(fib, 1, result);
    out.points = result;

    PointSet Bp(f, result);
    out.difference_size = difference_set(Bp, Bp).size();
    TraceStep fin{"bsg", "conclusion", Tuple{{out.x0}}, {}, {}};
    fin.size("|B'|", result.size());
    fin.size("|B'-B'|", out.difference_size);
    fin.conclude(make_inequality("|B'|>=gamma|B|/3", rat(result.size()), ">=", gamma * nB / 3));
    fin.conclude(make_inequality("|B'-B'|<2^17 gamma^-9 |B|", rat(out.difference_size), "<",
                              rpow(Rational(2), 17) * nB / rpow(gamma, 9)));
    if (f.size() <= kRepresentationCountLimit && !result.empty()) {
        std::vector<Code> diffs = difference_set(Bp, Bp).members;
        auto counts = four_fold_counts(B, diffs);
        out.min_representations = *std::min_element(counts.begin(), counts.end());
        Rational bound = rpow(gamma, 9) * rpow(nB, 7) / rpow(Rational(2), 17);
        fin.conclude(make_inequality("representations>2^-17 gamma^9 |B|^7", Rational(*out.min_representations), ">", bound));
    }
    bool ok = fin.all_hold();
    out.trace.push_back(std::move(fin));
    if (!ok) throw AssertFailed("BSG conclusion fails");
    return out;
}

// ---- special characters and frames ------------------------------------------------

SpecialCharacters special_characters(const LinearMScheme& sch, const PointSet& b, int k, const Rational& eps) {
    if (b.empty()) throw EmptyReference("special characters of an empty set");
    if (k < 1) throw InputError("k must be positive");
    SpecialCharacters out;
    out.group = SubgroupBasis::span_of(b);
    FourierTable table = fourier_table(b, out.group);
    for (std::uint64_t i = 1; i < table.coeffs.size(); ++i)
        out.max_nontrivial = std::max(out.max_nontrivial, std::abs(table.coeffs[i]));
    std::vector<Character> heavy = heavy_characters(b, eps, out.group);
    out.heavy = heavy.size();
    if (heavy.empty()) return out;
    detail::ConstructibleSearch search(sch, k);
    for (const Character& chi : heavy) {
        PointSet ker = kernel(out.group, chi);
        if (auto cert = search.find(ker))
            out.chars.push_back({chi, std::abs(table.coeffs[chi.index()]), std::move(ker), std::move(*cert)});
    }
    return out;
}

PointSet PseudorandomFrame::subspace_at(Code x) const {
    if (!h) return span;
    const FieldSpec& f = span.field;
    std::vector<Code> pts;
    for (int c = 0; c < f.ell(); ++c) {
        Code cx = f.scale(c, x);
        for (Code y : h->members) pts.push_back(f.add(y, cx));
    }
    return PointSet(f, std::move(pts));
}

PseudorandomFrame pseudorandom_frame(const LinearMScheme& sch, const PointSet& b, int k, const Rational& eps) {
    const int ell = sch.field().ell();
    int t = detail::gate_t(1, density_in_span(b));
    int kp = k * (t + 2);
    if (sch.m < 2 * kp)
        throw PreconditionUnmet("m>=2k'", "m=" + std::to_string(sch.m) + ", k'=" + std::to_string(kp));
    return detail::frame_with(sch, b, kp, eps / rpow(Rational(ell), static_cast<unsigned>(k)));
}

// ---- decomposition ---------------------------------------------------------------

namespace {

int codim(const PointSet& sub, const PointSet& whole) {
    const FieldSpec& f = whole.field;
    return span_dim(f, whole.members) - span_dim(f, sub.members);
}

// ell^e compared against n without materializing huge powers.
bool le_ell_pow(std::uint64_t n, int ell, std::uint64_t e) {
    if (e >= 64) return true;
    return BigInt(n) <= ipow(BigInt(ell), static_cast<unsigned>(e));
}

// All subspaces of g of codimension 1..c, as intersections of kernels; each
// subspace once, ordered by codimension and then by discovery.
std::vector<PointSet> subspaces_to_codim(const SubgroupBasis& g, int c) {
    PointSet whole = g.elements();
    std::set<std::vector<Code>> uniq;
    std::vector<PointSet> hyperplanes;
    for (std::uint64_t i = 1; i < g.order(); ++i) {
        PointSet ker = kernel(g, character_at(g, i));
        if (uniq.insert(ker.members).second) hyperplanes.push_back(std::move(ker));
    }
    std::vector<PointSet> out = hyperplanes, layer = hyperplanes;
    for (int d = 2; d <= c; ++d) {
        std::vector<PointSet> next;
        for (const PointSet& w : layer)
            for (const PointSet& hp : hyperplanes) {
                PointSet x = set_intersection(w, hp);
                if (codim(x, whole) != d || !uniq.insert(x.members).second) continue;
                out.push_back(x);
                next.push_back(std::move(x));
            }
        layer = std::move(next);
    }
    return out;
}

}  // namespace

std::vector<ConstructibleSubspace> constructible_subspaces(const LinearMScheme& sch, const PointSet& b, int k) {
    SubgroupBasis g = SubgroupBasis::span_of(b);
    detail::ConstructibleSearch search(sch, k);
    PointSet whole = g.elements();
    std::vector<PointSet> cands{whole};
    for (PointSet& w : subspaces_to_codim(g, k)) cands.push_back(std::move(w));
    std::vector<ConstructibleSubspace> out;
    for (PointSet& w : cands)
        if (auto c = search.find(w)) out.push_back({w, codim(w, whole), std::move(*c)});
    return out;
}

Rational max_density_gap(const PointSet& b, const std::vector<ConstructibleSubspace>& family) {
    Rational mu = density_in_span(b), best = 0;
    for (const auto& m : family) {
        Rational gap = detail::density_in(b, m.w) - mu;
        if (gap < 0) gap = -gap;
        best = std::max(best, gap);
    }
    return best;
}

Decomposition decompose(const LinearMScheme& sch, int b, int k_prime, const Rational& eps_prime,
                        const DecomposeOptions& opts) {
    const FieldSpec& f = sch.field();
    const int ell = f.ell();
    PointSet B(f, block_members(sch, {1, b}));
    const Rational mu = density_in_span(B);
    Decomposition out;
    out.t = detail::gate_t(1, mu);

    TraceStep pre{"decompose", "preconditions", {}, {}, {}};
    pre.size("mu(B)", to_string(mu));
    pre.size("t", static_cast<std::uint64_t>(out.t));
    if (eps_prime <= 0) throw InputError("eps' must be positive");
    if (k_prime < 1) throw InputError("k' must be positive");
    require(pre, make_inequality("m>=2t+2", sch.m, ">=", 2 * out.t + 2), opts.relaxed);
    require(pre, make_inequality("k'<=m/4", k_prime, "<=", Rational(sch.m, 4)), opts.relaxed);
    const bool preconditions_hold = pre.all_hold();
    out.trace.push_back(pre);

    out.special = special_characters(sch, B, k_prime, eps_prime);
    out.max_nontrivial = out.special.max_nontrivial;
    TraceStep gate{"decompose", "special_characters", {}, {}, {}};
    gate.size("heavy", out.special.heavy);
    gate.size("|X|", out.special.chars.size());
    gate.size("max_nontrivial", std::to_string(out.max_nontrivial));
    if (out.special.chars.empty()) {
        gate.branch = "trivial_gate";
        out.trivial_gate = true;
        out.trace.push_back(std::move(gate));
        return out;
    }
    out.trace.push_back(std::move(gate));
    const PointSet span = out.special.group.elements();
    auto fail = [&](const std::string& what) {
        if (preconditions_hold) throw AssertFailed("decomposition property fails: " + what);
    };

    // (1) H constructible at level t (searched from level 1 upward; a certificate
    // at a lower level lifts to level t).
    out.h = span;
    for (const auto& c : out.special.chars) out.h = set_intersection(out.h, c.kernel);
    TraceStep p1{"decompose", "property1", {}, {}, {}};
    p1.size("|H|", out.h.size());
    std::optional<ConstructibleSet> hc;
    int top = std::min(out.t, sch.m);
    for (int lvl = 1; lvl <= top && !hc; ++lvl) hc = decide_constructible(sch, out.h, lvl);
    p1.conclude(Inequality{"H constructible at level t", hc ? std::to_string(hc->k) : "none", "<=", std::to_string(out.t),
                        hc.has_value() && verify_certificate(sch, *hc)});
    if (hc) out.h_certificate = *hc;
    bool ok1 = p1.all_hold();
    out.trace.push_back(std::move(p1));
    if (!ok1) fail("(1) H is not constructible");

    // (2) B ∩ H empty.
    TraceStep p2{"decompose", "property2", {}, {}, {}};
    size_t bh = set_intersection(B, out.h).size();
    p2.conclude(make_inequality("|B∩H|==0", rat(bh), "==", 0));
    bool ok2 = p2.all_hold();
    out.trace.push_back(std::move(p2));
    if (!ok2) fail("(2) B meets H");

    // The sunflower, in order of the smallest point of B each leaf contains.
    PseudorandomFrame frame;
    frame.span = span;
    frame.h = out.h;
    std::vector<char> seen(f.size(), 0);
    for (Code x : B.members) {
        if (seen[x]) continue;
        PointSet w = frame.subspace_at(x);
        for (Code y : w.members) seen[y] = 1;
        out.sunflower.push_back(std::move(w));
    }

    // (3) H a hyperplane of each leaf; (4) pairwise intersections equal H and the
    // leaves partition B; (5) equal counts.
    TraceStep p345{"decompose", "properties3to5", {}, {}, {}};
    p345.size("|C|", out.sunflower.size());
    bool hyper = true, pairwise = true, equal = true;
    size_t covered = 0;
    for (const PointSet& w : out.sunflower) {
        if (!(is_subset(out.h, w) && w.size() == out.h.size() * static_cast<size_t>(ell))) hyper = false;
        size_t c = set_intersection(B, w).size();
        out.leaf_counts.push_back(c);
        covered += c;
        if (c != out.leaf_counts.front()) equal = false;
    }
    for (size_t i = 0; i < out.sunflower.size(); ++i)
        for (size_t j = i + 1; j < out.sunflower.size(); ++j)
            if (!(set_intersection(out.sunflower[i], out.sunflower[j]) == out.h)) pairwise = false;
    p345.conclude(Inequality{"H hyperplane of every W", hyper ? "true" : "false", "==", "true", hyper});
    p345.conclude(Inequality{"W∩W'=H for distinct leaves", pairwise ? "true" : "false", "==", "true", pairwise});
    p345.conclude(make_inequality("sum|B∩W|==|B|", rat(covered), "==", rat(B.size())));
    p345.conclude(Inequality{"|B∩W| equal over leaves", equal ? "true" : "false", "==", "true", equal});
    bool ok345 = p345.all_hold();
    out.trace.push_back(std::move(p345));
    if (!ok345) fail("(3)-(5) sunflower structure");

    // (6) |C| <= ell^ceil(1/eps'^2)
    Rational inv = 1 / (eps_prime * eps_prime);
    BigInt e = ceil_of(inv);
    out.leaf_bound_exponent = e > BigInt(std::numeric_limits<std::uint64_t>::max())
                                  ? std::numeric_limits<std::uint64_t>::max()
                                  : static_cast<std::uint64_t>(e);
    TraceStep p6{"decompose", "property6", {}, {}, {}};
    bool ok6 = le_ell_pow(out.sunflower.size(), ell, out.leaf_bound_exponent);
    p6.conclude(Inequality{"|C|<=ell^ceil(1/eps'^2)", std::to_string(out.sunflower.size()), "<=",
                        std::to_string(ell) + "^" + std::to_string(out.leaf_bound_exponent), ok6});
    out.trace.push_back(std::move(p6));
    if (!ok6) fail("(6) too many leaves");

    // (7) on candidate W' in W_{Pi,k'',B}.
    const int kt = opts.k_test;
    TraceStep p7{"decompose", "property7", {}, {}, {}};
    p7.size("k''", static_cast<std::uint64_t>(kt));
    std::vector<PointSet> candidates;
    {
        std::set<std::vector<Code>> uniq;
        auto add = [&](PointSet w) {
            if (uniq.insert(w.members).second) candidates.push_back(std::move(w));
        };
        if (opts.full_property7)
            for (PointSet& w : subspaces_to_codim(out.special.group, kt)) add(std::move(w));
        else
            for (PointSet& w : subspaces_to_codim(out.special.group, 1)) add(std::move(w));
        for (const PointSet& w : out.sunflower) add(w);
    }
    std::optional<detail::ConstructibleSearch> search;
    if (2 * kt <= sch.m) search.emplace(sch, kt);
    for (const PointSet& wp : candidates) {
        if (codim(wp, span) > kt || !search || !search->find(wp)) continue;
        for (const PointSet& w : out.sunflower) {
            PointSet ww = set_intersection(w, wp);
            int d = codim(ww, span);
            Rational mu_ww = detail::density_in(B, ww);
            Rational mu_w = detail::density_in(B, w);
            Rational gap = mu_ww - mu_w;
            if (gap < 0) gap = -gap;
            bool close = gap <= rpow(Rational(ell), static_cast<unsigned>(d)) * eps_prime;
            bool empty_in_h = mu_ww == 0 && is_subset(ww, out.h);
            bool held = close || empty_in_h;
            bool met = k_prime >= kt + d * out.t + 1;
            ++out.property7.tested;
            if (held) ++out.property7.held;
            if (met) {
                ++out.property7.hypothesis_met;
                if (held) ++out.property7.held_when_met;
            }
        }
    }
    p7.size("tested", out.property7.tested);
    p7.size("hypothesis_met", out.property7.hypothesis_met);
    p7.size("held", out.property7.held);
    p7.conclude(make_inequality("held_when_met==hypothesis_met", rat(out.property7.held_when_met), "==",
                             rat(out.property7.hypothesis_met)));
    bool ok7 = p7.all_hold();
    out.trace.push_back(std::move(p7));
    if (!ok7) fail("(7) pseudorandomness dichotomy");
    return out;
}

}  // namespace lms
