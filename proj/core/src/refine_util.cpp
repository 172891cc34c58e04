#include "refine_util.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lms {

Inequality make_inequality(std::string label, const Rational& lhs, const std::string& op, const Rational& rhs) {
    bool holds = false;
    if (op == "<=") holds = lhs <= rhs;
    else if (op == "<") holds = lhs < rhs;
    else if (op == ">=") holds = lhs >= rhs;
    else if (op == ">") holds = lhs > rhs;
    else if (op == "==") holds = lhs == rhs;
    else throw InputError("unknown comparison " + op);
    return Inequality{std::move(label), to_string(lhs), op, to_string(rhs), holds};
}

bool TraceStep::all_hold() const {
    return std::all_of(inequalities.begin(), inequalities.end(), [](const Inequality& q) { return q.holds; });
}

bool any_conclusion_fails(const Trace& trace) {
    for (const auto& st : trace)
        for (const auto& q : st.inequalities)
            if (q.asserted && !q.holds) return true;
    return false;
}

Rational ShrinkOutcome::min_ratio() const {
    Rational a{BigInt(result_size)};
    Rational b = ratio();
    return a < b ? a : b;
}

namespace detail {

LinearMScheme fiber_at(const LinearMScheme& sch, const Tuple& prefix, int levels) {
    int need = prefix.arity() + levels;
    if (need > sch.m)
        throw DepthExhausted("fixing " + std::to_string(prefix.arity()) + " points and keeping " + std::to_string(levels) +
                             " levels needs depth " + std::to_string(need) + ", scheme has " + std::to_string(sch.m));
    LinearMScheme cut = truncate_scheme(sch, need);
    if (prefix.pts.empty()) return cut;
    return fiber_restrict(cut, prefix);
}

Tuple tuple_of(const std::vector<Code>& pts) { return Tuple{pts}; }

Tuple concat(const Tuple& a, const Tuple& b) {
    Tuple out = a;
    out.pts.insert(out.pts.end(), b.pts.begin(), b.pts.end());
    return out;
}

std::string tuple_str(const Tuple& t) {
    std::string s = "(";
    for (size_t i = 0; i < t.pts.size(); ++i) s += (i ? "," : "") + std::to_string(t.pts[i]);
    return s + ")";
}

std::string rstr(const Rational& r) { return to_string(r); }

Rational rat(std::uint64_t n) { return Rational(BigInt(n)); }

std::optional<std::vector<size_t>> subset_with_sum(const std::vector<size_t>& sizes, const Rational& lo,
                                                   const Rational& hi, bool largest) {
    size_t total = 0;
    for (size_t s : sizes) total += s;
    BigInt lo_i = ceil_of(lo), hi_i = floor_of(hi);
    if (lo_i < 1) lo_i = 1;
    if (hi_i > BigInt(total)) hi_i = BigInt(total);
    if (lo_i > hi_i) return std::nullopt;
    // parent[s] = index of the item that first reached sum s.
    std::vector<std::int64_t> parent(total + 1, -2);
    parent[0] = -1;
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) continue;
        for (size_t s = total; s >= sizes[i]; --s)
            if (parent[s] == -2 && parent[s - sizes[i]] != -2) parent[s] = static_cast<std::int64_t>(i);
    }
    auto lo_s = static_cast<size_t>(lo_i), hi_s = static_cast<size_t>(hi_i);
    for (size_t n = 0; n <= hi_s - lo_s; ++n) {
        size_t s = largest ? hi_s - n : lo_s + n;
        if (parent[s] < 0) continue;
        std::vector<size_t> pick;
        size_t cur = s;
        while (cur > 0) {
            auto i = static_cast<size_t>(parent[cur]);
            pick.push_back(i);
            cur -= sizes[i];
        }
        std::sort(pick.begin(), pick.end());
        return pick;
    }
    return std::nullopt;
}

bool ge_ell_pow_neg(const Rational& a, int ell, const Rational& q, const Rational& base) {
    if (base <= 0 || a >= base) return true;
    if (a <= 0) return false;
    Rational R = base / a;  // > 1; need ell^q >= R
    BigInt p = numer(q), s = denom(q);
    double bits = to_double(q) * std::log2(static_cast<double>(ell));
    if (p > 200000 || s > 64) return bits >= std::log2(to_double(R));
    auto pe = static_cast<unsigned>(p), se = static_cast<unsigned>(s);
    return ipow(BigInt(ell), pe) * ipow(denom(R), se) >= ipow(numer(R), se);
}

std::string ell_pow_neg_str(int ell, const Rational& q, const Rational& base) {
    return std::to_string(ell) + "^-(" + to_string(q) + ")*" + to_string(base);
}

Rational density_in(const PointSet& b, const PointSet& w) {
    if (w.empty()) throw EmptyReference("density in an empty set");
    return Rational(BigInt(set_intersection(b, w).size()), BigInt(w.size()));
}

void require(TraceStep& step, Inequality q, bool relaxed) {
    bool ok = q.holds;
    std::string label = q.label, detail = q.lhs + " " + q.op + " " + q.rhs;
    step.check(std::move(q));
    if (!ok && !relaxed) throw PreconditionUnmet(label, detail);
}

ConstructibleSearch::ConstructibleSearch(const LinearMScheme& sch, int k) : k_(k) {
    if (k < 1) throw InputError("constructible level must be positive");
    if (2 * k > sch.m)
        throw DepthExhausted("constructibility over fibers x in S^" + std::to_string(k) + " needs m>=" + std::to_string(2 * k));
    cut_ = truncate_scheme(sch, 2 * k);
    prefixes_ = s_tuples(cut_.inst, k);
    index_.resize(prefixes_.size());
}

std::optional<ConstructibleSet> ConstructibleSearch::find(const PointSet& t) {
    for (size_t i = 0; i < prefixes_.size(); ++i) {
        if (!index_[i])
            index_[i] = std::make_unique<ConstructibleIndex>(cut_, k_, decode_tuple(cut_.field(), prefixes_[i], k_));
        if (auto c = index_[i]->decide(t)) return c;
    }
    return std::nullopt;
}

PseudorandomFrame frame_with(const LinearMScheme& sch, const PointSet& b, int k_prime, const Rational& eps_prime) {
    PseudorandomFrame fr;
    fr.special = special_characters(sch, b, k_prime, eps_prime);
    fr.span = fr.special.group.elements();
    if (!fr.special.chars.empty()) {
        PointSet h = fr.span;
        for (const auto& c : fr.special.chars) h = set_intersection(h, c.kernel);
        fr.h = std::move(h);
    }
    return fr;
}

int gate_t(const Rational& c, const Rational& mu) {
    if (mu <= 0) throw EmptyReference("density of an empty set");
    return static_cast<int>(floor_of(3 * c / (2 * mu))) + 1;
}

std::uint64_t min_size_at_least(int ell, const Rational& q, const Rational& base) {
    std::uint64_t s = 1;
    // base is at most the size of the set being bounded, so the scan is short.
    while (!ge_ell_pow_neg(rat(s), ell, q, base)) ++s;
    return s;
}

ShrinkOutcome make_outcome(const LinearMScheme& sch, std::string tag, const Tuple& prefix, std::vector<Code> pts,
                           size_t block_size) {
    std::sort(pts.begin(), pts.end());
    LinearMScheme fib = fiber_at(sch, prefix, 1);
    ShrinkOutcome out;
    out.case_tag = std::move(tag);
    out.prefix = prefix;
    out.result_set = to_block_set(fib, 1, pts);
    out.result_size = pts.size();
    out.points = std::move(pts);
    out.block_size = block_size;
    return out;
}

}  // namespace detail
}  // namespace lms
