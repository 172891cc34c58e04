#include "lms/addcomb.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace lms {

namespace {

void require_same_field(const PointSet& a, const PointSet& b) {
    if (!(a.field == b.field)) throw FieldMismatch("point sets live over different fields");
}

PointSet from_marks(const FieldSpec& f, const std::vector<char>& mark) {
    std::vector<Code> out;
    for (Code c = 0; c < mark.size(); ++c)
        if (mark[c]) out.push_back(c);
    PointSet s;
    s.field = f;
    s.members = std::move(out);
    return s;
}

}  // namespace

PointSet::PointSet(FieldSpec f, std::vector<Code> pts) : field(std::move(f)), members(std::move(pts)) {
    for (Code p : members)
        if (p >= field.size()) throw InputError("point code " + std::to_string(p) + " outside V");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
}

bool PointSet::contains(Code p) const { return std::binary_search(members.begin(), members.end(), p); }

PointSet full_space(const FieldSpec& f) {
    std::vector<Code> all(f.size());
    for (Code c = 0; c < f.size(); ++c) all[c] = c;
    return PointSet(f, std::move(all));
}

PointSet set_union(const PointSet& a, const PointSet& b) {
    require_same_field(a, b);
    PointSet r;
    r.field = a.field;
    std::set_union(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(), std::back_inserter(r.members));
    return r;
}

PointSet set_intersection(const PointSet& a, const PointSet& b) {
    require_same_field(a, b);
    PointSet r;
    r.field = a.field;
    std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                          std::back_inserter(r.members));
    return r;
}

PointSet set_difference(const PointSet& a, const PointSet& b) {
    require_same_field(a, b);
    PointSet r;
    r.field = a.field;
    std::set_difference(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                        std::back_inserter(r.members));
    return r;
}

bool is_subset(const PointSet& a, const PointSet& b) {
    return std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end());
}

PointSet sumset(const PointSet& a, const PointSet& b) {
    require_same_field(a, b);
    const FieldSpec& f = a.field;
    std::vector<char> mark(f.size(), 0);
    for (Code x : a.members)
        for (Code y : b.members) mark[f.add(x, y)] = 1;
    return from_marks(f, mark);
}

PointSet negate(const PointSet& a) {
    std::vector<Code> out;
    out.reserve(a.size());
    for (Code x : a.members) out.push_back(a.field.neg(x));
    return PointSet(a.field, std::move(out));
}

PointSet difference_set(const PointSet& a, const PointSet& b) { return sumset(a, negate(b)); }

PointSet iterated_sumset(int k, const PointSet& a) {
    if (k < 1) throw InputError("iterated_sumset needs k >= 1");
    PointSet r = a;
    for (int i = 1; i < k; ++i) r = sumset(r, a);
    return r;
}

PointSet subgroup_generated(const PointSet& a) {
    const FieldSpec& f = a.field;
    if (a.empty()) return PointSet(f, {});
    std::vector<Code> basis = echelon_basis(f, a.members);
    std::uint64_t size = 1;
    for (size_t i = 0; i < basis.size(); ++i) {
        size *= static_cast<std::uint64_t>(f.ell());
        if (size > tuple_cap()) throw CapExceeded("span of point set", size, tuple_cap());
    }
    std::vector<Code> span{0};
    for (Code b : basis) {
        std::vector<Code> next;
        next.reserve(span.size() * f.ell());
        for (Code s : span)
            for (int c = 0; c < f.ell(); ++c) next.push_back(f.add(s, f.scale(c, b)));
        span = std::move(next);
    }
    return PointSet(f, std::move(span));
}

PointSet plus_minus(const PointSet& a) {
    PointSet r = set_union(a, negate(a));
    return set_union(r, PointSet(a.field, {0}));
}

PointSet cone(const PointSet& a) {
    std::vector<Code> out;
    for (Code x : a.members)
        for (int c = 0; c < a.field.ell(); ++c) out.push_back(a.field.scale(c, x));
    return PointSet(a.field, std::move(out));
}

Rational density(const PointSet& a, const PointSet& b) {
    if (b.empty()) throw EmptyReference("density relative to an empty set");
    require_same_field(a, b);
    return Rational(BigInt(set_intersection(a, b).size()), BigInt(b.size()));
}

Rational density_in_span(const PointSet& a) {
    if (a.empty()) throw EmptyReference("density of an empty set");
    return density(a, subgroup_generated(a));
}

namespace {

std::vector<std::pair<Code, std::uint64_t>> histogram(const PointSet& a, const PointSet& b, bool subtract) {
    require_same_field(a, b);
    const FieldSpec& f = a.field;
    std::vector<std::uint64_t> r(f.size(), 0);
    for (Code x : a.members)
        for (Code y : b.members) ++r[subtract ? f.sub(x, y) : f.add(x, y)];
    std::vector<std::pair<Code, std::uint64_t>> out;
    for (Code z = 0; z < r.size(); ++z)
        if (r[z]) out.emplace_back(z, r[z]);
    return out;
}

}  // namespace

std::vector<std::pair<Code, std::uint64_t>> sum_histogram(const PointSet& a, const PointSet& b) {
    return histogram(a, b, false);
}

std::vector<std::pair<Code, std::uint64_t>> difference_histogram(const PointSet& a, const PointSet& b) {
    return histogram(a, b, true);
}

std::uint64_t additive_energy(const PointSet& a) {
    std::uint64_t e = 0;
    for (const auto& [z, r] : sum_histogram(a, a)) e += r * r;
    return e;
}

int covering_number(const PointSet& a) {
    if (a.empty()) throw EmptyReference("covering number of an empty set");
    PointSet target = subgroup_generated(a);
    PointSet step = plus_minus(a);
    PointSet layer = step;
    int k = 1;
    while (layer.size() < target.size()) {
        layer = sumset(layer, step);
        ++k;
    }
    return k;
}

int covering_bound(const PointSet& a) {
    Rational mu = density_in_span(a);
    BigInt fl = floor_of(Rational(3) / (Rational(2) * mu));
    return std::max(2, fl.convert_to<int>());
}

CertificateReport check_freiman_ruzsa(const PointSet& a) {
    if (a.empty()) throw EmptyReference("Freiman-Ruzsa check on an empty set");
    CertificateReport rep;
    rep.name = "freiman_ruzsa";
    const FieldSpec& f = a.field;
    size_t n = a.size();
    size_t doubling = sumset(a, a).size();
    rep.K = Rational(BigInt(doubling), BigInt(n));
    int s = span_dim(f, a.members);
    BigInt span_size = ipow(BigInt(f.ell()), static_cast<unsigned>(s));
    BigInt p = numer(rep.K), q = denom(rep.K);
    rep.lhs = "|<A>|=" + span_size.str();
    rep.rhs = "ell^(2*" + to_string(rep.K) + ")*|A|";
    // |<A>| <= ell^(2K)|A|  <=>  |<A>|^q <= ell^(2p) |A|^q.
    if (2 * p >= BigInt(s) * q) {
        // ell^(2K) >= ell^s = |<A>| already.
        rep.pass = true;
        return rep;
    }
    double bits = static_cast<double>(q.convert_to<double>()) * s * std::log2(static_cast<double>(f.ell()));
    if (bits <= 65536.0) {
        unsigned qe = q.convert_to<unsigned>();
        BigInt lhs = ipow(span_size, qe);
        BigInt rhs = ipow(BigInt(f.ell()), (2 * p).convert_to<unsigned>()) * ipow(BigInt(n), qe);
        rep.pass = lhs <= rhs;
        return rep;
    }
    rep.astronomical = true;
    double lhs = s * std::log(static_cast<double>(f.ell()));
    double rhs = 2.0 * to_double(rep.K) * std::log(static_cast<double>(f.ell())) + std::log(static_cast<double>(n));
    rep.pass = lhs <= rhs;
    return rep;
}

CertificateReport check_plunnecke(const PointSet& a, const PointSet& b, int k) {
    require_same_field(a, b);
    if (a.empty() || b.empty()) throw EmptyReference("Plunnecke check needs nonempty sets");
    if (k < 1) throw InputError("Plunnecke check needs k >= 1");
    CertificateReport rep;
    rep.name = "plunnecke";
    size_t ab = sumset(a, b).size();
    rep.K = Rational(BigInt(ab), BigInt(a.size()));
    size_t kb = iterated_sumset(k, b).size();
    // |kB| <= K^k |A|  <=>  |kB| |A|^(k-1) <= |A+B|^k.
    BigInt lhs = BigInt(kb) * ipow(BigInt(a.size()), static_cast<unsigned>(k - 1));
    BigInt rhs = ipow(BigInt(ab), static_cast<unsigned>(k));
    rep.pass = lhs <= rhs;
    rep.lhs = "|kB|=" + std::to_string(kb);
    rep.rhs = "K^k*|A|=" + to_string(rpow(rep.K, static_cast<unsigned>(k)) * Rational(BigInt(a.size())));
    return rep;
}

AddCombReport addcomb_report(const PointSet& a) {
    AddCombReport r;
    r.size = a.size();
    r.sumset_size = sumset(a, a).size();
    r.subgroup_size = subgroup_generated(a).size();
    r.energy = additive_energy(a);
    if (!a.empty()) {
        r.mu = density_in_span(a);
        r.covering = covering_number(a);
        r.covering_bound = covering_bound(a);
        r.freiman_ruzsa = check_freiman_ruzsa(a);
    }
    return r;
}

}  // namespace lms
