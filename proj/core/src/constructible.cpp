#include "lms/constructible.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lms {

LinearMScheme fibered(const LinearMScheme& sch, const Tuple& prefix) {
    if (prefix.pts.empty()) return sch;
    return fiber_restrict(sch, prefix);
}

namespace {

PointSet image_of_block(const LinearMScheme& fib, const LinMap& tau, int block) {
    std::vector<Code> out;
    for (Code c : block_members(fib, {tau.src_arity, block})) out.push_back(lin_apply_code(fib.field(), tau, c));
    return PointSet(fib.field(), std::move(out));
}

const Tuple& common_prefix(const ConstructibleSet& c) {
    for (const auto& e : c.certificate)
        if (e.prefix != c.prefix) throw InputError("certificate entries use different fiber prefixes");
    return c.prefix;
}

}  // namespace

PointSet recompute(const LinearMScheme& sch, const ConstructibleSet& c) {
    std::map<Tuple, LinearMScheme> cache;
    std::vector<Code> pts;
    for (const auto& e : c.certificate) {
        auto it = cache.find(e.prefix);
        if (it == cache.end()) it = cache.emplace(e.prefix, fibered(sch, e.prefix)).first;
        PointSet img = image_of_block(it->second, e.tau, e.block);
        pts.insert(pts.end(), img.members.begin(), img.members.end());
    }
    return PointSet(sch.field(), std::move(pts));
}

bool verify_certificate(const LinearMScheme& sch, const ConstructibleSet& c) { return recompute(sch, c) == c.points; }

ConstructibleIndex::ConstructibleIndex(const LinearMScheme& sch, int k, Tuple prefix)
    : k_(k), prefix_(std::move(prefix)), field_(sch.field()) {
    LinearMScheme fib = fibered(sch, prefix_);
    if (k < 1 || k > fib.m) throw DepthExhausted("constructible level k=" + std::to_string(k) + " exceeds depth " + std::to_string(fib.m));
    std::uint64_t maps = linmap_count(fib.field(), k, 1);
    const auto& blocks = fib.level(k).blocks;
    // Deterministic order: block order, then map order; identical images kept once.
    std::set<std::vector<Code>> seen;
    for (size_t b = 0; b < blocks.size(); ++b)
        for (std::uint64_t i = 0; i < maps; ++i) {
            LinMap tau = linmap_at(fib.field(), k, 1, i);
            PointSet img = image_of_block(fib, tau, static_cast<int>(b));
            if (!seen.insert(img.members).second) continue;
            entries_.push_back({CertEntry{tau, static_cast<int>(b), prefix_}, std::move(img)});
        }
}

std::optional<ConstructibleSet> ConstructibleIndex::decide(const PointSet& t) const {
    if (!(t.field == field_)) throw FieldMismatch("target set lives over a different field");
    ConstructibleSet out;
    out.k = k_;
    out.prefix = prefix_;
    out.points = PointSet(field_, {});
    std::vector<char> covered(field_.size(), 0);
    size_t n_covered = 0;
    for (const auto& [entry, img] : entries_) {
        if (!is_subset(img, t)) continue;
        bool adds = false;
        for (Code p : img.members)
            if (!covered[p]) {
                covered[p] = 1;
                ++n_covered;
                adds = true;
            }
        if (adds) out.certificate.push_back(entry);
    }
    if (n_covered != t.size()) return std::nullopt;
    out.points = t;
    return out;
}

std::optional<ConstructibleSet> decide_constructible(const LinearMScheme& sch, const PointSet& t, int k,
                                                     const Tuple& prefix) {
    return ConstructibleIndex(sch, k, prefix).decide(t);
}

BlockSet intersect_with_S(const LinearMScheme& sch, const ConstructibleSet& c) {
    LinearMScheme fib = fibered(sch, common_prefix(c));
    PointSet in_s = set_intersection(c.points, fib.inst.S);
    return to_block_set(fib, 1, in_s.members);
}

BooleanOpsResult boolean_ops(const LinearMScheme& sch, const ConstructibleSet& a, const ConstructibleSet& b) {
    const Tuple& pa = common_prefix(a);
    const Tuple& pb = common_prefix(b);
    if (pa != pb) throw InputError("boolean_ops needs both sets constructible in the same fibered scheme");
    LinearMScheme fib = fibered(sch, pa);
    if (a.k + b.k > fib.m)
        throw DepthExhausted("k+k'<=m fails: " + std::to_string(a.k) + "+" + std::to_string(b.k) + " > " + std::to_string(fib.m));
    BooleanOpsResult r;
    r.intersection.k = r.difference.k = a.k;
    r.intersection.prefix = r.difference.prefix = pa;

    std::vector<PointSet> b_images;
    for (const auto& e : b.certificate) b_images.push_back(image_of_block(fib, e.tau, e.block));

    for (const auto& ea : a.certificate) {
        const auto& members = block_members(fib, {a.k, ea.block});
        // B'' = {x in B : tau(x) in tau'(B')}, accumulated over the entries of b.
        std::vector<char> in_any(members.size(), 0);
        for (const auto& img : b_images) {
            std::vector<Code> hit;
            for (size_t i = 0; i < members.size(); ++i)
                if (img.contains(lin_apply_code(fib.field(), ea.tau, members[i]))) {
                    hit.push_back(members[i]);
                    in_any[i] = 1;
                }
            for (int blk : to_block_set(fib, a.k, hit).ids) r.intersection.certificate.push_back({ea.tau, blk, pa});
        }
        std::vector<Code> rest;
        for (size_t i = 0; i < members.size(); ++i)
            if (!in_any[i]) rest.push_back(members[i]);
        for (int blk : to_block_set(fib, a.k, rest).ids) r.difference.certificate.push_back({ea.tau, blk, pa});
    }
    r.intersection.points = recompute(sch, r.intersection);
    r.difference.points = recompute(sch, r.difference);
    if (!(r.intersection.points == set_intersection(a.points, b.points)) ||
        !(r.difference.points == set_difference(a.points, b.points)))
        throw AssertFailed("boolean_ops certificates do not reproduce the raw set operations");
    return r;
}

ConstructibleSet extend_subspace(const LinearMScheme& sch, const ConstructibleSet& w, const PointSet& w_prime, int t) {
    const FieldSpec& f = sch.field();
    const Tuple& p = common_prefix(w);
    if (!is_subset(w.points, w_prime)) throw PreconditionUnmet("W⊆W'");
    int dim_w = span_dim(f, w.points.members);
    int dim_wp = span_dim(f, w_prime.members);
    if (subgroup_generated(w_prime).size() != w_prime.size()) throw PreconditionUnmet("W' is a subspace");
    int d = dim_wp - dim_w;
    if (d == 0) return w;
    int depth = sch.m - p.arity();
    if (w.k + 2 * d * t > depth)
        throw PreconditionUnmet("k+2dt<=m", std::to_string(w.k) + "+2*" + std::to_string(d) + "*" + std::to_string(t) +
                                                 " > " + std::to_string(depth));
    if (t < 1) throw PreconditionUnmet("W'⊆W+t(F·S)", "t must be positive when W' is larger than W");

    // Layered representations of t(F·S): rep[z] lists (c_j, s_j), j = 1..t.
    const auto& S = sch.inst.S.members;
    std::map<Code, std::vector<std::pair<int, Code>>> rep;
    rep[0] = {};
    for (int layer = 0; layer < t; ++layer) {
        std::map<Code, std::vector<std::pair<int, Code>>> next;
        for (const auto& [z, r] : rep)
            for (Code s : S)
                for (int c = 0; c < f.ell(); ++c) {
                    Code y = f.add(z, f.scale(c, s));
                    if (next.count(y)) continue;
                    auto rr = r;
                    rr.emplace_back(c, s);
                    next.emplace(y, std::move(rr));
                }
        rep = std::move(next);
    }
    std::vector<Code> span = w.points.members;
    std::vector<std::vector<std::pair<int, Code>>> chosen;
    int have = dim_w;
    for (const auto& [z, r] : rep) {
        if (static_cast<int>(chosen.size()) == d) break;
        if (!w_prime.contains(z)) continue;
        span.push_back(z);
        int now = span_dim(f, span);
        if (now > have) {
            have = now;
            chosen.push_back(r);
        } else {
            span.pop_back();
        }
    }
    if (static_cast<int>(chosen.size()) < d) throw PreconditionUnmet("W'⊆W+t(F·S)");

    Tuple ext = p;
    for (const auto& r : chosen)
        for (const auto& [c, s] : r) ext.pts.push_back(s);
    LinearMScheme fib = fibered(sch, ext);
    int k2 = w.k + d * t;
    Tuple tail;
    for (size_t i = p.pts.size(); i < ext.pts.size(); ++i) tail.pts.push_back(ext.pts[i]);
    Code tail_code = encode_tuple(f, tail);

    ConstructibleSet out;
    out.k = k2;
    out.prefix = ext;
    LinearMScheme base = fibered(sch, p);
    std::uint64_t n_shifts = 1;
    for (int i = 0; i < d; ++i) n_shifts *= static_cast<std::uint64_t>(f.ell());
    for (const auto& e : w.certificate) {
        std::vector<Code> lifted;
        for (Code y : block_members(base, {w.k, e.block})) lifted.push_back(concat_codes(f, y, tail_code, d * t));
        std::sort(lifted.begin(), lifted.end());
        BlockSet blocks = to_block_set(fib, k2, lifted);
        for (std::uint64_t sidx = 0; sidx < n_shifts; ++sidx) {
            std::vector<int> s(d);
            std::uint64_t v = sidx;
            for (int i = d - 1; i >= 0; --i) {
                s[i] = static_cast<int>(v % f.ell());
                v /= f.ell();
            }
            LinMap tau{k2, 1, std::vector<int>(k2, 0)};
            for (int i = 0; i < w.k; ++i) tau.at(i, 0) = e.tau.at(i, 0);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < t; ++j) tau.at(w.k + i * t + j, 0) = f.reduce(static_cast<long long>(s[i]) * chosen[i][j].first);
            for (int blk : blocks.ids) out.certificate.push_back({tau, blk, ext});
        }
    }
    out.points = recompute(sch, out);
    if (!(out.points == w_prime)) throw AssertFailed("extended certificate does not reproduce W'");
    return out;
}

}  // namespace lms
