#include "lms/scheme_core.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_map>

namespace lms {

SchemeInstance::SchemeInstance(PointSet s) : field(s.field), S(std::move(s)) {
    if (S.empty()) throw InputError("scheme point set S must be nonempty");
    span_dim = lms::span_dim(field, S.members);
}

std::vector<Code> s_tuples(const SchemeInstance& inst, int k) {
    inst.field.tuple_space(k);
    std::vector<Code> out{0};
    for (int i = 0; i < k; ++i) {
        std::vector<Code> next;
        next.reserve(out.size() * inst.n());
        for (Code prefix : out)
            for (Code p : inst.S.members) next.push_back(prefix * inst.field.size() + p);
        out = std::move(next);
    }
    return out;
}

TuplePartition make_partition(int k, const std::vector<std::int64_t>& labels) {
    TuplePartition p;
    p.k = k;
    p.block_of.assign(labels.size(), -1);
    std::unordered_map<std::int64_t, std::int32_t> renumber;
    for (Code c = 0; c < labels.size(); ++c) {
        if (labels[c] < 0) continue;
        auto [it, fresh] = renumber.emplace(labels[c], static_cast<std::int32_t>(p.blocks.size()));
        if (fresh) p.blocks.emplace_back();
        p.block_of[c] = it->second;
        p.blocks[it->second].push_back(c);
    }
    return p;
}

TuplePartition finest_partition(const SchemeInstance& inst, int k) {
    std::vector<std::int64_t> labels(inst.field.tuple_space(k), -1);
    for (Code c : s_tuples(inst, k)) labels[c] = static_cast<std::int64_t>(c);
    return make_partition(k, labels);
}

TuplePartition coarsest_partition(const SchemeInstance& inst, int k) {
    std::vector<std::int64_t> labels(inst.field.tuple_space(k), -1);
    for (Code c : s_tuples(inst, k)) labels[c] = 0;
    return make_partition(k, labels);
}

bool refines(const TuplePartition& fine, const TuplePartition& coarse) {
    for (const auto& b : fine.blocks) {
        std::int32_t target = coarse.block(b.front());
        for (Code c : b)
            if (coarse.block(c) != target || target < 0) return false;
    }
    return true;
}

void check_structure(const LinearMScheme& sch) {
    if (sch.m < 1) throw InputError("scheme depth m must be >= 1");
    if (static_cast<int>(sch.levels.size()) != sch.m)
        throw InputError("scheme has " + std::to_string(sch.levels.size()) + " levels but m=" + std::to_string(sch.m));
    for (int k = 1; k <= sch.m; ++k) {
        const TuplePartition& p = sch.level(k);
        if (p.k != k) throw InputError("level " + std::to_string(k) + " is labeled arity " + std::to_string(p.k));
        std::uint64_t space = sch.field().tuple_space(k);
        if (p.block_of.size() != space) throw InputError("level " + std::to_string(k) + " block_of has wrong length");
        std::vector<char> in_s(space, 0);
        for (Code c : s_tuples(sch.inst, k)) in_s[c] = 1;
        for (Code c = 0; c < space; ++c) {
            bool labeled = p.block_of[c] >= 0;
            if (labeled != static_cast<bool>(in_s[c]))
                throw InputError("level " + std::to_string(k) + " does not partition exactly S^k (tuple " +
                                 std::to_string(c) + ")");
        }
        for (size_t b = 0; b < p.blocks.size(); ++b) {
            if (p.blocks[b].empty()) throw InputError("empty block");
            for (Code c : p.blocks[b])
                if (p.block_of[c] != static_cast<std::int32_t>(b)) throw InputError("block table inconsistent");
        }
    }
}

LinearMScheme finest_scheme(const SchemeInstance& inst, int m) {
    LinearMScheme s;
    s.inst = inst;
    s.m = m;
    for (int k = 1; k <= m; ++k) s.levels.push_back(finest_partition(inst, k));
    return s;
}

const std::vector<Code>& block_members(const LinearMScheme& sch, BlockRef b) {
    if (b.level < 1 || b.level > sch.m) throw IndexOutOfRange("block level " + std::to_string(b.level) + " outside [1,m]");
    const auto& blocks = sch.level(b.level).blocks;
    if (b.block < 0 || static_cast<size_t>(b.block) >= blocks.size())
        throw IndexOutOfRange("block id " + std::to_string(b.block) + " outside level " + std::to_string(b.level));
    return blocks[b.block];
}

namespace {

struct PairChecker {
    const LinearMScheme& sch;
    int k, k2;
    // Decoded points of every block member, block by block.
    std::vector<std::vector<Code>> points;

    PairChecker(const LinearMScheme& s, int k_, int k2_) : sch(s), k(k_), k2(k2_) {
        const auto& blocks = sch.level(k).blocks;
        points.resize(blocks.size());
        for (size_t b = 0; b < blocks.size(); ++b)
            for (Code c : blocks[b]) {
                Tuple t = decode_tuple(sch.field(), c, k);
                points[b].insert(points[b].end(), t.pts.begin(), t.pts.end());
            }
    }

    // Returns false once the violation budget is exhausted.
    bool check(const LinMap& tau, ValidationReport& rep, size_t max_violations) {
        const FieldSpec& f = sch.field();
        const auto& blocks = sch.level(k).blocks;
        const TuplePartition& dst = sch.level(k2);
        std::vector<Code> imgs;
        for (size_t b = 0; b < blocks.size(); ++b) {
            const auto& members = blocks[b];
            imgs.resize(members.size());
            for (size_t i = 0; i < members.size(); ++i) imgs[i] = lin_apply_points(f, tau, &points[b][i * k]);
            size_t hit = members.size();
            for (size_t i = 0; i < members.size(); ++i)
                if (dst.block(imgs[i]) >= 0) {
                    hit = i;
                    break;
                }
            if (hit == members.size()) continue;
            std::int32_t b2 = dst.block(imgs[hit]);
            auto add = [&](Violation v) {
                v.k = k;
                v.k2 = k2;
                v.tau = tau;
                v.block = static_cast<int>(b);
                v.block2 = b2;
                rep.violations.push_back(std::move(v));
                return max_violations == 0 || rep.violations.size() < max_violations;
            };
            bool contained = true;
            for (size_t i = 0; i < members.size(); ++i)
                if (dst.block(imgs[i]) != b2) {
                    contained = false;
                    if (!add({"P1", 0, 0, {}, 0, 0, {members[hit], members[i]},
                              "image meets B' but also leaves it"}))
                        return false;
                    break;
                }
            if (!contained) continue;
            std::map<Code, std::uint64_t> mult;
            for (Code y : imgs) ++mult[y];
            const auto& target = dst.blocks[b2];
            if (mult.size() != target.size()) {
                Code missing = 0;
                for (Code y : target)
                    if (!mult.count(y)) {
                        missing = y;
                        break;
                    }
                if (!add({"P1", 0, 0, {}, 0, 0, {members[hit], missing}, "image is a proper subset of B'"}))
                    return false;
                continue;
            }
            std::uint64_t first = mult.begin()->second;
            for (const auto& [y, cnt] : mult)
                if (cnt != first) {
                    if (!add({"P2", 0, 0, {}, 0, 0, {mult.begin()->first, y},
                              "fiber sizes " + std::to_string(first) + " and " + std::to_string(cnt)}))
                        return false;
                    break;
                }
        }
        return true;
    }
};

}  // namespace

ValidationReport validate_axioms(const LinearMScheme& sch, const ValidationOptions& opts) {
    check_structure(sch);
    ValidationReport rep;
    const FieldSpec& f = sch.field();
    std::mt19937_64 rng(opts.seed);
    for (int k = 1; k <= sch.m; ++k)
        for (int k2 = 1; k2 <= sch.m; ++k2) {
            PairChecker checker(sch, k, k2);
            PairCoverage cov{k, k2, 0, 0};
            std::uint64_t total = 0;
            bool over_cap = false;
            try {
                total = linmap_count(f, k, k2);
            } catch (const CapExceeded&) {
                if (opts.sample_maps == 0) throw;
                over_cap = true;
            }
            cov.maps_total = total;
            bool sample = over_cap || (opts.sample_maps > 0 && total > opts.sample_maps);
            bool keep_going = true;
            if (!sample) {
                for (std::uint64_t i = 0; i < total && keep_going; ++i) {
                    keep_going = checker.check(linmap_at(f, k, k2, i), rep, opts.max_violations);
                    ++cov.maps_checked;
                }
            } else {
                rep.partial = true;
                std::uint64_t coeffs = static_cast<std::uint64_t>(k) * k2;
                std::uniform_int_distribution<int> digit(0, f.ell() - 1);
                for (std::uint64_t s = 0; s < opts.sample_maps && keep_going; ++s) {
                    LinMap tau{k, k2, std::vector<int>(coeffs)};
                    for (auto& c : tau.coeffs) c = digit(rng);
                    keep_going = checker.check(tau, rep, opts.max_violations);
                    ++cov.maps_checked;
                }
            }
            rep.coverage.push_back(cov);
            if (!keep_going) {
                rep.truncated = true;
                return rep;
            }
        }
    return rep;
}

RelationProfile linear_relation_profile(const LinearMScheme& sch, BlockRef b) {
    const auto& members = block_members(sch, b);
    RelationProfile prof;
    prof.basis = relation_space(sch.field(), decode_tuple(sch.field(), members.front(), b.level));
    for (Code c : members) {
        auto r = relation_space(sch.field(), decode_tuple(sch.field(), c, b.level));
        if (r != prof.basis) {
            prof.constant = false;
            prof.witnesses = {members.front(), c};
            break;
        }
    }
    return prof;
}

BlockSet block_union(const BlockSet& a, const BlockSet& b) {
    if (a.k != b.k) throw ArityMismatch("block sets at different levels");
    BlockSet r{a.k, {}};
    std::set_union(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(r.ids));
    return r;
}

BlockSet block_intersect(const BlockSet& a, const BlockSet& b) {
    if (a.k != b.k) throw ArityMismatch("block sets at different levels");
    BlockSet r{a.k, {}};
    std::set_intersection(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(r.ids));
    return r;
}

BlockSet all_blocks(const LinearMScheme& sch, int k) {
    BlockSet r{k, {}};
    for (size_t i = 0; i < sch.level(k).num_blocks(); ++i) r.ids.push_back(static_cast<int>(i));
    return r;
}

BlockSet block_complement(const LinearMScheme& sch, const BlockSet& a) {
    BlockSet all = all_blocks(sch, a.k);
    BlockSet r{a.k, {}};
    std::set_difference(all.ids.begin(), all.ids.end(), a.ids.begin(), a.ids.end(), std::back_inserter(r.ids));
    return r;
}

BlockSet to_block_set(const LinearMScheme& sch, int k, const std::vector<Code>& tuples) {
    const TuplePartition& p = sch.level(k);
    std::map<int, size_t> hits;
    for (Code c : tuples) {
        std::int32_t b = p.block(c);
        if (b < 0) throw NotBlockUnion("tuple " + std::to_string(c) + " is not in S^" + std::to_string(k));
        ++hits[b];
    }
    BlockSet r{k, {}};
    for (const auto& [b, cnt] : hits) {
        if (cnt != p.blocks[b].size())
            throw NotBlockUnion("set meets block " + std::to_string(b) + " of level " + std::to_string(k) +
                                " in " + std::to_string(cnt) + " of " + std::to_string(p.blocks[b].size()) +
                                " tuples");
        r.ids.push_back(b);
    }
    return r;
}

std::vector<Code> tuples_of(const LinearMScheme& sch, const BlockSet& s) {
    std::vector<Code> out;
    for (int b : s.ids) {
        const auto& members = block_members(sch, {s.k, b});
        out.insert(out.end(), members.begin(), members.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

BlockSet quantifier_project(const LinearMScheme& sch, const BlockSet& bset, int k, Quantifier q) {
    int K = bset.k;
    int k2 = K - k;
    if (k < 1 || k2 < 1 || K > sch.m) throw PreconditionUnmet("k+k'<=m", "levels " + std::to_string(k) + "+" + std::to_string(k2));
    std::vector<char> in(sch.field().tuple_space(K), 0);
    for (Code c : tuples_of(sch, bset)) in[c] = 1;
    std::vector<Code> ys = s_tuples(sch.inst, k2);
    std::vector<Code> out;
    for (Code x : s_tuples(sch.inst, k)) {
        std::uint64_t count = 0;
        for (Code y : ys)
            if (in[concat_codes(sch.field(), x, y, k2)]) ++count;
        bool keep = false;
        switch (q.kind) {
            case Quantifier::Kind::Exists: keep = count > 0; break;
            case Quantifier::Kind::Forall: keep = count == ys.size(); break;
            case Quantifier::Kind::Exactly: keep = count == static_cast<std::uint64_t>(q.t); break;
        }
        if (keep) out.push_back(x);
    }
    return to_block_set(sch, k, out);
}

BlockSet image_block(const LinearMScheme& sch, const LinMap& tau, const BlockSet& bset) {
    if (tau.src_arity != bset.k) throw ArityMismatch("image_block: map source arity differs from block level");
    if (tau.dst_arity < 1 || tau.dst_arity > sch.m) throw PreconditionUnmet("k'<=m");
    const TuplePartition& dst = sch.level(tau.dst_arity);
    std::vector<Code> out;
    for (Code c : tuples_of(sch, bset)) {
        Code y = lin_apply_code(sch.field(), tau, c);
        if (dst.block(y) >= 0) out.push_back(y);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return to_block_set(sch, tau.dst_arity, out);
}

BlockSet preimage_block(const LinearMScheme& sch, const LinMap& tau, const BlockSet& bset) {
    if (tau.dst_arity != bset.k) throw ArityMismatch("preimage_block: map target arity differs from block level");
    if (tau.src_arity < 1 || tau.src_arity > sch.m) throw PreconditionUnmet("k<=m");
    const TuplePartition& dst = sch.level(bset.k);
    std::vector<char> in(dst.block_of.size(), 0);
    for (Code c : tuples_of(sch, bset)) in[c] = 1;
    std::vector<Code> out;
    for (Code x : s_tuples(sch.inst, tau.src_arity))
        if (in[lin_apply_code(sch.field(), tau, x)]) out.push_back(x);
    return to_block_set(sch, tau.src_arity, out);
}

LinearMScheme fiber_restrict(const LinearMScheme& sch, const Tuple& x) {
    int t = x.arity();
    if (t >= sch.m)
        throw DepthExhausted("cannot fix " + std::to_string(t) + " points in a depth-" + std::to_string(sch.m) + " scheme");
    if (t < 1) throw InputError("fiber prefix must have at least one point");
    for (Code p : x.pts)
        if (!sch.inst.S.contains(p)) throw InputError("fiber prefix point " + std::to_string(p) + " is not in S");
    const FieldSpec& f = sch.field();
    Code prefix = encode_tuple(f, x);
    LinearMScheme out;
    out.inst = sch.inst;
    out.m = sch.m - t;
    for (int k = 1; k <= out.m; ++k) {
        const TuplePartition& big = sch.level(t + k);
        std::vector<std::int64_t> labels(f.tuple_space(k), -1);
        for (Code y : s_tuples(sch.inst, k)) labels[y] = big.block_of[concat_codes(f, prefix, y, k)];
        out.levels.push_back(make_partition(k, labels));
    }
    return out;
}

LinearMScheme truncate_scheme(const LinearMScheme& sch, int m_prime) {
    if (m_prime < 1 || m_prime > sch.m)
        throw DepthExhausted("cannot truncate a depth-" + std::to_string(sch.m) + " scheme to depth " + std::to_string(m_prime));
    LinearMScheme out;
    out.inst = sch.inst;
    out.m = m_prime;
    out.levels.assign(sch.levels.begin(), sch.levels.begin() + m_prime);
    return out;
}

bool is_discrete(const LinearMScheme& sch, int k) {
    for (const auto& b : sch.level(k).blocks)
        if (b.size() != 1) return false;
    return true;
}

}  // namespace lms
