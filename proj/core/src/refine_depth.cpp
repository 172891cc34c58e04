#include "refine_util.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lms {

using detail::concat;
using detail::fiber_at;
using detail::rat;

namespace {

// min{s, n/s}
Rational balance(size_t s, size_t n) {
    Rational a = rat(s), b = Rational(BigInt(n), BigInt(s));
    return a < b ? a : b;
}

}  // namespace

KeyLemmaResult key_lemma_search(const LinearMScheme& sch, int b, const KeyLemmaOptions& opts) {
    const FieldSpec& f = sch.field();
    PointSet B(f, block_members(sch, {1, b}));
    if (B.size() < 2) throw PreconditionUnmet("|B|>1", "block " + std::to_string(b) + " is a singleton");
    if (opts.require_antisymmetric) {
        AntisymVerdict v = strong_antisym_check(sch, opts.antisym_budget);
        if (v.outcome != Outcome::Antisymmetric)
            throw PreconditionUnmet("strongly antisymmetric", std::string("verdict is ") + to_string(v.outcome));
    }
    KeyLemmaResult res;
    {
        KeyLemmaLevel base;
        base.best = 1;
        base.outcome = detail::make_outcome(sch, "key_lemma_trivial", Tuple{}, B.members, B.size());
        res.levels.push_back(base);
        res.best = base.outcome;
    }
    Rational best_overall = 1;
    const int max_len = std::min(sch.m - 1, opts.max_prefix_len);
    std::uint64_t visited = 0;
    for (int len = 1; len <= max_len && !res.capped; ++len) {
        KeyLemmaLevel level;
        level.prefix_len = len;
        level.best = 0;
        // Prefixes in B^len, lexicographic in point order.
        std::vector<size_t> idx(len, 0);
        while (true) {
            if (visited >= opts.prefix_cap) {
                res.capped = true;
                break;
            }
            ++visited;
            ++level.prefixes;
            Tuple x;
            for (size_t j : idx) x.pts.push_back(B.members[j]);
            LinearMScheme fib = fiber_at(sch, x, 1);
            std::vector<const std::vector<Code>*> inside;
            std::vector<size_t> sizes;
            for (const auto& blk : fib.level(1).blocks)
                if (B.contains(blk.front())) {
                    inside.push_back(&blk);
                    sizes.push_back(blk.size());
                }
            // Reachable sums, best balance first; ties go to the smaller size.
            std::optional<std::vector<size_t>> pick;
            Rational best_here = 0;
            for (size_t s = 1; s <= B.size(); ++s) {
                Rational v = balance(s, B.size());
                if (v <= best_here) continue;
                if (auto p = detail::subset_with_sum(sizes, rat(s), rat(s))) {
                    best_here = v;
                    pick = std::move(p);
                }
            }
            if (pick && best_here > level.best) {
                std::vector<Code> pts;
                for (size_t j : *pick) pts.insert(pts.end(), inside[j]->begin(), inside[j]->end());
                level.best = best_here;
                level.outcome = detail::make_outcome(sch, "key_lemma_split", x, std::move(pts), B.size());
            }
            int pos = len - 1;
            while (pos >= 0 && ++idx[pos] == B.size()) idx[pos--] = 0;
            if (pos < 0) break;
        }
        if (level.outcome && level.best > best_overall) {
            best_overall = level.best;
            res.best = level.outcome;
        }
        res.levels.push_back(std::move(level));
    }
    return res;
}

DepthMeasure depth_measure(const LinearMScheme& sch, int b, const AntisymVerdict& verdict) {
    const FieldSpec& f = sch.field();
    if (verdict.outcome != Outcome::Antisymmetric)
        throw PreconditionUnmet("strongly antisymmetric", std::string("verdict is ") + to_string(verdict.outcome));
    PointSet T(f, block_members(sch, {1, b}));
    if (T.size() < 2) throw PreconditionUnmet("|B|>1", "block " + std::to_string(b) + " is a singleton");
    DepthMeasure out;
    out.block_size = T.size();
    out.span_dim = sch.inst.span_dim;
    Tuple prefix;
    while (T.size() > 1) {
        int depth = sch.m - prefix.arity();
        if (depth < 2) break;
        // Greedy: the x whose fiber leaves the smallest largest block inside T \ {x}.
        std::optional<std::pair<size_t, Code>> choice;
        std::vector<Code> choice_block;
        for (Code x : T.members) {
            LinearMScheme fib = fiber_at(sch, concat(prefix, Tuple{{x}}), 1);
            const std::vector<Code>* largest = nullptr;
            for (const auto& blk : fib.level(1).blocks)
                if (blk.front() != x && T.contains(blk.front()) && (!largest || blk.size() > largest->size()))
                    largest = &blk;
            if (!largest) continue;
            if (!choice || largest->size() < choice->first) {
                choice = std::make_pair(largest->size(), x);
                choice_block = *largest;
            }
        }
        if (!choice) break;
        DepthStep step{choice->second, T.size(), choice->first, depth};
        if (2 * step.size_after > step.size_before)
            throw AssertFailed("halving claim |B'|<=|B|/2 fails: |B'|=" + std::to_string(step.size_after) +
                               ", |B|=" + std::to_string(step.size_before));
        if (depth >= 2 && step.size_after < 2)
            throw AssertFailed("halving claim 1<|B'| fails after fixing point " + std::to_string(step.point));
        out.steps.push_back(step);
        prefix.pts.push_back(choice->second);
        T = PointSet(f, std::move(choice_block));
        ++out.count;
    }
    out.completed = T.size() == 1;
    if (out.count == 0)
        throw DepthMeasureExhausted("no fixing fits in depth " + std::to_string(sch.m), out);
    out.log_bound = ipow(BigInt(2), static_cast<unsigned>(out.count)) <= out.block_size;
    out.dim_bound = out.count < out.span_dim;
    if (!out.log_bound) throw AssertFailed("fixings exceed log2|B|");
    if (!out.dim_bound) throw AssertFailed("fixings reach dim<S>");
    return out;
}

}  // namespace lms
