#include "lms/antisym.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <string_view>
#include <unordered_map>

namespace lms {

bool PartialBijection::is_identity() const {
    if (src != dst) return false;
    for (std::uint32_t i = 0; i < mapping.size(); ++i)
        if (mapping[i] != i) return false;
    return true;
}

PartialBijection inverse(const PartialBijection& a) {
    PartialBijection r;
    r.src = a.dst;
    r.dst = a.src;
    r.mapping.assign(a.mapping.size(), 0);
    for (std::uint32_t i = 0; i < a.mapping.size(); ++i) r.mapping[a.mapping[i]] = i;
    for (auto it = a.word.rbegin(); it != a.word.rend(); ++it) {
        WordStep s = *it;
        std::swap(s.src, s.dst);
        s.dir = s.dir == Direction::Fwd ? Direction::Inv : Direction::Fwd;
        r.word.push_back(std::move(s));
    }
    return r;
}

PartialBijection compose(const PartialBijection& second, const PartialBijection& first) {
    if (first.dst != second.src) throw InputError("compose: blocks do not chain");
    PartialBijection r;
    r.src = first.src;
    r.dst = second.dst;
    r.mapping.resize(first.mapping.size());
    for (size_t i = 0; i < first.mapping.size(); ++i) r.mapping[i] = second.mapping[first.mapping[i]];
    r.word = first.word;
    r.word.insert(r.word.end(), second.word.begin(), second.word.end());
    return r;
}

bool replay(const LinearMScheme& sch, const PartialBijection& p) {
    const FieldSpec& f = sch.field();
    const auto& src = block_members(sch, p.src);
    const auto& dst = block_members(sch, p.dst);
    if (p.word.empty() || src.size() != p.mapping.size() || dst.size() != p.mapping.size()) return false;
    if (p.word.front().src != p.src || p.word.back().dst != p.dst) return false;
    for (size_t i = 0; i < src.size(); ++i) {
        Code cur = src[i];
        BlockRef at = p.src;
        for (const WordStep& s : p.word) {
            if (s.src != at) return false;
            const auto& to = block_members(sch, s.dst);
            if (s.dir == Direction::Fwd) {
                cur = lin_apply_code(f, s.tau, cur);
                if (!std::binary_search(to.begin(), to.end(), cur)) return false;
            } else {
                size_t found = 0;
                Code pre = 0;
                for (Code c : to)
                    if (lin_apply_code(f, s.tau, c) == cur) {
                        ++found;
                        pre = c;
                    }
                if (found != 1) return false;
                cur = pre;
            }
            at = s.dst;
        }
        if (dst[p.mapping[i]] != cur) return false;
    }
    return true;
}

namespace {

std::string map_key(BlockRef src, BlockRef dst, const std::vector<std::uint32_t>& mapping) {
    std::string key;
    key.reserve(16 + 4 * mapping.size());
    auto put = [&](std::uint32_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(static_cast<std::uint32_t>(src.level));
    put(static_cast<std::uint32_t>(src.block));
    put(static_cast<std::uint32_t>(dst.level));
    put(static_cast<std::uint32_t>(dst.block));
    for (auto v : mapping) put(v);
    return key;
}

}  // namespace

namespace {

// Stops after `limit` maps, or at the first nontrivial self-map when
// `stop_at_loop` is set; the search never looks past either point.
std::vector<PartialBijection> collect_generators(const LinearMScheme& sch, std::uint64_t limit, bool stop_at_loop) {
    const FieldSpec& f = sch.field();
    std::vector<PartialBijection> out;
    std::unordered_map<std::string, size_t> seen;
    for (int k = 1; k <= sch.m; ++k) {
        const auto& blocks = sch.level(k).blocks;
        std::vector<std::vector<Code>> points(blocks.size());
        for (size_t b = 0; b < blocks.size(); ++b)
            for (Code c : blocks[b]) {
                Tuple t = decode_tuple(f, c, k);
                points[b].insert(points[b].end(), t.pts.begin(), t.pts.end());
            }
        for (int k2 = 1; k2 <= sch.m; ++k2) {
            const TuplePartition& dst = sch.level(k2);
            std::uint64_t total = linmap_count(f, k, k2);
            std::vector<Code> imgs;
            for (std::uint64_t idx = 0; idx < total; ++idx) {
                LinMap tau = linmap_at(f, k, k2, idx);
                for (size_t b = 0; b < blocks.size(); ++b) {
                    const auto& members = blocks[b];
                    imgs.resize(members.size());
                    std::int32_t b2 = -1;
                    bool ok = true;
                    for (size_t i = 0; i < members.size() && ok; ++i) {
                        imgs[i] = lin_apply_points(f, tau, &points[b][i * k]);
                        std::int32_t bi = dst.block(imgs[i]);
                        if (bi < 0 || (b2 >= 0 && bi != b2)) ok = false;
                        b2 = bi;
                    }
                    if (!ok || dst.blocks[b2].size() != members.size()) continue;
                    const auto& target = dst.blocks[b2];
                    std::vector<std::uint32_t> mapping(members.size());
                    std::vector<char> used(members.size(), 0);
                    for (size_t i = 0; i < members.size() && ok; ++i) {
                        auto pos = static_cast<std::uint32_t>(std::lower_bound(target.begin(), target.end(), imgs[i]) -
                                                              target.begin());
                        if (used[pos]) ok = false;
                        used[pos] = 1;
                        mapping[i] = pos;
                    }
                    if (!ok) continue;
                    BlockRef s{k, static_cast<int>(b)}, d{k2, b2};
                    std::string key = map_key(s, d, mapping);
                    if (seen.count(key)) continue;
                    seen.emplace(std::move(key), out.size());
                    PartialBijection pb{s, d, std::move(mapping), {WordStep{tau, Direction::Fwd, s, d}}};
                    bool loop = s == d && !pb.is_identity();
                    out.push_back(std::move(pb));
                    if (out.size() >= limit || (stop_at_loop && loop)) return out;
                }
            }
        }
    }
    return out;
}

}  // namespace

std::vector<PartialBijection> generator_maps(const LinearMScheme& sch) {
    return collect_generators(sch, std::numeric_limits<std::uint64_t>::max(), false);
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Antisymmetric: return "Antisymmetric";
        case Outcome::Witness: return "Witness";
        case Outcome::Inconclusive: return "Inconclusive";
    }
    return "?";
}

AntisymVerdict strong_antisym_check(const LinearMScheme& sch, std::uint64_t budget) {
    AntisymVerdict verdict;
    verdict.budget = budget;
    std::vector<PartialBijection> gens =
        collect_generators(sch, budget == std::numeric_limits<std::uint64_t>::max() ? budget : budget + 1, true);
    verdict.generators = gens.size();

    // Steps are generators and their inverses, in generator order.
    std::vector<PartialBijection> steps;
    steps.reserve(2 * gens.size());
    for (const auto& g : gens) {
        steps.push_back(g);
        steps.push_back(inverse(g));
    }
    std::map<BlockRef, std::vector<size_t>> steps_from;
    for (size_t i = 0; i < steps.size(); ++i) steps_from[steps[i].src].push_back(i);

    struct Node {
        BlockRef src, dst;
        std::vector<std::uint32_t> mapping;
        std::int64_t parent;
        size_t step;
    };
    std::vector<Node> nodes;
    std::unordered_map<std::string, size_t> seen;

    auto word_of = [&](size_t idx) {
        std::vector<WordStep> rev;
        for (std::int64_t cur = static_cast<std::int64_t>(idx); cur >= 0; cur = nodes[cur].parent)
            rev.push_back(steps[nodes[cur].step].word.front());
        return std::vector<WordStep>(rev.rbegin(), rev.rend());
    };
    auto nontrivial_loop = [](const Node& n) {
        if (n.src != n.dst) return false;
        for (std::uint32_t i = 0; i < n.mapping.size(); ++i)
            if (n.mapping[i] != i) return true;
        return false;
    };
    // Returns 1 on witness, -1 when the budget is hit, 0 otherwise.
    auto insert = [&](Node n) -> int {
        std::string key = map_key(n.src, n.dst, n.mapping);
        if (seen.count(key)) return 0;
        if (nodes.size() >= budget) return -1;
        seen.emplace(std::move(key), nodes.size());
        nodes.push_back(std::move(n));
        return nontrivial_loop(nodes.back()) ? 1 : 0;
    };
    auto finish_witness = [&]() {
        size_t idx = nodes.size() - 1;
        PartialBijection w{nodes[idx].src, nodes[idx].dst, nodes[idx].mapping, word_of(idx)};
        verdict.outcome = Outcome::Witness;
        verdict.witness = std::move(w);
        verdict.maps_explored = nodes.size();
        return verdict;
    };

    for (size_t i = 0; i < steps.size(); ++i) {
        int r = insert(Node{steps[i].src, steps[i].dst, steps[i].mapping, -1, i});
        if (r == 1) return finish_witness();
        if (r == -1) {
            verdict.outcome = Outcome::Inconclusive;
            verdict.maps_explored = nodes.size();
            return verdict;
        }
    }
    for (size_t head = 0; head < nodes.size(); ++head) {
        auto it = steps_from.find(nodes[head].dst);
        if (it == steps_from.end()) continue;
        for (size_t si : it->second) {
            const PartialBijection& s = steps[si];
            std::vector<std::uint32_t> mapping(nodes[head].mapping.size());
            for (size_t i = 0; i < mapping.size(); ++i) mapping[i] = s.mapping[nodes[head].mapping[i]];
            int r = insert(Node{nodes[head].src, s.dst, std::move(mapping), static_cast<std::int64_t>(head), si});
            if (r == 1) return finish_witness();
            if (r == -1) {
                verdict.outcome = Outcome::Inconclusive;
                verdict.maps_explored = nodes.size();
                return verdict;
            }
        }
    }
    verdict.outcome = Outcome::Antisymmetric;
    verdict.maps_explored = nodes.size();
    return verdict;
}

DepthBoundsReport depth_bounds_check(const LinearMScheme& sch, const AntisymVerdict& verdict) {
    if (verdict.outcome != Outcome::Antisymmetric)
        throw PreconditionUnmet("strongly antisymmetric", std::string("verdict is ") + to_string(verdict.outcome));
    size_t smallest = 0;
    for (const auto& b : sch.level(1).blocks)
        if (b.size() > 1 && (smallest == 0 || b.size() < smallest)) smallest = b.size();
    if (smallest == 0) throw PreconditionUnmet("level 1 has a non-singleton block");
    DepthBoundsReport r;
    r.m = sch.m;
    r.span_dim = sch.inst.span_dim;
    r.block_size = smallest;
    r.dim_bound = sch.m < sch.inst.span_dim;
    r.log_bound = sch.m < 63 && (std::uint64_t{1} << sch.m) <= smallest;
    r.dim_margin = sch.inst.span_dim - sch.m;
    r.log_margin = std::log2(static_cast<double>(smallest)) - sch.m;
    return r;
}

HalvingResult halving_step(const LinearMScheme& sch, const AntisymVerdict& verdict, int block, Code x, Code y) {
    if (verdict.outcome != Outcome::Antisymmetric)
        throw PreconditionUnmet("strongly antisymmetric", std::string("verdict is ") + to_string(verdict.outcome));
    if (sch.m < 2) throw PreconditionUnmet("m>=2");
    const auto& members = block_members(sch, {1, block});
    if (members.size() < 2) throw PreconditionUnmet("|B|>=2");
    if (x == y || !std::binary_search(members.begin(), members.end(), x) ||
        !std::binary_search(members.begin(), members.end(), y))
        throw InputError("x and y must be distinct members of B");
    LinearMScheme fib = fiber_restrict(sch, Tuple{{x}});
    HalvingResult r;
    r.block = fib.level(1).block(y);
    r.size = fib.level(1).blocks[r.block].size();
    r.parent_size = members.size();
    if (!(r.size > 1 && 2 * r.size <= r.parent_size))
        throw AssertFailed("halving claim 1<|B'|<=|B|/2 fails: |B'|=" + std::to_string(r.size) +
                           ", |B|=" + std::to_string(r.parent_size));
    return r;
}

}  // namespace lms
