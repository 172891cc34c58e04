#include "refine_util.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace lms {

using detail::fiber_at;
using detail::rat;
using detail::require;

std::uint64_t nu_plus(const PointSet& a_prime, const PointSet& b, Code z) {
    if (!(a_prime.field == b.field)) throw FieldMismatch("nu_plus operands live over different fields");
    const FieldSpec& f = b.field;
    std::uint64_t n = 0;
    for (Code y : b.members)
        if (a_prime.contains(f.sub(z, y))) ++n;
    return n;
}

PointSet sigma_image(const FieldSpec& f, const std::vector<Code>& tuples, int k) {
    std::vector<Code> out;
    out.reserve(tuples.size());
    for (Code c : tuples) out.push_back(lin_apply_code(f, summation(k), c));
    return PointSet(f, std::move(out));
}

bool sigma_injective(const FieldSpec& f, const std::vector<Code>& tuples, int k) {
    return sigma_image(f, tuples, k).size() == tuples.size();
}

namespace {

bool inside_power(const FieldSpec& f, const std::vector<Code>& tuples, int k, const PointSet& b) {
    for (Code c : tuples)
        for (Code p : decode_tuple(f, c, k).pts)
            if (!b.contains(p)) return false;
    return true;
}

// |A|^2 K^(k-1) >= |B|^(2k), i.e. |A| >= |B|^k / K^((k-1)/2)
Inequality size_invariant(size_t a, size_t b, int k, const Rational& K) {
    Rational lhs = rat(a) * rat(a) * rpow(K, static_cast<unsigned>(k - 1));
    Rational rhs = rpow(rat(b), static_cast<unsigned>(2 * k));
    return make_inequality("|A|>=|B|^k/K^((k-1)/2) (squared)", lhs, ">=", rhs);
}

}  // namespace

ShrinkOutcome shrink_weak(const LinearMScheme& sch, int b, BlockRef a, const Rational& K, bool relaxed) {
    const FieldSpec& f = sch.field();
    const int k = a.level;
    TraceStep pre{"shrink_weak", "preconditions", {}, {}, {}};
    require(pre, make_inequality("K>=4", K, ">=", 4), relaxed);
    Inequality depth = make_inequality("m>=2k+2", sch.m, ">=", 2 * k + 2);
    if (!depth.holds && !relaxed) throw DepthExhausted("m>=2k+2 fails: m=" + std::to_string(sch.m) + ", k=" + std::to_string(k));
    pre.check(depth);
    if (sch.m < k + 2) throw DepthExhausted("fibering at k+1 points needs m>=k+2");

    PointSet B(f, block_members(sch, {1, b}));
    const auto& A = block_members(sch, a);
    if (!inside_power(f, A, k, B)) throw PreconditionUnmet("A⊆B^k");
    PointSet Ap = sigma_image(f, A, k);
    PointSet AB = sumset(Ap, B);
    Rational nA = rat(Ap.size()), nB = rat(B.size()), nAB = rat(AB.size());
    pre.size("|B|", B.size());
    pre.size("|A'|", Ap.size());
    pre.size("|A'+B|", AB.size());
    Inequality lower = make_inequality("K|A'|<=|A'+B|", K * nA, "<=", nAB);
    Inequality upper = make_inequality("|A'+B|<=|A'||B|/K", nAB, "<=", nA * nB / K);
    pre.check(lower);
    pre.check(upper);
    if (!lower.holds) throw GateUnmet(lower.label, lower.lhs + " > " + lower.rhs);
    if (!upper.holds) throw GateUnmet(upper.label, upper.lhs + " > " + upper.rhs);

    auto hist = sum_histogram(Ap, B);
    std::uint64_t mass = 0;
    for (const auto& [z, n] : hist) mass += n;
    if (mass != Ap.size() * B.size()) throw AssertFailed("nu+ mass differs from |A'||B|");

    Trace trace{pre};
    std::vector<Code> result;
    Tuple prefix;
    std::string tag;
    auto sqrtK_le = [&](std::uint64_t v) { return ge_sqrt(rat(v), K); };
    auto le_B_over_sqrtK = [&](std::uint64_t v) { return rat(v) * rat(v) * K <= nB * nB; };

    const std::pair<Code, std::uint64_t>* band = nullptr;
    for (const auto& h : hist)
        if (sqrtK_le(h.second) && le_B_over_sqrtK(h.second)) {
            band = &h;
            break;
        }
    if (band) {
        Code z = band->first;
        TraceStep st{"shrink_weak", "middle_sum", {}, {}, {}};
        // x in A and x_{k+1} in B with sigma(x) + x_{k+1} = z
        for (Code c : A) {
            Code w = f.sub(z, lin_apply_code(f, summation(k), c));
            if (B.contains(w)) {
                prefix = decode_tuple(f, c, k);
                prefix.pts.push_back(w);
                break;
            }
        }
        for (Code y : B.members)
            if (Ap.contains(f.sub(z, y))) result.push_back(y);
        if (result.size() != band->second) throw AssertFailed("|T| differs from nu+(z)");
        st.prefix = prefix;
        st.size("z", z);
        st.size("nu+(z)", band->second);
        trace.push_back(std::move(st));
        tag = "middle_sum";
    } else {
        TraceStep st{"shrink_weak", "rare_sums", {}, {}, {}};
        std::set<Code> Z;
        for (const auto& [z, n] : hist)
            if (!sqrtK_le(n)) Z.insert(z);
        st.size("|Z|", Z.size());
        st.check(make_inequality("|Z|^2>=K|A'|^2", rat(Z.size()) * rat(Z.size()), ">=", K * nA * nA));
        std::optional<size_t> common;
        std::uint64_t total = 0;
        for (Code xp : Ap.members) {
            size_t cnt = 0;
            for (Code y : B.members)
                if (Z.count(f.add(xp, y))) ++cnt;
            total += cnt;
            if (common && *common != cnt)
                throw AssertFailed("|Z_x| is not constant over A': " + std::to_string(*common) + " vs " + std::to_string(cnt));
            common = cnt;
        }
        st.size("|Z_x|", *common);
        st.check(make_inequality("sum|Z_x|>=|Z|", rat(total), ">=", rat(Z.size())));
        prefix = decode_tuple(f, A.front(), k);
        prefix.pts.push_back(B.members.front());
        Code xp = lin_apply_code(f, summation(k), A.front());
        for (Code y : B.members)
            if (Z.count(f.add(xp, y))) result.push_back(y);
        st.prefix = prefix;
        trace.push_back(std::move(st));
        tag = "rare_sums";
    }

    ShrinkOutcome out = detail::make_outcome(sch, tag, prefix, result, B.size());
    TraceStep fin{"shrink_weak", "conclusion", prefix, {}, {}};
    fin.size("|B'|", out.result_size);
    fin.conclude(make_inequality("|B'|^2>=K", rat(out.result_size) * rat(out.result_size), ">=", K));
    fin.conclude(make_inequality("(|B|/|B'|)^2>=K", out.ratio() * out.ratio(), ">=", K));
    if (!fin.all_hold()) throw AssertFailed("shrink conclusion min{|B'|,|B|/|B'|}>=sqrt(K) fails");
    trace.push_back(std::move(fin));
    out.trace = std::move(trace);
    return out;
}

bool bijectivity_check(const LinearMScheme& sch, BlockRef a, const AntisymVerdict& verdict) {
    const FieldSpec& f = sch.field();
    const int k = a.level;
    const auto& A = block_members(sch, a);
    if (k == 1) return true;
    if (sch.m < 2 * k) throw PreconditionUnmet("m>=2k", "m=" + std::to_string(sch.m) + ", k=" + std::to_string(k));
    size_t img = sigma_image(f, A, k).size();
    // m > k + log2(|A|/|A'|)  <=>  2^(m-k) |A'| > |A|
    BigInt lhs = ipow(BigInt(2), static_cast<unsigned>(sch.m - k)) * img;
    if (!(lhs > A.size()))
        throw PreconditionUnmet("m>k+log(|A|/|A'|)", "|A|=" + std::to_string(A.size()) + ", |A'|=" + std::to_string(img));
    if (verdict.outcome != Outcome::Antisymmetric)
        throw PreconditionUnmet("strongly antisymmetric", std::string("verdict is ") + to_string(verdict.outcome));
    if (img != A.size()) throw AssertFailed("sigma_k is not injective on A although the preconditions hold");
    return true;
}

double entropy_rate(const PointSet& b) {
    if (b.empty()) throw EmptyReference("entropy rate of an empty set");
    double span = std::log2(static_cast<double>(subgroup_generated(b).size()));
    if (span <= 0) return 1.0;
    return std::log2(static_cast<double>(b.size())) / span;
}

PartialSumsetOutcome partial_sumset_search(const LinearMScheme& sch, int b, const Rational& K, bool relaxed) {
    const FieldSpec& f = sch.field();
    PointSet B(f, block_members(sch, {1, b}));
    Rational nB = rat(B.size());
    double rho = entropy_rate(B);
    PartialSumsetOutcome out;

    TraceStep pre{"partial_sumset", "preconditions", {}, {}, {}};
    pre.size("|B|", B.size());
    pre.size("rho(B)", std::to_string(rho));
    require(pre, make_inequality("K>=4", K, ">=", 4), relaxed);
    require(pre, make_inequality("|B|>=2K^2", nB, ">=", 2 * K * K), relaxed);
    {
        // Real-valued bound; compared in double.
        double bound = 4.0 / rho + std::log2(to_double(K)) + 1.0;
        Inequality q{"m>4/rho(B)+log K+1", std::to_string(sch.m), ">", std::to_string(bound), sch.m > bound};
        require(pre, q, relaxed);
    }
    out.trace.push_back(pre);

    auto stop = [&](const std::string& why, TraceStep st) {
        if (!relaxed) throw AssertFailed(why);
        st.branch = "stopped: " + why;
        out.trace.push_back(std::move(st));
        out.status = "stopped";
        return out;
    };

    int k = 1;
    BlockRef A{1, b};
    while (true) {
        const auto& At = block_members(sch, A);
        PointSet Ap = sigma_image(f, At, k);
        TraceStep st{"partial_sumset", "iteration", {}, {}, {}};
        st.size("k", static_cast<std::uint64_t>(k));
        st.size("|A|", At.size());
        st.size("|A'|", Ap.size());
        Inequality inv_size = size_invariant(At.size(), B.size(), k, K);
        bool inv_sub = inside_power(f, At, k, B);
        bool inv_bij = Ap.size() == At.size();
        st.check(inv_size);
        st.check(Inequality{"A⊆B^k", inv_sub ? "true" : "false", "==", "true", inv_sub});
        st.check(Inequality{"sigma_k bijective on A", std::to_string(Ap.size()), "==", std::to_string(At.size()), inv_bij});
        if (!inv_size.holds || !inv_sub || !inv_bij) return stop("loop invariant fails at k=" + std::to_string(k), st);

        Rational nA = rat(Ap.size());
        Rational nAB = rat(sumset(Ap, B).size());
        st.size("|A'+B|", nAB.str());
        out.k = k;
        out.a = A;
        out.a_prime = Ap.members;
        out.a_size = At.size();

        if (K * nA <= nAB && nAB <= nA * nB / K) {
            st.branch = "case1_gate";
            out.trace.push_back(st);
            ShrinkOutcome so = shrink_weak(sch, b, A, K, relaxed);
            out.trace.insert(out.trace.end(), so.trace.begin(), so.trace.end());
            out.shrink = std::move(so);
            out.status = "case1";
            return out;
        }
        if (nAB < K * nA) {
            st.branch = "case2_small_sumset";
            size_t ss = sumset(Ap, Ap).size();
            out.a_prime_sumset = ss;
            Inequality cert = make_inequality("|A'+A'|<=K^(2k)|A'|", rat(ss), "<=", rpow(K, static_cast<unsigned>(2 * k)) * nA);
            st.conclude(cert);
            out.trace.push_back(st);
            if (!cert.holds) throw AssertFailed("Plunnecke consequence |A'+A'|<=K^(2k)|A'| fails");
            out.status = "case2";
            return out;
        }

        // |A'+B| > |A'||B|/K
        st.branch = "case3_large_sumset";
        if (k + 1 > sch.m) {
            if (!relaxed) throw DepthExhausted("level k+1 exceeds the depth");
            return stop("depth exhausted at k=" + std::to_string(k), st);
        }
        const TuplePartition& next = sch.level(k + 1);
        std::set<int> ids;
        for (Code c : At)
            for (Code y : B.members) ids.insert(next.block(concat_codes(f, c, y, 1)));
        Rational nAt = rat(At.size());
        std::vector<int> small, large;
        size_t t_size = 0;
        for (int id : ids) {
            size_t sz = next.blocks[id].size();
            if (rat(sz) * rat(sz) <= K * nAt * nAt) {
                small.push_back(id);
                t_size += sz;
            } else {
                large.push_back(id);
            }
        }
        st.size("|T|", t_size);
        Tuple x = decode_tuple(f, At.front(), k);
        Code xc = At.front();
        auto fiber_of = [&](const std::vector<int>& blocks) {
            std::vector<Code> ys;
            for (Code y : B.members)
                if (std::find(blocks.begin(), blocks.end(), next.block(concat_codes(f, xc, y, 1))) != blocks.end())
                    ys.push_back(y);
            return ys;
        };

        if (rat(t_size) * rat(t_size) >= K * nAt * nAt) {
            std::vector<int> tp;
            size_t acc = 0;
            for (int id : small) {
                tp.push_back(id);
                acc += next.blocks[id].size();
                if (rat(acc) * rat(acc) >= K * nAt * nAt) break;
            }
            std::vector<Code> ys = fiber_of(tp);
            st.size("|T'|", acc);
            st.conclude(make_inequality("|B'||A|=|T'|", rat(ys.size()) * nAt, "==", rat(acc)));
            st.conclude(make_inequality("|B'|^2>=K", rat(ys.size()) * rat(ys.size()), ">=", K));
            st.conclude(make_inequality("|B'|^2K<=|B|^2", rat(ys.size()) * rat(ys.size()) * K, "<=", nB * nB));
            if (!st.all_hold()) return stop("Case-3 fiber of T' misses its bounds", st);
            out.trace.push_back(st);
            ShrinkOutcome so = detail::make_outcome(sch, "partial_sumset_light_blocks", x, ys, B.size());
            out.shrink = std::move(so);
            out.status = "case1";
            return out;
        }

        std::optional<int> star;
        for (int id : large) {
            size_t img = sigma_image(f, next.blocks[id], k + 1).size();
            if (rat(next.blocks[id].size()) <= 2 * K * rat(img)) {
                star = id;
                break;
            }
        }
        if (!star) return stop("no block A* with |A*|<=2K|sigma(A*)|", st);
        const auto& As = next.blocks[*star];
        st.size("|A*|", As.size());
        if (!sigma_injective(f, As, k + 1)) return stop("sigma_{k+1} not injective on A*", st);
        std::vector<Code> ys = fiber_of({*star});
        st.conclude(make_inequality("|B'||A|=|A*|", rat(ys.size()) * nAt, "==", rat(As.size())));
        st.conclude(make_inequality("|B'|^2>=K", rat(ys.size()) * rat(ys.size()), ">=", K));
        if (!st.all_hold()) return stop("Case-3 fiber of A* misses its bounds", st);
        if (rat(ys.size()) * rat(ys.size()) * K <= nB * nB) {
            st.branch = "case3_heavy_block_shrinks";
            out.trace.push_back(st);
            out.shrink = detail::make_outcome(sch, "partial_sumset_heavy_block", x, ys, B.size());
            out.status = "case1";
            return out;
        }
        st.branch = "case3_extend";
        out.trace.push_back(st);
        ++k;
        A = BlockRef{k, *star};
    }
}

SchemePower scheme_power(const LinearMScheme& sch, BlockRef a, int m_prime, bool validate) {
    const FieldSpec& f = sch.field();
    const int k = a.level;
    if (m_prime < 1) throw InputError("m' must be positive");
    if (sch.m < 2 * k * m_prime)
        throw PreconditionUnmet("m>=2km'", "m=" + std::to_string(sch.m) + ", k=" + std::to_string(k) + ", m'=" + std::to_string(m_prime));
    const auto& A = block_members(sch, a);
    if (!sigma_injective(f, A, k)) throw PreconditionUnmet("sigma_k bijective on A");

    std::map<Code, Code> preimage;  // sigma_k(z) -> z
    for (Code z : A) preimage.emplace(lin_apply_code(f, summation(k), z), z);
    std::vector<Code> image;
    for (const auto& [p, z] : preimage) image.push_back(p);

    SchemePower out;
    out.k = k;
    out.a = a;
    out.scheme.inst = SchemeInstance(PointSet(f, image));
    out.scheme.m = m_prime;
    const std::uint64_t block_k = f.tuple_space(k);
    for (int i = 1; i <= m_prime; ++i) {
        const TuplePartition& src = sch.level(k * i);
        std::vector<std::int64_t> labels(f.tuple_space(i), -1);
        for (Code c : s_tuples(out.scheme.inst, i)) {
            Tuple t = decode_tuple(f, c, i);
            Code lifted = 0;
            for (Code p : t.pts) lifted = lifted * block_k + preimage.at(p);
            labels[c] = src.block(lifted);
        }
        TuplePartition part = make_partition(i, labels);
        std::vector<int> sources;
        for (const auto& blk : part.blocks) {
            int id = static_cast<int>(labels[blk.front()]);
            if (src.blocks[id].size() != blk.size())
                throw AssertFailed("a level-" + std::to_string(k * i) + " block inside A^" + std::to_string(i) +
                                   " is not mapped bijectively");
            sources.push_back(id);
        }
        out.source_blocks.push_back(std::move(sources));
        out.scheme.levels.push_back(std::move(part));
    }
    if (validate) {
        ValidationReport rep = validate_axioms(out.scheme);
        if (!rep.valid())
            throw AssertFailed("power scheme fails axiom validation with " + std::to_string(rep.violations.size()) + " violations");
    }
    return out;
}

LiftedBlock lift_block(const LinearMScheme& sch, const SchemePower& power, const Tuple& x, const BlockSet& a2) {
    const FieldSpec& f = sch.field();
    const int k = power.k;
    const int r = x.arity();
    if (r < 1) throw PreconditionUnmet("r>=1", "lifting needs a nonempty fiber prefix");
    if (k * (r + 1) > sch.m) throw PreconditionUnmet("k(r+1)<=m");
    if (a2.k != 1) throw InputError("A'' must be level-1 blocks of the fibered power scheme");
    const auto& A = block_members(sch, power.a);
    std::map<Code, Code> preimage;
    for (Code z : A) preimage.emplace(lin_apply_code(f, summation(k), z), z);

    LiftedBlock out;
    Code ycode = 0;
    const std::uint64_t block_k = f.tuple_space(k);
    for (Code p : x.pts) {
        auto it = preimage.find(p);
        if (it == preimage.end()) throw PreconditionUnmet("x in A'^r", "point " + std::to_string(p) + " is not in A'");
        Tuple yi = decode_tuple(f, it->second, k);
        out.y.pts.insert(out.y.pts.end(), yi.pts.begin(), yi.pts.end());
        ycode = ycode * block_k + it->second;
    }
    LinearMScheme fib_power = fiber_at(power.scheme, x, 1);
    const TuplePartition& big = sch.level(k * (r + 1));
    size_t a2_size = 0;
    for (int id : a2.ids) {
        const auto& U = fib_power.level(1).blocks.at(id);
        a2_size += U.size();
        // The level-k(r+1) block through (y, z0') and its fiber over y.
        std::int32_t zt = big.block(concat_codes(f, ycode, preimage.at(U.front()), k));
        std::vector<Code> lifted;
        for (Code z : A)
            if (big.block(concat_codes(f, ycode, z, k)) == zt) lifted.push_back(z);
        if (sigma_image(f, lifted, k).members != U)
            throw AssertFailed("lifted block does not map onto its power-scheme block");
        out.tuples.insert(out.tuples.end(), lifted.begin(), lifted.end());
    }
    std::sort(out.tuples.begin(), out.tuples.end());
    if (out.tuples.size() != a2_size) throw AssertFailed("|T| differs from |A''|");
    LinearMScheme fib = fiber_at(sch, out.y, k);
    out.t = to_block_set(fib, k, out.tuples);
    return out;
}

}  // namespace lms
