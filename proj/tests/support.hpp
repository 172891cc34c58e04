#pragma once

// Instance builders and brute-force oracles shared by the test suites. The
// oracles deliberately avoid the library's own algorithms: they enumerate.

#include "lms/group_orbits.hpp"
#include "lms/io.hpp"
#include "lms/refine.hpp"

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <string>
#include <vector>

namespace lms::testing {

inline Matrix mat(int n, std::vector<int> vals) {
    Matrix m(n, n);
    m.a = std::move(vals);
    return m;
}

inline Code pt(const FieldSpec& f, Point coords) { return f.encode(coords); }

// ---- groups --------------------------------------------------------------------

// Translations of the paraboloid {(1, a, b, a^2+b^2)} in F_3^4, plus -I.
inline MatrixGroup paraboloid_group() {
    FieldSpec f(3, 4);
    auto T = [](int a, int b) {
        return mat(4, {1, 0, 0, 0, a, 1, 0, 0, b, 0, 1, 0, (a * a + b * b) % 3, (2 * a) % 3, (2 * b) % 3, 1});
    };
    return make_group(f, {T(1, 0), T(0, 1), mat(4, {2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2})});
}

// Stabilizer of span(e_{s+1}, ..., e_d): GL_s x GL_{d-s} plus one shear.
inline MatrixGroup parabolic_group(const FieldSpec& f, int s) {
    const int d = f.dim();
    std::vector<Matrix> gens;
    auto embed = [&](const Matrix& a, int off) {
        Matrix m = mat_identity(d);
        for (int i = 0; i < a.rows; ++i)
            for (int j = 0; j < a.cols; ++j) m(off + i, off + j) = a(i, j);
        return m;
    };
    for (const auto& a : gl_group(FieldSpec(f.ell(), s)).generators) gens.push_back(embed(a, 0));
    for (const auto& a : gl_group(FieldSpec(f.ell(), d - s)).generators) gens.push_back(embed(a, s));
    Matrix c = mat_identity(d);
    c(s, 0) = 1;
    gens.push_back(c);
    return make_group(f, gens);
}

// Every element of <generators>, by closing under products.
inline std::vector<Matrix> group_elements(const MatrixGroup& g) {
    const int p = g.field.ell();
    std::vector<Matrix> out{mat_identity(g.field.dim())};
    std::set<std::vector<int>> seen{out.front().a};
    for (size_t i = 0; i < out.size(); ++i)
        for (const auto& s : g.generators) {
            Matrix x = mat_mul(s, out[i], p);
            if (seen.insert(x.a).second) out.push_back(x);
        }
    return out;
}

// Orbit labels of S^k computed from the full element list: a tuple's label
// is the smallest code in its orbit.
inline std::map<Code, Code> brute_orbit_labels(const MatrixGroup& g, const std::vector<Code>& S, int k) {
    const FieldSpec& f = g.field;
    auto elems = group_elements(g);
    std::map<Code, Code> label;
    std::vector<Code> idx(static_cast<size_t>(k), 0);
    while (true) {
        Tuple t;
        for (Code i : idx) t.pts.push_back(S[i]);
        Code best = encode_tuple(f, t);
        for (const auto& m : elems) {
            Tuple u;
            for (Code p : t.pts) u.pts.push_back(mat_apply(f, m, p));
            best = std::min(best, encode_tuple(f, u));
        }
        label[encode_tuple(f, t)] = best;
        int pos = k - 1;
        while (pos >= 0 && ++idx[pos] == S.size()) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return label;
}

// ---- schemes -------------------------------------------------------------------

inline LinearMScheme orbit_scheme(const MatrixGroup& g, const PointSet& seed, int m) {
    return build_orbit_scheme(g, default_support(g, seed), m, false).scheme;
}

// Moves the largest member of block `from` into block `to` at level k.
inline LinearMScheme corrupt(const LinearMScheme& sch, int k, int from, int to) {
    LinearMScheme out = sch;
    const auto& part = sch.level(k);
    std::vector<std::int64_t> labels(part.block_of.begin(), part.block_of.end());
    labels[part.blocks[from].back()] = to;
    out.level(k) = make_partition(k, labels);
    return out;
}

// The hand-made 2-scheme on {e1,e2,e3} in F_2^3 whose only witness is a
// composition of two parallel bijections.
inline LinearMScheme parallel_bijection_scheme() {
    FieldSpec f(2, 3);
    SchemeInstance inst(PointSet(f, {1, 2, 4}));
    LinearMScheme sch;
    sch.inst = inst;
    sch.m = 2;
    sch.levels.push_back(coarsest_partition(inst, 1));
    std::vector<std::int64_t> lab(f.tuple_space(2), -1);
    for (Code c : s_tuples(inst, 2)) lab[c] = 0;
    for (Code c : {12u, 17u, 34u}) lab[c] = 1;
    sch.levels.push_back(make_partition(2, lab));
    return sch;
}

// ---- set oracles ----------------------------------------------------------------

inline std::set<Code> naive_sumset(const FieldSpec& f, const std::vector<Code>& a, const std::vector<Code>& b) {
    std::set<Code> out;
    for (Code x : a)
        for (Code y : b) {
            Point px = f.decode(x), py = f.decode(y), s(px.size());
            for (size_t i = 0; i < px.size(); ++i) s[i] = (px[i] + py[i]) % f.ell();
            out.insert(f.encode(s));
        }
    return out;
}

inline std::uint64_t naive_energy(const FieldSpec& f, const std::vector<Code>& a) {
    std::uint64_t e = 0;
    for (Code a1 : a)
        for (Code a2 : a)
            for (Code a3 : a)
                for (Code a4 : a) {
                    Point p1 = f.decode(a1), p2 = f.decode(a2), p3 = f.decode(a3), p4 = f.decode(a4);
                    bool eq = true;
                    for (size_t i = 0; i < p1.size(); ++i)
                        if ((p1[i] + p2[i]) % f.ell() != (p3[i] + p4[i]) % f.ell()) eq = false;
                    if (eq) ++e;
                }
    return e;
}

// Closure of A ∪ {0} under addition, by iterated addition.
inline std::set<Code> naive_span(const FieldSpec& f, const std::vector<Code>& a) {
    std::set<Code> cur{0};
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Code> snapshot(cur.begin(), cur.end());
        for (Code x : snapshot)
            for (Code y : a) {
                Point px = f.decode(x), py = f.decode(y), s(px.size());
                for (size_t i = 0; i < px.size(); ++i) s[i] = (px[i] + py[i]) % f.ell();
                if (cur.insert(f.encode(s)).second) grew = true;
            }
    }
    return cur;
}

inline std::complex<double> naive_coeff(const FieldSpec& f, const std::set<Code>& group, const std::set<Code>& b,
                                        const Point& dual) {
    const double two_pi = 6.283185307179586;
    std::complex<double> s = 0;
    for (Code x : group) {
        if (!b.count(x)) continue;
        Point px = f.decode(x);
        long long pairing = 0;
        for (size_t i = 0; i < px.size(); ++i) pairing += static_cast<long long>(px[i]) * dual[i];
        double ang = -two_pi * static_cast<double>(pairing % f.ell()) / f.ell();
        s += std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return s / static_cast<double>(group.size());
}

inline std::vector<Code> random_subset(std::mt19937_64& rng, const std::vector<Code>& pool, double keep) {
    std::bernoulli_distribution coin(keep);
    std::vector<Code> out;
    for (Code c : pool)
        if (coin(rng)) out.push_back(c);
    return out;
}

inline std::set<Code> naive_difference(const FieldSpec& f, const std::vector<Code>& a, const std::vector<Code>& b) {
    std::set<Code> out;
    for (Code x : a)
        for (Code y : b) {
            Point px = f.decode(x), py = f.decode(y), s(px.size());
            for (size_t i = 0; i < px.size(); ++i) s[i] = (px[i] + f.ell() - py[i]) % f.ell();
            out.insert(f.encode(s));
        }
    return out;
}

// Every subspace of <gens>, as spans of all vector subsets of size <= dim.
inline std::set<std::vector<Code>> naive_subspaces(const FieldSpec& f, const std::vector<Code>& gens) {
    std::set<Code> whole = naive_span(f, gens);
    std::vector<Code> pool(whole.begin(), whole.end());
    std::set<std::vector<Code>> out{{0}};
    std::vector<std::vector<Code>> frontier{{}};
    for (int depth = 0; depth < f.dim(); ++depth) {
        std::vector<std::vector<Code>> next;
        for (const auto& base : frontier)
            for (Code v : pool) {
                std::vector<Code> g = base;
                g.push_back(v);
                std::set<Code> sp = naive_span(f, g);
                if (out.insert(std::vector<Code>(sp.begin(), sp.end())).second) next.push_back(g);
            }
        frontier = std::move(next);
    }
    return out;
}

// ---- traces --------------------------------------------------------------------

// Reads back a printed side: "p/q", "a^e" or "(p/q)^e"; nullopt for decimals
// and anything symbolic.
inline std::optional<Rational> exact_side(const std::string& s) {
    static const std::regex power(R"(^\(?(-?[0-9]+(?:/[0-9]+)?)\)?\^([0-9]+)$)");
    std::smatch m;
    try {
        if (std::regex_match(s, m, power))
            return rpow(parse_rational(m[1].str()), static_cast<unsigned>(std::stoul(m[2].str())));
        if (s.find('.') != std::string::npos) return std::nullopt;
        return parse_rational(s);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::optional<bool> compare(const Rational& a, const std::string& op, const Rational& b) {
    if (op == "<=") return a <= b;
    if (op == "<") return a < b;
    if (op == ">=") return a >= b;
    if (op == ">") return a > b;
    if (op == "==") return a == b;
    return std::nullopt;
}

// Recomputes an inequality from its printed sides. Handles "ell^-(e)*base"
// right-hand sides with integral e. nullopt when the sides are not exact.
inline std::optional<bool> recheck(const Inequality& q) {
    auto l = exact_side(q.lhs);
    static const std::regex neg_power(R"(^([0-9]+)\^-\(([0-9]+(?:/[0-9]+)?)\)\*(-?[0-9]+(?:/[0-9]+)?)$)");
    std::smatch m;
    if (l && std::regex_match(q.rhs, m, neg_power)) {
        Rational e = parse_rational(m[2].str());
        if (denom(e) != 1 || e > 100000) return std::nullopt;
        Rational scale(ipow(BigInt(std::stoi(m[1].str())), static_cast<unsigned>(numer(e))));
        return compare(*l * scale, q.op, parse_rational(m[3].str()));
    }
    auto r = exact_side(q.rhs);
    if (l && r) return compare(*l, q.op, *r);
    if (!l && !r && q.op == "==") return q.lhs == q.rhs;
    return std::nullopt;
}

// Number of inequalities whose recomputed truth value differs from `holds`.
inline size_t recheck_mismatches(const Trace& trace, size_t* checked = nullptr) {
    size_t bad = 0;
    for (const auto& st : trace)
        for (const auto& q : st.inequalities)
            if (auto v = recheck(q)) {
                if (checked) ++*checked;
                if (*v != q.holds) ++bad;
            }
    return bad;
}

// ---- desk instances ------------------------------------------------------------

inline Matrix mat_power(Matrix a, std::uint64_t e, int p) {
    Matrix r = mat_identity(a.rows);
    for (; e; e >>= 1) {
        if (e & 1) r = mat_mul(r, a, p);
        a = mat_mul(a, a, p);
    }
    return r;
}

// The order-s subgroup of a Singer cycle; its orbits on V\{0} are the cosets of
// the order-s subgroup of the multiplicative group.
inline MatrixGroup singer_subgroup(const FieldSpec& f, std::uint64_t s) {
    auto g = singer_group(f);
    return make_group(f, {mat_power(g.generators.front(), (f.size() - 1) / s, f.ell())});
}

// C_s x C_t acting diagonally on F_p^2; orbits off the axes are product sets.
inline MatrixGroup diagonal_group(int p, int s, int t) {
    FieldSpec f(p, 2);
    int g = primitive_root(p);
    auto pw = [&](int e) {
        int r = 1;
        for (int i = 0; i < e; ++i) r = r * g % p;
        return r;
    };
    Matrix a = mat_identity(2), b = mat_identity(2);
    a(0, 0) = pw((p - 1) / s);
    b(1, 1) = pw((p - 1) / t);
    return make_group(f, {a, b});
}

struct GateScheme {
    std::string name;
    LinearMScheme sch;
};

// 3-schemes on V\{0} whose level-1 blocks include sets B with
// 4|B| <= |B+B| <= |B|^2/4.
inline std::vector<GateScheme> shrink_gate_schemes() {
    std::vector<GateScheme> out;
    auto add = [&](std::string name, const MatrixGroup& g) {
        std::vector<Code> nz;
        for (Code x = 1; x < g.field.size(); ++x) nz.push_back(x);
        out.push_back({std::move(name), build_orbit_scheme(g, PointSet(g.field, nz), 3, false).scheme});
    };
    add("C20 on F_3^4", singer_subgroup(FieldSpec(3, 4), 20));
    add("C31 on F_5^3", singer_subgroup(FieldSpec(5, 3), 31));
    add("C24 on F_11^2", singer_subgroup(FieldSpec(11, 2), 24));
    add("C30 on F_11^2", singer_subgroup(FieldSpec(11, 2), 30));
    add("C28 on F_13^2", singer_subgroup(FieldSpec(13, 2), 28));
    add("C42 on F_13^2", singer_subgroup(FieldSpec(13, 2), 42));
    add("C6xC6 on F_13^2", diagonal_group(13, 6, 6));
    add("C6xC4 on F_13^2", diagonal_group(13, 6, 4));
    add("C4xC6 on F_13^2", diagonal_group(13, 4, 6));
    add("C6xC3 on F_13^2", diagonal_group(13, 6, 3));
    return out;
}

// ---- scheme oracles ------------------------------------------------------------

// Direct statement of both axioms: for every tau and block B, tau(B) either
// equals a block B' or misses it, and when it equals B' the preimage count
// in B is the same for every y in B'.
inline bool naive_axioms_hold(const LinearMScheme& sch) {
    const FieldSpec& f = sch.field();
    for (int k = 1; k <= sch.m; ++k)
        for (int k2 = 1; k2 <= sch.m; ++k2)
            for (const auto& tau : enumerate_linmaps(f, k, k2))
                for (const auto& b : sch.level(k).blocks) {
                    std::map<Code, int> hits;
                    for (Code t : b) ++hits[lin_apply_code(f, tau, t)];
                    for (const auto& b2 : sch.level(k2).blocks) {
                        std::set<Code> members(b2.begin(), b2.end());
                        bool meets = false;
                        for (auto [y, c] : hits) meets |= members.count(y) > 0;
                        if (!meets) continue;
                        if (hits.size() != members.size()) return false;
                        int count = -1;
                        for (auto [y, c] : hits) {
                            if (!members.count(y)) return false;
                            if (count >= 0 && c != count) return false;
                            count = c;
                        }
                    }
                }
    return true;
}

// Level-k fiber classes by the block of (x, y) at level t+k.
inline std::vector<std::int64_t> naive_fiber_labels(const LinearMScheme& sch, const Tuple& x, int k) {
    const FieldSpec& f = sch.field();
    const int t = x.arity();
    std::vector<std::int64_t> lab(f.tuple_space(k), -1);
    Code prefix = encode_tuple(f, x);
    for (Code y : s_tuples(sch.inst, k)) lab[y] = sch.level(t + k).block(concat_codes(f, prefix, y, k));
    return lab;
}

// ---- antisymmetry oracles ------------------------------------------------------

// Partial maps between blocks as (src level, src block, dst level, dst block, tuple map).
struct Arrow {
    int k, b, k2, b2;
    std::map<Code, Code> map;
    auto key() const { return std::tie(k, b, k2, b2, map); }
    bool operator<(const Arrow& o) const { return key() < o.key(); }
};

// Independent closure of every block-to-block bijection tau|_B under
// composition and inversion; true when some self-map moves a tuple.
inline bool naive_has_nontrivial_self_map(const LinearMScheme& sch) {
    const FieldSpec& f = sch.field();
    std::set<Arrow> seen;
    std::vector<Arrow> queue;
    auto push = [&](Arrow a) {
        if (seen.insert(a).second) queue.push_back(std::move(a));
    };
    for (int k = 1; k <= sch.m; ++k)
        for (int k2 = 1; k2 <= sch.m; ++k2)
            for (const auto& tau : enumerate_linmaps(f, k, k2))
                for (int b = 0; b < static_cast<int>(sch.level(k).num_blocks()); ++b) {
                    Arrow a{k, b, k2, -1, {}};
                    std::set<Code> image;
                    bool ok = true;
                    for (Code t : sch.level(k).blocks[b]) {
                        Code y = lin_apply_code(f, tau, t);
                        int by = sch.level(k2).block(y);
                        if (by < 0 || (a.b2 >= 0 && by != a.b2) || !image.insert(y).second) {
                            ok = false;
                            break;
                        }
                        a.b2 = by;
                        a.map[t] = y;
                    }
                    if (!ok || image.size() != sch.level(k2).blocks[a.b2].size()) continue;
                    Arrow inv{k2, a.b2, k, b, {}};
                    for (auto [x, y] : a.map) inv.map[y] = x;
                    push(a);
                    push(inv);
                }
    const std::vector<Arrow> gens(seen.begin(), seen.end());
    for (size_t i = 0; i < queue.size(); ++i) {
        const Arrow a = queue[i];
        if (a.k == a.k2 && a.b == a.b2)
            for (auto [x, y] : a.map)
                if (x != y) return true;
        for (const auto& g : gens) {
            if (g.k != a.k2 || g.b != a.b2) continue;
            Arrow c{a.k, a.b, g.k2, g.b2, {}};
            for (auto [x, y] : a.map) c.map[x] = g.map.at(y);
            push(std::move(c));
        }
    }
    return false;
}

// |{z : (x,z) and (x,y) share a level-2 block}|
inline size_t naive_fiber_block_size(const LinearMScheme& sch, Code x, Code y) {
    const FieldSpec& f = sch.field();
    int target = sch.level(2).block(encode_tuple(f, Tuple{{x, y}}));
    size_t n = 0;
    for (Code z : sch.inst.S.members) n += sch.level(2).block(encode_tuple(f, Tuple{{x, z}})) == target;
    return n;
}

// ---- additive oracles ----------------------------------------------------------

// A is a coset of a subgroup iff (A - a0) is closed under addition.
inline bool is_coset(const PointSet& a) {
    if (a.empty()) return false;
    const FieldSpec& f = a.field;
    std::set<Code> shifted;
    for (Code x : a.members) shifted.insert(f.sub(x, a.members.front()));
    for (Code x : shifted)
        for (Code y : shifted)
            if (!shifted.count(f.add(x, y))) return false;
    return true;
}

// Least k with k copies of A∪-A∪{0} summing to <A>, by repeated sumset.
inline int naive_covering(const PointSet& a) {
    const FieldSpec& f = a.field;
    std::vector<Code> pm{0};
    for (Code x : a.members) pm.push_back(x), pm.push_back(f.neg(x));
    auto target = naive_span(f, a.members);
    std::set<Code> cur(pm.begin(), pm.end());
    int k = 1;
    while (cur != target) {
        cur = naive_sumset(f, std::vector<Code>(cur.begin(), cur.end()), pm);
        ++k;
    }
    return k;
}

// Count of (x1,y1,...,x4,y4) in B^8 with (x1-y1)-(x2-y2)-(x3-y3)+(x4-y4) = d,
// by convolving the difference counts.
inline BigInt four_fold(const FieldSpec& f, const std::vector<Code>& B, Code d) {
    std::vector<std::uint64_t> r(f.size(), 0);
    for (Code x : B)
        for (Code y : B) ++r[f.sub(x, y)];
    BigInt total = 0;
    for (Code z1 = 0; z1 < f.size(); ++z1) {
        if (!r[z1]) continue;
        for (Code z2 = 0; z2 < f.size(); ++z2) {
            if (!r[z2]) continue;
            for (Code z3 = 0; z3 < f.size(); ++z3) {
                if (!r[z3]) continue;
                Code z4 = f.add(f.sub(d, z1), f.add(z2, z3));
                total += BigInt(r[z1]) * r[z2] * r[z3] * r[z4];
            }
        }
    }
    return total;
}

// ---- refinement oracles --------------------------------------------------------

inline Rational R(size_t n) { return Rational(BigInt(n)); }

inline std::vector<Code> union_of(const LinearMScheme& sch, const BlockSet& s) {
    std::vector<Code> out;
    for (int id : s.ids) {
        const auto& b = sch.level(s.k).blocks.at(id);
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// W constructible at level k over some fiber x in S^k, or with no fiber.
inline bool constructible_somewhere(const LinearMScheme& sch, const PointSet& w, int k) {
    auto cut = truncate_scheme(sch, 2 * k);
    if (ConstructibleIndex(cut, k, Tuple{}).decide(w)) return true;
    for (Code x : s_tuples(cut.inst, k))
        if (ConstructibleIndex(cut, k, decode_tuple(cut.field(), x, k)).decide(w)) return true;
    return false;
}

inline Rational density_of(const PointSet& B, const PointSet& w) {
    return R(set_intersection(B, w).size()) / R(w.size());
}

// Every subspace of <B> with codimension at most k that is constructible at
// level k, by enumeration.
inline std::vector<PointSet> constructible_family(const LinearMScheme& sch, const PointSet& B, int k) {
    const FieldSpec& f = B.field;
    const int dim = span_dim(f, B.members);
    std::vector<PointSet> out;
    for (const auto& w : naive_subspaces(f, B.members)) {
        PointSet ws(f, w);
        if (dim - span_dim(f, w) <= k && constructible_somewhere(sch, ws, k)) out.push_back(ws);
    }
    return out;
}

// Checks a non-trivial decomposition of block b from raw sets and returns the
// names of the properties that fail. The last property ranges over every
// subspace of <B> within codimension k_test that is constructible at level
// k_test.
inline std::vector<std::string> decomposition_failures(const LinearMScheme& sch, int b, int k_prime,
                                                       const Rational& eps, int k_test, const Decomposition& d) {
    const FieldSpec& f = sch.field();
    const int ell = f.ell();
    PointSet B(f, sch.level(1).blocks[b]);
    std::vector<std::string> bad;
    auto fail = [&](bool ok, const char* name) {
        if (!ok && std::find(bad.begin(), bad.end(), name) == bad.end()) bad.emplace_back(name);
    };
    fail(!d.trivial_gate, "non-trivial");
    fail(!any_conclusion_fails(d.trace), "trace conclusions");
    fail(recheck_mismatches(d.trace) == 0, "trace recheck");

    // X: heavy characters with constructible kernels, one by one.
    FourierTable table = fourier_table(B);
    PointSet h = SubgroupBasis::span_of(B).elements();
    for (const auto& c : d.special.chars) {
        fail(std::abs(table.coeffs[c.chi.index()]) >= to_double(eps) - 1e-12, "special characters heavy");
        fail(recompute(sch, c.certificate) == c.kernel, "kernel certificates");
        fail(verify_certificate(sch, c.certificate), "kernel certificates");
        h = set_intersection(h, c.kernel);
    }
    fail(d.h == h, "H is the kernel intersection");
    fail(d.h_certificate.k <= d.t && recompute(sch, d.h_certificate) == h, "H constructible at level t");
    fail(set_intersection(B, h).empty(), "B misses H");
    // The leaves are the subspaces H + F x for x in B.
    std::set<std::vector<Code>> expect_leaves;
    for (Code x : B.members) {
        std::vector<Code> w;
        for (int c = 0; c < ell; ++c)
            for (Code y : h.members) w.push_back(f.add(y, f.scale(c, x)));
        expect_leaves.insert(PointSet(f, w).members);
    }
    std::set<std::vector<Code>> got;
    for (const auto& w : d.sunflower) got.insert(w.members);
    fail(got == expect_leaves, "leaves are H + F x");
    size_t covered = 0;
    for (const auto& w : d.sunflower) {
        fail(w.size() == h.size() * static_cast<size_t>(ell) && is_subset(h, w), "leaves extend H by one dimension");
        fail(set_intersection(B, w).size() == set_intersection(B, d.sunflower.front()).size(), "equal leaf counts");
        covered += set_intersection(B, w).size();
    }
    fail(covered == B.size(), "leaves partition B");
    for (size_t i = 0; i < d.sunflower.size(); ++i)
        for (size_t j = i + 1; j < d.sunflower.size(); ++j)
            fail(set_intersection(d.sunflower[i], d.sunflower[j]) == h, "leaves meet in H");
    Rational inv = 1 / (eps * eps);
    fail(BigInt(d.sunflower.size()) <= ipow(BigInt(ell), static_cast<unsigned>(ceil_of(inv))), "leaf count bound");
    // Density is stable on constructible subspaces of the leaves.
    const int dim = span_dim(f, B.members);
    for (const PointSet& wp : constructible_family(sch, B, k_test))
        for (const PointSet& w : d.sunflower) {
            PointSet ww = set_intersection(w, wp);
            int c = dim - span_dim(f, ww.members);
            if (k_prime < k_test + c * d.t + 1) continue;
            Rational gap = density_of(B, ww) - density_of(B, w);
            if (gap < 0) gap = -gap;
            fail(gap <= rpow(Rational(ell), static_cast<unsigned>(c)) * eps ||
                     (set_intersection(B, ww).empty() && is_subset(ww, h)),
                 "density stable on constructible subspaces");
        }
    fail(d.property7.held_when_met == d.property7.hypothesis_met, "density stability statistics");
    return bad;
}

}  // namespace lms::testing
