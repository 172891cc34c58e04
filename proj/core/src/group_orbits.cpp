#include "lms/group_orbits.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace lms {

MatrixGroup make_group(const FieldSpec& f, std::vector<Matrix> generators) {
    for (Matrix& m : generators) {
        if (m.rows != f.dim() || m.cols != f.dim()) throw InputError("generator is not a dim x dim matrix");
        for (int& v : m.a) v = f.reduce(v);
        if (determinant(m, f.ell()) == 0) throw InputError("generator is not invertible mod " + std::to_string(f.ell()));
    }
    return MatrixGroup{f, std::move(generators)};
}

MatrixGroup trivial_group(const FieldSpec& f) { return MatrixGroup{f, {}}; }

int primitive_root(int p) {
    if (p == 2) return 1;
    std::vector<int> factors;
    int n = p - 1;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            factors.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) factors.push_back(n);
    for (int g = 2; g < p; ++g) {
        bool ok = true;
        for (int q : factors)
            if (mod_pow(g, (p - 1) / q, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    return 1;
}

MatrixGroup gl_group(const FieldSpec& f) {
    int d = f.dim();
    std::vector<Matrix> gens;
    int g = primitive_root(f.ell());
    if (g != 1) {
        Matrix s = mat_identity(d);
        s(0, 0) = g;
        gens.push_back(s);
    }
    if (d >= 2) {
        Matrix t = mat_identity(d);
        t(0, 1) = 1;
        gens.push_back(t);
        Matrix sw(d, d);
        for (int i = 0; i < d; ++i) sw(i, i) = 1;
        sw(0, 0) = sw(1, 1) = 0;
        sw(0, 1) = sw(1, 0) = 1;
        gens.push_back(sw);
        if (d >= 3) {
            Matrix cyc(d, d);
            for (int i = 0; i < d; ++i) cyc((i + 1) % d, i) = 1;
            gens.push_back(cyc);
        }
    }
    return make_group(f, std::move(gens));
}

namespace {

using Poly = std::vector<int>;  // residues mod f, low degree first, length d

Poly poly_mulmod(const Poly& a, const Poly& b, const std::vector<int>& c, int p) {
    size_t d = c.size();
    std::vector<long long> prod(2 * d, 0);
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) prod[i + j] = (prod[i + j] + static_cast<long long>(a[i]) * b[j]) % p;
    // x^d = -sum c_i x^i
    for (size_t deg = 2 * d - 1; deg >= d; --deg) {
        long long top = prod[deg] % p;
        if (top == 0) continue;
        prod[deg] = 0;
        for (size_t i = 0; i < d; ++i) prod[deg - d + i] = ((prod[deg - d + i] - top * c[i]) % p + p) % p;
    }
    Poly r(d);
    for (size_t i = 0; i < d; ++i) r[i] = static_cast<int>(prod[i] % p);
    return r;
}

Poly poly_pow_x(std::uint64_t e, const std::vector<int>& c, int p) {
    size_t d = c.size();
    Poly result(d, 0), base(d, 0);
    result[0] = 1;
    if (d == 1) base[0] = (p - c[0]) % p;  // x = -c_0 mod (x + c_0)
    else base[1] = 1;
    while (e > 0) {
        if (e & 1) result = poly_mulmod(result, base, c, p);
        base = poly_mulmod(base, base, c, p);
        e >>= 1;
    }
    return result;
}

}  // namespace

bool is_primitive_polynomial(int ell, const std::vector<int>& coeffs) {
    size_t d = coeffs.size();
    if (d == 0 || coeffs[0] % ell == 0) return false;
    std::uint64_t q = 1;
    for (size_t i = 0; i < d; ++i) q *= static_cast<std::uint64_t>(ell);
    std::uint64_t order = q - 1;
    Poly one(d, 0);
    one[0] = 1;
    if (poly_pow_x(order, coeffs, ell) != one) return false;
    std::uint64_t n = order;
    for (std::uint64_t r = 2; r * r <= n; ++r)
        if (n % r == 0) {
            if (poly_pow_x(order / r, coeffs, ell) == one) return false;
            while (n % r == 0) n /= r;
        }
    if (n > 1 && poly_pow_x(order / n, coeffs, ell) == one) return false;
    return true;
}

std::vector<int> primitive_polynomial(const FieldSpec& f) {
    int d = f.dim();
    std::uint64_t total = f.size();
    for (std::uint64_t v = 0; v < total; ++v) {
        std::vector<int> c(d);
        std::uint64_t x = v;
        for (int i = 0; i < d; ++i) {
            c[i] = static_cast<int>(x % f.ell());
            x /= f.ell();
        }
        if (is_primitive_polynomial(f.ell(), c)) return c;
    }
    throw InputError("no primitive polynomial found");
}

Matrix companion_matrix(const FieldSpec& f, const std::vector<int>& coeffs) {
    int d = f.dim();
    if (static_cast<int>(coeffs.size()) != d) throw InputError("polynomial degree does not match dim");
    Matrix m(d, d);
    for (int j = 0; j + 1 < d; ++j) m(j + 1, j) = 1;
    for (int i = 0; i < d; ++i) m(i, d - 1) = f.reduce(-static_cast<long long>(coeffs[i]));
    return m;
}

MatrixGroup singer_group(const FieldSpec& f, std::optional<std::vector<int>> coeffs) {
    std::vector<int> c;
    if (coeffs) {
        c = *coeffs;
        if (static_cast<int>(c.size()) == f.dim() + 1) {
            if (f.reduce(c.back()) != 1) throw InputError("Singer polynomial must be monic");
            c.pop_back();
        }
        for (int& v : c) v = f.reduce(v);
        if (!is_primitive_polynomial(f.ell(), c)) throw InputError("supplied polynomial is not primitive");
    } else {
        c = primitive_polynomial(f);
    }
    return make_group(f, {companion_matrix(f, c)});
}

Matrix frobenius_matrix(const FieldSpec& f, const std::vector<int>& coeffs) {
    Matrix c = companion_matrix(f, coeffs);
    const int d = f.dim();
    Matrix m(d, d);
    // Column j holds the coordinates of x^(ell*j) in the basis 1, x, ..., x^{d-1}.
    Point e0(d, 0);
    e0[0] = 1;
    Code v = f.encode(e0);
    for (int j = 0; j < d; ++j) {
        Point col = f.decode(v);
        for (int i = 0; i < d; ++i) m(i, j) = col[i];
        for (int s = 0; s < f.ell(); ++s) v = mat_apply(f, c, v);
    }
    return m;
}

MatrixGroup semilinear_group(const FieldSpec& f, std::optional<std::vector<int>> coeffs) {
    MatrixGroup s = singer_group(f, std::move(coeffs));
    const Matrix& c = s.generators.front();
    std::vector<int> poly(f.dim());
    for (int i = 0; i < f.dim(); ++i) poly[i] = f.reduce(-static_cast<long long>(c(i, f.dim() - 1)));
    return make_group(f, {c, frobenius_matrix(f, poly)});
}

std::uint64_t group_order(const MatrixGroup& g) {
    const int p = g.field.ell();
    std::set<std::vector<int>> seen;
    std::deque<Matrix> queue;
    Matrix id = mat_identity(g.field.dim());
    seen.insert(id.a);
    queue.push_back(id);
    while (!queue.empty()) {
        Matrix cur = queue.front();
        queue.pop_front();
        for (const Matrix& gen : g.generators) {
            Matrix next = mat_mul(gen, cur, p);
            if (seen.insert(next.a).second) {
                if (seen.size() > tuple_cap()) throw CapExceeded("group order enumeration", seen.size(), tuple_cap());
                queue.push_back(std::move(next));
            }
        }
    }
    return seen.size();
}

PointSet close_set(const MatrixGroup& g, const PointSet& seed) {
    const FieldSpec& f = g.field;
    if (!(seed.field == f)) throw FieldMismatch("seed set lives over a different field");
    std::vector<char> seen(f.size(), 0);
    std::deque<Code> queue;
    for (Code c : seed.members) {
        seen[c] = 1;
        queue.push_back(c);
    }
    while (!queue.empty()) {
        Code c = queue.front();
        queue.pop_front();
        for (const Matrix& m : g.generators) {
            Code y = mat_apply(f, m, c);
            if (!seen[y]) {
                seen[y] = 1;
                queue.push_back(y);
            }
        }
    }
    std::vector<Code> out;
    for (Code c = 0; c < seen.size(); ++c)
        if (seen[c]) out.push_back(c);
    return PointSet(f, std::move(out));
}

PointSet default_support(const MatrixGroup& g, const PointSet& seed) {
    return set_difference(close_set(g, seed), PointSet(g.field, {0}));
}

TuplePartition orbit_partition(const MatrixGroup& g, const SchemeInstance& inst, int k) {
    const FieldSpec& f = inst.field;
    const auto& S = inst.S.members;
    const size_t n = S.size();
    f.tuple_space(k);
    std::vector<std::vector<std::uint32_t>> act(g.generators.size(), std::vector<std::uint32_t>(n));
    for (size_t gi = 0; gi < g.generators.size(); ++gi)
        for (size_t i = 0; i < n; ++i) {
            Code y = mat_apply(f, g.generators[gi], S[i]);
            auto it = std::lower_bound(S.begin(), S.end(), y);
            if (it == S.end() || *it != y)
                throw NotClosed("S is not stable under the group: point " + std::to_string(S[i]) + " maps outside S");
            act[gi][i] = static_cast<std::uint32_t>(it - S.begin());
        }
    // Work over index tuples in base n; increasing index order matches
    // increasing tuple code order because S is sorted.
    std::uint64_t total = 1;
    for (int i = 0; i < k; ++i) total *= n;
    std::vector<std::int64_t> orbit(total, -1);
    std::vector<std::uint32_t> digits(k);
    std::int64_t next_orbit = 0;
    std::deque<std::uint64_t> queue;
    for (std::uint64_t start = 0; start < total; ++start) {
        if (orbit[start] >= 0) continue;
        orbit[start] = next_orbit;
        queue.push_back(start);
        while (!queue.empty()) {
            std::uint64_t cur = queue.front();
            queue.pop_front();
            std::uint64_t x = cur;
            for (int i = k - 1; i >= 0; --i) {
                digits[i] = static_cast<std::uint32_t>(x % n);
                x /= n;
            }
            for (const auto& a : act) {
                std::uint64_t img = 0;
                for (int i = 0; i < k; ++i) img = img * n + a[digits[i]];
                if (orbit[img] < 0) {
                    orbit[img] = next_orbit;
                    queue.push_back(img);
                }
            }
        }
        ++next_orbit;
    }
    std::vector<std::int64_t> labels(f.tuple_space(k), -1);
    std::vector<Code> codes = s_tuples(inst, k);
    for (std::uint64_t i = 0; i < total; ++i) labels[codes[i]] = orbit[i];
    return make_partition(k, labels);
}

OrbitScheme build_orbit_scheme(const MatrixGroup& g, const PointSet& s, int m, bool validate) {
    if (m < 1) throw InputError("depth m must be >= 1");
    OrbitScheme out;
    out.scheme.inst = SchemeInstance(s);
    out.scheme.m = m;
    for (int k = 1; k <= m; ++k) {
        out.scheme.levels.push_back(orbit_partition(g, out.scheme.inst, k));
        out.orbit_counts.push_back(out.scheme.levels.back().num_blocks());
    }
    if (validate) {
        ValidationReport rep = validate_axioms(out.scheme);
        if (!rep.valid())
            throw AssertFailed("orbit scheme failed axiom validation with " + std::to_string(rep.violations.size()) +
                               " violations");
    }
    return out;
}

}  // namespace lms
