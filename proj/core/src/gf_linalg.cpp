#include "lms/gf_linalg.hpp"

#include "lms/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>

namespace lms {

namespace {

std::uint64_t initial_cap() {
    if (const char* env = std::getenv("LMS_CAP_TUPLES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return v;
    }
    return kDefaultTupleCap;
}

std::atomic<std::uint64_t>& cap_slot() {
    static std::atomic<std::uint64_t> cap{initial_cap()};
    return cap;
}

// Returns base^exp or UINT64_MAX on overflow.
std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > UINT64_MAX / base) return UINT64_MAX;
        r *= base;
    }
    return r;
}

}  // namespace

std::uint64_t tuple_cap() { return cap_slot().load(); }
void set_tuple_cap(std::uint64_t cap) { cap_slot().store(cap); }

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

int mod_pow(int base, int exp, int p) {
    long long r = 1, b = ((base % p) + p) % p;
    while (exp > 0) {
        if (exp & 1) r = r * b % p;
        b = b * b % p;
        exp >>= 1;
    }
    return static_cast<int>(r);
}

int mod_inv(int a, int p) {
    a = ((a % p) + p) % p;
    if (a == 0) throw InputError("zero has no inverse mod " + std::to_string(p));
    return mod_pow(a, p - 2, p);
}

FieldSpec::FieldSpec(int ell, int dim) : ell_(ell), dim_(dim) {
    if (!is_prime(ell)) throw InputError("ell=" + std::to_string(ell) + " is not prime (trial division)");
    if (ell > kMaxEll) throw InputError("ell=" + std::to_string(ell) + " exceeds the supported maximum 251");
    if (dim < 1 || dim > kMaxDim) throw InputError("dim must lie in [1,16], got " + std::to_string(dim));
    std::uint64_t sz = sat_pow(static_cast<std::uint64_t>(ell), static_cast<std::uint64_t>(dim));
    if (sz > tuple_cap()) throw CapExceeded("point space ell^dim", sz, tuple_cap());
    size_ = sz;
    place_.assign(dim, 1);
    for (int i = dim - 2; i >= 0; --i) place_[i] = place_[i + 1] * ell;
}

std::uint64_t FieldSpec::tuple_space(int k) const {
    if (k < 0) throw ArityMismatch("negative arity");
    std::uint64_t sz = sat_pow(size_, static_cast<std::uint64_t>(k));
    if (sz > tuple_cap()) throw CapExceeded("tuple space ell^(dim*" + std::to_string(k) + ")", sz, tuple_cap());
    return sz;
}

Point FieldSpec::decode(Code p) const {
    Point out(dim_);
    for (int i = dim_ - 1; i >= 0; --i) {
        out[i] = static_cast<int>(p % ell_);
        p /= ell_;
    }
    return out;
}

Code FieldSpec::encode(const Point& coords) const {
    if (static_cast<int>(coords.size()) != dim_)
        throw ArityMismatch("point has " + std::to_string(coords.size()) + " coordinates, expected " + std::to_string(dim_));
    Code c = 0;
    for (int v : coords) {
        if (v < 0 || v >= ell_) throw InputError("coordinate " + std::to_string(v) + " outside [0, ell)");
        c = c * ell_ + static_cast<Code>(v);
    }
    return c;
}

int FieldSpec::coord(Code p, int i) const { return static_cast<int>((p / place_[i]) % ell_); }

Code FieldSpec::add(Code a, Code b) const {
    if (ell_ == 2) return a ^ b;
    Code r = 0, mul = 1;
    for (int i = 0; i < dim_; ++i) {
        Code s = (a % ell_ + b % ell_) % ell_;
        r += s * mul;
        mul *= ell_;
        a /= ell_;
        b /= ell_;
    }
    return r;
}

Code FieldSpec::neg(Code a) const {
    if (ell_ == 2) return a;
    Code r = 0, mul = 1;
    for (int i = 0; i < dim_; ++i) {
        Code s = (ell_ - a % ell_) % ell_;
        r += s * mul;
        mul *= ell_;
        a /= ell_;
    }
    return r;
}

Code FieldSpec::sub(Code a, Code b) const { return add(a, neg(b)); }

Code FieldSpec::scale(int c, Code a) const {
    c = reduce(c);
    if (c == 0) return 0;
    if (c == 1) return a;
    Code r = 0, mul = 1;
    for (int i = 0; i < dim_; ++i) {
        Code s = (a % ell_) * static_cast<Code>(c) % ell_;
        r += s * mul;
        mul *= ell_;
        a /= ell_;
    }
    return r;
}

int FieldSpec::dot(Code a, Code b) const {
    long long s = 0;
    for (int i = 0; i < dim_; ++i) {
        s += static_cast<long long>(a % ell_) * static_cast<long long>(b % ell_);
        a /= ell_;
        b /= ell_;
    }
    return static_cast<int>(s % ell_);
}

int FieldSpec::reduce(long long v) const {
    long long r = v % ell_;
    return static_cast<int>(r < 0 ? r + ell_ : r);
}

Code encode_tuple(const FieldSpec& f, const Tuple& t) {
    Code c = 0;
    for (Code p : t.pts) {
        if (p >= f.size()) throw InputError("point code out of range");
        c = c * f.size() + p;
    }
    return c;
}

Tuple decode_tuple(const FieldSpec& f, Code code, int k) {
    Tuple t;
    t.pts.assign(k, 0);
    for (int i = k - 1; i >= 0; --i) {
        t.pts[i] = code % f.size();
        code /= f.size();
    }
    return t;
}

Code tuple_point(const FieldSpec& f, Code code, int k, int i) {
    for (int j = k - 1; j > i; --j) code /= f.size();
    return code % f.size();
}

Code concat_codes(const FieldSpec& f, Code prefix, Code suffix, int suffix_arity) {
    Code c = prefix;
    for (int i = 0; i < suffix_arity; ++i) c *= f.size();
    return c + suffix;
}

std::string to_string(const LinMap& tau) {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < tau.src_arity; ++i) {
        os << (i ? ",[" : "[");
        for (int j = 0; j < tau.dst_arity; ++j) os << (j ? "," : "") << tau.at(i, j);
        os << "]";
    }
    os << "]";
    return os.str();
}

LinMap identity_map(int k) {
    LinMap m{k, k, std::vector<int>(static_cast<size_t>(k) * k, 0)};
    for (int i = 0; i < k; ++i) m.at(i, i) = 1;
    return m;
}

LinMap projection(int k, int i) {
    if (i < 1 || i > k)
        throw IndexOutOfRange("projection index " + std::to_string(i) + " outside [1," + std::to_string(k) + "]");
    LinMap m{k, 1, std::vector<int>(k, 0)};
    m.at(i - 1, 0) = 1;
    return m;
}

LinMap summation(int k) {
    if (k < 1) throw ArityMismatch("summation needs k >= 1");
    return LinMap{k, 1, std::vector<int>(k, 1)};
}

LinMap compose(const FieldSpec& f, const LinMap& second, const LinMap& first) {
    if (first.dst_arity != second.src_arity) throw ArityMismatch("compose: arity mismatch");
    LinMap r{first.src_arity, second.dst_arity,
             std::vector<int>(static_cast<size_t>(first.src_arity) * second.dst_arity, 0)};
    for (int i = 0; i < first.src_arity; ++i)
        for (int j = 0; j < second.dst_arity; ++j) {
            long long s = 0;
            for (int l = 0; l < first.dst_arity; ++l) s += static_cast<long long>(first.at(i, l)) * second.at(l, j);
            r.at(i, j) = f.reduce(s);
        }
    return r;
}

Code lin_apply_points(const FieldSpec& f, const LinMap& tau, const Code* pts) {
    Code out = 0;
    for (int j = 0; j < tau.dst_arity; ++j) {
        Code y = 0;
        for (int i = 0; i < tau.src_arity; ++i) {
            int c = tau.at(i, j);
            if (c != 0) y = f.add(y, f.scale(c, pts[i]));
        }
        out = out * f.size() + y;
    }
    return out;
}

Tuple lin_apply(const FieldSpec& f, const LinMap& tau, const Tuple& t) {
    if (t.arity() != tau.src_arity)
        throw ArityMismatch("lin_apply: tuple arity " + std::to_string(t.arity()) + " vs map source arity " +
                            std::to_string(tau.src_arity));
    return decode_tuple(f, lin_apply_points(f, tau, t.pts.data()), tau.dst_arity);
}

Code lin_apply_code(const FieldSpec& f, const LinMap& tau, Code t) {
    Tuple x = decode_tuple(f, t, tau.src_arity);
    return lin_apply_points(f, tau, x.pts.data());
}

std::uint64_t linmap_count(const FieldSpec& f, int k, int k2) {
    std::uint64_t n = sat_pow(static_cast<std::uint64_t>(f.ell()), static_cast<std::uint64_t>(k) * k2);
    if (n > tuple_cap()) throw CapExceeded("linear maps M_{" + std::to_string(k) + "," + std::to_string(k2) + "}", n, tuple_cap());
    return n;
}

LinMap linmap_at(const FieldSpec& f, int k, int k2, std::uint64_t index) {
    LinMap m{k, k2, std::vector<int>(static_cast<size_t>(k) * k2, 0)};
    for (int pos = k * k2 - 1; pos >= 0; --pos) {
        m.coeffs[pos] = static_cast<int>(index % f.ell());
        index /= f.ell();
    }
    return m;
}

std::vector<LinMap> enumerate_linmaps(const FieldSpec& f, int k, int k2) {
    std::uint64_t n = linmap_count(f, k, k2);
    std::vector<LinMap> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(linmap_at(f, k, k2, i));
    return out;
}

std::vector<int> rref(Matrix& m, int p) {
    std::vector<int> pivots;
    int row = 0;
    for (int col = 0; col < m.cols && row < m.rows; ++col) {
        int sel = -1;
        for (int r = row; r < m.rows; ++r)
            if (m(r, col) % p != 0) {
                sel = r;
                break;
            }
        if (sel < 0) continue;
        if (sel != row)
            for (int c = 0; c < m.cols; ++c) std::swap(m(sel, c), m(row, c));
        int inv = mod_inv(m(row, col), p);
        for (int c = 0; c < m.cols; ++c) m(row, c) = static_cast<int>(static_cast<long long>(m(row, c)) * inv % p);
        for (int r = 0; r < m.rows; ++r) {
            if (r == row || m(r, col) == 0) continue;
            int factor = m(r, col);
            for (int c = 0; c < m.cols; ++c) {
                long long v = m(r, c) - static_cast<long long>(factor) * m(row, c);
                v %= p;
                m(r, c) = static_cast<int>(v < 0 ? v + p : v);
            }
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

int rank(Matrix m, int p) { return static_cast<int>(rref(m, p).size()); }

std::vector<std::vector<int>> nullspace(const Matrix& m, int p) {
    Matrix r = m;
    std::vector<int> pivots = rref(r, p);
    std::vector<bool> is_pivot(m.cols, false);
    for (int c : pivots) is_pivot[c] = true;
    std::vector<std::vector<int>> basis;
    for (int free = 0; free < m.cols; ++free) {
        if (is_pivot[free]) continue;
        std::vector<int> v(m.cols, 0);
        v[free] = 1;
        for (size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = (p - r(static_cast<int>(i), free)) % p;
        basis.push_back(std::move(v));
    }
    // Put the basis itself in reduced form so equal spaces compare equal.
    if (basis.empty()) return basis;
    Matrix b(static_cast<int>(basis.size()), m.cols);
    for (size_t i = 0; i < basis.size(); ++i)
        for (int c = 0; c < m.cols; ++c) b(static_cast<int>(i), c) = basis[i][c];
    rref(b, p);
    for (size_t i = 0; i < basis.size(); ++i)
        for (int c = 0; c < m.cols; ++c) basis[i][c] = b(static_cast<int>(i), c);
    return basis;
}

int determinant(Matrix m, int p) {
    if (m.rows != m.cols) throw ArityMismatch("determinant of non-square matrix");
    long long det = 1;
    int n = m.rows;
    for (int col = 0; col < n; ++col) {
        int sel = -1;
        for (int r = col; r < n; ++r)
            if (m(r, col) % p != 0) {
                sel = r;
                break;
            }
        if (sel < 0) return 0;
        if (sel != col) {
            for (int c = 0; c < n; ++c) std::swap(m(sel, c), m(col, c));
            det = (p - det) % p;
        }
        det = det * m(col, col) % p;
        int inv = mod_inv(m(col, col), p);
        for (int r = col + 1; r < n; ++r) {
            if (m(r, col) == 0) continue;
            long long factor = static_cast<long long>(m(r, col)) * inv % p;
            for (int c = col; c < n; ++c) {
                long long v = (m(r, c) - factor * m(col, c)) % p;
                m(r, c) = static_cast<int>(v < 0 ? v + p : v);
            }
        }
    }
    return static_cast<int>(det);
}

Matrix mat_mul(const Matrix& x, const Matrix& y, int p) {
    if (x.cols != y.rows) throw ArityMismatch("mat_mul: shape mismatch");
    Matrix r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < y.cols; ++j) {
            long long s = 0;
            for (int l = 0; l < x.cols; ++l) s += static_cast<long long>(x(i, l)) * y(l, j);
            r(i, j) = static_cast<int>(s % p);
        }
    return r;
}

Matrix mat_identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

Matrix mat_inverse(const Matrix& m, int p) {
    int n = m.rows;
    Matrix aug(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug(i, j) = ((m(i, j) % p) + p) % p;
        aug(i, n + i) = 1;
    }
    std::vector<int> piv = rref(aug, p);
    if (static_cast<int>(piv.size()) < n || piv[n - 1] >= n) throw InputError("matrix is singular mod " + std::to_string(p));
    Matrix inv(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

Code mat_apply(const FieldSpec& f, const Matrix& m, Code x) {
    Point in = f.decode(x);
    Point out(f.dim(), 0);
    for (int i = 0; i < f.dim(); ++i) {
        long long s = 0;
        for (int j = 0; j < f.dim(); ++j) s += static_cast<long long>(m(i, j)) * in[j];
        out[i] = f.reduce(s);
    }
    return f.encode(out);
}

namespace {

Matrix rows_of(const FieldSpec& f, const std::vector<Code>& points) {
    Matrix m(static_cast<int>(points.size()), f.dim());
    for (size_t r = 0; r < points.size(); ++r) {
        Point c = f.decode(points[r]);
        for (int j = 0; j < f.dim(); ++j) m(static_cast<int>(r), j) = c[j];
    }
    return m;
}

}  // namespace

int span_dim(const FieldSpec& f, const std::vector<Code>& points) {
    if (points.empty()) return 0;
    return rank(rows_of(f, points), f.ell());
}

std::vector<Code> echelon_basis(const FieldSpec& f, const std::vector<Code>& points) {
    if (points.empty()) return {};
    Matrix m = rows_of(f, points);
    std::vector<int> piv = rref(m, f.ell());
    std::vector<Code> basis;
    for (size_t r = 0; r < piv.size(); ++r) {
        Point c(f.dim());
        for (int j = 0; j < f.dim(); ++j) c[j] = m(static_cast<int>(r), j);
        basis.push_back(f.encode(c));
    }
    return basis;
}

std::vector<std::vector<int>> relation_space(const FieldSpec& f, const Tuple& t) {
    // Columns are the points; the nullspace is the set of coefficient vectors.
    Matrix m(f.dim(), t.arity());
    for (int i = 0; i < t.arity(); ++i) {
        Point c = f.decode(t.pts[i]);
        for (int j = 0; j < f.dim(); ++j) m(j, i) = c[j];
    }
    return nullspace(m, f.ell());
}

}  // namespace lms
