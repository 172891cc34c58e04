#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace lms {

// Points of V = F_ell^dim and tuples of V^k share one integer encoding:
// a point is its coordinate vector read in base ell (coordinate 1 most
// significant), a k-tuple is its point list read in base ell^dim (first point
// most significant).
using Code = std::uint64_t;
using Point = std::vector<int>;

constexpr int kMaxEll = 251;
constexpr int kMaxDim = 16;
constexpr std::uint64_t kDefaultTupleCap = std::uint64_t{1} << 24;

// Size cap for every materialized tuple space or enumeration. Initialized from
// LMS_CAP_TUPLES when set; the CLI may override it once at startup.
std::uint64_t tuple_cap();
void set_tuple_cap(std::uint64_t cap);

bool is_prime(int n);
int mod_pow(int base, int exp, int p);
int mod_inv(int a, int p);

class FieldSpec {
public:
    FieldSpec() = default;
    FieldSpec(int ell, int dim);

    int ell() const { return ell_; }
    int dim() const { return dim_; }
    Code size() const { return size_; }

    // ell^(dim*k); throws CapExceeded above the tuple cap.
    std::uint64_t tuple_space(int k) const;

    Point decode(Code p) const;
    Code encode(const Point& coords) const;
    int coord(Code p, int i) const;

    Code add(Code a, Code b) const;
    Code sub(Code a, Code b) const;
    Code neg(Code a) const;
    Code scale(int c, Code a) const;
    int dot(Code a, Code b) const;
    int reduce(long long v) const;

    bool operator==(const FieldSpec& o) const { return ell_ == o.ell_ && dim_ == o.dim_; }

private:
    int ell_ = 2;
    int dim_ = 1;
    Code size_ = 2;
    std::vector<Code> place_{1};  // ell^(dim-1-i) for coordinate i
};

struct Tuple {
    std::vector<Code> pts;

    int arity() const { return static_cast<int>(pts.size()); }
    auto operator<=>(const Tuple&) const = default;
};

Code encode_tuple(const FieldSpec& f, const Tuple& t);
Tuple decode_tuple(const FieldSpec& f, Code code, int k);
// i is 0-based.
Code tuple_point(const FieldSpec& f, Code code, int k, int i);
Code concat_codes(const FieldSpec& f, Code prefix, Code suffix, int suffix_arity);

// Coefficient matrix c_{i,j}, row-major k x k'; output j is sum_i c_{i,j} x_i.
struct LinMap {
    int src_arity = 0;
    int dst_arity = 0;
    std::vector<int> coeffs;

    int at(int i, int j) const { return coeffs[static_cast<size_t>(i) * dst_arity + j]; }
    int& at(int i, int j) { return coeffs[static_cast<size_t>(i) * dst_arity + j]; }
    auto operator<=>(const LinMap&) const = default;
};

std::string to_string(const LinMap& tau);

LinMap identity_map(int k);
// i is 1-based as in pi_{k,i}.
LinMap projection(int k, int i);
LinMap summation(int k);
// Map applied first is `first`; result maps first.src_arity -> second.dst_arity.
LinMap compose(const FieldSpec& f, const LinMap& second, const LinMap& first);

Tuple lin_apply(const FieldSpec& f, const LinMap& tau, const Tuple& t);
// Same as lin_apply on decoded points; pts holds the src_arity input points.
Code lin_apply_points(const FieldSpec& f, const LinMap& tau, const Code* pts);
Code lin_apply_code(const FieldSpec& f, const LinMap& tau, Code t);

std::uint64_t linmap_count(const FieldSpec& f, int k, int k2);
// index-th map in lexicographic coefficient order (c_{1,1} most significant).
LinMap linmap_at(const FieldSpec& f, int k, int k2, std::uint64_t index);
std::vector<LinMap> enumerate_linmaps(const FieldSpec& f, int k, int k2);

// Dense matrices over F_p used for elimination.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}
    int& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    int operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
    bool operator==(const Matrix&) const = default;
};

// In-place reduced row echelon form; returns pivot columns.
std::vector<int> rref(Matrix& m, int p);
int rank(Matrix m, int p);
// Canonical (RREF) basis of the right nullspace {v : m v = 0}.
std::vector<std::vector<int>> nullspace(const Matrix& m, int p);
int determinant(Matrix m, int p);
Matrix mat_mul(const Matrix& x, const Matrix& y, int p);
Matrix mat_inverse(const Matrix& m, int p);
Matrix mat_identity(int n);
// y = M x on point coordinates.
Code mat_apply(const FieldSpec& f, const Matrix& m, Code x);

int span_dim(const FieldSpec& f, const std::vector<Code>& points);
// Reduced-row-echelon basis of the span, ordered by pivot coordinate.
std::vector<Code> echelon_basis(const FieldSpec& f, const std::vector<Code>& points);
// Canonical basis of {c in F^k : sum_i c_i x_i = 0}.
std::vector<std::vector<int>> relation_space(const FieldSpec& f, const Tuple& t);

}  // namespace lms
