#pragma once

#include "lms/scheme_core.hpp"

#include <optional>
#include <vector>

namespace lms {

struct MatrixGroup {
    FieldSpec field;
    std::vector<Matrix> generators;
};

// Checks every generator is a dim x dim invertible matrix.
MatrixGroup make_group(const FieldSpec& f, std::vector<Matrix> generators);
MatrixGroup trivial_group(const FieldSpec& f);
// Generators of GL_dim(F_ell): a primitive-root scaling, one transvection,
// a transposition and a dim-cycle of coordinates.
MatrixGroup gl_group(const FieldSpec& f);

int primitive_root(int p);
// Coefficients c_0..c_{d-1} of the monic x^d + c_{d-1}x^{d-1} + ... + c_0.
bool is_primitive_polynomial(int ell, const std::vector<int>& coeffs);
// First primitive polynomial of degree dim, ordered by sum_i c_i ell^i.
std::vector<int> primitive_polynomial(const FieldSpec& f);
// Multiplication by x on F_ell[x]/(poly) in the basis 1, x, ..., x^{d-1}.
Matrix companion_matrix(const FieldSpec& f, const std::vector<int>& coeffs);
// The cyclic group generated by a companion matrix; `coeffs` may be given
// with or without the leading 1.
MatrixGroup singer_group(const FieldSpec& f, std::optional<std::vector<int>> coeffs = std::nullopt);

// x -> x^ell on F_ell[x]/(poly), an F_ell-linear map.
Matrix frobenius_matrix(const FieldSpec& f, const std::vector<int>& coeffs);
// Gamma L(1, ell^dim): the Singer cycle together with the Frobenius map.
MatrixGroup semilinear_group(const FieldSpec& f, std::optional<std::vector<int>> coeffs = std::nullopt);

// Number of group elements by BFS over products of generators.
std::uint64_t group_order(const MatrixGroup& g);

// Smallest G-stable superset of seed.
PointSet close_set(const MatrixGroup& g, const PointSet& seed);
// close_set(seed) without the zero vector.
PointSet default_support(const MatrixGroup& g, const PointSet& seed);

// Orbits of S^k under the diagonal action; throws NotClosed when S is not G-stable.
TuplePartition orbit_partition(const MatrixGroup& g, const SchemeInstance& inst, int k);

struct OrbitScheme {
    LinearMScheme scheme;
    std::vector<size_t> orbit_counts;
};

// Levels 1..m are the orbit partitions. With validate set, the result is run
// through validate_axioms and AssertFailed is raised on any violation.
OrbitScheme build_orbit_scheme(const MatrixGroup& g, const PointSet& s, int m, bool validate = true);

}  // namespace lms
