#pragma once

#include "lms/addcomb.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace lms {

constexpr double kFourierBand = 1e-9;

// A subgroup of V presented by its reduced-row-echelon basis. Elements are
// addressed by their coordinate vector lambda in that basis; because the
// basis is reduced, lambda_i is the element's coordinate at the i-th pivot.
class SubgroupBasis {
public:
    SubgroupBasis() = default;
    SubgroupBasis(const FieldSpec& f, const std::vector<Code>& generators);

    static SubgroupBasis span_of(const PointSet& s) { return SubgroupBasis(s.field, s.members); }

    const FieldSpec& field() const { return field_; }
    const std::vector<Code>& basis() const { return basis_; }
    int rank() const { return static_cast<int>(basis_.size()); }
    // ell^rank; throws CapExceeded when over the tuple cap.
    std::uint64_t order() const;

    bool contains(Code x) const;
    // Coordinates of x; throws NotInGroup.
    std::vector<int> coords(Code x) const;
    // Index of x in base ell over its coordinates (lambda_1 most significant).
    std::uint64_t index_of(Code x) const;
    Code element(std::uint64_t index) const;
    PointSet elements() const;

private:
    FieldSpec field_;
    std::vector<Code> basis_;
    std::vector<int> pivots_;
};

struct Character {
    std::vector<int> dual;
    int ell = 2;

    bool trivial() const;
    std::uint64_t index() const;
    bool operator==(const Character&) const = default;
};

Character character_at(const SubgroupBasis& g, std::uint64_t index);
int pairing(const SubgroupBasis& g, const Character& chi, Code x);
std::complex<double> root_of_unity(int ell, int power);

std::complex<double> char_eval(const SubgroupBasis& g, const Character& chi, Code x);
// E_{a in group}[1_B(a) conj(chi(a))] by direct summation; B must lie in the group.
std::complex<double> fourier_coeff(const PointSet& b, const Character& chi, const SubgroupBasis& g);
std::complex<double> fourier_coeff(const PointSet& b, const Character& chi);

struct FourierTable {
    SubgroupBasis group;
    // Indexed by Character::index().
    std::vector<std::complex<double>> coeffs;

    Character character(std::uint64_t index) const { return character_at(group, index); }
};

// Full coefficient table of 1_B via a separable transform along each basis axis.
FourierTable fourier_table(const PointSet& b, const SubgroupBasis& g);
FourierTable fourier_table(const PointSet& b);

// |sum_chi |coeff|^2 - mu(B)|
double parseval_check(const PointSet& b);
double parseval_check(const PointSet& b, const SubgroupBasis& g);
// max_x |sum_chi coeff(chi) chi(x) - 1_B(x)|
double inversion_residual(const PointSet& b, const SubgroupBasis& g);

// Nontrivial characters with |coeff| >= eps - band, in index order.
std::vector<Character> heavy_characters(const PointSet& b, const Rational& eps);
std::vector<Character> heavy_characters(const PointSet& b, const Rational& eps, const SubgroupBasis& g);

// {x in group : <chi, x> = 0}
PointSet kernel(const SubgroupBasis& g, const Character& chi);

std::string coeff_csv(const FourierTable& table);

}  // namespace lms
