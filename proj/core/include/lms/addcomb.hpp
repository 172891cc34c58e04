#pragma once

#include "lms/gf_linalg.hpp"
#include "lms/rational.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lms {

// A finite subset of V held as sorted, duplicate-free point codes.
struct PointSet {
    FieldSpec field;
    std::vector<Code> members;

    PointSet() = default;
    PointSet(FieldSpec f, std::vector<Code> pts);

    size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
    bool contains(Code p) const;
    bool operator==(const PointSet& o) const { return field == o.field && members == o.members; }
};

PointSet full_space(const FieldSpec& f);
PointSet set_union(const PointSet& a, const PointSet& b);
PointSet set_intersection(const PointSet& a, const PointSet& b);
PointSet set_difference(const PointSet& a, const PointSet& b);
bool is_subset(const PointSet& a, const PointSet& b);

PointSet sumset(const PointSet& a, const PointSet& b);
PointSet difference_set(const PointSet& a, const PointSet& b);
PointSet negate(const PointSet& a);
PointSet iterated_sumset(int k, const PointSet& a);
PointSet subgroup_generated(const PointSet& a);
// A ∪ -A ∪ {0}
PointSet plus_minus(const PointSet& a);
// F·A = {c a : c in F, a in A}
PointSet cone(const PointSet& a);

// |A ∩ B| / |B|
Rational density(const PointSet& a, const PointSet& b);
// |A| / |<A>|
Rational density_in_span(const PointSet& a);

// r(z) = #{(a,b) in A x B : a + b = z}, sorted by z.
std::vector<std::pair<Code, std::uint64_t>> sum_histogram(const PointSet& a, const PointSet& b);
// #{(a,b) in A x B : a - b = z}, sorted by z.
std::vector<std::pair<Code, std::uint64_t>> difference_histogram(const PointSet& a, const PointSet& b);

std::uint64_t additive_energy(const PointSet& a);

// Least k with k·A^± = <A>.
int covering_number(const PointSet& a);
// max{2, floor(3 / (2 mu(A)))}
int covering_bound(const PointSet& a);

struct CertificateReport {
    std::string name;
    bool pass = false;
    // Set when the bound was too large to evaluate exactly; pass then comes
    // from a floating-point log comparison.
    bool astronomical = false;
    Rational K;
    std::string lhs;
    std::string rhs;
};

CertificateReport check_freiman_ruzsa(const PointSet& a);
CertificateReport check_plunnecke(const PointSet& a, const PointSet& b, int k);

struct AddCombReport {
    size_t size = 0;
    size_t sumset_size = 0;
    size_t subgroup_size = 0;
    Rational mu;
    std::uint64_t energy = 0;
    int covering = 0;
    int covering_bound = 0;
    CertificateReport freiman_ruzsa;
};

AddCombReport addcomb_report(const PointSet& a);

}  // namespace lms
