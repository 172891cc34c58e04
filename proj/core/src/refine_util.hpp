#pragma once

#include "lms/refine.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lms::detail {

// sch fibered at prefix and cut to `levels` levels; cheaper than fibering the
// whole scheme when only the first levels are needed.
LinearMScheme fiber_at(const LinearMScheme& sch, const Tuple& prefix, int levels);

Tuple tuple_of(const std::vector<Code>& pts);
Tuple concat(const Tuple& a, const Tuple& b);
std::string tuple_str(const Tuple& t);
std::string rstr(const Rational& r);
Rational rat(std::uint64_t n);

// Indices of a subset of `sizes` whose sum lies in [lo, hi]: the smallest
// reachable sum by default, the largest with `largest` set; ties within a sum
// go to the first subset in a deterministic DP order.
std::optional<std::vector<size_t>> subset_with_sum(const std::vector<size_t>& sizes, const Rational& lo,
                                                   const Rational& hi, bool largest = false);

// a >= ell^(-q) * base, exactly when the numbers allow it.
bool ge_ell_pow_neg(const Rational& a, int ell, const Rational& q, const Rational& base);
std::string ell_pow_neg_str(int ell, const Rational& q, const Rational& base);

// |B ∩ W| / |W|
Rational density_in(const PointSet& b, const PointSet& w);

// Records an inequality and, unless relaxed, throws PreconditionUnmet when it fails.
void require(TraceStep& step, Inequality q, bool relaxed);

// Decides (Pi_x, k)-constructibility for x ranging over S^k in code order,
// building one index per prefix on first use.
class ConstructibleSearch {
public:
    ConstructibleSearch(const LinearMScheme& sch, int k);
    std::optional<ConstructibleSet> find(const PointSet& t);
    int k() const { return k_; }

private:
    LinearMScheme cut_;
    int k_;
    std::vector<Code> prefixes_;
    std::vector<std::unique_ptr<ConstructibleIndex>> index_;
};

// The frame W(x) built from explicit k' and eps' (no depth relation enforced
// beyond what the constructibility search needs).
PseudorandomFrame frame_with(const LinearMScheme& sch, const PointSet& b, int k_prime, const Rational& eps_prime);

// floor(3c / (2 mu)) + 1
int gate_t(const Rational& c, const Rational& mu);

// Smallest integer s >= 1 with s >= ell^(-q) * base.
std::uint64_t min_size_at_least(int ell, const Rational& q, const Rational& base);

ShrinkOutcome make_outcome(const LinearMScheme& sch, std::string tag, const Tuple& prefix, std::vector<Code> pts,
                           size_t block_size);

}  // namespace lms::detail
