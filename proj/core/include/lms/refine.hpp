#pragma once

#include "lms/antisym.hpp"
#include "lms/errors.hpp"
#include "lms/constructible.hpp"
#include "lms/fourier.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lms {

// ---- traces -----------------------------------------------------------------

struct Inequality {
    std::string label;
    std::string lhs;
    std::string op;
    std::string rhs;
    bool holds = false;
    // Set on lemma conclusions; unset on premises and informational bounds.
    bool asserted = false;
};

Inequality make_inequality(std::string label, const Rational& lhs, const std::string& op, const Rational& rhs);

struct TraceStep {
    std::string lemma;
    std::string branch;
    Tuple prefix;
    std::vector<std::pair<std::string, std::string>> sizes;
    std::vector<Inequality> inequalities;

    void size(const std::string& name, const std::string& value) { sizes.emplace_back(name, value); }
    void size(const std::string& name, std::uint64_t value) { sizes.emplace_back(name, std::to_string(value)); }
    void check(Inequality q) { inequalities.push_back(std::move(q)); }
    void conclude(Inequality q) {
        q.asserted = true;
        inequalities.push_back(std::move(q));
    }
    bool all_hold() const;
};

using Trace = std::vector<TraceStep>;

// True when some asserted inequality in the trace fails.
bool any_conclusion_fails(const Trace& trace);

// Parameters are caller-supplied. With `relaxed` set, unmet preconditions
// that only matter for the asymptotic argument are recorded in the trace as
// failing inequalities instead of aborting; conclusions are still verified.
struct RefineParams {
    Rational K{4};
    int k = 1;
    int k_prime = 0;  // 0: derive from k and t
    int t = 0;        // 0: derive from K and mu(B)
    int r = 1;
    Rational eps{Rational(1, 4)};
    Rational eps_prime{0};  // 0: derive as eps / ell^k
    Rational gamma{Rational(1, 4)};
    int k_test = 1;  // k'' for the seventh decomposition property
    bool relaxed = false;
};

// ---- outcomes ---------------------------------------------------------------

// A subset B' of B that is a union of level-1 blocks of the scheme fibered
// at `prefix`.
struct ShrinkOutcome {
    std::string case_tag;
    Tuple prefix;
    BlockSet result_set;
    std::vector<Code> points;
    size_t block_size = 0;
    size_t result_size = 0;
    Trace trace;

    Rational ratio() const { return Rational(BigInt(block_size), BigInt(result_size)); }
    // min{|B'|, |B|/|B'|}
    Rational min_ratio() const;
};

// ---- sum counting and the shrink lemma -----------------------------------------

// #{(x, y) in A' x B : x + y = z}
std::uint64_t nu_plus(const PointSet& a_prime, const PointSet& b, Code z);

// sigma_k(A): coordinate sums of the k-tuples of A.
PointSet sigma_image(const FieldSpec& f, const std::vector<Code>& tuples, int k);

// Level-1 block b, level-k block a inside b^k. Follows the two branches of the
// proof: a sum z with sqrt(K) <= nu+(z) <= |B|/sqrt(K), else the set of rare
// sums Z and its fibers Z_x (whose size is asserted constant over A').
ShrinkOutcome shrink_weak(const LinearMScheme& sch, int b, BlockRef a, const Rational& K, bool relaxed = false);

// Direct injectivity of sigma_k on block a after checking m >= 2k and
// m > k + log2(|A|/|A'|). Throws AssertFailed when the preconditions hold on
// an Antisymmetric scheme but sigma_k is not injective.
bool bijectivity_check(const LinearMScheme& sch, BlockRef a, const AntisymVerdict& verdict);
// The raw comparison alone.
bool sigma_injective(const FieldSpec& f, const std::vector<Code>& tuples, int k);

struct PartialSumsetOutcome {
    // "case1", "case2" or "stopped" (relaxed runs whose invariants broke)
    std::string status;
    std::optional<ShrinkOutcome> shrink;
    int k = 1;
    BlockRef a;
    std::vector<Code> a_prime;
    size_t a_size = 0;
    size_t a_prime_sumset = 0;
    Trace trace;
};

// log|B| / log|<B>|; 1 when <B> is a line.
double entropy_rate(const PointSet& b);
PartialSumsetOutcome partial_sumset_search(const LinearMScheme& sch, int b, const Rational& K, bool relaxed = false);

// ---- scheme powers and block lifting --------------------------------------------

struct SchemePower {
    LinearMScheme scheme;  // an m'-scheme on A' = sigma_k(A)
    int k = 1;
    BlockRef a;
    // Per level i, the level-ki block of sch each level-i block comes from.
    std::vector<std::vector<int>> source_blocks;
};

// Requires m >= 2km' and sigma_k injective on A.
SchemePower scheme_power(const LinearMScheme& sch, BlockRef a, int m_prime, bool validate = true);

// Given x in A'^r and A'' a union of level-1 blocks of the power scheme fibered
// at x, returns T, a union of level-k blocks of sch fibered at y = sigma_k^{-1}(x),
// with T inside A and sigma_k(T) = A''.
struct LiftedBlock {
    Tuple y;
    BlockSet t;
    std::vector<Code> tuples;
};
LiftedBlock lift_block(const LinearMScheme& sch, const SchemePower& power, const Tuple& x, const BlockSet& a2);

// ---- Balog-Szemeredi-Gowers ---------------------------------------------------

struct BsgOutcome {
    Code x0 = 0;
    BlockSet result_set;  // level 1 of sch fibered at x0
    std::vector<Code> points;
    std::uint64_t energy = 0;
    size_t n_common = 0;  // |N(x)|
    size_t difference_size = 0;
    // Smallest count of representations a1 - a2 = (x1-y1)-(x2-y2)-(x3-y3)+(x4-y4)
    // over pairs in B'; computed only when |V| is small enough.
    std::optional<BigInt> min_representations;
    Trace trace;
};

BsgOutcome bsg_extract(const LinearMScheme& sch, int b, const Rational& gamma);

// ---- Fourier side: special characters and the decomposition -----------------------

struct SpecialCharacter {
    Character chi;
    double magnitude = 0.0;
    PointSet kernel;
    ConstructibleSet certificate;  // kernel as a (Pi_x, k)-constructible set
};

// X_{k,eps}: nontrivial characters of <B> with |coeff| >= eps whose kernel is
// (Pi_x, k)-constructible for some x in S^k.
struct SpecialCharacters {
    SubgroupBasis group;
    std::vector<SpecialCharacter> chars;
    size_t heavy = 0;  // heavy characters before the constructibility filter
    double max_nontrivial = 0.0;
};

SpecialCharacters special_characters(const LinearMScheme& sch, const PointSet& b, int k, const Rational& eps);

// The subspaces W(x): <B> when X is empty, else H + F x.
struct PseudorandomFrame {
    PointSet span;
    SpecialCharacters special;
    std::optional<PointSet> h;

    PointSet subspace_at(Code x) const;
};

PseudorandomFrame pseudorandom_frame(const LinearMScheme& sch, const PointSet& b, int k, const Rational& eps);

// A member of the family of subspaces W of <B> with codimension at most k that
// are (Pi_x, k)-constructible for some x in S^k.
struct ConstructibleSubspace {
    PointSet w;
    int codim = 0;
    ConstructibleSet certificate;
};

// Enumerates every subspace of <B> of codimension <= k (as intersections of
// kernels) and keeps the constructible ones; needs m >= 2k.
std::vector<ConstructibleSubspace> constructible_subspaces(const LinearMScheme& sch, const PointSet& b, int k);

// max over that family of |mu_W(B) - mu(B)|; 0 for an empty family.
Rational max_density_gap(const PointSet& b, const std::vector<ConstructibleSubspace>& family);

struct PropertySevenStats {
    size_t tested = 0;
    size_t hypothesis_met = 0;
    size_t held = 0;           // among all tested pairs
    size_t held_when_met = 0;  // among pairs meeting the hypothesis
};

struct Decomposition {
    bool trivial_gate = false;
    double max_nontrivial = 0.0;
    int t = 0;
    SpecialCharacters special;
    PointSet h;
    ConstructibleSet h_certificate;
    std::vector<PointSet> sunflower;
    std::vector<size_t> leaf_counts;
    std::uint64_t leaf_bound_exponent = 0;  // ceil(1/eps'^2)
    PropertySevenStats property7;
    Trace trace;
};

struct DecomposeOptions {
    int k_test = 1;
    // Test property (7) on every subspace of <B> that is constructible at
    // level k_test, instead of kernels and leaves only.
    bool full_property7 = false;
    bool relaxed = false;
};

Decomposition decompose(const LinearMScheme& sch, int b, int k_prime, const Rational& eps_prime,
                        const DecomposeOptions& opts = {});

// ---- density reduction --------------------------------------------------------

struct DensityResult {
    // "completed", "case_exit", "stopped"
    std::string status;
    std::string stop_reason;
    std::optional<ShrinkOutcome> outcome;
    Trace trace;
};

DensityResult density_reduce(const LinearMScheme& sch, int b, const RefineParams& params);

// ---- drivers --------------------------------------------------------------------

struct KeyLemmaOptions {
    int max_prefix_len = 2;
    std::uint64_t prefix_cap = 100000;
    bool require_antisymmetric = true;
    std::uint64_t antisym_budget = kDefaultAntisymBudget;
};

struct KeyLemmaLevel {
    int prefix_len = 0;
    std::uint64_t prefixes = 0;
    Rational best;
    std::optional<ShrinkOutcome> outcome;
};

struct KeyLemmaResult {
    std::vector<KeyLemmaLevel> levels;
    std::optional<ShrinkOutcome> best;
    bool capped = false;
};

KeyLemmaResult key_lemma_search(const LinearMScheme& sch, int b, const KeyLemmaOptions& opts = {});

struct DepthStep {
    Code point = 0;
    size_t size_before = 0;
    size_t size_after = 0;
    int depth_before = 0;
};

struct DepthMeasure {
    int count = 0;
    bool completed = false;
    size_t block_size = 0;
    int span_dim = 0;
    bool log_bound = false;
    bool dim_bound = false;
    std::vector<DepthStep> steps;
};

// Raised when the depth admits no fixing at all (m < 2).
class DepthMeasureExhausted : public DepthExhausted {
public:
    DepthMeasureExhausted(const std::string& what, DepthMeasure partial)
        : DepthExhausted(what), partial_(std::move(partial)) {}
    const DepthMeasure& partial() const { return partial_; }

private:
    DepthMeasure partial_;
};

// Fixes greedily chosen points of the tracked block while the remaining depth
// is at least 2, tracking the largest block of the fiber inside it. On a
// strongly antisymmetric scheme every such block has size in (1, |B|/2], so the
// run normally ends with the depth spent and `completed` false.
DepthMeasure depth_measure(const LinearMScheme& sch, int b, const AntisymVerdict& verdict);

}  // namespace lms
