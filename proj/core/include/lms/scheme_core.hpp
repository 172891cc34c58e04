#pragma once

#include "lms/addcomb.hpp"
#include "lms/gf_linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lms {

struct SchemeInstance {
    FieldSpec field;
    PointSet S;
    int span_dim = 0;

    SchemeInstance() = default;
    explicit SchemeInstance(PointSet s);

    size_t n() const { return S.size(); }
    // |<S>| = ell^span_dim
    BigInt span_size() const { return ipow(BigInt(field.ell()), static_cast<unsigned>(span_dim)); }
};

// Codes of S^k in increasing order.
std::vector<Code> s_tuples(const SchemeInstance& inst, int k);

// Partition of S^k. block_of is indexed by tuple code over all of V^k and
// holds -1 outside S^k. Blocks are numbered by their smallest member code.
struct TuplePartition {
    int k = 0;
    std::vector<std::int32_t> block_of;
    std::vector<std::vector<Code>> blocks;

    size_t num_blocks() const { return blocks.size(); }
    std::int32_t block(Code c) const { return c < block_of.size() ? block_of[c] : -1; }
    bool operator==(const TuplePartition& o) const { return k == o.k && block_of == o.block_of; }
};

// Builds a partition from arbitrary labels (>= 0 on S^k, -1 elsewhere),
// renumbering blocks canonically.
TuplePartition make_partition(int k, const std::vector<std::int64_t>& labels);
TuplePartition finest_partition(const SchemeInstance& inst, int k);
TuplePartition coarsest_partition(const SchemeInstance& inst, int k);
// True when every block of `fine` lies inside a block of `coarse`.
bool refines(const TuplePartition& fine, const TuplePartition& coarse);

struct LinearMScheme {
    SchemeInstance inst;
    int m = 0;
    std::vector<TuplePartition> levels;

    const TuplePartition& level(int k) const { return levels.at(static_cast<size_t>(k - 1)); }
    TuplePartition& level(int k) { return levels.at(static_cast<size_t>(k - 1)); }
    const FieldSpec& field() const { return inst.field; }
};

// Checks that every level partitions exactly S^k; throws InputError otherwise.
void check_structure(const LinearMScheme& sch);
LinearMScheme finest_scheme(const SchemeInstance& inst, int m);

struct BlockRef {
    int level = 1;
    int block = 0;
    auto operator<=>(const BlockRef&) const = default;
};

// Sorted set of block ids at one level.
struct BlockSet {
    int k = 1;
    std::vector<int> ids;
    bool operator==(const BlockSet&) const = default;
};

const std::vector<Code>& block_members(const LinearMScheme& sch, BlockRef b);

struct Violation {
    std::string axiom;  // "P1" or "P2"
    int k = 0;
    int k2 = 0;
    LinMap tau;
    int block = -1;
    int block2 = -1;
    std::vector<Code> witnesses;
    std::string detail;
};

struct PairCoverage {
    int k = 0;
    int k2 = 0;
    std::uint64_t maps_checked = 0;
    std::uint64_t maps_total = 0;  // 0 when the total itself exceeds the cap
};

struct ValidationOptions {
    // 0 = exhaustive (throws CapExceeded when a map family is over cap).
    // Otherwise families larger than this are sampled and the report is
    // flagged partial.
    std::uint64_t sample_maps = 0;
    std::uint64_t seed = 1;
    // 0 = keep every violation.
    size_t max_violations = 0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<PairCoverage> coverage;
    bool partial = false;
    bool truncated = false;

    // A partial report never certifies validity.
    bool valid() const { return violations.empty() && !partial; }
};

ValidationReport validate_axioms(const LinearMScheme& sch, const ValidationOptions& opts = {});

struct RelationProfile {
    std::vector<std::vector<int>> basis;
    bool constant = true;
    // Two members with different relation spaces when constant is false.
    std::vector<Code> witnesses;
};

RelationProfile linear_relation_profile(const LinearMScheme& sch, BlockRef b);

BlockSet block_union(const BlockSet& a, const BlockSet& b);
BlockSet block_intersect(const BlockSet& a, const BlockSet& b);
BlockSet block_complement(const LinearMScheme& sch, const BlockSet& a);
BlockSet all_blocks(const LinearMScheme& sch, int k);
// Raw tuple set to block ids; throws NotBlockUnion if it cuts a block.
BlockSet to_block_set(const LinearMScheme& sch, int k, const std::vector<Code>& tuples);
std::vector<Code> tuples_of(const LinearMScheme& sch, const BlockSet& s);

struct Quantifier {
    enum class Kind { Exists, Forall, Exactly };
    Kind kind = Kind::Exists;
    int t = 0;

    static Quantifier exists() { return {Kind::Exists, 0}; }
    static Quantifier forall() { return {Kind::Forall, 0}; }
    static Quantifier exactly(int t) { return {Kind::Exactly, t}; }
};

// {x in S^k : Q y in S^(K-k), (x, y) in bset} where bset sits at level K.
BlockSet quantifier_project(const LinearMScheme& sch, const BlockSet& bset, int k, Quantifier q);
// tau(bset) ∩ S^k'
BlockSet image_block(const LinearMScheme& sch, const LinMap& tau, const BlockSet& bset);
// tau^{-1}(bset) ∩ S^k
BlockSet preimage_block(const LinearMScheme& sch, const LinMap& tau, const BlockSet& bset);

// The (m - t)-scheme obtained by fixing the prefix x in S^t.
LinearMScheme fiber_restrict(const LinearMScheme& sch, const Tuple& x);

// Levels 1..m' of sch.
LinearMScheme truncate_scheme(const LinearMScheme& sch, int m_prime);

bool is_discrete(const LinearMScheme& sch, int k);

}  // namespace lms
