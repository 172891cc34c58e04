#pragma once

#include "lms/scheme_core.hpp"

#include <optional>
#include <vector>

namespace lms {

// One image tau(B): tau in M_{k,1}, B a level-k block of the scheme fibered
// at prefix (the scheme itself when the prefix is empty).
struct CertEntry {
    LinMap tau;
    int block = -1;
    Tuple prefix;
};

struct ConstructibleSet {
    PointSet points;
    std::vector<CertEntry> certificate;
    int k = 1;
    Tuple prefix;
};

// The scheme fibered at prefix; a copy of sch for the empty prefix.
LinearMScheme fibered(const LinearMScheme& sch, const Tuple& prefix);

PointSet recompute(const LinearMScheme& sch, const ConstructibleSet& c);
bool verify_certificate(const LinearMScheme& sch, const ConstructibleSet& c);

// All images tau(B) for tau in M_{k,1}, B in level k of the scheme fibered at
// prefix. Build once, then answer many membership questions.
class ConstructibleIndex {
public:
    ConstructibleIndex(const LinearMScheme& sch, int k, Tuple prefix = {});

    int k() const { return k_; }
    const Tuple& prefix() const { return prefix_; }
    size_t size() const { return entries_.size(); }
    const std::vector<std::pair<CertEntry, PointSet>>& members() const { return entries_; }

    // T is a union of members iff it equals the union of the members it contains.
    std::optional<ConstructibleSet> decide(const PointSet& t) const;

private:
    int k_;
    Tuple prefix_;
    FieldSpec field_;
    std::vector<std::pair<CertEntry, PointSet>> entries_;
};

std::optional<ConstructibleSet> decide_constructible(const LinearMScheme& sch, const PointSet& t, int k,
                                                     const Tuple& prefix = {});

// T ∩ S as level-1 blocks of the scheme fibered at the certificate prefix.
BlockSet intersect_with_S(const LinearMScheme& sch, const ConstructibleSet& c);

struct BooleanOpsResult {
    ConstructibleSet intersection;
    ConstructibleSet difference;
};

// Both results sit at a's level with recomputed certificates; requires
// a.k + b.k <= depth of the common fibered scheme.
BooleanOpsResult boolean_ops(const LinearMScheme& sch, const ConstructibleSet& a, const ConstructibleSet& b);

// Certificate for W' ⊇ W under a deeper fiber prefix, following the
// basis-extension construction; requires W' ⊆ W + t(F·S) and k + 2dt <= m.
ConstructibleSet extend_subspace(const LinearMScheme& sch, const ConstructibleSet& w, const PointSet& w_prime, int t);

}  // namespace lms
