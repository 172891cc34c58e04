#pragma once

#include "lms/scheme_core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lms {

enum class Direction { Fwd, Inv };

// One step of a word: moves tuples of src to tuples of dst. A forward step
// applies tau; an inverse step undoes tau (which maps dst onto src).
struct WordStep {
    LinMap tau;
    Direction dir = Direction::Fwd;
    BlockRef src;
    BlockRef dst;
};

// Bijection between two blocks of equal size; mapping[i] is the index in
// dst's member list of the image of src's i-th member.
struct PartialBijection {
    BlockRef src;
    BlockRef dst;
    std::vector<std::uint32_t> mapping;
    std::vector<WordStep> word;

    bool is_identity() const;
};

PartialBijection inverse(const PartialBijection& a);
// Apply `first`, then `second`.
PartialBijection compose(const PartialBijection& second, const PartialBijection& first);
// Replays the word tuple by tuple and checks it reproduces the mapping.
bool replay(const LinearMScheme& sch, const PartialBijection& p);

std::vector<PartialBijection> generator_maps(const LinearMScheme& sch);

enum class Outcome { Antisymmetric, Witness, Inconclusive };
const char* to_string(Outcome o);

constexpr std::uint64_t kDefaultAntisymBudget = 1'000'000;

struct AntisymVerdict {
    Outcome outcome = Outcome::Inconclusive;
    std::optional<PartialBijection> witness;
    std::uint64_t generators = 0;  // enumerated before the search stopped
    std::uint64_t maps_explored = 0;
    std::uint64_t budget = 0;
};

AntisymVerdict strong_antisym_check(const LinearMScheme& sch, std::uint64_t budget = kDefaultAntisymBudget);

struct DepthBoundsReport {
    int m = 0;
    int span_dim = 0;
    size_t block_size = 0;  // smallest non-singleton level-1 block
    bool dim_bound = false;  // m < span_dim
    bool log_bound = false;  // 2^m <= |B|
    int dim_margin = 0;
    double log_margin = 0.0;

    bool holds() const { return dim_bound && log_bound; }
};

DepthBoundsReport depth_bounds_check(const LinearMScheme& sch, const AntisymVerdict& verdict);

struct HalvingResult {
    int block = -1;  // block id in level 1 of the scheme fibered at x
    size_t size = 0;
    size_t parent_size = 0;
};

// Block of y in the scheme fibered at x; asserts 1 < |B'| <= |B|/2.
HalvingResult halving_step(const LinearMScheme& sch, const AntisymVerdict& verdict, int block, Code x, Code y);

}  // namespace lms
