#pragma once

#include "lms/group_orbits.hpp"
#include "lms/refine.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lms::io {

// Insertion-ordered so every writer fixes its key order.
using Json = nlohmann::ordered_json;

// Two-space indentation with arrays of scalars kept on one line, and a
// trailing newline. Equal documents always produce equal bytes.
std::string canonical_dump(const Json& j);
Json parse_json(const std::string& text);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// ---- schemes and point sets --------------------------------------------------

// {"format":"lms-scheme","version":1,"ell","dim","m","S":[codes],
//  "levels":[{"k","blocks":[[tuple codes]]}]}; blocks in canonical order.
Json scheme_to_json(const LinearMScheme& sch);
// Checks field, S and that each level partitions S^k exactly; blocks may
// arrive in any order and are renumbered canonically.
LinearMScheme scheme_from_json(const Json& j);
LinearMScheme load_scheme(const std::string& path);
void save_scheme(const std::string& path, const LinearMScheme& sch);

Json point_set_to_json(const PointSet& s);
// Accepts {"ell","dim","points":[...]} or a bare array; each point is a code
// or a coordinate array.
PointSet point_set_from_json(const FieldSpec& f, const Json& j);

// Comma-separated codes, "all", "@path" (point-set JSON) or a JSON array.
PointSet parse_point_list(const FieldSpec& f, const std::string& text);
// Comma-separated codes kept in the given order.
Tuple parse_tuple(const FieldSpec& f, const std::string& text);

// ---- group specifications ------------------------------------------------------

struct GroupSpec {
    // "gl", "singer", "semilinear", "trivial" or "custom"
    std::string kind = "gl";
    std::optional<std::vector<int>> poly;
    std::vector<Matrix> generators;
};

Json group_spec_to_json(const GroupSpec& g);
GroupSpec group_spec_from_json(const FieldSpec& f, const Json& j);
// A kind name, "@path" to a JSON spec, or an inline JSON object.
GroupSpec parse_group_spec(const FieldSpec& f, const std::string& text);
MatrixGroup build_group(const FieldSpec& f, const GroupSpec& g);

Json matrix_to_json(const Matrix& m);

// ---- reports ------------------------------------------------------------------

Json tuple_to_json(const Tuple& t);
Json linmap_to_json(const LinMap& tau);
Json inequality_to_json(const Inequality& q);
// Ordered steps {lemma, branch, prefix, sizes, inequalities:[{label,lhs,op,rhs,holds,asserted}]}.
Json trace_to_json(const Trace& trace);

Json validation_to_json(const ValidationReport& r);
Json bijection_to_json(const PartialBijection& p);
Json verdict_to_json(const AntisymVerdict& v);
Json depth_bounds_to_json(const DepthBoundsReport& r);
Json depth_measure_to_json(const DepthMeasure& d);
Json key_lemma_to_json(const KeyLemmaResult& r);
Json certificate_to_json(const ConstructibleSet& c);
Json addcomb_to_json(const AddCombReport& r);
Json character_to_json(const Character& chi);
Json special_characters_to_json(const SpecialCharacters& s);
Json decomposition_to_json(const Decomposition& d);
Json shrink_to_json(const ShrinkOutcome& o);
Json partial_sumset_to_json(const PartialSumsetOutcome& o);
Json bsg_to_json(const BsgOutcome& o);
Json density_to_json(const DensityResult& r);

// ---- sweep tables -------------------------------------------------------------

struct DepthSweepRow {
    int m = 0;
    int block = 0;
    size_t block_size = 0;
    int span_dim = 0;
    std::string verdict;
    int count = 0;
    bool completed = false;
    bool log_bound = false;
    bool dim_bound = false;
};

std::string depth_sweep_csv(const std::vector<DepthSweepRow>& rows);

}  // namespace lms::io
