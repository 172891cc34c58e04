#include "lms/io.hpp"

#include "lms/errors.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lms::io {

namespace {

bool all_scalar(const Json& arr) {
    return std::all_of(arr.begin(), arr.end(), [](const Json& e) { return e.is_primitive(); });
}

void dump_into(const Json& j, int indent, std::string& out) {
    const std::string pad(static_cast<size_t>(indent) + 2, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            dump_into(it.value(), indent + 2, out);
        }
        out += "\n" + std::string(static_cast<size_t>(indent), ' ') + "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
        } else if (all_scalar(j)) {
            out += "[";
            for (size_t i = 0; i < j.size(); ++i) out += (i ? ", " : "") + j[i].dump();
            out += "]";
        } else {
            out += "[\n";
            for (size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                dump_into(j[i], indent + 2, out);
            }
            out += "\n" + std::string(static_cast<size_t>(indent), ' ') + "]";
        }
    } else {
        out += j.dump();
    }
}

template <class T>
T get_field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("field \"") + key + "\": " + e.what());
    }
}

Code point_from_json(const FieldSpec& f, const Json& p) {
    if (p.is_number_unsigned() || p.is_number_integer()) {
        auto v = p.get<std::int64_t>();
        if (v < 0 || static_cast<std::uint64_t>(v) >= f.size())
            throw IndexOutOfRange("point code " + std::to_string(v) + " outside V");
        return static_cast<Code>(v);
    }
    if (p.is_array()) {
        if (static_cast<int>(p.size()) != f.dim()) throw ArityMismatch("coordinate vector has the wrong length");
        Point c;
        for (const auto& x : p) {
            if (!x.is_number_integer()) throw InputError("coordinates must be integers");
            c.push_back(f.reduce(x.get<long long>()));
        }
        return f.encode(c);
    }
    throw InputError("a point is a code or a coordinate array");
}

// Type errors inside a well-formed document are input errors too.
template <class F>
auto guarded(F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("unexpected JSON shape: ") + e.what());
    }
}

Json rational_json(const Rational& r) { return to_string(r); }

Json sizes_json(const std::vector<std::pair<std::string, std::string>>& sizes) {
    Json o = Json::object();
    for (const auto& [k, v] : sizes) o[k] = v;
    return o;
}

Json codes_json(const std::vector<Code>& v) {
    Json a = Json::array();
    for (Code c : v) a.push_back(c);
    return a;
}

Json block_set_json(const BlockSet& s) {
    Json o;
    o["k"] = s.k;
    o["ids"] = s.ids;
    return o;
}

Json block_ref_json(BlockRef b) {
    Json o;
    o["level"] = b.level;
    o["block"] = b.block;
    return o;
}

}  // namespace

std::string canonical_dump(const Json& j) {
    std::string out;
    dump_into(j, 0, out);
    out += "\n";
    return out;
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("write failed for " + path);
}

// ---- schemes -------------------------------------------------------------------

Json scheme_to_json(const LinearMScheme& sch) {
    Json j;
    j["format"] = "lms-scheme";
    j["version"] = 1;
    j["ell"] = sch.field().ell();
    j["dim"] = sch.field().dim();
    j["m"] = sch.m;
    j["S"] = codes_json(sch.inst.S.members);
    Json levels = Json::array();
    for (int k = 1; k <= sch.m; ++k) {
        Json lv;
        lv["k"] = k;
        Json blocks = Json::array();
        for (const auto& b : sch.level(k).blocks) blocks.push_back(codes_json(b));
        lv["blocks"] = std::move(blocks);
        levels.push_back(std::move(lv));
    }
    j["levels"] = std::move(levels);
    return j;
}

LinearMScheme scheme_from_json(const Json& j) {
    return guarded([&] {
        if (!j.is_object()) throw InputError("scheme file must hold a JSON object");
        if (j.contains("format") && j.at("format") != "lms-scheme") throw InputError("not an lms-scheme document");
        FieldSpec f(get_field<int>(j, "ell"), get_field<int>(j, "dim"));
        const int m = get_field<int>(j, "m");
        if (m < 1) throw InputError("m must be positive");
        if (!j.contains("S") || !j.at("S").is_array()) throw InputError("missing array \"S\"");
        std::vector<Code> pts;
        for (const auto& p : j.at("S")) pts.push_back(point_from_json(f, p));
        PointSet S(f, pts);
        if (S.size() != pts.size()) throw InputError("S lists a point twice");
        if (S.empty()) throw EmptyReference("S is empty");

        LinearMScheme sch;
        sch.inst = SchemeInstance(S);
        sch.m = m;
        if (!j.contains("levels") || !j.at("levels").is_array()) throw InputError("missing array \"levels\"");
        const Json& levels = j.at("levels");
        if (static_cast<int>(levels.size()) != m) throw ArityMismatch("expected " + std::to_string(m) + " levels");
        for (int k = 1; k <= m; ++k) {
            const Json& lv = levels.at(static_cast<size_t>(k - 1));
            if (get_field<int>(lv, "k") != k) throw InputError("levels must be listed in order k=1..m");
            std::vector<std::int64_t> labels(f.tuple_space(k), -1);
            std::int64_t id = 0;
            for (const auto& blk : lv.at("blocks")) {
                if (!blk.is_array() || blk.empty()) throw InputError("level " + std::to_string(k) + " has an empty block");
                for (const auto& c : blk) {
                    auto code = c.get<std::uint64_t>();
                    if (code >= labels.size()) throw IndexOutOfRange("tuple code " + std::to_string(code) + " outside V^k");
                    Tuple t = decode_tuple(f, code, k);
                    for (Code p : t.pts)
                        if (!S.contains(p))
                            throw InputError("level " + std::to_string(k) + " tuple " + std::to_string(code) + " leaves S^k");
                    if (labels[code] != -1)
                        throw InputError("level " + std::to_string(k) + " tuple " + std::to_string(code) + " lies in two blocks");
                    labels[code] = id;
                }
                ++id;
            }
            sch.levels.push_back(make_partition(k, labels));
        }
        check_structure(sch);
        return sch;
    });
}

LinearMScheme load_scheme(const std::string& path) { return scheme_from_json(parse_json(read_text(path))); }

void save_scheme(const std::string& path, const LinearMScheme& sch) {
    write_text(path, canonical_dump(scheme_to_json(sch)));
}

Json point_set_to_json(const PointSet& s) {
    Json j;
    j["ell"] = s.field.ell();
    j["dim"] = s.field.dim();
    j["points"] = codes_json(s.members);
    return j;
}

PointSet point_set_from_json(const FieldSpec& f, const Json& j) {
    return guarded([&] {
        const Json* arr = &j;
        if (j.is_object()) {
            if (get_field<int>(j, "ell") != f.ell() || get_field<int>(j, "dim") != f.dim())
                throw FieldMismatch("point set was written for a different field");
            arr = &j.at("points");
        }
        if (!arr->is_array()) throw InputError("point set must be an array");
        std::vector<Code> pts;
        for (const auto& p : *arr) pts.push_back(point_from_json(f, p));
        return PointSet(f, std::move(pts));
    });
}

PointSet parse_point_list(const FieldSpec& f, const std::string& text) {
    if (text == "all") return full_space(f);
    if (!text.empty() && text[0] == '@') return point_set_from_json(f, parse_json(read_text(text.substr(1))));
    if (!text.empty() && text[0] == '[') return point_set_from_json(f, parse_json(text));
    return PointSet(f, parse_tuple(f, text).pts);
}

Tuple parse_tuple(const FieldSpec& f, const std::string& text) {
    Tuple t;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
        if (item[0] == '-' || item[0] == '+') throw InputError("not a point code: \"" + item + "\"");
        size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            throw InputError("not a point code: \"" + item + "\"");
        }
        if (used != item.size()) throw InputError("not a point code: \"" + item + "\"");
        if (v >= f.size()) throw IndexOutOfRange("point code " + item + " outside V");
        t.pts.push_back(v);
    }
    return t;
}

// ---- groups ----------------------------------------------------------------------

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows; ++i) {
        Json r = Json::array();
        for (int j = 0; j < m.cols; ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

Json group_spec_to_json(const GroupSpec& g) {
    Json j;
    j["kind"] = g.kind;
    if (g.poly) j["poly"] = *g.poly;
    if (!g.generators.empty()) {
        Json gens = Json::array();
        for (const auto& m : g.generators) gens.push_back(matrix_to_json(m));
        j["generators"] = std::move(gens);
    }
    return j;
}

GroupSpec group_spec_from_json(const FieldSpec& f, const Json& j) {
    return guarded([&] {
        GroupSpec g;
        g.kind = get_field<std::string>(j, "kind");
        if (j.contains("poly")) g.poly = get_field<std::vector<int>>(j, "poly");
        if (j.contains("generators")) {
            for (const auto& mj : j.at("generators")) {
                if (!mj.is_array() || static_cast<int>(mj.size()) != f.dim())
                    throw ArityMismatch("generator must have dim rows");
                Matrix m(f.dim(), f.dim());
                for (int r = 0; r < f.dim(); ++r) {
                    const Json& row = mj.at(static_cast<size_t>(r));
                    if (!row.is_array() || static_cast<int>(row.size()) != f.dim())
                        throw ArityMismatch("generator must have dim columns");
                    for (int c = 0; c < f.dim(); ++c) m(r, c) = f.reduce(row.at(static_cast<size_t>(c)).get<long long>());
                }
                g.generators.push_back(std::move(m));
            }
        }
        if (g.kind == "custom" && !j.contains("generators")) throw InputError("custom group needs \"generators\"");
        return g;
    });
}

GroupSpec parse_group_spec(const FieldSpec& f, const std::string& text) {
    if (!text.empty() && text[0] == '@') return group_spec_from_json(f, parse_json(read_text(text.substr(1))));
    if (!text.empty() && text[0] == '{') return group_spec_from_json(f, parse_json(text));
    GroupSpec g;
    g.kind = text;
    return g;
}

MatrixGroup build_group(const FieldSpec& f, const GroupSpec& g) {
    if (g.kind == "gl") return gl_group(f);
    if (g.kind == "singer") return singer_group(f, g.poly);
    if (g.kind == "semilinear") return semilinear_group(f, g.poly);
    if (g.kind == "trivial") return trivial_group(f);
    if (g.kind == "custom") return make_group(f, g.generators);
    throw InputError("unknown group kind \"" + g.kind + "\" (gl, singer, semilinear, trivial, custom)");
}

// ---- reports -----------------------------------------------------------------------

Json tuple_to_json(const Tuple& t) { return codes_json(t.pts); }

Json linmap_to_json(const LinMap& tau) {
    Json j;
    j["src_arity"] = tau.src_arity;
    j["dst_arity"] = tau.dst_arity;
    j["coeffs"] = tau.coeffs;
    return j;
}

Json inequality_to_json(const Inequality& q) {
    Json j;
    j["label"] = q.label;
    j["lhs"] = q.lhs;
    j["op"] = q.op;
    j["rhs"] = q.rhs;
    j["holds"] = q.holds;
    j["asserted"] = q.asserted;
    return j;
}

Json trace_to_json(const Trace& trace) {
    Json arr = Json::array();
    for (const auto& st : trace) {
        Json s;
        s["lemma"] = st.lemma;
        s["branch"] = st.branch;
        s["prefix"] = tuple_to_json(st.prefix);
        s["sizes"] = sizes_json(st.sizes);
        Json qs = Json::array();
        for (const auto& q : st.inequalities) qs.push_back(inequality_to_json(q));
        s["inequalities"] = std::move(qs);
        arr.push_back(std::move(s));
    }
    return arr;
}

Json validation_to_json(const ValidationReport& r) {
    Json j;
    j["valid"] = r.valid();
    j["partial"] = r.partial;
    j["truncated"] = r.truncated;
    j["violation_count"] = r.violations.size();
    Json vs = Json::array();
    for (const auto& v : r.violations) {
        Json o;
        o["axiom"] = v.axiom;
        o["k"] = v.k;
        o["k2"] = v.k2;
        o["tau"] = to_string(v.tau);
        o["block"] = v.block;
        o["block2"] = v.block2;
        o["witnesses"] = codes_json(v.witnesses);
        o["detail"] = v.detail;
        vs.push_back(std::move(o));
    }
    j["violations"] = std::move(vs);
    Json cov = Json::array();
    for (const auto& c : r.coverage) {
        Json o;
        o["k"] = c.k;
        o["k2"] = c.k2;
        o["maps_checked"] = c.maps_checked;
        o["maps_total"] = c.maps_total;
        cov.push_back(std::move(o));
    }
    j["coverage"] = std::move(cov);
    return j;
}

Json bijection_to_json(const PartialBijection& p) {
    Json j;
    j["src"] = block_ref_json(p.src);
    j["dst"] = block_ref_json(p.dst);
    j["mapping"] = p.mapping;
    j["word_length"] = p.word.size();
    Json word = Json::array();
    for (const auto& s : p.word) {
        Json o;
        o["tau"] = to_string(s.tau);
        o["dir"] = s.dir == Direction::Fwd ? "fwd" : "inv";
        o["src"] = block_ref_json(s.src);
        o["dst"] = block_ref_json(s.dst);
        word.push_back(std::move(o));
    }
    j["word"] = std::move(word);
    return j;
}

Json verdict_to_json(const AntisymVerdict& v) {
    Json j;
    j["verdict"] = to_string(v.outcome);
    j["generators"] = v.generators;
    j["maps_explored"] = v.maps_explored;
    j["budget"] = v.budget;
    j["witness"] = v.witness ? bijection_to_json(*v.witness) : Json(nullptr);
    return j;
}

Json depth_bounds_to_json(const DepthBoundsReport& r) {
    Json j;
    j["m"] = r.m;
    j["span_dim"] = r.span_dim;
    j["block_size"] = r.block_size;
    j["dim_bound"] = r.dim_bound;
    j["log_bound"] = r.log_bound;
    j["dim_margin"] = r.dim_margin;
    j["log_margin"] = r.log_margin;
    return j;
}

Json depth_measure_to_json(const DepthMeasure& d) {
    Json j;
    j["count"] = d.count;
    j["completed"] = d.completed;
    j["block_size"] = d.block_size;
    j["span_dim"] = d.span_dim;
    j["log_bound"] = d.log_bound;
    j["dim_bound"] = d.dim_bound;
    Json steps = Json::array();
    for (const auto& s : d.steps) {
        Json o;
        o["point"] = s.point;
        o["size_before"] = s.size_before;
        o["size_after"] = s.size_after;
        o["depth_before"] = s.depth_before;
        steps.push_back(std::move(o));
    }
    j["steps"] = std::move(steps);
    return j;
}

Json shrink_to_json(const ShrinkOutcome& o) {
    Json j;
    j["case"] = o.case_tag;
    j["prefix"] = tuple_to_json(o.prefix);
    j["result_set"] = block_set_json(o.result_set);
    j["points"] = codes_json(o.points);
    j["block_size"] = o.block_size;
    j["result_size"] = o.result_size;
    j["min_ratio"] = rational_json(o.min_ratio());
    j["trace"] = trace_to_json(o.trace);
    return j;
}

Json key_lemma_to_json(const KeyLemmaResult& r) {
    Json j;
    j["capped"] = r.capped;
    Json levels = Json::array();
    for (const auto& l : r.levels) {
        Json o;
        o["prefix_len"] = l.prefix_len;
        o["prefixes"] = l.prefixes;
        o["best"] = rational_json(l.best);
        o["outcome"] = l.outcome ? shrink_to_json(*l.outcome) : Json(nullptr);
        levels.push_back(std::move(o));
    }
    j["levels"] = std::move(levels);
    j["best"] = r.best ? shrink_to_json(*r.best) : Json(nullptr);
    return j;
}

Json certificate_to_json(const ConstructibleSet& c) {
    Json j;
    j["k"] = c.k;
    j["prefix"] = tuple_to_json(c.prefix);
    j["points"] = codes_json(c.points.members);
    Json entries = Json::array();
    for (const auto& e : c.certificate) {
        Json o;
        o["tau"] = to_string(e.tau);
        o["block"] = e.block;
        o["prefix"] = tuple_to_json(e.prefix);
        entries.push_back(std::move(o));
    }
    j["certificate"] = std::move(entries);
    return j;
}

Json addcomb_to_json(const AddCombReport& r) {
    Json j;
    j["size"] = r.size;
    j["sumset_size"] = r.sumset_size;
    j["subgroup_size"] = r.subgroup_size;
    j["mu"] = rational_json(r.mu);
    j["energy"] = r.energy;
    j["covering_number"] = r.covering;
    j["covering_bound"] = r.covering_bound;
    Json fr;
    fr["name"] = r.freiman_ruzsa.name;
    fr["pass"] = r.freiman_ruzsa.pass;
    fr["astronomical"] = r.freiman_ruzsa.astronomical;
    fr["K"] = rational_json(r.freiman_ruzsa.K);
    fr["lhs"] = r.freiman_ruzsa.lhs;
    fr["rhs"] = r.freiman_ruzsa.rhs;
    j["freiman_ruzsa"] = std::move(fr);
    return j;
}

Json character_to_json(const Character& chi) {
    Json j;
    j["index"] = chi.index();
    j["dual"] = chi.dual;
    return j;
}

Json special_characters_to_json(const SpecialCharacters& s) {
    Json j;
    j["group_rank"] = s.group.rank();
    j["group_basis"] = codes_json(s.group.basis());
    j["heavy"] = s.heavy;
    j["max_nontrivial"] = s.max_nontrivial;
    Json chars = Json::array();
    for (const auto& c : s.chars) {
        Json o = character_to_json(c.chi);
        o["magnitude"] = c.magnitude;
        o["kernel"] = codes_json(c.kernel.members);
        o["certificate"] = certificate_to_json(c.certificate);
        chars.push_back(std::move(o));
    }
    j["chars"] = std::move(chars);
    return j;
}

Json decomposition_to_json(const Decomposition& d) {
    Json j;
    j["trivial_gate"] = d.trivial_gate;
    j["max_nontrivial"] = d.max_nontrivial;
    j["t"] = d.t;
    j["special"] = special_characters_to_json(d.special);
    if (!d.trivial_gate) {
        j["H"] = codes_json(d.h.members);
        j["H_certificate"] = certificate_to_json(d.h_certificate);
        Json leaves = Json::array();
        for (const auto& w : d.sunflower) leaves.push_back(codes_json(w.members));
        j["sunflower"] = std::move(leaves);
        j["leaf_counts"] = d.leaf_counts;
        j["leaf_bound_exponent"] = d.leaf_bound_exponent;
        Json p7;
        p7["tested"] = d.property7.tested;
        p7["hypothesis_met"] = d.property7.hypothesis_met;
        p7["held"] = d.property7.held;
        p7["held_when_met"] = d.property7.held_when_met;
        j["property7"] = std::move(p7);
    }
    j["trace"] = trace_to_json(d.trace);
    return j;
}

Json partial_sumset_to_json(const PartialSumsetOutcome& o) {
    Json j;
    j["status"] = o.status;
    j["k"] = o.k;
    j["A"] = block_ref_json(o.a);
    j["A_size"] = o.a_size;
    j["A_prime"] = codes_json(o.a_prime);
    j["A_prime_sumset"] = o.a_prime_sumset;
    j["shrink"] = o.shrink ? shrink_to_json(*o.shrink) : Json(nullptr);
    j["trace"] = trace_to_json(o.trace);
    return j;
}

Json bsg_to_json(const BsgOutcome& o) {
    Json j;
    j["x0"] = o.x0;
    j["result_set"] = block_set_json(o.result_set);
    j["points"] = codes_json(o.points);
    j["energy"] = o.energy;
    j["n_common"] = o.n_common;
    j["difference_size"] = o.difference_size;
    j["min_representations"] = o.min_representations ? Json(o.min_representations->str()) : Json(nullptr);
    j["trace"] = trace_to_json(o.trace);
    return j;
}

Json density_to_json(const DensityResult& r) {
    Json j;
    j["status"] = r.status;
    j["stop_reason"] = r.stop_reason;
    j["outcome"] = r.outcome ? shrink_to_json(*r.outcome) : Json(nullptr);
    j["trace"] = trace_to_json(r.trace);
    return j;
}

std::string depth_sweep_csv(const std::vector<DepthSweepRow>& rows) {
    std::ostringstream os;
    os << "m,block,block_size,span_dim,verdict,count,completed,log_bound,dim_bound\n";
    for (const auto& r : rows)
        os << r.m << ',' << r.block << ',' << r.block_size << ',' << r.span_dim << ',' << r.verdict << ',' << r.count
           << ',' << (r.completed ? 1 : 0) << ',' << (r.log_bound ? 1 : 0) << ',' << (r.dim_bound ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace lms::io
