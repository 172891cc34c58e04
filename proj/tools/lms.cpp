// Command-line driver: one subcommand per module, a JSON report (stdout or
// --report) and a short human summary on stderr.

#include "lms/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

using lms::io::Json;

struct Options {
    // field and group
    int ell = 2;
    int dim = 3;
    std::string group = "gl";
    std::string seed_set = "1";
    int m = 2;
    bool skip_validate = false;
    // inputs and outputs
    std::string scheme;
    std::string out;
    std::string report;
    std::uint64_t cap = 0;
    // module parameters
    std::string fix;
    int block = -1;
    int a_level = 1;
    int a_block = -1;
    std::string lemma = "weak";
    std::string K = "4";
    int k = 1;
    int k_test = 1;
    int r = 1;
    int max_prefix = 2;
    std::string eps = "1/4";
    std::string eps_prime;
    std::string gamma = "1/4";
    std::uint64_t budget = lms::kDefaultAntisymBudget;
    std::uint64_t sample = 0;
    bool relaxed = false;
    bool full_p7 = false;
};

// Every flag is turned into a typed value here, before any computation.
struct Parsed {
    lms::Rational K, eps, eps_prime, gamma;
    bool eps_prime_given = false;
};

Parsed parse_params(const Options& o) {
    Parsed p;
    p.K = lms::parse_rational(o.K);
    p.eps = lms::parse_rational(o.eps);
    p.gamma = lms::parse_rational(o.gamma);
    if (!o.eps_prime.empty()) {
        p.eps_prime = lms::parse_rational(o.eps_prime);
        p.eps_prime_given = true;
    }
    if (p.K <= 0) throw lms::InputError("--K must be positive");
    if (p.eps <= 0) throw lms::InputError("--eps must be positive");
    if (p.gamma <= 0 || p.gamma > 1) throw lms::InputError("--gamma must lie in (0,1]");
    if (p.eps_prime_given && p.eps_prime <= 0) throw lms::InputError("--eps-prime must be positive");
    if (o.k < 1) throw lms::InputError("--k must be positive");
    if (o.r < 1) throw lms::InputError("--r must be positive");
    if (o.m < 1) throw lms::InputError("--m must be positive");
    return p;
}

int block_or_default(const lms::LinearMScheme& sch, int b) {
    const auto& blocks = sch.level(1).blocks;
    if (b >= 0) {
        if (static_cast<size_t>(b) >= blocks.size())
            throw lms::IndexOutOfRange("--block " + std::to_string(b) + " out of range (" + std::to_string(blocks.size()) +
                                       " level-1 blocks)");
        return b;
    }
    // Largest level-1 block; ties to the lower id.
    int best = 0;
    for (size_t i = 1; i < blocks.size(); ++i)
        if (blocks[i].size() > blocks[static_cast<size_t>(best)].size()) best = static_cast<int>(i);
    return best;
}

Json scheme_summary(const lms::LinearMScheme& sch) {
    Json j;
    j["ell"] = sch.field().ell();
    j["dim"] = sch.field().dim();
    j["m"] = sch.m;
    j["n"] = sch.inst.n();
    j["span_dim"] = sch.inst.span_dim;
    Json counts = Json::array();
    for (int k = 1; k <= sch.m; ++k) counts.push_back(sch.level(k).num_blocks());
    j["block_counts"] = std::move(counts);
    return j;
}

std::string counts_str(const lms::LinearMScheme& sch) {
    std::string s;
    for (int k = 1; k <= sch.m; ++k) s += (k > 1 ? " " : "") + std::to_string(sch.level(k).num_blocks());
    return s;
}

class Runner {
public:
    explicit Runner(const Options& o) : o_(o) {}

    int run(const std::string& cmd) {
        Parsed p = parse_params(o_);
        Json result;
        bool failed_conclusion = false;
        if (cmd == "gen-orbit") result = gen_orbit();
        else if (cmd == "validate") result = validate(failed_conclusion);
        else if (cmd == "antisym") result = antisym();
        else if (cmd == "fiber") result = fiber();
        else if (cmd == "depth") result = depth();
        else if (cmd == "addcomb") result = addcomb();
        else if (cmd == "fourier") result = fourier(p);
        else if (cmd == "decompose") result = decompose(p, failed_conclusion);
        else if (cmd == "shrink") result = shrink(p, failed_conclusion);
        Json report;
        report["command"] = cmd;
        report["result"] = std::move(result);
        report["exit_code"] = failed_conclusion ? 4 : 0;
        emit(report);
        return failed_conclusion ? 4 : 0;
    }

private:
    const Options& o_;

    void emit(const Json& report) const {
        std::string text = lms::io::canonical_dump(report);
        if (o_.report.empty()) std::cout << text;
        else lms::io::write_text(o_.report, text);
    }

    lms::LinearMScheme load() const {
        if (o_.scheme.empty()) throw lms::InputError("a scheme file is required");
        return lms::io::load_scheme(o_.scheme);
    }

    static void summary(const std::string& line) { std::cerr << line << "\n"; }

    Json gen_orbit() const {
        lms::FieldSpec f(o_.ell, o_.dim);
        lms::io::GroupSpec spec = lms::io::parse_group_spec(f, o_.group);
        lms::PointSet seed = lms::io::parse_point_list(f, o_.seed_set);
        lms::MatrixGroup g = lms::io::build_group(f, spec);
        lms::PointSet S = lms::default_support(g, seed);
        if (S.empty()) throw lms::EmptyReference("the seed set closes to {0} only");
        lms::OrbitScheme os = lms::build_orbit_scheme(g, S, o_.m, !o_.skip_validate);
        std::string text = lms::io::canonical_dump(lms::io::scheme_to_json(os.scheme));
        if (o_.out.empty()) std::cout << text;
        else lms::io::write_text(o_.out, text);
        Json j;
        j["group"] = lms::io::group_spec_to_json(spec);
        j["group_order"] = lms::group_order(g);
        j["validated"] = !o_.skip_validate;
        j["scheme"] = scheme_summary(os.scheme);
        summary("gen-orbit: |G|=" + std::to_string(lms::group_order(g)) + " n=" + std::to_string(S.size()) +
                " blocks per level: " + counts_str(os.scheme));
        return j;
    }

    Json validate(bool& failed) const {
        lms::LinearMScheme sch = load();
        lms::ValidationOptions vo;
        vo.sample_maps = o_.sample;
        lms::ValidationReport r = lms::validate_axioms(sch, vo);
        failed = !r.violations.empty();
        Json j;
        j["scheme"] = scheme_summary(sch);
        j["validation"] = lms::io::validation_to_json(r);
        summary(std::string("validate: ") + (r.valid() ? "valid" : r.violations.empty() ? "partial (sampled)" : "INVALID") +
                ", violations=" + std::to_string(r.violations.size()));
        return j;
    }

    Json antisym() const {
        lms::LinearMScheme sch = load();
        lms::AntisymVerdict v = lms::strong_antisym_check(sch, o_.budget);
        Json j;
        j["scheme"] = scheme_summary(sch);
        j["antisym"] = lms::io::verdict_to_json(v);
        std::string line = std::string("antisym: ") + lms::to_string(v.outcome);
        if (v.witness) line += ", witness word length " + std::to_string(v.witness->word.size());
        summary(line);
        return j;
    }

    Json fiber() const {
        lms::LinearMScheme sch = load();
        lms::Tuple x = lms::io::parse_tuple(sch.field(), o_.fix);
        if (x.pts.empty()) throw lms::InputError("--fix needs at least one point");
        lms::LinearMScheme fib = lms::fiber_restrict(sch, x);
        lms::ValidationReport r = lms::validate_axioms(fib);
        if (!o_.out.empty()) lms::io::save_scheme(o_.out, fib);
        Json j;
        j["prefix"] = lms::io::tuple_to_json(x);
        j["fibered"] = scheme_summary(fib);
        j["validation"] = lms::io::validation_to_json(r);
        summary("fiber: depth " + std::to_string(fib.m) + ", blocks per level: " + counts_str(fib) +
                (r.valid() ? ", valid" : ", INVALID"));
        if (!r.violations.empty()) throw lms::AssertFailed("fibered scheme violates the axioms");
        return j;
    }

    Json depth() const {
        lms::LinearMScheme sch = load();
        lms::AntisymVerdict v = lms::strong_antisym_check(sch, o_.budget);
        if (v.outcome != lms::Outcome::Antisymmetric)
            throw lms::PreconditionUnmet("strongly antisymmetric", std::string("verdict is ") + lms::to_string(v.outcome));
        Json j;
        j["scheme"] = scheme_summary(sch);
        j["antisym"] = lms::io::verdict_to_json(v);
        j["bounds"] = lms::io::depth_bounds_to_json(lms::depth_bounds_check(sch, v));
        std::vector<lms::io::DepthSweepRow> rows;
        Json blocks = Json::array();
        const auto& lv = sch.level(1).blocks;
        for (size_t b = 0; b < lv.size(); ++b) {
            if (o_.block >= 0 && static_cast<int>(b) != o_.block) continue;
            if (lv[b].size() < 2) continue;
            lms::DepthMeasure d = lms::depth_measure(sch, static_cast<int>(b), v);
            Json e = lms::io::depth_measure_to_json(d);
            e["block"] = b;
            blocks.push_back(std::move(e));
            rows.push_back({sch.m, static_cast<int>(b), d.block_size, d.span_dim, lms::to_string(v.outcome), d.count,
                            d.completed, d.log_bound, d.dim_bound});
        }
        j["measures"] = std::move(blocks);
        if (!o_.out.empty()) lms::io::write_text(o_.out, lms::io::depth_sweep_csv(rows));
        summary("depth: " + std::to_string(rows.size()) + " non-singleton block(s) measured");
        return j;
    }

    Json addcomb() const {
        lms::FieldSpec f(o_.ell, o_.dim);
        lms::PointSet a = lms::io::parse_point_list(f, o_.seed_set);
        if (a.empty()) throw lms::EmptyReference("--seed-set is empty");
        lms::AddCombReport r = lms::addcomb_report(a);
        lms::CertificateReport pl = lms::check_plunnecke(a, a, o_.k);
        Json j;
        j["set"] = lms::io::point_set_to_json(a);
        j["report"] = lms::io::addcomb_to_json(r);
        Json pj;
        pj["k"] = o_.k;
        pj["pass"] = pl.pass;
        pj["K"] = lms::to_string(pl.K);
        pj["lhs"] = pl.lhs;
        pj["rhs"] = pl.rhs;
        j["plunnecke"] = std::move(pj);
        summary("addcomb: |A|=" + std::to_string(r.size) + " |A+A|=" + std::to_string(r.sumset_size) +
                " E=" + std::to_string(r.energy) + " h=" + std::to_string(r.covering));
        if (!r.freiman_ruzsa.pass || !pl.pass) throw lms::AssertFailed("sumset certificate fails");
        return j;
    }

    Json fourier(const Parsed& p) const {
        lms::FieldSpec f(o_.ell, o_.dim);
        lms::PointSet b = lms::io::parse_point_list(f, o_.seed_set);
        if (b.empty()) throw lms::EmptyReference("--seed-set is empty");
        lms::SubgroupBasis g = lms::SubgroupBasis::span_of(b);
        lms::FourierTable t = lms::fourier_table(b, g);
        double parseval = lms::parseval_check(b, g);
        double inversion = lms::inversion_residual(b, g);
        Json j;
        j["set"] = lms::io::point_set_to_json(b);
        j["group_rank"] = g.rank();
        j["parseval_residual"] = parseval;
        j["inversion_residual"] = inversion;
        Json heavy = Json::array();
        for (const auto& chi : lms::heavy_characters(b, p.eps, g)) heavy.push_back(lms::io::character_to_json(chi));
        j["eps"] = lms::to_string(p.eps);
        j["heavy"] = std::move(heavy);
        if (!o_.out.empty()) lms::io::write_text(o_.out, lms::coeff_csv(t));
        summary("fourier: rank " + std::to_string(g.rank()) + ", " + std::to_string(j["heavy"].size()) +
                " heavy character(s)");
        if (parseval > 1e-9 || inversion > 1e-9) throw lms::AssertFailed("Fourier residual above 1e-9");
        return j;
    }

    Json decompose(const Parsed& p, bool& failed) const {
        lms::LinearMScheme sch = load();
        int b = block_or_default(sch, o_.block);
        lms::DecomposeOptions d;
        d.k_test = o_.k_test;
        d.full_property7 = o_.full_p7;
        d.relaxed = o_.relaxed;
        lms::Rational eps_prime = p.eps_prime_given ? p.eps_prime : p.eps;
        lms::Decomposition dec = lms::decompose(sch, b, o_.k, eps_prime, d);
        failed = lms::any_conclusion_fails(dec.trace);
        Json j;
        j["block"] = b;
        j["k_prime"] = o_.k;
        j["eps_prime"] = lms::to_string(eps_prime);
        j["decomposition"] = lms::io::decomposition_to_json(dec);
        summary(dec.trivial_gate ? std::string("decompose: TrivialGate (no special characters)")
                                 : "decompose: |X|=" + std::to_string(dec.special.chars.size()) +
                                       " |H|=" + std::to_string(dec.h.size()) +
                                       " leaves=" + std::to_string(dec.sunflower.size()));
        return j;
    }

    Json shrink(const Parsed& p, bool& failed) const {
        lms::LinearMScheme sch = load();
        int b = block_or_default(sch, o_.block);
        Json j;
        j["lemma"] = o_.lemma;
        j["block"] = b;
        j["K"] = lms::to_string(p.K);
        if (o_.lemma == "weak") {
            lms::BlockRef a{o_.a_level, o_.a_block >= 0 ? o_.a_block : (o_.a_level == 1 ? b : 0)};
            lms::ShrinkOutcome s = lms::shrink_weak(sch, b, a, p.K, o_.relaxed);
            failed = lms::any_conclusion_fails(s.trace);
            j["outcome"] = lms::io::shrink_to_json(s);
            summary("shrink weak: " + s.case_tag + ", |B'|=" + std::to_string(s.result_size) + " of " +
                    std::to_string(s.block_size));
        } else if (o_.lemma == "partial") {
            lms::PartialSumsetOutcome s = lms::partial_sumset_search(sch, b, p.K, o_.relaxed);
            failed = lms::any_conclusion_fails(s.trace);
            j["outcome"] = lms::io::partial_sumset_to_json(s);
            summary("shrink partial: " + s.status + " at k=" + std::to_string(s.k));
        } else if (o_.lemma == "bsg") {
            lms::BsgOutcome s = lms::bsg_extract(sch, b, p.gamma);
            failed = lms::any_conclusion_fails(s.trace);
            j["outcome"] = lms::io::bsg_to_json(s);
            summary("shrink bsg: |B'|=" + std::to_string(s.points.size()) + " |B'-B'|=" + std::to_string(s.difference_size));
        } else if (o_.lemma == "density") {
            lms::RefineParams rp;
            rp.K = p.K;
            rp.k = o_.k;
            rp.r = o_.r;
            rp.eps = p.eps;
            if (p.eps_prime_given) rp.eps_prime = p.eps_prime;
            rp.gamma = p.gamma;
            rp.relaxed = o_.relaxed;
            lms::DensityResult s = lms::density_reduce(sch, b, rp);
            failed = lms::any_conclusion_fails(s.trace);
            j["outcome"] = lms::io::density_to_json(s);
            summary("shrink density: " + s.status + (s.stop_reason.empty() ? "" : " (" + s.stop_reason + ")"));
        } else if (o_.lemma == "key") {
            lms::KeyLemmaOptions ko;
            ko.max_prefix_len = o_.max_prefix;
            ko.antisym_budget = o_.budget;
            lms::KeyLemmaResult s = lms::key_lemma_search(sch, b, ko);
            j["outcome"] = lms::io::key_lemma_to_json(s);
            summary("shrink key: best min{|B'|,|B|/|B'|} = " +
                    (s.best ? lms::to_string(s.best->min_ratio()) : std::string("1")));
        } else {
            throw lms::InputError("--lemma must be one of weak, partial, bsg, density, key");
        }
        return j;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear m-scheme toolkit"};
    app.require_subcommand(1);
    Options o;

    auto field_opts = [&](CLI::App* s) {
        s->add_option("--ell", o.ell, "field characteristic (prime)");
        s->add_option("--dim", o.dim, "dimension of V");
    };
    auto common = [&](CLI::App* s) {
        s->add_option("--report", o.report, "JSON report path (default stdout)");
        s->add_option("--cap", o.cap, "tuple-space cap (overrides LMS_CAP_TUPLES)");
    };
    auto scheme_in = [&](CLI::App* s) { s->add_option("scheme", o.scheme, "scheme JSON file")->required(); };
    auto refine_opts = [&](CLI::App* s) {
        s->add_option("--block", o.block, "level-1 block id (default: largest)");
        s->add_option("--K", o.K, "K (rational)");
        s->add_option("--k", o.k, "k");
        s->add_option("--eps", o.eps, "eps (rational)");
        s->add_option("--eps-prime", o.eps_prime, "eps' (rational)");
        s->add_option("--gamma", o.gamma, "gamma (rational)");
        s->add_flag("--relaxed", o.relaxed, "record unmet asymptotic preconditions instead of aborting");
    };

    CLI::App* gen = app.add_subcommand("gen-orbit", "orbit scheme of a matrix group");
    field_opts(gen);
    gen->add_option("--group", o.group, "gl | singer | semilinear | trivial | @spec.json | {json}");
    gen->add_option("--seed-set", o.seed_set, "point codes, 'all', @file or JSON array");
    gen->add_option("--m", o.m, "depth");
    gen->add_option("--out", o.out, "scheme output path (default stdout)");
    gen->add_flag("--skip-validate", o.skip_validate, "skip the exhaustive axiom check");
    common(gen);

    CLI::App* val = app.add_subcommand("validate", "check the scheme axioms");
    scheme_in(val);
    val->add_option("--sample", o.sample, "sample this many maps per family instead of enumerating");
    common(val);

    CLI::App* anti = app.add_subcommand("antisym", "strong antisymmetry check");
    scheme_in(anti);
    anti->add_option("--budget", o.budget, "exploration budget");
    common(anti);

    CLI::App* fib = app.add_subcommand("fiber", "fix a prefix tuple");
    scheme_in(fib);
    fib->add_option("--fix", o.fix, "comma-separated prefix point codes")->required();
    fib->add_option("--out", o.out, "fibered scheme output path");
    common(fib);

    CLI::App* dep = app.add_subcommand("depth", "depth measurement per block");
    scheme_in(dep);
    dep->add_option("--budget", o.budget, "antisymmetry budget");
    dep->add_option("--block", o.block, "only this level-1 block");
    dep->add_option("--out", o.out, "CSV sweep output path");
    common(dep);

    CLI::App* add = app.add_subcommand("addcomb", "additive statistics of a point set");
    field_opts(add);
    add->add_option("--seed-set", o.seed_set, "the set A");
    add->add_option("--k", o.k, "iterate for the Plunnecke check");
    common(add);

    CLI::App* fou = app.add_subcommand("fourier", "Fourier table of an indicator");
    field_opts(fou);
    fou->add_option("--seed-set", o.seed_set, "the set B");
    fou->add_option("--eps", o.eps, "heavy-character threshold");
    fou->add_option("--out", o.out, "coefficient CSV output path");
    common(fou);

    CLI::App* dec = app.add_subcommand("decompose", "sunflower decomposition of a block");
    scheme_in(dec);
    refine_opts(dec);
    dec->add_option("--k-test", o.k_test, "k'' for the seventh property");
    dec->add_flag("--full-p7", o.full_p7, "test the seventh property on every constructible subspace");
    common(dec);

    CLI::App* shr = app.add_subcommand("shrink", "block-shrinking lemmas");
    scheme_in(shr);
    refine_opts(shr);
    shr->add_option("--lemma", o.lemma, "weak | partial | bsg | density | key");
    shr->add_option("--a-level", o.a_level, "level of A for the weak lemma");
    shr->add_option("--a-block", o.a_block, "block id of A for the weak lemma");
    shr->add_option("--r", o.r, "rounds for density reduction");
    shr->add_option("--max-prefix", o.max_prefix, "longest prefix for the key-lemma search");
    shr->add_option("--budget", o.budget, "antisymmetry budget");
    common(shr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (o.cap) lms::set_tuple_cap(o.cap);
        std::string cmd = app.get_subcommands().front()->get_name();
        return Runner(o).run(cmd);
    } catch (const lms::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
