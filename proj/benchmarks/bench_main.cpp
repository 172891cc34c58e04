#include "lms/antisym.hpp"
#include "lms/fourier.hpp"
#include "lms/group_orbits.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

lms::LinearMScheme singer_scheme(int dim, int m) {
    lms::FieldSpec f(2, dim);
    auto g = lms::singer_group(f);
    return lms::build_orbit_scheme(g, lms::default_support(g, lms::PointSet(f, {1})), m, false).scheme;
}

lms::PointSet random_set(const lms::FieldSpec& f, double keep, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(keep);
    std::vector<lms::Code> pts;
    for (lms::Code x = 0; x < f.size(); ++x)
        if (coin(rng)) pts.push_back(x);
    return lms::PointSet(f, pts);
}

// Orbit scheme of the Singer cycle on F_2^d, depth 3.
void BM_OrbitScheme(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    lms::FieldSpec f(2, dim);
    auto g = lms::singer_group(f);
    auto S = lms::default_support(g, lms::PointSet(f, {1}));
    for (auto _ : state) benchmark::DoNotOptimize(lms::build_orbit_scheme(g, S, 3, false));
}
BENCHMARK(BM_OrbitScheme)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_ValidateAxioms(benchmark::State& state) {
    auto sch = singer_scheme(3, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lms::validate_axioms(sch));
}
BENCHMARK(BM_ValidateAxioms)->DenseRange(2, 3)->Unit(benchmark::kMillisecond);

void BM_Antisym(benchmark::State& state) {
    lms::FieldSpec f(2, static_cast<int>(state.range(0)));
    auto g = lms::semilinear_group(f);
    auto sch = lms::build_orbit_scheme(g, lms::default_support(g, lms::PointSet(f, {1})), 2, false).scheme;
    for (auto _ : state) benchmark::DoNotOptimize(lms::strong_antisym_check(sch));
}
BENCHMARK(BM_Antisym)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_FourierTable(benchmark::State& state) {
    lms::FieldSpec f(2, static_cast<int>(state.range(0)));
    auto b = random_set(f, 0.3, 11);
    lms::SubgroupBasis g = lms::SubgroupBasis::span_of(lms::full_space(f));
    for (auto _ : state) benchmark::DoNotOptimize(lms::fourier_table(b, g));
}
BENCHMARK(BM_FourierTable)->DenseRange(6, 12, 3)->Unit(benchmark::kMicrosecond);

void BM_AdditiveEnergy(benchmark::State& state) {
    lms::FieldSpec f(3, static_cast<int>(state.range(0)));
    auto a = random_set(f, 0.3, 5);
    for (auto _ : state) benchmark::DoNotOptimize(lms::additive_energy(a));
}
BENCHMARK(BM_AdditiveEnergy)->DenseRange(3, 6, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
