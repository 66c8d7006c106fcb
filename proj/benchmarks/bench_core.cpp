#include "qmap/concat.hpp"
#include "qmap/lindblad.hpp"
#include "qmap/model.hpp"
#include "qmap/thermo.hpp"
#include "qmap/trajectories.hpp"

#include <benchmark/benchmark.h>

using namespace qmap;

namespace {

SpinChainParams chain(int sites, double jy) {
    return {sites, 2.0, std::vector<double>(static_cast<std::size_t>(sites - 1), 3.0),
            std::vector<double>(static_cast<std::size_t>(sites - 1), jy)};
}

MapSpec chain_map(int sites, double jy) {
    return MapSpec(build_chain(chain(sites, jy)), build_bath({2.0, 1.2}), build_coupling({3.0, 3.0, 1, 1.0}, sites),
                   1.0, 1.2);
}

void BM_KrausFromDilation(benchmark::State& state) {
    const MapSpec spec = chain_map(static_cast<int>(state.range(0)), 2.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kraus_from_dilation(spec));
    }
}
BENCHMARK(BM_KrausFromDilation)->DenseRange(1, 3);

void BM_ProcessAverages(benchmark::State& state) {
    const MapSpec spec = chain_map(static_cast<int>(state.range(0)), 2.0);
    const DensityMatrix rho = gibbs_state(spec.system_hamiltonian(), 1.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(process_averages(spec, rho));
    }
}
BENCHMARK(BM_ProcessAverages)->DenseRange(1, 3);

void BM_EnumerateSingleMap(benchmark::State& state) {
    const MapSpec spec = chain_map(static_cast<int>(state.range(0)), 2.0);
    const MeasurementBasis energy = measurement_basis(spec.system_hamiltonian());
    const DensityMatrix rho = gibbs_state(spec.system_hamiltonian(), 1.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(enumerate(spec, energy, energy, rho));
    }
}
BENCHMARK(BM_EnumerateSingleMap)->DenseRange(1, 3);

void BM_RunSequence(benchmark::State& state) {
    MapSequence seq;
    seq.append(chain_map(3, 0.0), static_cast<int>(state.range(0)));
    const DensityMatrix rho = gibbs_state(build_chain(chain(3, 0.0)), 1.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_sequence(seq, rho));
    }
}
BENCHMARK(BM_RunSequence)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_HeatResolvedChain(benchmark::State& state) {
    MapSequence seq;
    seq.append(chain_map(2, 2.0), static_cast<int>(state.range(0)));
    const auto ks = seq.kraus_chain();
    const MeasurementBasis energy = measurement_basis(build_chain(chain(2, 2.0)));
    const InitialCondition init = initial_from_populations(energy, gibbs_populations(energy, 1.2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(heat_resolved_chain(ks, energy, energy, init));
    }
}
BENCHMARK(BM_HeatResolvedChain)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_LindbladIntegrate(benchmark::State& state) {
    const SpinChainParams p = chain(2, 2.0);
    const LindbladGenerator gen =
        generator_from_coupling(build_coupling({1.0, 1.0, 1, 0.0}, 2), build_chain(p), build_bath({2.0, 1.2}), 1.2);
    const DensityMatrix rho = gibbs_state(build_chain(p), 1.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(gen, rho, 1.0, 1e-3, 100));
    }
}
BENCHMARK(BM_LindbladIntegrate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
