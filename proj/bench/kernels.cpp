// Serial reference vs OpenMP kernels on synthetic data.

#include <random>

#include <benchmark/benchmark.h>

#include "mtc/capture/session.hpp"
#include "mtc/classic/forest.hpp"
#include "mtc/classic/knn.hpp"
#include "mtc/dataset/corpus.hpp"
#include "mtc/features/extractors.hpp"

using namespace mtc;

namespace {

struct Blobs {
    features::TensorBatch x;
    std::vector<std::uint32_t> y;
};

Blobs blobs(std::size_t n, std::uint32_t d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<float> u(0, 1);
    Blobs b{features::TensorBatch({d}), {}};
    std::vector<float> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::uint32_t>(i % 4);
        for (std::uint32_t j = 0; j < d; ++j) row[j] = u(gen) + (j % 4 == c ? 2.0f : 0.0f);
        b.x.append_row(row);
        b.y.push_back(c);
    }
    return b;
}

std::vector<dataset::LabeledSession> sessions(std::size_t n) {
    std::mt19937_64 gen(3);
    std::vector<dataset::LabeledSession> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<capture::ParsedPacket> pkts;
        for (int k = 0; k < 12; ++k) {
            capture::ParsedPacket p;
            const bool fwd = k % 2 == 0;
            p.ip_src = capture::IpAddress::parse(fwd ? "10.0.0.1" : "10.0.0.2");
            p.ip_dst = capture::IpAddress::parse(fwd ? "10.0.0.2" : "10.0.0.1");
            p.port_src = fwd ? static_cast<std::uint16_t>(20000 + i % 40000) : 443;
            p.port_dst = fwd ? 443 : static_cast<std::uint16_t>(20000 + i % 40000);
            p.transport = capture::Transport::TCP;
            p.tcp_flags = 0x18;
            p.timestamp_us = 1000 * static_cast<std::uint64_t>(k);
            p.payload.resize(100 + gen() % 300);
            for (auto& b : p.payload) b = static_cast<std::uint8_t>(gen());
            p.caplen = static_cast<std::uint32_t>(54 + p.payload.size());
            pkts.push_back(std::move(p));
        }
        dataset::LabeledSession s;
        s.session = capture::assemble_sessions(pkts).at(0);
        out.push_back(std::move(s));
    }
    return out;
}

void knn_batch(benchmark::State& state, bool parallel) {
    const auto train = blobs(2000, 784, 1);
    const auto test = blobs(200, 784, 2);
    const classic::KnnModel m(train.x, train.y, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(parallel ? classic::knn_predict_batch(m, test.x)
                                          : classic::knn_predict_batch_serial(m, test.x));
}

void forest_fit(benchmark::State& state, bool parallel) {
    const auto train = blobs(1000, 64, 4);
    classic::ForestParams p;
    p.n_trees = 32;
    p.seed = 1;
    for (auto _ : state)
        benchmark::DoNotOptimize(parallel ? classic::fit_forest(train.x, train.y, p)
                                          : classic::fit_forest_serial(train.x, train.y, p));
}

void extract(benchmark::State& state, bool parallel) {
    const auto s = sessions(2000);
    const auto repr = features::ReprSpec::parse(state.range(0) == 0 ? "raw784" : "stats");
    for (auto _ : state)
        benchmark::DoNotOptimize(parallel ? features::extract_batch(s, repr) : features::extract_batch_serial(s, repr));
}

} // namespace

BENCHMARK_CAPTURE(knn_batch, serial, false)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(knn_batch, openmp, true)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(forest_fit, serial, false)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(forest_fit, openmp, true)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(extract, serial, false)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(extract, openmp, true)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
