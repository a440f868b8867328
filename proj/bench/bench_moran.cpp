// Benchmark: parallel permutation kernel vs the serial reference.
// Run a sweep over problem sizes, check the two implementations agree
// bit-for-bit, and print throughput for each.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <random>
#include <vector>

#include "commute/stats.hpp"

namespace {

using commute::stats::WeightsMatrix;

std::vector<std::pair<double, double>> random_coords(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    std::vector<std::pair<double, double>> coords(n);
    for (auto& c : coords) c = {u(rng), u(rng)};
    return coords;
}

std::vector<double> random_values(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(1500.0, 300.0);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace

int main() {
    const int permutations = 19999;
    const std::uint64_t seed = 42;

    std::printf("%6s %6s | %12s %12s | %8s | %s\n", "n", "perms", "serial ms", "parallel ms",
                "speedup", "agree");

    bool all_agree = true;
    for (int n : {64, 128, 256, 512}) {
        auto coords = random_coords(n, 1000 + n);
        auto values = random_values(n, 2000 + n);
        auto w = commute::stats::build_weights(coords, "knn:8");

        auto t0 = std::chrono::steady_clock::now();
        auto serial = commute::stats::morans_i_serial(values, w, permutations, seed);
        double serial_ms = ms_since(t0);

        t0 = std::chrono::steady_clock::now();
        auto parallel = commute::stats::morans_i(values, w, permutations, seed);
        double parallel_ms = ms_since(t0);

        bool agree = serial.statistic == parallel.statistic && serial.p_value == parallel.p_value;
        all_agree = all_agree && agree;
        std::printf("%6d %6d | %12.1f %12.1f | %7.2fx | %s\n", n, permutations, serial_ms,
                    parallel_ms, serial_ms / parallel_ms, agree ? "yes" : "NO");
    }
    if (!all_agree) {
        std::printf("MISMATCH between serial and parallel results\n");
        return 1;
    }
    return 0;
}
