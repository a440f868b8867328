#include "commute/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace commute::stats {

namespace {

// Ryan-Joiner critical-value curves (probability-plot correlation test),
// as published for the 10%, 5% and 1% levels.
double rj_cv_10(double n) { return 1.0071 - 0.1371 / std::sqrt(n) - 0.3682 / n + 0.7780 / (n * n); }
double rj_cv_05(double n) { return 1.0063 - 0.1288 / std::sqrt(n) - 0.6118 / n + 1.3505 / (n * n); }
double rj_cv_01(double n) { return 0.9963 - 0.0211 / std::sqrt(n) - 1.4106 / n + 3.1791 / (n * n); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Unbiased bounded draw, implementation-independent (uniform_int_distribution
// is not portable bit-for-bit).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

// Permutation k is a pure function of (seed, k): thread scheduling cannot
// change the sampled null distribution.
void fill_permutation(std::vector<int>& idx, std::uint64_t seed, int k) {
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(splitmix64(seed + 0x100000001ULL * static_cast<std::uint64_t>(k + 1)));
    for (size_t i = idx.size() - 1; i > 0; --i) {
        size_t j = static_cast<size_t>(bounded(rng, i + 1));
        std::swap(idx[i], idx[j]);
    }
}

double moran_numerator(const std::vector<double>& z, const WeightsMatrix& w,
                       const std::vector<int>* perm) {
    const int n = w.n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double zi = perm ? z[static_cast<size_t>((*perm)[static_cast<size_t>(i)])] : z[static_cast<size_t>(i)];
        const double* row = &w.weights[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) {
            if (row[j] == 0.0) continue;
            double zj = perm ? z[static_cast<size_t>((*perm)[static_cast<size_t>(j)])] : z[static_cast<size_t>(j)];
            acc += row[j] * zi * zj;
        }
    }
    return acc;
}

struct MoranContext {
    std::vector<double> z;
    double s0 = 0.0;
    double z2 = 0.0;
    double observed = 0.0;
};

MoranContext moran_setup(std::span<const double> values, const WeightsMatrix& w) {
    if (static_cast<int>(values.size()) != w.n)
        throw std::domain_error("values length must equal weights dimension");
    if (w.n < 4) throw InsufficientDataError("Moran's I needs n >= 4");
    bool any_link = false;
    for (int i = 0; i < w.n; ++i)
        if (!w.isolated[static_cast<size_t>(i)]) any_link = true;
    if (!any_link) throw DegenerateError("all observations isolated in weights matrix");

    MoranContext ctx;
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    ctx.z.resize(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        ctx.z[i] = values[i] - mean;
        ctx.z2 += ctx.z[i] * ctx.z[i];
    }
    if (ctx.z2 == 0.0) throw DegenerateError("zero variance in values");
    ctx.s0 = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
    if (ctx.s0 == 0.0) throw DegenerateError("zero weight sum");
    ctx.observed = (w.n / ctx.s0) * moran_numerator(ctx.z, w, nullptr) / ctx.z2;
    return ctx;
}

DiagnosticResult moran_result(const MoranContext& ctx, const WeightsMatrix& w, int permutations,
                              std::uint64_t seed, long long more_extreme) {
    DiagnosticResult r;
    r.statistic = ctx.observed;
    r.p_value = static_cast<double>(more_extreme + 1) / static_cast<double>(permutations + 1);
    r.method = "morans-i";
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "weights=%s permutations=%d seed=%llu two-sided around E[I]=-1/(n-1)",
                  w.spec_label.c_str(), permutations, static_cast<unsigned long long>(seed));
    r.detail = buf;
    return r;
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal quantile: p must lie in (0,1)");
    // Acklam's rational approximation ...
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // ... refined with one Halley step against the exact CDF.
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

DiagnosticResult ryan_joiner(std::span<const double> values) {
    const int n = static_cast<int>(values.size());
    if (n < 4) throw InsufficientDataError("Ryan-Joiner needs n >= 4");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw DegenerateError("constant input");

    // Normal scores from Blom plotting positions.
    std::vector<double> scores(static_cast<size_t>(n));
    for (int i = 1; i <= n; ++i)
        scores[static_cast<size_t>(i - 1)] = normal_quantile((i - 0.375) / (n + 0.25));

    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += sorted[static_cast<size_t>(i)];
        my += scores[static_cast<size_t>(i)];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        double dx = sorted[static_cast<size_t>(i)] - mx, dy = scores[static_cast<size_t>(i)] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    DiagnosticResult r;
    r.statistic = sxy / std::sqrt(sxx * syy);
    r.method = "ryan-joiner";

    const double cv01 = rj_cv_01(n), cv05 = rj_cv_05(n), cv10 = rj_cv_10(n);
    char buf[32];
    if (r.statistic < cv01) {
        r.p_value = 0.01;
        r.detail = "<0.010";
    } else if (r.statistic > cv10) {
        r.p_value = 0.10;
        r.detail = ">0.100";
    } else {
        // Interpolate on the critical-value curves between the published
        // 1%, 5% and 10% anchor points.
        double p = r.statistic <= cv05
                       ? 0.01 + (r.statistic - cv01) / (cv05 - cv01) * 0.04
                       : 0.05 + (r.statistic - cv05) / (cv10 - cv05) * 0.05;
        r.p_value = p;
        std::snprintf(buf, sizeof(buf), "%.3f", p);
        r.detail = buf;
    }
    return r;
}

WeightsMatrix build_weights(std::span<const std::pair<double, double>> coords,
                            const std::string& spec) {
    const int n = static_cast<int>(coords.size());
    if (n < 2) throw InsufficientDataError("weights need >= 2 points");

    std::string body = spec;
    bool row_standardize = false;
    if (body.size() > 4 && body.substr(body.size() - 4) == ":row") {
        row_standardize = true;
        body = body.substr(0, body.size() - 4);
    }

    WeightsMatrix w;
    w.n = n;
    w.weights.assign(static_cast<size_t>(n) * n, 0.0);
    w.spec_label = spec;

    auto dist = [&](int i, int j) {
        double dx = coords[static_cast<size_t>(i)].first - coords[static_cast<size_t>(j)].first;
        double dy = coords[static_cast<size_t>(i)].second - coords[static_cast<size_t>(j)].second;
        return std::hypot(dx, dy);
    };

    if (body.rfind("knn:", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(body.substr(4));
        } catch (const std::exception&) {
            throw ConfigError("bad knn spec '" + spec + "'");
        }
        if (k < 1 || k >= n) throw ConfigError("knn k must lie in [1, n-1]");
        for (int i = 0; i < n; ++i) {
            std::vector<int> order;
            for (int j = 0; j < n; ++j)
                if (j != i) order.push_back(j);
            // ties broken by index for determinism
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                double da = dist(i, a), db = dist(i, b);
                return da != db ? da < db : a < b;
            });
            for (int r = 0; r < k; ++r) w.at(i, order[static_cast<size_t>(r)]) = 1.0;
        }
    } else if (body.rfind("inverse-distance:band=", 0) == 0) {
        double band = 0.0;
        try {
            band = std::stod(body.substr(std::string("inverse-distance:band=").size()));
        } catch (const std::exception&) {
            throw ConfigError("bad inverse-distance spec '" + spec + "'");
        }
        if (band <= 0) throw ConfigError("inverse-distance band must be > 0");
        constexpr double kCoincidentCap = 1e6;
        bool capped = false;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double d = dist(i, j);
                if (d > band) continue;
                double v = d > 1.0 / kCoincidentCap ? 1.0 / d : kCoincidentCap;
                if (v == kCoincidentCap) capped = true;
                w.at(i, j) = v;
                w.at(j, i) = v;
            }
        if (capped) w.spec_label += " [coincident pair, weight capped]";
    } else {
        throw ConfigError("unknown weights spec '" + spec + "'");
    }

    w.isolated.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) row_sum += w.at(i, j);
        w.isolated[static_cast<size_t>(i)] = row_sum == 0.0;
        if (row_standardize && row_sum > 0.0)
            for (int j = 0; j < n; ++j) w.at(i, j) /= row_sum;
    }
    return w;
}

double morans_i_statistic(std::span<const double> values, const WeightsMatrix& w) {
    return moran_setup(values, w).observed;
}

DiagnosticResult morans_i(std::span<const double> values, const WeightsMatrix& w,
                          int permutations, std::uint64_t seed) {
    if (permutations < 1) throw std::domain_error("permutations must be >= 1");
    MoranContext ctx = moran_setup(values, w);
    const double expected = -1.0 / (w.n - 1);
    const double obs_dev = std::fabs(ctx.observed - expected);
    const double scale = (w.n / ctx.s0) / ctx.z2;

    long long more_extreme = 0;
#pragma omp parallel reduction(+ : more_extreme)
    {
        std::vector<int> idx(static_cast<size_t>(w.n));
#pragma omp for schedule(static)
        for (int k = 0; k < permutations; ++k) {
            fill_permutation(idx, seed, k);
            double ik = scale * moran_numerator(ctx.z, w, &idx);
            if (std::fabs(ik - expected) >= obs_dev) ++more_extreme;
        }
    }
    return moran_result(ctx, w, permutations, seed, more_extreme);
}

DiagnosticResult morans_i_serial(std::span<const double> values, const WeightsMatrix& w,
                                 int permutations, std::uint64_t seed) {
    if (permutations < 1) throw std::domain_error("permutations must be >= 1");
    MoranContext ctx = moran_setup(values, w);
    const double expected = -1.0 / (w.n - 1);
    const double obs_dev = std::fabs(ctx.observed - expected);
    const double scale = (w.n / ctx.s0) / ctx.z2;

    long long more_extreme = 0;
    std::vector<int> idx(static_cast<size_t>(w.n));
    for (int k = 0; k < permutations; ++k) {
        fill_permutation(idx, seed, k);
        double ik = scale * moran_numerator(ctx.z, w, &idx);
        if (std::fabs(ik - expected) >= obs_dev) ++more_extreme;
    }
    return moran_result(ctx, w, permutations, seed, more_extreme);
}

nlohmann::json diagnostic_json(const DiagnosticResult& r) {
    return {{"statistic", r.statistic},
            {"p_value", r.p_value},
            {"method", r.method},
            {"detail", r.detail}};
}

} // namespace commute::stats
