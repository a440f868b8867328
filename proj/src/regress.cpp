#include "commute/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace commute::regress {

namespace {

// Continued fraction for the regularized incomplete beta (modified
// Lentz), evaluated on the rapidly-converging side only.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

// Gauss-Jordan inverse of a small symmetric positive-definite matrix,
// with partial pivoting. Returns false if effectively singular.
bool invert_inplace(std::vector<double>& m, int n) {
    std::vector<double> a(m);
    std::vector<double> inv(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[static_cast<size_t>(r) * n + col]) >
                std::fabs(a[static_cast<size_t>(pivot) * n + col]))
                pivot = r;
        if (std::fabs(a[static_cast<size_t>(pivot) * n + col]) < 1e-12) return false;
        if (pivot != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a[static_cast<size_t>(col) * n + j], a[static_cast<size_t>(pivot) * n + j]);
                std::swap(inv[static_cast<size_t>(col) * n + j],
                          inv[static_cast<size_t>(pivot) * n + j]);
            }
        double piv = a[static_cast<size_t>(col) * n + col];
        for (int j = 0; j < n; ++j) {
            a[static_cast<size_t>(col) * n + j] /= piv;
            inv[static_cast<size_t>(col) * n + j] /= piv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[static_cast<size_t>(r) * n + col];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a[static_cast<size_t>(r) * n + j] -= f * a[static_cast<size_t>(col) * n + j];
                inv[static_cast<size_t>(r) * n + j] -= f * inv[static_cast<size_t>(col) * n + j];
            }
        }
    }
    m = std::move(inv);
    return true;
}

std::string sig4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("incomplete beta: a, b must be > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete beta: x must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_tail_p(double t, int df) {
    if (df < 1) throw std::domain_error("t p-value: df must be >= 1");
    double x = df / (df + t * t);
    return regularized_incomplete_beta(df / 2.0, 0.5, x);
}

double f_tail_p(double F, int df1, int df2) {
    if (df1 < 1 || df2 < 1) throw std::domain_error("F p-value: df must be >= 1");
    if (F < 0) throw std::domain_error("F p-value: F must be >= 0");
    double x = df2 / (df2 + df1 * F);
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, x);
}

PolynomialModel fit_polynomial(std::span<const FitPoint> points, int degree) {
    if (degree < 1 || degree > 3) throw std::domain_error("degree must be 1, 2 or 3");
    const int n = static_cast<int>(points.size());
    const int k = degree + 1;
    if (n < degree + 2)
        throw InsufficientDataError("need at least degree + 2 points, got " + std::to_string(n));

    double x_min = points[0].x, x_max = points[0].x;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::domain_error("non-finite fit point");
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
    }
    if (x_min == x_max) throw SingularFitError("all x values identical");

    // Rescale x to [0,1] so the cubic normal equations stay
    // well-conditioned out to the hard evaluation limit.
    const double scale = x_max == 0.0 ? 1.0 : std::max(std::fabs(x_min), std::fabs(x_max));

    std::vector<double> xtx(static_cast<size_t>(k) * k, 0.0);
    std::vector<double> xty(static_cast<size_t>(k), 0.0);
    for (const auto& p : points) {
        double z = p.x / scale;
        double pow_i = 1.0;
        std::vector<double> zp(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) {
            zp[static_cast<size_t>(i)] = pow_i;
            pow_i *= z;
        }
        for (int i = 0; i < k; ++i) {
            xty[static_cast<size_t>(i)] += zp[static_cast<size_t>(i)] * p.y;
            for (int j = 0; j < k; ++j)
                xtx[static_cast<size_t>(i) * k + j] += zp[static_cast<size_t>(i)] * zp[static_cast<size_t>(j)];
        }
    }

    std::vector<double> xtx_inv = xtx;
    if (!invert_inplace(xtx_inv, k))
        throw SingularFitError("rank-deficient design (duplicated x with degree too high?)");

    std::vector<double> beta_scaled(static_cast<size_t>(k), 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            beta_scaled[static_cast<size_t>(i)] += xtx_inv[static_cast<size_t>(i) * k + j] * xty[static_cast<size_t>(j)];

    PolynomialModel m;
    m.degree = degree;
    m.n = n;
    m.x_min = x_min;
    m.x_max = x_max;
    m.coefficients.resize(static_cast<size_t>(k));
    double s_pow = 1.0;
    for (int i = 0; i < k; ++i) {
        m.coefficients[static_cast<size_t>(i)] = beta_scaled[static_cast<size_t>(i)] / s_pow;
        s_pow *= scale;
    }

    double mean_y = 0.0;
    for (const auto& p : points) mean_y += p.y;
    mean_y /= n;
    double sse = 0.0, sst = 0.0;
    for (const auto& p : points) {
        double fit = 0.0, zp = 1.0, z = p.x / scale;
        for (int i = 0; i < k; ++i) {
            fit += beta_scaled[static_cast<size_t>(i)] * zp;
            zp *= z;
        }
        sse += (p.y - fit) * (p.y - fit);
        sst += (p.y - mean_y) * (p.y - mean_y);
    }
    const int df_res = n - k;
    m.s = std::sqrt(sse / df_res);
    m.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    m.r2 = std::clamp(m.r2, 0.0, 1.0);

    const double sigma2 = sse / df_res;
    m.coef_se.resize(static_cast<size_t>(k));
    m.coef_t.resize(static_cast<size_t>(k));
    m.coef_p.resize(static_cast<size_t>(k));
    s_pow = 1.0;
    for (int i = 0; i < k; ++i) {
        double se_scaled = std::sqrt(sigma2 * xtx_inv[static_cast<size_t>(i) * k + i]);
        m.coef_se[static_cast<size_t>(i)] = se_scaled / s_pow;
        s_pow *= scale;
        double t = se_scaled > 0.0 ? beta_scaled[static_cast<size_t>(i)] / se_scaled : 0.0;
        m.coef_t[static_cast<size_t>(i)] = t;
        m.coef_p[static_cast<size_t>(i)] = se_scaled > 0.0 ? t_tail_p(t, df_res) : 0.0;
    }
    if (sse <= 0.0) {
        m.overall_f = std::numeric_limits<double>::infinity();
        m.overall_p = 0.0;
    } else {
        m.overall_f = (sst - sse) / degree / sigma2;
        m.overall_p = f_tail_p(std::max(m.overall_f, 0.0), degree, df_res);
    }
    return m;
}

Prediction predict(const PolynomialModel& model, double x) {
    if (!std::isfinite(x)) throw std::domain_error("predict: non-finite x");
    double v = 0.0;
    for (auto it = model.coefficients.rbegin(); it != model.coefficients.rend(); ++it)
        v = v * x + *it;
    return {v, x < model.x_min || x > model.x_max};
}

nlohmann::json model_json(const PolynomialModel& m) {
    return {{"degree", m.degree},
            {"coefficients", m.coefficients},
            {"n", m.n},
            {"r2", m.r2},
            {"s", m.s},
            {"coef_se", m.coef_se},
            {"coef_t", m.coef_t},
            {"coef_p", m.coef_p},
            {"overall_f", m.overall_f},
            {"overall_p", m.overall_p},
            {"x_domain", {m.x_min, m.x_max}}};
}

std::string model_text(const PolynomialModel& m) {
    std::ostringstream os;
    static const char* kNames[] = {"Linear", "Quadratic", "Cubic"};
    auto pfmt = [](double p) {
        if (p < 0.001) return std::string("p < 0.001");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "p = %.3f", p);
        return std::string(buf);
    };
    os << kNames[m.degree - 1] << " Regression  r2 = " << sig4(m.r2) << "  s = " << sig4(m.s)
       << "  (" << pfmt(m.overall_p) << ")\n";
    os << "  Constant         " << sig4(m.coefficients[0]) << "  (" << pfmt(m.coef_p[0]) << ")\n";
    for (int i = 1; i <= m.degree; ++i) {
        os << "  Slope d^" << i << "         " << sig4(m.coefficients[static_cast<size_t>(i)])
           << "  (" << pfmt(m.coef_p[static_cast<size_t>(i)]) << ")\n";
    }
    return os.str();
}

} // namespace commute::regress
