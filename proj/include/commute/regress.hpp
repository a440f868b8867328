#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "commute/errors.hpp"

namespace commute::regress {

struct FitPoint {
    double x = 0.0; // kilometres
    double y = 0.0; // response units
};

/// Fitted polynomial of degree 1..3 with the usual OLS inference.
/// coefficients[k] multiplies x^k.
struct PolynomialModel {
    int degree = 1;
    std::vector<double> coefficients; // constant first, length degree+1
    int n = 0;
    double r2 = 0.0;
    double s = 0.0; // residual standard error
    std::vector<double> coef_se;
    std::vector<double> coef_t;
    std::vector<double> coef_p; // two-sided
    double overall_f = 0.0;
    double overall_p = 0.0; // F-test on (degree, n-degree-1) df
    double x_min = 0.0;
    double x_max = 0.0;
};

/// OLS via normal equations on an internally rescaled design
/// (x mapped to [0,1] to keep the cubic well-conditioned; coefficients
/// are reported on the original scale).
/// Requires n >= degree + 2 and a full-rank design; throws
/// SingularFitError or InsufficientDataError otherwise, std::domain_error
/// on non-finite input.
PolynomialModel fit_polynomial(std::span<const FitPoint> points, int degree);

struct Prediction {
    double value = 0.0;
    bool extrapolated = false; // x outside the fitted x-domain
};

/// Horner evaluation.
Prediction predict(const PolynomialModel& model, double x);

/// I_x(a,b) to absolute error <= 1e-10, continued fraction with the
/// standard symmetry transformation.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a t statistic.
double t_tail_p(double t, int df);

/// Upper-tail p-value of an F statistic.
double f_tail_p(double F, int df1, int df2);

nlohmann::json model_json(const PolynomialModel& model);

/// Plain-text rendering: constant and slope parameters with the usual
/// diagnostics, coefficients to 4 significant figures.
std::string model_text(const PolynomialModel& model);

} // namespace commute::regress
