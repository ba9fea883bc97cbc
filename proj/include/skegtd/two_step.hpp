#pragma once

#include <span>
#include <vector>

#include "skegtd/fit_report.hpp"

namespace skegtd {

/// Half-range mode: repeatedly keep the densest window whose width is half
/// the current range until two points remain, then average them. Three
/// remaining points resolve to the closer pair, or to the middle point when
/// both gaps are equal. Ties between windows go to the smaller midpoint.
double hrm_mode(std::span<const double> data);

/// r = 1 - (2/n) #{x_i <= mu}.
double profile_r(std::span<const double> data, double mu);

/// Sample moments used by the moment-matching step.
struct SampleShape {
    double mean;
    double var;  ///< divisor n - 1
    double g1;   ///< m3 / m2^1.5
    double g2;   ///< m4 / m2^2 - 3 (excess)
};
SampleShape sample_shape(std::span<const double> data);

struct ShapeFit {
    double alpha;
    double beta;
    double objective;  ///< |gamma1 - g1| + |gamma2 - g2| at the solution
    bool boundary;     ///< solution on the search box edge or targets unattainable
};

/// Matches skewness and excess kurtosis over alpha in [max(0.2, 4.2/beta), 50],
/// beta in [0.2, 25] (so alpha*beta > 4 and the kurtosis exists).
ShapeFit match_shape(double r, double g1, double g2);
/// match_shape with g1, g2 taken from the data.
ShapeFit profile_shape(std::span<const double> data, double mu, double r);
/// sigma = s / sqrt(Var(X0; r, alpha, beta)).
double profile_scale(std::span<const double> data, double r, double alpha, double beta);

struct ProfileGrid {
    std::vector<double> mu_values;
    std::vector<double> sigma, r, alpha, beta;
    std::vector<double> loglik;
};

struct TseOptions {
    double grid_half_width = 0.0;  ///< <= 0 means 1.5 sample standard deviations
    int grid_size = 41;
};

/// Two-step estimate of (mu, sigma, r, alpha, beta). Needs n >= 20.
/// If `grid` is given it receives the (last) profile grid.
FitReport fit_tse(std::span<const double> data, const TseOptions& opt = {}, ProfileGrid* grid = nullptr);

/// Natural cubic spline through (x, y); returns the argmax over a dense
/// grid of `per_interval` points per knot interval, and the value there.
struct SplineMax {
    double x;
    double y;
    std::size_t nearest_knot;
};
SplineMax spline_argmax(const std::vector<double>& x, const std::vector<double>& y, int per_interval = 50);

}  // namespace skegtd
