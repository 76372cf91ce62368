// Copyright 2026 The shorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Period assignment without continued fractions: compare the measured phase
// histogram against the ideal distribution of every candidate period with
// the squared statistical overlap, and quantify the assignment error as the
// overlap of the two leading N(SSO, dSSO) Gaussians.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shorlab/shor.hpp"

namespace shorlab {

struct TheoreticalDistribution {
    std::size_t r = 0;
    std::size_t Q = 0;
    std::vector<double> probs;
};

/// Ideal phase distribution for period r on Q outcomes:
/// P(s) = Q^-2 sum_{x0<r} |sum_{d<M(x0)} exp(2 pi i s d r / Q)|^2,
/// M(x0) = floor((Q - 1 - x0) / r) + 1.
inline TheoreticalDistribution theoretical_distribution(std::size_t r, std::size_t Q) {
    if (Q == 0) throw std::invalid_argument("Q must be positive");
    if (r < 1 || r > Q) throw std::invalid_argument("period must satisfy 1 <= r <= Q");
    TheoreticalDistribution t{r, Q, std::vector<double>(Q, 0.0)};
    const double qd = static_cast<double>(Q);
    for (std::size_t s = 0; s < Q; ++s) {
        double acc = 0.0;
        for (std::size_t x0 = 0; x0 < r; ++x0) {
            const std::size_t m = (Q - 1 - x0) / r + 1;
            Complex sum{0.0, 0.0};
            for (std::size_t d = 0; d < m; ++d) {
                // Reduced mod Q in integers so the phase is exact.
                const std::size_t k = (s * d * r) % Q;
                sum += std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / qd);
            }
            acc += std::norm(sum);
        }
        t.probs[s] = acc / (qd * qd);
    }
    return t;
}

namespace detail {

inline void check_distribution(std::span<const double> p, const char* what) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " has a negative or NaN entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + " is not normalized");
}

inline double overlap_amplitude(std::span<const double> m, std::span<const double> e) {
    double b = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) b += std::sqrt(m[j] * e[j]);
    return b;
}

}  // namespace detail

/// Squared statistical overlap (sum_j sqrt(m_j e_j))^2.
inline double sso(std::span<const double> measured, std::span<const double> expected) {
    if (measured.size() != expected.size()) throw std::invalid_argument("sso: length mismatch");
    detail::check_distribution(measured, "measured distribution");
    detail::check_distribution(expected, "expected distribution");
    const double b = detail::overlap_amplitude(measured, expected);
    return std::clamp(b * b, 0.0, 1.0);
}

/// Poisson counting error of the SSO with Gaussian propagation.
///
/// Each count c_j is an independent Poisson variable (dc_j^2 = c_j) and the
/// SSO is evaluated on the frequencies m_j = c_j / sum(c), so
///   dSSO/dc_j = (B / T) (sqrt(e_j / m_j) - B),  B = sum_k sqrt(m_k e_k),
/// and each bin contributes (B^2 / T) (sqrt(e_j) - B sqrt(m_j))^2.
/// Bins with c_j = 0 have zero counting error and contribute nothing.
inline double delta_sso(std::span<const std::uint64_t> counts, std::span<const double> expected, std::uint64_t shots) {
    if (counts.size() != expected.size()) throw std::invalid_argument("delta_sso: length mismatch");
    if (shots == 0) throw std::invalid_argument("delta_sso: zero shots");
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (total != shots) throw std::invalid_argument("delta_sso: counts do not sum to shots");
    detail::check_distribution(expected, "expected distribution");
    const double t = static_cast<double>(shots);
    std::vector<double> m(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j) m[j] = static_cast<double>(counts[j]) / t;
    const double b = detail::overlap_amplitude(m, expected);
    double var = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const double g = std::sqrt(expected[j]) - b * std::sqrt(m[j]);
        var += g * g;
    }
    return std::sqrt(b * b * var / t);
}

inline double normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Overlap coefficient of N(mu1, sigma1) and N(mu2, sigma2): the integral
/// of the pointwise minimum, trapezoidal rule.
///
/// The integration range is [min mu - 8 sigma_max, max mu + 8 sigma_max].
/// Inside the +-8 sigma window of the narrower Gaussian the step is
/// sigma_min / 1000; inside the wider window it is sigma_max / 1000. Outside
/// both windows the integrand is below the 8-sigma tail of each density and
/// is skipped.
inline double ovl_gaussian(double mu1, double sigma1, double mu2, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("ovl_gaussian: sigma must be positive");
    const auto f = [&](double x) { return std::min(normal_pdf(x, mu1, sigma1), normal_pdf(x, mu2, sigma2)); };
    const auto trapezoid = [&](double a, double b, double h) {
        if (!(b > a)) return 0.0;
        const auto steps = static_cast<std::size_t>(std::ceil((b - a) / h));
        const double dx = (b - a) / static_cast<double>(steps);
        double acc = 0.5 * (f(a) + f(b));
        for (std::size_t i = 1; i < steps; ++i) acc += f(a + dx * static_cast<double>(i));
        return acc * dx;
    };

    const bool first_narrow = sigma1 <= sigma2;
    const double mu_n = first_narrow ? mu1 : mu2, s_n = first_narrow ? sigma1 : sigma2;
    const double mu_w = first_narrow ? mu2 : mu1, s_w = first_narrow ? sigma2 : sigma1;
    const double lo = std::min(mu1, mu2) - 8.0 * s_w;
    const double hi = std::max(mu1, mu2) + 8.0 * s_w;

    const double n_lo = std::max(lo, mu_n - 8.0 * s_n), n_hi = std::min(hi, mu_n + 8.0 * s_n);
    const double w_lo = std::max(lo, mu_w - 8.0 * s_w), w_hi = std::min(hi, mu_w + 8.0 * s_w);

    double total = trapezoid(n_lo, n_hi, s_n / 1000.0);
    // Wide window minus the narrow one.
    total += trapezoid(w_lo, std::min(w_hi, n_lo), s_w / 1000.0);
    total += trapezoid(std::max(w_lo, n_hi), w_hi, s_w / 1000.0);
    return std::clamp(total, 0.0, 1.0);
}

struct SSORecord {
    std::size_t r = 0;
    double sso = 0.0;
    double delta_sso = 0.0;
};

struct PeriodAssignment {
    std::vector<SSORecord> table;  // r = 2 .. Q-1
    SSORecord best;
    SSORecord runner_up;  // best candidate outside best's equivalence class
    double epsilon = 1.0;
    /// Candidate periods with identical theoretical distributions.
    std::vector<std::vector<std::size_t>> classes;
};

inline constexpr double kSigmaFloor = 1e-12;
inline constexpr double kTieTolerance = 1e-12;

/// Scores every candidate period 2 <= r <= Q-1 and picks the highest SSO;
/// ties go to the smaller period.
inline PeriodAssignment assign_period(const PhaseHistogram& hist) {
    if (hist.shots == 0) throw std::invalid_argument("assign_period: empty histogram");
    if (hist.Q < 4 || hist.counts.size() != hist.Q) throw std::invalid_argument("assign_period: need Q >= 4");
    const std::vector<double> m = hist.frequencies();

    PeriodAssignment out;
    std::vector<TheoreticalDistribution> theory;
    for (std::size_t r = 2; r + 1 <= hist.Q; ++r) {
        theory.push_back(theoretical_distribution(r, hist.Q));
        out.table.push_back({r, sso(m, theory.back().probs), delta_sso(hist.counts, theory.back().probs, hist.shots)});
    }

    std::vector<std::size_t> class_of(theory.size());
    for (std::size_t i = 0; i < theory.size(); ++i) {
        bool placed = false;
        for (std::size_t c = 0; c < out.classes.size() && !placed; ++c) {
            const auto& rep = theory[out.classes[c].front() - 2].probs;
            bool same = true;
            for (std::size_t s = 0; s < hist.Q && same; ++s) same = std::abs(rep[s] - theory[i].probs[s]) <= 1e-12;
            if (same) {
                out.classes[c].push_back(theory[i].r);
                class_of[i] = c;
                placed = true;
            }
        }
        if (!placed) {
            out.classes.push_back({theory[i].r});
            class_of[i] = out.classes.size() - 1;
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.table.size(); ++i)
        if (out.table[i].sso > out.table[best].sso + kTieTolerance) best = i;
    out.best = out.table[best];

    std::optional<std::size_t> second;
    for (std::size_t i = 0; i < out.table.size(); ++i) {
        if (class_of[i] == class_of[best]) continue;
        if (!second || out.table[i].sso > out.table[*second].sso + kTieTolerance) second = i;
    }
    if (!second) {
        out.runner_up = out.best;
        out.epsilon = 1.0;
        return out;
    }
    out.runner_up = out.table[*second];
    out.epsilon = ovl_gaussian(out.best.sso, std::max(out.best.delta_sso, kSigmaFloor), out.runner_up.sso,
                               std::max(out.runner_up.delta_sso, kSigmaFloor));
    return out;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_err = 0.0;
    double intercept_err = 0.0;
    double covariance = 0.0;  // cov(slope, intercept)
    double residual_ss = 0.0;
    bool degenerate = false;  // all x equal: slope undefined

    /// 1-sigma half-width of the fitted line at x, from slope and offset errors.
    double band(double x) const {
        return std::sqrt(std::max(0.0, intercept_err * intercept_err + x * x * slope_err * slope_err + 2.0 * x * covariance));
    }
};

struct PlotPoint {
    std::size_t s = 0;
    double expected = 0.0;
    double measured = 0.0;
};

struct ProbabilityPlot {
    LineFit fit;
    std::vector<PlotPoint> points;
};

/// Ordinary least squares of measured (y) on expected (x).
inline ProbabilityPlot fit_probability_plot(std::span<const double> expected, std::span<const double> measured) {
    if (expected.size() != measured.size()) throw std::invalid_argument("probability plot: length mismatch");
    const std::size_t n = expected.size();
    if (n < 3) throw std::invalid_argument("probability plot: need at least 3 points");
    ProbabilityPlot plot;
    for (std::size_t i = 0; i < n; ++i) plot.points.push_back({i, expected[i], measured[i]});

    const double nd = static_cast<double>(n);
    const double xbar = std::accumulate(expected.begin(), expected.end(), 0.0) / nd;
    const double ybar = std::accumulate(measured.begin(), measured.end(), 0.0) / nd;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (expected[i] - xbar) * (expected[i] - xbar);
        sxy += (expected[i] - xbar) * (measured[i] - ybar);
    }
    LineFit& fit = plot.fit;
    if (sxx <= 1e-300 || sxx <= 1e-24 * nd * std::max(1.0, xbar * xbar)) {
        fit.degenerate = true;
        fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
        fit.slope_err = fit.intercept_err = fit.covariance = std::numeric_limits<double>::quiet_NaN();
        return plot;
    }
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = measured[i] - (fit.intercept + fit.slope * expected[i]);
        fit.residual_ss += res * res;
    }
    const double var = fit.residual_ss / (nd - 2.0);
    fit.slope_err = std::sqrt(var / sxx);
    fit.intercept_err = std::sqrt(var * (1.0 / nd + xbar * xbar / sxx));
    fit.covariance = -xbar * var / sxx;
    return plot;
}

}  // namespace shorlab
