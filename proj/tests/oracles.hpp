#ifndef MACD_TESTS_ORACLES_HPP
#define MACD_TESTS_ORACLES_HPP

// Independent reference implementations used only to check the library. They
// deliberately share no code with the implementation paths they verify.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "macd/matrix.hpp"

namespace macd::test {

// ---------------------------------------------------------------------------
// Central finite differences
// ---------------------------------------------------------------------------

/// d(loss)/d(param) by central differences; `loss` re-evaluates the full
/// forward pass after each perturbation of `param`.
inline Matrix fd_grad(Matrix& param, const std::function<double()>& loss, double h = 1e-5) {
    Matrix g(param.rows(), param.cols());
    for (size_t i = 0; i < param.size(); ++i) {
        const double orig = param.storage()[i];
        param.storage()[i] = orig + h;
        const double up = loss();
        param.storage()[i] = orig - h;
        const double down = loss();
        param.storage()[i] = orig;
        g.storage()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Largest relative deviation between two gradients. Entries where both sides
/// are below `abs_floor` count as matching (finite differences are pure noise
/// there).
inline double max_rel_err(const Matrix& analytic, const Matrix& numeric, double abs_floor = 1e-7) {
    double worst = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i) {
        const double a = analytic.storage()[i];
        const double b = numeric.storage()[i];
        const double mag = std::max(std::abs(a), std::abs(b));
        if (mag < abs_floor) continue;
        worst = std::max(worst, std::abs(a - b) / mag);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Metric oracles: direct transcriptions of the defining formulas.
// ---------------------------------------------------------------------------

inline double oracle_pcc(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double cov = 0, vx = 0, vy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    const double sd = std::sqrt(vx / n) * std::sqrt(vy / n);
    if (sd == 0.0) return 0.0;
    return (cov / n) / sd;
}

inline double oracle_ssim(const std::vector<double>& x, const std::vector<double>& y) {
    auto scale = [](std::vector<double> v) {
        double lo = *std::min_element(v.begin(), v.end());
        double hi = *std::max_element(v.begin(), v.end());
        for (double& e : v) e = hi > lo ? (e - lo) / (hi - lo) : 0.0;
        return v;
    };
    const std::vector<double> a = scale(x), b = scale(y);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    cov /= n;
    va /= n;
    vb /= n;
    const double c1 = 0.01, c2 = 0.03;
    return (2 * mb * ma + c1) * (2 * cov + c2) / ((mb * mb + ma * ma + c1) * (va + vb + c2));
}

inline double oracle_rmse(const std::vector<double>& x, const std::vector<double>& y) {
    double total = 0;
    for (size_t i = 0; i < x.size(); ++i) total += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(total / static_cast<double>(x.size()));
}

inline double oracle_js(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    auto kl = [&](const std::vector<double>& p, double sp) {
        double total = 0;
        for (size_t i = 0; i < p.size(); ++i) {
            const double pi = p[i] / sp;
            const double mi = 0.5 * (x[i] / sx + y[i] / sy);
            if (pi > 0) total += pi * std::log2(pi / mi);
        }
        return total;
    };
    return 0.5 * kl(x, sx) + 0.5 * kl(y, sy);
}

/// Rank = (#strictly better-placed) + (#ties + 1) / 2, counted pairwise.
inline std::map<std::string, double> oracle_accuracy_score(
    const std::map<std::string, std::array<double, 4>>& table) {
    // columns: pcc, ssim, rmse, js; ascending rank for the first two,
    // descending for the last two, best rank = N either way.
    std::map<std::string, double> as;
    const double n = static_cast<double>(table.size());
    for (const auto& [name, vals] : table) {
        double rank_total = 0;
        for (int metric = 0; metric < 4; ++metric) {
            const bool higher_better = metric < 2;
            double smaller = 0, equal = 0;
            for (const auto& [other, ovals] : table) {
                if (higher_better ? ovals[metric] < vals[metric] : ovals[metric] > vals[metric])
                    smaller += 1;
                if (ovals[metric] == vals[metric]) equal += 1; // includes self
            }
            rank_total += (smaller + (equal + 1) / 2.0) / n;
        }
        as[name] = rank_total / 4.0;
    }
    return as;
}

} // namespace macd::test

#endif
