#pragma once

// Reference computations written independently of the library: plain loops,
// textbook formulas, no shared helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

// Neumaier summation, restated.
struct Neumaier {
    double s = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    [[nodiscard]] double total() const { return s + c; }
};

using Weight = std::function<double(double t, double a, double b, double xa, double xb)>;

// v_i = sum_j m_j w (x_j - x_i) by a double loop.
inline std::vector<double> velocity(const std::vector<double>& a, const std::vector<double>& x,
                                    const std::vector<double>& m, double t, const Weight& w) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Neumaier acc;
        for (std::size_t j = 0; j < x.size(); ++j) acc.add((m[j] * w(t, a[i], a[j], x[i], x[j])) * (x[j] - x[i]));
        v[i] = acc.total();
    }
    return v;
}

inline double hk(double r, double xa, double xb) { return std::abs(xb - xa) < r ? 1.0 : 0.0; }
inline double gauss(double sigma, double xa, double xb) {
    const double d = xa - xb;
    return std::exp(-(d * d) / (sigma * sigma));
}
inline double ring(double lo, double hi, double xa, double xb) {
    const double d = std::abs(xa - xb);
    return d >= lo && d <= hi ? 1.0 : 0.0;
}
inline double typed(double r, double s, double a, double b, double xa, double xb) {
    return std::abs(a - b) < s && std::abs(xa - xb) < r ? 1.0 : 0.0;
}

// W1 as the integral of |F - G| over the merged support.
inline double w1_cdf(const std::vector<double>& xa, const std::vector<double>& ma, const std::vector<double>& xb,
                     const std::vector<double>& mb) {
    std::vector<std::pair<double, double>> events;  // (position, signed mass)
    for (std::size_t i = 0; i < xa.size(); ++i) events.emplace_back(xa[i], ma[i]);
    for (std::size_t i = 0; i < xb.size(); ++i) events.emplace_back(xb[i], -mb[i]);
    std::sort(events.begin(), events.end());
    double diff = 0.0, total = 0.0;
    for (std::size_t k = 0; k + 1 < events.size(); ++k) {
        diff += events[k].second;
        total += std::abs(diff) * (events[k + 1].first - events[k].first);
    }
    return total;
}

// W1 to the uniform law on [lo, hi], by a fine midpoint sum of |F - G|.
inline double w1_uniform(const std::vector<double>& x, const std::vector<double>& m, double lo, double hi,
                         int cells = 200000) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], m[i]);
    std::sort(pts.begin(), pts.end());
    const double left = std::min(lo, pts.front().first), right = std::max(hi, pts.back().first);
    const double h = (right - left) / cells;
    double total = 0.0, f = 0.0;
    std::size_t k = 0;
    for (int c = 0; c < cells; ++c) {
        const double s = left + (c + 0.5) * h;
        while (k < pts.size() && pts[k].first <= s) f += pts[k++].second;
        const double g = std::clamp((s - lo) / (hi - lo), 0.0, 1.0);
        total += std::abs(f - g) * h;
    }
    return total;
}

// Composite Simpson rule.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

// Classical RK4 for dz/dt = F(t, z).
inline std::vector<double> rk4(std::vector<double> z, double dt, int steps,
                               const std::function<std::vector<double>(double, const std::vector<double>&)>& F) {
    const auto axpy = [](const std::vector<double>& y, double h, const std::vector<double>& k) {
        std::vector<double> r(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] + h * k[i];
        return r;
    };
    double t = 0.0;
    for (int s = 0; s < steps; ++s) {
        const auto k1 = F(t, z);
        const auto k2 = F(t + dt / 2, axpy(z, dt / 2, k1));
        const auto k3 = F(t + dt / 2, axpy(z, dt / 2, k2));
        const auto k4 = F(std::nextafter(t + dt, t), axpy(z, dt, k3));  // left limit at the step end
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        t = (s + 1) * dt;
    }
    return z;
}

// Pair-sum form of the variance identity, both sides by brute force.
inline std::pair<double, double> variance_sides(const std::vector<double>& v, const std::vector<double>& m) {
    double lhs = 0.0, M = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) lhs += m[i] * m[j] * (v[i] - v[j]) * (v[i] - v[j]);
        M += m[i];
        mean += m[i] * v[i];
    }
    mean /= M;
    double var = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) var += m[i] * (v[i] - mean) * (v[i] - mean);
    return {lhs, 2.0 * M * var};
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace oracle
