#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls into the library's math.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "support.hpp"
#include "syncurator/evalmetrics.hpp"

namespace oracles {

using namespace syncurator;
using testing_support::dist;

// Channels, on literal mesh indices.

inline double mar(const FaceMesh& f) {
    const double sum = dist(f[13], f[14]) + dist(f[82], f[87]) + dist(f[312], f[317]) + dist(f[0], f[17]);
    return sum / 4.0 / dist(f[61], f[291]);
}

inline std::pair<double, double> gaze(const FaceMesh& f) {
    const double rx = 2.0 * (f[468].x - f[33].x) / (f[133].x - f[33].x) - 1.0;
    const double ry = 2.0 * (f[468].y - f[159].y) / (f[145].y - f[159].y) - 1.0;
    const double lx = 2.0 * (f[473].x - f[362].x) / (f[263].x - f[362].x) - 1.0;
    const double ly = 2.0 * (f[473].y - f[386].y) / (f[374].y - f[386].y) - 1.0;
    return {(rx + lx) / 2.0, (ry + ly) / 2.0};
}

inline double blink(const FaceMesh& f) {
    return -0.5 * (dist(f[159], f[145]) / dist(f[33], f[133]) + dist(f[386], f[374]) / dist(f[263], f[362]));
}

inline double ray_angle(LandmarkPoint a, LandmarkPoint v, LandmarkPoint b) {
    constexpr double kPi = std::numbers::pi;
    double d = std::abs(std::atan2(a.y - v.y, a.x - v.x) - std::atan2(b.y - v.y, b.x - v.x));
    if (d > kPi) d = 2.0 * kPi - d;
    return d;
}

inline std::array<double, 6> pose(const PoseSkeleton& p) {
    const double smx = (p[11].x + p[12].x) / 2.0, smy = (p[11].y + p[12].y) / 2.0;
    const double hmx = (p[23].x + p[24].x) / 2.0, hmy = (p[23].y + p[24].y) / 2.0;
    return {std::atan2(p[12].y - p[11].y, p[12].x - p[11].x),
            std::atan2(hmy - smy, hmx - smx),
            ray_angle(p[11], p[13], p[15]),
            ray_angle(p[12], p[14], p[16]),
            p[11].y - p[15].y,
            p[12].y - p[16].y};
}

template <typename Points>
Points transformed(const Points& f, double s, double dx, double dy) {
    Points out = f;
    for (auto& p : out) p = {s * p.x + dx, s * p.y + dy};
    return out;
}

// Signal processing.

/// Fits a degree-`order` polynomial to x[start, start + window) by QR least
/// squares and evaluates it at sample `at`.
inline double window_fit(const std::vector<double>& x, int start, int window, int order, int at) {
    Eigen::MatrixXd A(window, order + 1);
    Eigen::VectorXd y(window);
    const double c = start + (window - 1) / 2.0;
    for (int j = 0; j < window; ++j) {
        for (int k = 0; k <= order; ++k) A(j, k) = std::pow(start + j - c, k);
        y(j) = x[static_cast<std::size_t>(start + j)];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    double v = 0.0;
    for (int k = 0; k <= order; ++k) v += coef(k) * std::pow(at - c, k);
    return v;
}

inline std::vector<double> savgol(const std::vector<double>& x, int window, int order) {
    const int n = static_cast<int>(x.size());
    const int half = window / 2;
    std::vector<double> y(x.size());
    for (int t = 0; t < n; ++t) {
        const int start = std::clamp(t - half, 0, n - window);
        y[static_cast<std::size_t>(t)] = window_fit(x, start, window, order, t);
    }
    return y;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Value on the line through the nearest valid neighbours of a missing sample.
inline double line_fill(const std::vector<double>& masked, std::size_t i) {
    std::size_t x0 = i, x1 = i;
    while (is_missing(masked[x0])) --x0;
    while (is_missing(masked[x1])) ++x1;
    const double y0 = masked[x0], y1 = masked[x1];
    return (static_cast<double>(i) - static_cast<double>(x0)) * (y1 - y0) /
               (static_cast<double>(x1) - static_cast<double>(x0)) +
           y0;
}

// Evaluation metrics, by explicit loops over normalized copies.

using Vec = std::vector<double>;

inline Vec unit_of(const Embedding& e) {
    double n = 0;
    for (float x : e) n += double(x) * double(x);
    n = std::sqrt(n);
    Vec v;
    for (float x : e) v.push_back(double(x) / n);
    return v;
}

inline double directional(const EmbeddingBundle& b, const Vec& global) {
    double gn = 0;
    for (double x : global) gn += x * x;
    gn = std::sqrt(gn);
    double total = 0;
    int used = 0;
    for (std::size_t t = 0; t < b.edit_frames.size(); ++t) {
        const Vec e = unit_of(b.edit_frames[t]), s = unit_of(b.src_frames[t]);
        double dn = 0, dot = 0;
        for (std::size_t i = 0; i < e.size(); ++i) dn += (e[i] - s[i]) * (e[i] - s[i]);
        dn = std::sqrt(dn);
        if (dn < 1e-9) continue;
        for (std::size_t i = 0; i < e.size(); ++i) dot += (e[i] - s[i]) / dn * global[i] / gn;
        total += dot;
        ++used;
    }
    return total / used;
}

inline Vec difference(const Embedding& to, const Embedding& from) {
    const Vec t = unit_of(to), f = unit_of(from);
    Vec g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) g[i] = t[i] - f[i];
    return g;
}

inline double directional_image(const EmbeddingBundle& b) { return directional(b, difference(b.key, b.src_first)); }

inline double directional_text_dual(const EmbeddingBundle& b) {
    return directional(b, difference(*b.text_target, *b.text_source));
}

inline double cos(const Embedding& a, const Embedding& b) {
    const Vec x = unit_of(a), y = unit_of(b);
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += x[i] * y[i];
    return d;
}

inline double text_align(const EmbeddingBundle& b) {
    double total = 0;
    for (const auto& e : b.edit_frames) total += cos(e, *b.text_target);
    return total / double(b.edit_frames.size());
}

inline double arcface(const EmbeddingBundle& b) {
    double total = 0;
    int n = 0;
    for (const auto& f : b.face_edit_frames) {
        if (!f) continue;
        total += cos(*f, b.face_key);
        ++n;
    }
    return total / n;
}

} // namespace oracles
