#include "syncurator/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "syncurator/errors.hpp"

namespace syncurator {

void DspConfig::validate() const {
    if (sg_window < 1 || sg_window % 2 == 0) {
        throw ConfigError("sg_window must be a positive odd integer, got " +
                          std::to_string(sg_window));
    }
    if (sg_order < 0 || sg_order >= sg_window) {
        throw ConfigError("sg_order must satisfy 0 <= sg_order < sg_window");
    }
    if (!(z_epsilon > 0.0) || !std::isfinite(z_epsilon)) {
        throw ConfigError("z_epsilon must be positive");
    }
    if (!(min_valid_fraction >= 0.0 && min_valid_fraction <= 1.0)) {
        throw ConfigError("min_valid_fraction must lie in [0, 1]");
    }
}

namespace {

void require_stage(const ChannelSignal& s, Stage expected, const char* op) {
    if (s.stage != expected) {
        throw std::invalid_argument(std::string(op) + ": " + s.component + " is at stage " +
                                    std::string(to_string(s.stage)) + ", expected " +
                                    std::string(to_string(expected)));
    }
}

// Solves the small dense system m * x = rhs in place (partial pivoting).
std::vector<double> solve(std::vector<std::vector<double>> m, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= m[i][c] * x[c];
        x[i] = acc / m[i][i];
    }
    return x;
}

} // namespace

std::vector<double> savgol_weights(int window, int order, int offset) {
    if (window < 1 || window % 2 == 0 || order < 0 || order >= window) {
        throw std::invalid_argument("savgol_weights: invalid window/order");
    }
    const int half = window / 2;
    if (offset < -half || offset > half) {
        throw std::invalid_argument("savgol_weights: offset outside window");
    }
    if (half == 0) return {1.0};

    // Abscissae scaled to [-1, 1] keep the normal matrix well conditioned.
    const std::size_t terms = static_cast<std::size_t>(order) + 1;
    std::vector<std::vector<double>> powers(static_cast<std::size_t>(window),
                                            std::vector<double>(terms));
    for (int j = -half; j <= half; ++j) {
        const double u = static_cast<double>(j) / half;
        double p = 1.0;
        for (std::size_t k = 0; k < terms; ++k, p *= u) powers[static_cast<std::size_t>(j + half)][k] = p;
    }
    std::vector<std::vector<double>> gram(terms, std::vector<double>(terms, 0.0));
    for (const auto& row : powers) {
        for (std::size_t a = 0; a < terms; ++a) {
            for (std::size_t b = 0; b < terms; ++b) gram[a][b] += row[a] * row[b];
        }
    }
    std::vector<double> target(terms);
    const double s = static_cast<double>(offset) / half;
    double p = 1.0;
    for (std::size_t k = 0; k < terms; ++k, p *= s) target[k] = p;

    // weight_j = target^T G^{-1} a_j, with G symmetric.
    const std::vector<double> c = solve(std::move(gram), std::move(target));
    std::vector<double> weights(static_cast<std::size_t>(window), 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        for (std::size_t k = 0; k < terms; ++k) weights[j] += c[k] * powers[j][k];
    }
    return weights;
}

ChannelSignal interpolate_gaps(ChannelSignal signal, const DspConfig& cfg) {
    require_stage(signal, Stage::raw, "interpolate_gaps");
    auto& v = signal.values;
    const double valid = signal.valid_fraction();
    if (valid == 0.0 || valid < cfg.min_valid_fraction) {
        throw TooSparse(signal.component, valid, cfg.min_valid_fraction);
    }

    const std::size_t n = v.size();
    std::size_t first = 0;
    while (is_missing(v[first])) ++first;
    std::size_t last = n - 1;
    while (is_missing(v[last])) --last;

    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(first), v[first]);
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(last) + 1, v.end(), v[last]);

    std::size_t left = first;
    for (std::size_t t = first + 1; t <= last; ++t) {
        if (is_missing(v[t])) continue;
        const double span = static_cast<double>(t - left);
        for (std::size_t g = left + 1; g < t; ++g) {
            const double frac = static_cast<double>(g - left) / span;
            v[g] = v[left] + frac * (v[t] - v[left]);
        }
        left = t;
    }
    signal.stage = Stage::interpolated;
    return signal;
}

ChannelSignal savitzky_golay(ChannelSignal signal, const DspConfig& cfg) {
    require_stage(signal, Stage::interpolated, "savitzky_golay");
    const int n = static_cast<int>(signal.values.size());
    if (n == 0) throw std::invalid_argument("savitzky_golay: empty signal");

    int window = std::min(cfg.sg_window, n % 2 == 1 ? n : n - 1);
    const int order = std::min(cfg.sg_order, window - 1);
    signal.stage = Stage::smoothed;
    if (window <= 1) return signal;

    const int half = window / 2;
    const std::vector<double>& x = signal.values;
    std::vector<double> y(static_cast<std::size_t>(n));

    auto apply = [&](const std::vector<double>& w, int start) {
        double acc = 0.0;
        for (int j = 0; j < window; ++j) acc += w[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(start + j)];
        return acc;
    };

    const std::vector<double> center = savgol_weights(window, order, 0);
    for (int t = half; t < n - half; ++t) y[static_cast<std::size_t>(t)] = apply(center, t - half);
    for (int t = 0; t < half; ++t) {
        y[static_cast<std::size_t>(t)] = apply(savgol_weights(window, order, t - half), 0);
        const int r = n - 1 - t;
        y[static_cast<std::size_t>(r)] = apply(savgol_weights(window, order, half - t), n - window);
    }
    signal.values = std::move(y);
    return signal;
}

ChannelSignal z_normalize(ChannelSignal signal, const DspConfig& cfg) {
    require_stage(signal, Stage::smoothed, "z_normalize");
    auto& v = signal.values;
    if (!v.empty()) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / static_cast<double>(v.size()));
        for (double& x : v) x = (x - mean) / (sd + cfg.z_epsilon);
    }
    signal.stage = Stage::normalized;
    return signal;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw LengthMismatch("pearson: lengths " + std::to_string(a.size()) + " and " +
                             std::to_string(b.size()) + " differ");
    }
    if (a.size() < 2) throw LengthMismatch("pearson: need at least two samples");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa / n < kFlatVariance || sbb / n < kFlatVariance) return 0.0;
    const double r = sab / (std::sqrt(saa) * std::sqrt(sbb));
    return std::clamp(r, -1.0, 1.0);
}

double pearson_zero_lag(const ChannelSignal& a, const ChannelSignal& b) {
    require_stage(a, Stage::normalized, "pearson_zero_lag");
    require_stage(b, Stage::normalized, "pearson_zero_lag");
    return pearson(a.values, b.values);
}

ChannelSignal process_signal(ChannelSignal raw, const DspConfig& cfg) {
    return z_normalize(savitzky_golay(interpolate_gaps(std::move(raw), cfg), cfg), cfg);
}

} // namespace syncurator
