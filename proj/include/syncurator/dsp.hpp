#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "syncurator/channels.hpp"

namespace syncurator {

struct DspConfig {
    int sg_window = 9;                ///< Savitzky-Golay window length (odd)
    int sg_order = 2;                 ///< polynomial order, < sg_window
    double z_epsilon = 1e-6;          ///< z-score denominator guard
    double min_valid_fraction = 0.5;  ///< below this, interpolation refuses the signal

    /// Throws ConfigError if any invariant is violated.
    void validate() const;

    friend bool operator==(const DspConfig&, const DspConfig&) = default;
};

/// Fills interior gaps linearly and edge gaps with the nearest valid value.
/// Valid samples are never modified. Throws TooSparse when the valid
/// fraction is below cfg.min_valid_fraction or there is no valid sample.
ChannelSignal interpolate_gaps(ChannelSignal signal, const DspConfig& cfg);

/// Savitzky-Golay smoothing. Interior samples take the value at the center
/// of the least-squares polynomial over their window; the first and last
/// half-window samples are evaluated on the polynomial fitted to the first
/// (last) full window, so polynomials of degree <= order pass unchanged
/// everywhere. Signals shorter than the window use the largest odd window
/// that fits, and the order is capped at window - 1.
ChannelSignal savitzky_golay(ChannelSignal signal, const DspConfig& cfg);

/// (x - mean) / (population std + epsilon).
ChannelSignal z_normalize(ChannelSignal signal, const DspConfig& cfg);

/// Zero-lag Pearson correlation of two normalized signals. Returns 0 when
/// either input has population variance below kFlatVariance.
double pearson_zero_lag(const ChannelSignal& a, const ChannelSignal& b);

inline constexpr double kFlatVariance = 1e-12;

/// Pearson coefficient on plain sample vectors (same flat-input rule).
/// Throws LengthMismatch on unequal lengths or fewer than two samples.
double pearson(std::span<const double> a, std::span<const double> b);

/// interpolate -> smooth -> normalize.
ChannelSignal process_signal(ChannelSignal raw, const DspConfig& cfg);

/// Convolution weights that evaluate the least-squares polynomial of degree
/// `order` over a window of length `window` at position `offset` (relative
/// to the window center, |offset| <= window / 2).
std::vector<double> savgol_weights(int window, int order, int offset);

} // namespace syncurator
