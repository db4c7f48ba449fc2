#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motifrules/error.hpp"

namespace motifrules {

// Uniformly sampled real-valued series. Immutable once built, so it can be
// shared freely between concurrent workers.
class TimeSeries {
public:
    TimeSeries() = default;

    TimeSeries(std::vector<double> values, double start_time, double period,
               std::string name = {})
        : values_(std::move(values)), start_time_(start_time), period_(period),
          name_(std::move(name)) {
        if (!(period_ > 0.0) || !std::isfinite(period_))
            throw ArgumentError("time series period must be positive and finite");
        if (!std::isfinite(start_time_))
            throw ArgumentError("time series start time must be finite");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw ArgumentError("non-finite sample at index " + std::to_string(i));
        }
    }

    explicit TimeSeries(std::vector<double> values, std::string name = {})
        : TimeSeries(std::move(values), 0.0, 1.0, std::move(name)) {}

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

    [[nodiscard]] double start_time() const noexcept { return start_time_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    // Timestamp of sample `index`.
    [[nodiscard]] double time_at(std::size_t index) const noexcept {
        return start_time_ + static_cast<double>(index) * period_;
    }

    // Bounds-checked view of [start, start + length).
    [[nodiscard]] std::span<const double> window(std::size_t start, std::size_t length) const {
        if (length > values_.size() || start > values_.size() - length)
            throw ArgumentError("window [" + std::to_string(start) + ", " +
                                std::to_string(start + length) + ") exceeds series length " +
                                std::to_string(values_.size()));
        return std::span<const double>(values_).subspan(start, length);
    }

private:
    std::vector<double> values_;
    double start_time_ = 0.0;
    double period_ = 1.0;
    std::string name_;
};

// A window of a series. Non-owning: the source must outlive it.
struct Subsequence {
    const TimeSeries* source = nullptr;
    std::size_t start = 0;
    std::size_t length = 0;

    Subsequence() = default;
    Subsequence(const TimeSeries& series, std::size_t start_index, std::size_t len)
        : source(&series), start(start_index), length(len) {
        if (len == 0) throw ArgumentError("subsequence length must be positive");
        (void)series.window(start_index, len);
    }

    [[nodiscard]] std::span<const double> values() const { return source->window(start, length); }
    [[nodiscard]] std::size_t end() const noexcept { return start + length; }

    // Two equal-length windows overlap when their starts are closer than the length.
    [[nodiscard]] bool overlaps(const Subsequence& other) const noexcept {
        const auto lo = std::min(start, other.start);
        const auto hi = std::max(start, other.start);
        return hi < lo + std::max(length, other.length);
    }
};

enum class DistanceMode { raw, znorm };

// Sum of squared pointwise differences, accumulated in index order.
[[nodiscard]] inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ArgumentError("distance: length mismatch (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

// Euclidean distance.
[[nodiscard]] inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

[[nodiscard]] inline double distance(const Subsequence& a, const Subsequence& b) {
    return distance(a.values(), b.values());
}

inline constexpr double kFlatStddev = 1e-12;

// Zero mean, unit population standard deviation. Flat input maps to all zeros.
[[nodiscard]] inline std::vector<double> znormalize(std::span<const double> values) {
    if (values.size() < 2) throw ArgumentError("znormalize requires at least 2 samples");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(values.size()));
    std::vector<double> out(values.size(), 0.0);
    if (sd < kFlatStddev) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
    return out;
}

// Distance under the chosen mode; znorm normalizes both sides independently.
[[nodiscard]] inline double mode_distance(std::span<const double> a, std::span<const double> b,
                                          DistanceMode mode) {
    if (mode == DistanceMode::raw) return distance(a, b);
    if (a.size() != b.size()) throw ArgumentError("distance: length mismatch");
    if (a.size() < 2) return 0.0;
    return distance(znormalize(a), znormalize(b));
}

// Bucket-mean downsampling. The trailing partial bucket is dropped.
[[nodiscard]] inline TimeSeries resample(const TimeSeries& series, double new_period) {
    if (!(new_period > 0.0)) throw ArgumentError("resample: new period must be positive");
    if (new_period < series.period())
        throw ArgumentError("resample: upsampling is not supported (new period " +
                            std::to_string(new_period) + " < " + std::to_string(series.period()) +
                            ")");
    const double ratio = new_period / series.period();
    const auto bucket = static_cast<std::size_t>(std::llround(ratio));
    if (bucket == 0 || std::abs(ratio - static_cast<double>(bucket)) > 1e-9 * ratio)
        throw ArgumentError("resample: new period must be an integer multiple of the period");
    std::vector<double> out;
    out.reserve(series.size() / bucket);
    const auto vals = series.values();
    for (std::size_t b = 0; (b + 1) * bucket <= vals.size(); ++b) {
        double sum = 0.0;
        for (std::size_t i = b * bucket; i < (b + 1) * bucket; ++i) sum += vals[i];
        out.push_back(sum / static_cast<double>(bucket));
    }
    return TimeSeries(std::move(out), series.start_time(), new_period, series.name());
}

} // namespace motifrules
