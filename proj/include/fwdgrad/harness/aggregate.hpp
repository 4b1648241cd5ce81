#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fwdgrad/optim.hpp"

namespace fwdgrad::harness {

struct AggregateRow {
    std::size_t k = 0;
    double mean_gap = 0.0;
    double std_gap = 0.0;  // population standard deviation over trials
    double mean_dist_sq = 0.0;
    double bound = 0.0;
};

/// NaN-aware equality: two NaNs compare equal.
inline bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

inline bool operator==(const AggregateRow& a, const AggregateRow& b) {
    return a.k == b.k && same_value(a.mean_gap, b.mean_gap) && same_value(a.std_gap, b.std_gap) &&
           same_value(a.mean_dist_sq, b.mean_dist_sq) && same_value(a.bound, b.bound);
}

struct AggregateTrace {
    std::vector<AggregateRow> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    friend bool operator==(const AggregateTrace&, const AggregateTrace&) = default;
};

/// Per-row mean and std over trials, accumulated in trial-index order.
/// The bound column is taken from the first trace when present, else NaN.
inline AggregateTrace aggregate(const std::vector<TrackingTrace>& traces) {
    if (traces.empty()) {
        throw std::invalid_argument("aggregate needs at least one trace");
    }
    const std::size_t rows = traces.front().size();
    for (const TrackingTrace& t : traces) {
        if (t.size() != rows) {
            throw std::invalid_argument("aggregate: traces differ in length");
        }
    }
    const double count = static_cast<double>(traces.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    AggregateTrace out;
    out.rows.reserve(rows);
    for (std::size_t j = 0; j < rows; ++j) {
        double sum = 0.0;
        double dist_sum = 0.0;
        for (const TrackingTrace& t : traces) {
            sum += t.gap[j];
            dist_sum += t.dist_sq[j];
        }
        const double mean = sum / count;
        double sq = 0.0;
        for (const TrackingTrace& t : traces) {
            const double d = t.gap[j] - mean;
            sq += d * d;
        }
        const TrackingTrace& first = traces.front();
        out.rows.push_back({j, mean, std::sqrt(sq / count), dist_sum / count,
                            j < first.bound.size() ? first.bound[j] : nan});
    }
    return out;
}

/// Mean of mean_gap over the last ceil(fraction * rows) rows, skipping `offset` rows from the end.
inline double tail_mean_gap(const AggregateTrace& trace, double fraction = 0.1, std::size_t offset_windows = 0) {
    if (trace.empty()) {
        throw std::invalid_argument("tail_mean_gap on an empty trace");
    }
    const auto window = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(trace.size())));
    const std::size_t end = trace.size() - std::min(trace.size(), window * offset_windows);
    const std::size_t begin = end - std::min(end, window);
    if (begin == end) {
        throw std::invalid_argument("tail_mean_gap: window lies outside the trace");
    }
    double sum = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
        sum += trace.rows[j].mean_gap;
    }
    return sum / static_cast<double>(end - begin);
}

}  // namespace fwdgrad::harness
