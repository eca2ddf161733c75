#include "censreg/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "censreg/errors.hpp"

namespace censreg {

KMFit fit_km(const std::vector<double>& y, const std::vector<int>& delta) {
    if (y.size() != delta.size()) throw DimensionError("fit_km: y and delta lengths differ");
    const std::size_t n = y.size();
    if (n == 0) throw EmptyData("fit_km: empty input");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i]))
            throw InvalidObservation("fit_km: non-finite y at index " + std::to_string(i));
        if (delta[i] != 0 && delta[i] != 1)
            throw InvalidObservation("fit_km: delta must be 0 or 1 at index " + std::to_string(i));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (y[a] != y[b]) return y[a] < y[b];
        return delta[a] > delta[b];  // uncensored first at ties
    });

    KMFit fit;
    fit.jump_times.resize(n);
    fit.survival_values.resize(n);
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = order[i];
        fit.jump_times[i] = y[idx];
        // Uncensored factors are exactly 1, so the running product reproduces
        // the literal formula bit for bit.
        prod *= 1.0 - (1.0 - delta[idx]) / static_cast<double>(n - i);
        fit.survival_values[i] = prod;
    }
    fit.y_max = fit.jump_times.back();
    return fit;
}

KMFit fit_km(const Dataset& data) {
    std::vector<double> y(data.size());
    std::vector<int> delta(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        y[i] = data[i].y;
        delta[i] = data[i].delta;
    }
    return fit_km(y, delta);
}

double survival_at(const KMFit& fit, double t) {
    if (t >= fit.y_max) return 0.0;
    auto it = std::upper_bound(fit.jump_times.begin(), fit.jump_times.end(), t);
    if (it == fit.jump_times.begin()) return 1.0;
    return fit.survival_values[static_cast<std::size_t>(it - fit.jump_times.begin()) - 1];
}

double survival_before(const KMFit& fit, double t) {
    if (t > fit.y_max) return 0.0;
    auto it = std::lower_bound(fit.jump_times.begin(), fit.jump_times.end(), t);
    if (it == fit.jump_times.begin()) return 1.0;
    return fit.survival_values[static_cast<std::size_t>(it - fit.jump_times.begin()) - 1];
}

double clamped_inverse_survival(const KMFit& fit, double t, double floor) {
    if (!(floor > 0.0 && floor < 1.0)) throw InvalidFloor(floor);
    return 1.0 / std::max(survival_at(fit, t), floor);
}

}  // namespace censreg
