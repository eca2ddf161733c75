#include "censreg/observation.hpp"

#include <cmath>
#include <string>

#include "censreg/errors.hpp"

namespace censreg {

std::size_t dimension_of(const Dataset& data) {
    if (data.empty()) throw EmptyData();
    const std::size_t d = data.front().x.size();
    if (d == 0) throw DimensionError("observations carry no covariates");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& obs = data[i];
        if (obs.x.size() != d)
            throw DimensionError("row " + std::to_string(i) + " has dimension " +
                                 std::to_string(obs.x.size()) + ", expected " + std::to_string(d));
        if (!std::isfinite(obs.y))
            throw InvalidObservation("row " + std::to_string(i) + ": non-finite y");
        if (obs.delta != 0 && obs.delta != 1)
            throw InvalidObservation("row " + std::to_string(i) + ": delta must be 0 or 1");
    }
    return d;
}

Dataset make_dataset(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<int>& delta) {
    if (x.size() != y.size() || y.size() != delta.size())
        throw DimensionError("make_dataset: column lengths differ");
    Dataset data(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) data[i] = {{x[i]}, y[i], delta[i]};
    return data;
}

}  // namespace censreg
