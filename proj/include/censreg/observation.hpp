#ifndef CENSREG_OBSERVATION_HPP
#define CENSREG_OBSERVATION_HPP

#include <vector>

namespace censreg {

//! One right-censored record: covariate vector, observed time, censoring flag.
//! y = min(T, C) and delta = 1 when the true response T was observed (T <= C).
struct CensoredObservation {
    std::vector<double> x;
    double y = 0.0;
    int delta = 1;
};

using Dataset = std::vector<CensoredObservation>;

//! Covariate dimension shared by all rows.
//! Throws EmptyData on an empty dataset, DimensionError on ragged rows,
//! InvalidObservation on non-finite y or delta outside {0, 1}.
std::size_t dimension_of(const Dataset& data);

//! Convenience builder for the common d = 1 case.
Dataset make_dataset(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<int>& delta);

}  // namespace censreg

#endif
