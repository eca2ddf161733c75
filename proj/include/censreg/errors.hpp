#ifndef CENSREG_ERRORS_HPP
#define CENSREG_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace censreg {

//! Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

//! A dataset (or weighted subset) required at least one observation.
struct EmptyData : Error {
    explicit EmptyData(const std::string& msg = "empty dataset") : Error(msg) {}
};

//! An observation failed validation (non-finite y, bad delta, ...).
struct InvalidObservation : Error {
    explicit InvalidObservation(const std::string& msg) : Error(msg) {}
};

//! Covariate dimension disagrees with the kernel or the dataset.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

//! A configuration field is outside its domain.
struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& msg) : Error(msg) {}
};

//! The inverse-survival clamp floor is outside (0, 1).
struct InvalidFloor : Error {
    explicit InvalidFloor(double floor);
};

//! Every kernel weight at the query point is zero.
struct NoLocalData : Error {
    std::vector<double> x;
    double bandwidth;
    NoLocalData(std::vector<double> x_, double bandwidth_);
};

//! The score kept one sign over the maximal root bracket.
struct NoSignChange : Error {
    int score_sign;  // +1: score positive everywhere, -1: negative everywhere
    explicit NoSignChange(int sign);
};

//! Root iteration exceeded the configured bound.
struct MaxIterExceeded : Error {
    explicit MaxIterExceeded(int max_iter);
};

//! A confidence-interval plug-in is unusable; `which` names it.
struct DegenerateCI : Error {
    std::string which;
    explicit DegenerateCI(const std::string& which_, const std::string& detail);
};

//! No censoring rate in the searched rate range attains the target.
struct UnreachableCR : Error {
    double target;
    explicit UnreachableCR(double target_);
};

//! A CSV data row could not be parsed; carries the 1-based line number.
struct MalformedRow : Error {
    long line;
    MalformedRow(long line_, const std::string& detail);
};

//! The delta column held something other than 0 or 1.
struct BadDelta : Error {
    long line;
    explicit BadDelta(long line_);
};

//! The input file had no data rows.
struct EmptyFile : Error {
    explicit EmptyFile(const std::string& path);
};

//! Filesystem-level failure (open/write).
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace censreg

#endif
