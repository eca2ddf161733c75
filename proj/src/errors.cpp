#include "censreg/errors.hpp"

#include <sstream>

namespace censreg {

namespace {

std::string format_point(const std::vector<double>& x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ")";
    return os.str();
}

}  // namespace

InvalidFloor::InvalidFloor(double floor)
    : Error("clamp floor must lie in (0, 1), got " + std::to_string(floor)) {}

NoLocalData::NoLocalData(std::vector<double> x_, double bandwidth_)
    : Error("no observations carry positive kernel weight at x = " + format_point(x_) +
            " with bandwidth " + std::to_string(bandwidth_)),
      x(std::move(x_)),
      bandwidth(bandwidth_) {}

NoSignChange::NoSignChange(int sign)
    : Error(std::string("score is ") + (sign > 0 ? "positive" : "negative") +
            " over the maximal bracket; no root"),
      score_sign(sign) {}

MaxIterExceeded::MaxIterExceeded(int max_iter)
    : Error("root refinement did not converge within " + std::to_string(max_iter) +
            " iterations") {}

DegenerateCI::DegenerateCI(const std::string& which_, const std::string& detail)
    : Error("degenerate confidence interval: " + detail), which(which_) {}

UnreachableCR::UnreachableCR(double target_)
    : Error("no censoring rate in [1e-4, 1e4] attains target CR " + std::to_string(target_)),
      target(target_) {}

MalformedRow::MalformedRow(long line_, const std::string& detail)
    : Error("line " + std::to_string(line_) + ": " + detail), line(line_) {}

BadDelta::BadDelta(long line_)
    : Error("line " + std::to_string(line_) + ": delta must be 0 or 1"), line(line_) {}

EmptyFile::EmptyFile(const std::string& path) : Error(path + ": no data rows") {}

}  // namespace censreg
