#include "censreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "censreg/errors.hpp"
#include "censreg/stats.hpp"

namespace censreg {

void EstimatorConfig::validate(std::size_t dimension) const {
    if (!(bandwidth > 0.0)) throw InvalidConfig("bandwidth must be > 0");
    if (!(root_tol > 0.0)) throw InvalidConfig("root_tol must be > 0");
    if (!(bracket_pad > 0.0)) throw InvalidConfig("bracket_pad must be > 0");
    if (max_iter < 1) throw InvalidConfig("max_iter must be >= 1");
    if (!(km_floor > 0.0 && km_floor < 1.0)) throw InvalidFloor(km_floor);
    if (kernel.dimension != static_cast<int>(dimension))
        throw DimensionError("kernel dimension " + std::to_string(kernel.dimension) +
                             " does not match data dimension " + std::to_string(dimension));
    if (psi.family == PsiFamily::Huber && !(psi.huber_c > 0.0))
        throw InvalidConfig("huber constant must be > 0");
}

namespace {

//! Kernel profile with the normalization constant hoisted out of the loop;
//! evaluates from the squared radius, so weight loops need no sqrt.
struct FastProfile {
    KernelFamily family;
    double c;

    explicit FastProfile(const KernelSpec& spec)
        : family(spec.family), c(radial_profile(spec, 0.0)) {}

    double operator()(double r2) const {
        switch (family) {
            case KernelFamily::Indicator:
                return r2 <= 1.0 ? c : 0.0;
            case KernelFamily::Epanechnikov:
                return r2 <= 1.0 ? c * (1.0 - r2) : 0.0;
            case KernelFamily::Triweight: {
                if (r2 > 1.0) return 0.0;
                const double s = 1.0 - r2;
                return c * s * s * s;
            }
            case KernelFamily::Gaussian:
                return c * std::exp(-0.5 * r2);
        }
        return 0.0;
    }
};

std::size_t checked_dimension(const Dataset& data, std::span<const double> x,
                              const EstimatorConfig& cfg) {
    const std::size_t d = dimension_of(data);
    cfg.validate(d);
    if (x.size() != d)
        throw DimensionError("query point dimension " + std::to_string(x.size()) +
                             " does not match data dimension " + std::to_string(d));
    return d;
}

double squared_distance(const CensoredObservation& obs, std::span<const double> x) {
    double ss = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = obs.x[j] - x[j];
        ss += diff * diff;
    }
    return ss;
}

void fill_weights(const Dataset& data, std::span<const double> x, const EstimatorConfig& cfg,
                  std::vector<double>& out) {
    const FastProfile profile(cfg.kernel);
    const double inv_h2 = 1.0 / (cfg.bandwidth * cfg.bandwidth);
    out.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        out[i] = profile(squared_distance(data[i], x) * inv_h2);
}

//! Observations local to one query point, gathered once so the root solver
//! iterates over dense arrays.
struct LocalSample {
    std::vector<double> w;        // positive kernel weights
    std::vector<double> y;        // matching observed times
    std::vector<double> w_ipcw;   // w * delta / clamped survival
    double total_weight = 0.0;
    std::size_t n_total = 0;
    bool any_uncensored = false;

    double score(const PsiSpec& psi, double theta) const {
        double num = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            num += w_ipcw[i] * eval_psi(psi, y[i] - theta);
        return num / total_weight;
    }
};

LocalSample gather_local(const Dataset& data, const detail::CensorWeights& cw,
                         std::span<const double> x, const EstimatorConfig& cfg) {
    LocalSample local;
    local.n_total = data.size();
    const FastProfile profile(cfg.kernel);
    const double inv_h2 = 1.0 / (cfg.bandwidth * cfg.bandwidth);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = profile(squared_distance(data[i], x) * inv_h2);
        if (w <= 0.0) continue;
        local.w.push_back(w);
        local.y.push_back(data[i].y);
        local.w_ipcw.push_back(w * cw.ipcw[i]);
        local.total_weight += w;
        if (data[i].delta == 1) local.any_uncensored = true;
    }
    return local;
}

double solve_local(const LocalSample& local, const EstimatorConfig& cfg,
                   std::span<const double> x) {
    if (local.total_weight <= 0.0)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);
    if (!local.any_uncensored)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);

    const auto [ymin_it, ymax_it] = std::minmax_element(local.y.begin(), local.y.end());
    const double range = *ymax_it - *ymin_it;
    double lo = *ymin_it - cfg.bracket_pad;
    double hi = *ymax_it + cfg.bracket_pad;
    const double max_span = 10.0 * std::max(range, cfg.bracket_pad);

    double flo = local.score(cfg.psi, lo);
    double fhi = local.score(cfg.psi, hi);
    if (flo == 0.0 && fhi == 0.0) return 0.5 * (lo + hi);

    // The score is non-increasing; grow the bracket until flo >= 0 >= fhi.
    double step = hi - lo;
    while (flo < 0.0) {
        if (hi - lo > max_span) throw NoSignChange(-1);
        lo -= step;
        step *= 2.0;
        flo = local.score(cfg.psi, lo);
    }
    step = hi - lo;
    while (fhi > 0.0) {
        if (hi - lo > max_span) throw NoSignChange(+1);
        hi += step;
        step *= 2.0;
        fhi = local.score(cfg.psi, hi);
    }
    if (flo == 0.0 && fhi == 0.0) return 0.5 * (lo + hi);

    // Bisection with a secant (false-position) step every other iteration.
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        if (hi - lo <= cfg.root_tol) return 0.5 * (lo + hi);
        double mid;
        if (iter % 2 == 0 && fhi != flo) {
            mid = (lo * fhi - hi * flo) / (fhi - flo);
            const double margin = 0.01 * (hi - lo);
            if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        const double fmid = local.score(cfg.psi, mid);
        if (fmid == 0.0) return mid;
        if (fmid > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
    }
    throw MaxIterExceeded(cfg.max_iter);
}

}  // namespace

namespace detail {

CensorWeights censor_weights(const Dataset& data, const KMFit& km, double floor) {
    if (!(floor > 0.0 && floor < 1.0)) throw InvalidFloor(floor);
    CensorWeights cw;
    cw.ipcw.resize(data.size());
    cw.ginv.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double g = std::max(survival_before(km, data[i].y), floor);
        cw.ginv[i] = 1.0 / g;
        cw.ipcw[i] = data[i].delta == 1 ? 1.0 / g : 0.0;
    }
    return cw;
}

CensorWeights censor_weights(const Dataset& data, const std::function<double(double)>& true_g,
                             double floor) {
    if (!(floor > 0.0 && floor < 1.0)) throw InvalidFloor(floor);
    CensorWeights cw;
    cw.ipcw.resize(data.size());
    cw.ginv.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double g = std::max(true_g(data[i].y), floor);
        cw.ginv[i] = 1.0 / g;
        cw.ipcw[i] = data[i].delta == 1 ? 1.0 / g : 0.0;
    }
    return cw;
}

ScoreValue score_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
                      double theta, const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    std::vector<double> w;
    fill_weights(data, x, cfg, w);
    double num = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] <= 0.0) continue;
        total += w[i];
        num += w[i] * cw.ipcw[i] * eval_psi(cfg.psi, data[i].y - theta);
    }
    if (total <= 0.0)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);
    const double n = static_cast<double>(data.size());
    ScoreValue v;
    v.numerator = num / n;
    v.denominator = total / n;
    v.score = v.numerator / v.denominator;
    v.effective_weight = total;
    return v;
}

double solve_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
                  const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    return solve_local(gather_local(data, cw, x, cfg), cfg, x);
}

double nw_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
               const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    std::vector<double> w;
    fill_weights(data, x, cfg, w);
    double num = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] <= 0.0) continue;
        total += w[i];
        num += w[i] * cw.ipcw[i] * data[i].y;
    }
    if (total <= 0.0)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);
    return num / total;
}

double m_hat_with(const Dataset& data, const CensorWeights& cw, std::span<const double> x,
                  double theta, const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    std::vector<double> w;
    fill_weights(data, x, cfg, w);
    double num = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] <= 0.0) continue;
        total += w[i];
        const double p = eval_psi(cfg.psi, data[i].y - theta);
        const double ginv = cfg.mhat_with_delta ? cw.ipcw[i] : cw.ginv[i];
        num += w[i] * ginv * p * p;
    }
    if (total <= 0.0)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);
    return num / total;
}

ScoreValue score_from_terms(const std::vector<double>& weights, const std::vector<double>& y,
                            const std::vector<double>& ipcw, double theta, const PsiSpec& psi,
                            std::size_t n_total) {
    double num = 0.0, total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        total += weights[i];
        num += weights[i] * ipcw[i] * eval_psi(psi, y[i] - theta);
    }
    const double n = static_cast<double>(n_total);
    ScoreValue v;
    v.numerator = num / n;
    v.denominator = total / n;
    v.score = total != 0.0 ? v.numerator / v.denominator : 0.0;
    v.effective_weight = total;
    return v;
}

}  // namespace detail

std::vector<double> local_weights(const Dataset& data, std::span<const double> x,
                                  const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    std::vector<double> w;
    fill_weights(data, x, cfg, w);
    return w;
}

ScoreValue psi_score(const Dataset& data, const KMFit& km, std::span<const double> x,
                     double theta, const EstimatorConfig& cfg) {
    return detail::score_with(data, detail::censor_weights(data, km, cfg.km_floor), x, theta,
                              cfg);
}

ScoreValue psi_score_oracle(const Dataset& data, const std::function<double(double)>& true_g,
                            std::span<const double> x, double theta,
                            const EstimatorConfig& cfg) {
    return detail::score_with(data, detail::censor_weights(data, true_g, cfg.km_floor), x,
                              theta, cfg);
}

double psi_score_derivative(const Dataset& data, const KMFit& km, std::span<const double> x,
                            double theta, const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    const auto cw = detail::censor_weights(data, km, cfg.km_floor);
    std::vector<double> w;
    fill_weights(data, x, cfg, w);
    double num = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] <= 0.0) continue;
        total += w[i];
        num += w[i] * cw.ipcw[i] * eval_psi_prime(cfg.psi, data[i].y - theta);
    }
    if (total <= 0.0)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);
    return -num / total;
}

double solve_m_estimator(const Dataset& data, const KMFit& km, std::span<const double> x,
                         const EstimatorConfig& cfg) {
    return detail::solve_with(data, detail::censor_weights(data, km, cfg.km_floor), x, cfg);
}

double nw_estimator(const Dataset& data, const KMFit& km, std::span<const double> x,
                    const EstimatorConfig& cfg) {
    return detail::nw_with(data, detail::censor_weights(data, km, cfg.km_floor), x, cfg);
}

double estimate_m_hat(const Dataset& data, const KMFit& km, std::span<const double> x,
                      double theta, const EstimatorConfig& cfg) {
    return detail::m_hat_with(data, detail::censor_weights(data, km, cfg.km_floor), x, theta,
                              cfg);
}

double estimate_gamma1(const Dataset& data, std::span<const double> x, double theta,
                       const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    std::vector<double> w;
    fill_weights(data, x, cfg, w);
    double num = 0.0, total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] <= 0.0) continue;
        total += w[i];
        num += w[i] * eval_psi_prime(cfg.psi, data[i].y - theta);
    }
    if (total <= 0.0)
        throw NoLocalData(std::vector<double>(x.begin(), x.end()), cfg.bandwidth);
    return num / total;
}

double ball_probability(const Dataset& data, std::span<const double> x,
                        const EstimatorConfig& cfg) {
    checked_dimension(data, x, cfg);
    std::size_t inside = 0;
    for (const auto& obs : data) {
        double sup = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            sup = std::max(sup, std::fabs(obs.x[j] - x[j]));
        if (sup <= cfg.bandwidth) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(data.size());
}

double ci_half_width(double level, double gamma1, double m_hat, double ball_prob,
                     std::size_t n, const KernelSpec& kernel) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("level must lie in (0, 1)");
    const double q = normal_quantile(1.0 - 0.5 * (1.0 - level));
    const double mom1 = kernel_moment(kernel, 1);
    const double mom2 = kernel_moment(kernel, 2);
    const double d = kernel.dimension;
    const double pivot_scale =
        gamma1 * std::sqrt(static_cast<double>(n) * ball_prob * d / (m_hat * mom2)) * mom1;
    return q / pivot_scale;
}

CIResult confidence_interval(const Dataset& data, const KMFit& km, std::span<const double> x,
                             const EstimatorConfig& cfg, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("level must lie in (0, 1)");
    const auto cw = detail::censor_weights(data, km, cfg.km_floor);
    CIResult res;
    res.theta_hat = detail::solve_with(data, cw, x, cfg);
    res.level = level;
    res.n_used = data.size();
    res.gamma1_hat = estimate_gamma1(data, x, res.theta_hat, cfg);
    res.m_hat = detail::m_hat_with(data, cw, x, res.theta_hat, cfg);
    res.ball_prob = ball_probability(data, x, cfg);
    if (!(res.gamma1_hat > 0.0))
        throw DegenerateCI("gamma1", "slope plug-in is not positive");
    if (!(res.m_hat > 0.0))
        throw DegenerateCI("m_hat", "variance plug-in is not positive");
    if (res.ball_prob == 0.0)
        throw DegenerateCI("ball_prob", "no covariates inside the bandwidth ball");
    res.half_width = ci_half_width(level, res.gamma1_hat, res.m_hat, res.ball_prob, res.n_used,
                                   cfg.kernel);
    return res;
}

}  // namespace censreg
