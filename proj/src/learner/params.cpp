#include "mpcl/learner/params.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include "mpcl/errors.hpp"

namespace mpcl {

namespace {

std::atomic<std::uint64_t> g_constructed{0};
std::mutex g_margin_mutex;
double g_smallest_margin = std::numeric_limits<double>::infinity();

std::uint64_t checked_ceil(double value, const char* what) {
    require(std::isfinite(value) && value >= 0.0 && value < 9.0e18, ErrorCode::parameter,
            std::string(what) + " is out of range");
    return static_cast<std::uint64_t>(std::ceil(value));
}

double eps_schedule(unsigned c, double epsilon, unsigned t) {
    return std::pow(1.0 + 1.0 / c, static_cast<double>(t)) * epsilon / (20.0 * c);
}

}  // namespace

LearnerConstants LearnerConstants::proof_grade(unsigned k, unsigned c, double delta) {
    const double base = std::log(static_cast<double>(k) * c / delta);
    LearnerConstants out;
    out.c_m1 = 2400.0 * std::log(60.0 * k * c * c / delta) / base;
    out.c_m2 = 384.0 * std::log(40.0 * k * c / delta) / base;
    return out;
}

std::vector<double> schedule_inequality_margins(unsigned c, double epsilon) {
    const double gamma = 1.0 / (10.0 * c * c);
    std::vector<double> margins;
    for (unsigned t = 0; t < c; ++t) {
        const double e0 = eps_schedule(c, epsilon, t);
        const double e1 = eps_schedule(c, epsilon, t + 1);
        const double lhs = std::log((1.0 - gamma) * e1) - std::log((1.0 + gamma) * e0);
        const double rhs = c * (std::log1p(-(1.0 - gamma) * e0) - std::log1p(-(1.0 + gamma) * e1));
        margins.push_back(lhs - rhs);
    }
    return margins;
}

LearnerParams::LearnerParams(unsigned k, unsigned d, unsigned b, unsigned c, double epsilon, double delta,
                             LearnerConstants constants)
    : k_(k), d_(d), b_(b), c_(c), epsilon_(epsilon), delta_(delta), constants_(constants) {
    require(k >= 1 && c >= 1 && b >= 1, ErrorCode::parameter, "k, c and b must be positive");
    require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::parameter, "epsilon must be in (0,1)");
    require(delta > 0.0 && delta < 1.0, ErrorCode::parameter, "delta must be in (0,1)");
    require(constants.c_n > 0 && constants.c_m1 > 0 && constants.c_m2 > 0 && constants.c_r > 0,
            ErrorCode::parameter, "schedule constants must be positive");

    alpha_ = 0.25 * std::pow(2.0 * k / epsilon, -2.0 / c);
    eta_ = std::log((1.0 - alpha_) / alpha_);
    gamma_ = 1.0 / (10.0 * c * c);
    require(alpha_ > 0.0 && alpha_ <= 0.25 && eta_ > 0.0, ErrorCode::parameter, "alpha out of (0, 1/4]");

    const double eps0 = epsilon_t(0);
    const double log_kc = std::log(static_cast<double>(k) * c / delta);
    n_ = checked_ceil(constants.c_n * (d + std::log(c / delta)) / alpha_, "N");
    m1_ = checked_ceil(constants.c_m1 * std::pow(c, 4.0) * log_kc / eps0, "M1");
    m2_ = checked_ceil(constants.c_m2 * log_kc / (eps0 * alpha_ * alpha_), "M2");
    const double log_r = std::log(static_cast<double>(k) * std::max(d, 1u) * c / (epsilon * delta));
    attempt_budget_ = checked_ceil(constants.c_r * c * log_r / eps0, "attempt budget");
    require(n_ >= 1 && m1_ >= 1 && m2_ >= 1, ErrorCode::parameter, "sample sizes must be positive");

    const auto margins = schedule_inequality_margins(c, epsilon);
    margin_ = *std::min_element(margins.begin(), margins.end());
    require(margin_ >= 0.0, ErrorCode::parameter,
            "schedule inequality fails for c=" + std::to_string(c) + ", eps=" + std::to_string(epsilon));
    require(epsilon_t(c) <= epsilon / 10.0 * (1.0 + 1e-12), ErrorCode::parameter, "eps_c exceeds eps/10");

    g_constructed.fetch_add(1, std::memory_order_relaxed);
    std::lock_guard lock(g_margin_mutex);
    g_smallest_margin = std::min(g_smallest_margin, margin_);
}

double LearnerParams::epsilon_t(unsigned t) const { return eps_schedule(c_, epsilon_, t); }

double LearnerParams::weight(std::uint32_t miss) const { return std::exp(eta_ * miss); }

std::uint64_t LearnerParams::constructed_count() { return g_constructed.load(); }

double LearnerParams::smallest_margin_seen() {
    std::lock_guard lock(g_margin_mutex);
    return g_smallest_margin;
}

}  // namespace mpcl
