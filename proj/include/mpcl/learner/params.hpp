#pragma once

#include <cstdint>
#include <vector>

namespace mpcl {

// Multipliers for the Theta(.) sample sizes of the schedule.
struct LearnerConstants {
    double c_n = 4.0;
    double c_m1 = 4.0;
    double c_m2 = 4.0;
    double c_r = 64.0;

    // Constants large enough that the Chernoff steps behind the quantile and
    // weight guarantees go through with their stated failure budgets.
    static LearnerConstants proof_grade(unsigned k, unsigned c, double delta);
};

// (k, d, b, c, eps, delta) and the derived schedule. Construction throws
// parameter unless the schedule inequality holds for every t in [0, c-1].
class LearnerParams {
public:
    LearnerParams(unsigned k, unsigned d, unsigned b, unsigned c, double epsilon, double delta,
                  LearnerConstants constants = {});

    unsigned k() const { return k_; }
    unsigned d() const { return d_; }
    unsigned b() const { return b_; }
    unsigned c() const { return c_; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }
    const LearnerConstants& constants() const { return constants_; }

    double alpha() const { return alpha_; }
    double eta() const { return eta_; }
    double gamma() const { return gamma_; }
    // (1 + 1/c)^t * eps / (20c); defined for any t >= 0.
    double epsilon_t(unsigned t) const;

    std::uint64_t n_train() const { return n_; }
    std::uint64_t m1() const { return m1_; }
    std::uint64_t m2() const { return m2_; }
    std::uint64_t attempt_budget() const { return attempt_budget_; }

    // Smallest log(lhs) - log(rhs) of the schedule inequality over t.
    double schedule_margin() const { return margin_; }

    // exp(eta * miss), computed from the log.
    double weight(std::uint32_t miss) const;

    // Process-wide audit of every constructed instance.
    static std::uint64_t constructed_count();
    static double smallest_margin_seen();

private:
    unsigned k_, d_, b_, c_;
    double epsilon_, delta_;
    LearnerConstants constants_;
    double alpha_, eta_, gamma_;
    std::uint64_t n_, m1_, m2_, attempt_budget_;
    double margin_;
};

// log lhs - log rhs of the inequality at each t in [0, c-1].
std::vector<double> schedule_inequality_margins(unsigned c, double epsilon);

}  // namespace mpcl
