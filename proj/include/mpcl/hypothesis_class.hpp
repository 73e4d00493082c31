#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpcl/exec.hpp"
#include "mpcl/hypothesis.hpp"

namespace mpcl {

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

// A finite hypothesis class with a documented enumeration order. ERM ties are
// broken by that order (first minimizer wins).
class HypothesisClass {
public:
    virtual ~HypothesisClass() = default;

    virtual std::string name() const = 0;
    virtual std::uint64_t universe_size() const = 0;
    // nullopt when the count does not fit in 64 bits.
    virtual std::optional<std::uint64_t> cardinality() const = 0;
    virtual unsigned vc_upper_hint() const = 0;

    // Visits members in enumeration order until `visit` returns false.
    virtual void enumerate(const std::function<bool(const Hypothesis&)>& visit) const = 0;

    // Default: exhaustive scan, capped by enumeration_cap().
    virtual Hypothesis erm(std::span<const LabeledExample> sample) const;
    // True when erm() always returns the first minimizer in enumeration order.
    virtual bool erm_is_exact() const { return true; }

    std::uint64_t enumeration_cap() const { return enumeration_cap_; }
    void set_enumeration_cap(std::uint64_t cap) { enumeration_cap_ = cap; }

protected:
    // Throws budget when the class is too large to enumerate.
    void require_enumerable() const;

private:
    std::uint64_t enumeration_cap_ = kDefaultEnumerationCap;
};

// A class given by an explicit member list.
class ExplicitClass final : public HypothesisClass {
public:
    ExplicitClass(std::string name, std::uint64_t universe_size, std::vector<Hypothesis> members,
                  unsigned vc_hint);

    std::string name() const override { return name_; }
    std::uint64_t universe_size() const override { return universe_size_; }
    std::optional<std::uint64_t> cardinality() const override { return members_.size(); }
    unsigned vc_upper_hint() const override { return vc_hint_; }
    void enumerate(const std::function<bool(const Hypothesis&)>& visit) const override;

    std::span<const Hypothesis> members() const { return members_; }

private:
    std::string name_;
    std::uint64_t universe_size_;
    std::vector<Hypothesis> members_;
    unsigned vc_hint_;
};

// {constant-0, constant-1}.
ExplicitClass constants_class(std::uint64_t universe_size);
// All 2^n tables; point 0 is the most significant bit of the enumeration index.
ExplicitClass all_tables_class(std::uint64_t universe_size);
// h_theta(x) = 1[x >= theta] for theta = 0..n, in increasing theta.
ExplicitClass threshold_class(std::uint64_t universe_size);

Hypothesis erm(const HypothesisClass& cls, std::span<const LabeledExample> sample);

// A member with zero loss on every task, or nullopt. Exhaustive: enumerates
// classes within `cap`; larger classes are scanned through an exact ERM over
// the pooled support, and anything else is a budget error.
std::optional<Hypothesis> check_realizable(const HypothesisClass& cls,
                                           std::span<const TaskDistribution> tasks,
                                           std::uint64_t cap = kDefaultEnumerationCap);

struct VcResult {
    unsigned dimension = 0;
    // The search stopped at `cap`: the true dimension is >= dimension.
    bool at_least_cap = false;
    std::uint64_t distinct_hypotheses = 0;
    std::uint64_t subsets_checked = 0;
    // Every examined projection respected sum_{i<=d} C(|S|, i).
    bool sauer_shelah_ok = true;
};

inline constexpr std::uint64_t kDefaultSubsetLimit = std::uint64_t{1} << 26;

// Exact VC dimension by shattering search over candidate subsets. Shattered
// sets are downward closed, so level s+1 only extends shattered sets of size s.
VcResult vc_dimension_bruteforce(const HypothesisClass& cls, std::uint64_t universe_size, unsigned cap,
                                 std::uint64_t subset_limit = kDefaultSubsetLimit,
                                 Exec exec = Exec::parallel);

}  // namespace mpcl
