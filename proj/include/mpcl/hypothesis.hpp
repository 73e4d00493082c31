#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mpcl/universe.hpp"

namespace mpcl {

enum class HypothesisKind { table, line, pointer_chasing, majority };

// Total boolean predicate on a finite universe.
class HypothesisModel {
public:
    virtual ~HypothesisModel() = default;

    virtual bool eval(PointId x) const = 0;
    // Bits needed to write the hypothesis down in its own parametrization.
    virtual std::uint64_t repr_bits() const = 0;
    virtual HypothesisKind kind() const = 0;
};

// Shared immutable handle; cheap to copy and safe to share across threads.
class Hypothesis {
public:
    Hypothesis() = default;
    explicit Hypothesis(std::shared_ptr<const HypothesisModel> model) : model_(std::move(model)) {}

    bool operator()(PointId x) const { return model_->eval(x); }
    std::uint8_t label(PointId x) const { return model_->eval(x) ? 1 : 0; }
    std::uint64_t repr_bits() const { return model_->repr_bits(); }
    HypothesisKind kind() const { return model_->kind(); }

    template <typename Model>
    const Model* as() const {
        return dynamic_cast<const Model*>(model_.get());
    }

    explicit operator bool() const { return static_cast<bool>(model_); }

private:
    std::shared_ptr<const HypothesisModel> model_;
};

class TableHypothesis final : public HypothesisModel {
public:
    explicit TableHypothesis(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {}

    bool eval(PointId x) const override { return labels_.at(x.value) != 0; }
    // One bit per universe point.
    std::uint64_t repr_bits() const override { return labels_.size(); }
    HypothesisKind kind() const override { return HypothesisKind::table; }

    std::span<const std::uint8_t> labels() const { return labels_; }

private:
    std::vector<std::uint8_t> labels_;
};

// h(x) = 1 iff at least half of the voters say 1.
class MajorityHypothesis final : public HypothesisModel {
public:
    explicit MajorityHypothesis(std::vector<Hypothesis> voters) : voters_(std::move(voters)) {}

    bool eval(PointId x) const override;
    std::uint64_t repr_bits() const override;
    HypothesisKind kind() const override { return HypothesisKind::majority; }

    std::span<const Hypothesis> voters() const { return voters_; }

private:
    std::vector<Hypothesis> voters_;
};

Hypothesis make_table(std::vector<std::uint8_t> labels);
Hypothesis make_constant(std::uint64_t universe_size, std::uint8_t label);
Hypothesis make_majority(std::vector<Hypothesis> voters);

// Fraction of S misclassified by h. Throws empty_sample on an empty S.
double empirical_loss(const Hypothesis& h, std::span<const LabeledExample> sample);

// Exact mass of the atoms of D that h mislabels.
double distribution_loss(const Hypothesis& h, const TaskDistribution& task);

}  // namespace mpcl
