#include "mpcl/learner/learner.hpp"

#include <bit>
#include <string>

#include "mpcl/errors.hpp"

namespace mpcl {

void SequentialAccess::enter(unsigned pass, std::size_t task) {
    bool next = false;
    if (!open_) {
        next = pass == 1 && task == 0;
    } else if (task == stage_ + 1 && pass == pass_) {
        next = task < tasks_.size();
    } else if (task == 0 && pass == pass_ + 1) {
        next = stage_ + 1 == tasks_.size();
    }
    require(next, ErrorCode::access_violation,
            "stage (" + std::to_string(pass) + ", " + std::to_string(task + 1) + ") entered out of order");
    pass_ = pass;
    stage_ = task;
    open_ = true;
}

const TaskDistribution& SequentialAccess::task(std::size_t i) const {
    require(open_ && i == stage_, ErrorCode::access_violation,
            "task " + std::to_string(i + 1) + " read during stage " + std::to_string(stage_ + 1));
    return tasks_[i];
}

std::uint64_t slot_digest(std::span<const LabeledExample> slots) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& s : slots) {
        mix(s.point.value);
        mix(s.label);
        mix(s.tag);
    }
    return h;
}

namespace {

enum Stream : std::uint64_t { quantile = 1, weight = 2, sampler = 3, coins = 4 };
constexpr std::uint64_t kInitStream = 1'000'000;
constexpr std::uint64_t kExtraStream = 0;

}  // namespace

LearnerRun run_learner(std::span<const TaskDistribution> tasks, const HypothesisClass& cls,
                       const LearnerParams& params, const Rng& rng, const LearnerOptions& options) {
    const std::size_t k = tasks.size();
    require(k >= 1, ErrorCode::parameter, "learner needs at least one task");
    require(k == params.k(), ErrorCode::parameter,
            "params were built for k=" + std::to_string(params.k()) + " but " + std::to_string(k) + " tasks given");
    const unsigned c = params.c();
    const unsigned passes = options.stop_after_pass ? std::min(options.stop_after_pass, c) : c;

    LearnerRun run;
    run.ledger = Ledger(k);
    Ledger& ledger = run.ledger;
    SequentialAccess access(tasks);

    const std::uint64_t n = params.n_train();
    const std::uint64_t slot_bits = n * example_bits(params.b());
    const std::uint64_t anchor_bits = params.b() + 64 + std::bit_width(c);
    std::vector<Reservation> held_hypotheses;
    std::vector<LabeledExample> slots(n);

    for (unsigned t = 1; t <= passes; ++t) {
        const Rng pass_rng = rng.derive(t);
        Reservation train(ledger, slot_bits);
        Reservation anchors(ledger, k * (t - 1) * anchor_bits);
        Reservation weights(ledger, k * 64);
        run.thresholds.emplace_back(k);
        run.w_hat.emplace_back(k, 0.0);
        long double w_total = 0.0L;

        for (std::size_t i = 0; i < k; ++i) {
            access.enter(t, i);
            const TaskDistribution& task = access.task(i);
            const Charge charge{&ledger, i};
            if (i == 0) {
                Rng init = pass_rng.derive(kInitStream);
                for (auto& s : slots) s = task.draw(init);
                charge.samples(n);
            }
            const Rng stage_rng = pass_rng.derive(i);
            const StageView view(task, run.hypotheses);

            auto& thr = run.thresholds.back()[i];
            thr = estimate_quantile(view, params, stage_rng.derive(Stream::quantile), options.kernel, charge);
            const double w = estimate_weight(view, params, thr, stage_rng.derive(Stream::weight), options.kernel, charge);
            run.w_hat.back()[i] = w;
            w_total += w;

            const TruncationTable table(view, thr, params.eta());
            Rng coins = stage_rng.derive(Stream::coins);
            Rng sampler = stage_rng.derive(Stream::sampler);
            const double keep_odds = w_total > 0.0L ? static_cast<double>(w / w_total) : 0.0;
            if (w_total <= 0.0L) run.diagnostics.push_back("pass " + std::to_string(t) + ": total weight is zero");
            for (auto& s : slots) {
                if (!coins.bernoulli(keep_odds)) continue;
                s = options.rejection_loop ? truncated_rejection_sample(table, sampler, params.attempt_budget(), charge)
                                           : truncated_direct_sample(table, sampler, params.attempt_budget(), charge);
            }

            run.report.push_back({t, i + 1, w, ledger.peak_bits(), ledger.samples_drawn(i), ledger.rejections(i)});
            if (options.observer) {
                StageRecord record;
                record.t = t;
                record.task = i;
                record.thresholds = thr;
                record.w_hat = w;
                record.w_total = static_cast<double>(w_total);
                record.peak_bits = ledger.peak_bits();
                record.current_bits = ledger.current_bits();
                record.samples_drawn = ledger.samples_drawn(i);
                record.rejections = ledger.rejections(i);
                record.slot_digest = slot_digest(slots);
                record.slots = slots;
                options.observer(record);
            }
        }

        Hypothesis h = cls.erm(slots);
        held_hypotheses.emplace_back(ledger, h.repr_bits());
        const double loss = empirical_loss(h, slots);
        run.erm_loss.push_back(loss);
        if (loss > 0.0) {
            run.diagnostics.push_back("pass " + std::to_string(t) + ": ERM left empirical loss " + std::to_string(loss));
        }
        run.hypotheses.push_back(std::move(h));
    }

    if (options.extra_pass && passes == c) {
        const Rng extra_rng = rng.derive(kExtraStream);
        run.extra_thresholds.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            access.enter(c + 1, i);
            const StageView view(access.task(i), run.hypotheses);
            run.extra_thresholds[i] =
                estimate_quantile(view, params, extra_rng.derive(i).derive(Stream::quantile), options.kernel);
        }
    }

    run.output = make_majority(run.hypotheses);
    return run;
}

}  // namespace mpcl
