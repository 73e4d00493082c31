#include "mpcl/learner/ledger.hpp"

#include <algorithm>
#include <numeric>

#include "mpcl/errors.hpp"

namespace mpcl {

void Ledger::allocate(std::uint64_t bits) {
    current_ += bits;
    peak_ = std::max(peak_, current_);
}

void Ledger::release(std::uint64_t bits) {
    require(bits <= current_, ErrorCode::malformed, "ledger released more bits than it holds");
    current_ -= bits;
}

void Ledger::note_scratch(std::uint64_t bits) { peak_scratch_ = std::max(peak_scratch_, bits); }

void Ledger::grow(std::size_t task) {
    if (task >= samples_.size()) {
        samples_.resize(task + 1, 0);
        rejections_.resize(task + 1, 0);
    }
}

void Ledger::count_samples(std::size_t task, std::uint64_t n) {
    grow(task);
    samples_[task] += n;
}

void Ledger::count_rejections(std::size_t task, std::uint64_t n) {
    grow(task);
    rejections_[task] += n;
}

std::uint64_t Ledger::total_samples() const {
    return std::accumulate(samples_.begin(), samples_.end(), std::uint64_t{0});
}

std::uint64_t Ledger::total_rejections() const {
    return std::accumulate(rejections_.begin(), rejections_.end(), std::uint64_t{0});
}

Reservation& Reservation::operator=(Reservation&& other) noexcept {
    if (this != &other) {
        reset();
        ledger_ = other.ledger_;
        bits_ = other.bits_;
        other.ledger_ = nullptr;
    }
    return *this;
}

void Reservation::reset() {
    if (ledger_) ledger_->release(bits_);
    ledger_ = nullptr;
}

}  // namespace mpcl
