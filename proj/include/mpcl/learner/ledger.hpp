#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mpcl {

// Bits held plus per-task draw counters.
class Ledger {
public:
    explicit Ledger(std::size_t tasks = 0) : samples_(tasks, 0), rejections_(tasks, 0) {}

    void allocate(std::uint64_t bits);
    void release(std::uint64_t bits);
    std::uint64_t current_bits() const { return current_; }
    std::uint64_t peak_bits() const { return peak_; }

    // Quantile working set, tracked apart from peak_bits.
    void note_scratch(std::uint64_t bits);
    std::uint64_t peak_scratch_bits() const { return peak_scratch_; }

    void count_samples(std::size_t task, std::uint64_t n);
    void count_rejections(std::size_t task, std::uint64_t n);
    std::uint64_t samples_drawn(std::size_t task) const { return samples_.at(task); }
    std::uint64_t rejections(std::size_t task) const { return rejections_.at(task); }
    std::uint64_t total_samples() const;
    std::uint64_t total_rejections() const;
    std::size_t tasks() const { return samples_.size(); }

    friend bool operator==(const Ledger&, const Ledger&) = default;

private:
    void grow(std::size_t task);

    std::uint64_t current_ = 0;
    std::uint64_t peak_ = 0;
    std::uint64_t peak_scratch_ = 0;
    std::vector<std::uint64_t> samples_;
    std::vector<std::uint64_t> rejections_;
};

// Holds `bits` on a ledger for its lifetime.
class Reservation {
public:
    Reservation() = default;
    Reservation(Ledger& ledger, std::uint64_t bits) : ledger_(&ledger), bits_(bits) { ledger.allocate(bits); }
    Reservation(const Reservation&) = delete;
    Reservation& operator=(const Reservation&) = delete;
    Reservation(Reservation&& other) noexcept : ledger_(other.ledger_), bits_(other.bits_) { other.ledger_ = nullptr; }
    Reservation& operator=(Reservation&& other) noexcept;
    ~Reservation() { reset(); }

    void reset();
    std::uint64_t bits() const { return ledger_ ? bits_ : 0; }

private:
    Ledger* ledger_ = nullptr;
    std::uint64_t bits_ = 0;
};

}  // namespace mpcl
