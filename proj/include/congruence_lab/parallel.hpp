#pragma once

// Block-partitioned parallel loops and compensated summation.
//
// Work is cut into blocks whose boundaries depend only on the problem size, never
// on the worker count, and block results are reduced in block order. A run with
// one thread and a run with sixteen therefore produce bit-identical sums.

#include <algorithm>
#include <atomic>
#include <complex>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace congruence_lab {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
    static std::atomic<unsigned> n{0};
    return n;
}
}  // namespace detail

// 0 means "all hardware threads".
inline void set_threads(unsigned n) { detail::thread_setting().store(n); }

inline unsigned threads() {
    unsigned n = detail::thread_setting().load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

// Neumaier summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    void add(const CompensatedSum& other) {
        add(other.sum_);
        add(other.c_);
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    void add(const CompensatedComplexSum& other) {
        re_.add(other.re_);
        im_.add(other.im_);
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_;
    CompensatedSum im_;
};

// Runs body(begin, end, block_index) over fixed-size blocks of [0, count) and
// returns the per-block results in block order.
template <class Result, class Body>
std::vector<Result> parallel_blocks(std::size_t count, std::size_t block_size, Body&& body) {
    if (block_size == 0) block_size = 1;
    std::size_t blocks = (count + block_size - 1) / block_size;
    std::vector<Result> results(blocks);
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads(), blocks));
    auto run = [&](std::size_t b) {
        std::size_t begin = b * block_size;
        std::size_t end = std::min(count, begin + block_size);
        results[b] = body(begin, end, b);
    };
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run(b);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_lock;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) run(b);
            } catch (...) {
                std::lock_guard<std::mutex> guard(error_lock);
                if (!first_error) first_error = std::current_exception();
                next.store(blocks);
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

}  // namespace congruence_lab
