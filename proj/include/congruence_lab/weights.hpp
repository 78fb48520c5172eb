#pragma once

// Weight functions Phi with evaluable Fourier transforms
//   Phi^(y) = int Phi(x) e(-xy) dx.
//
// gaussian(sigma):  Phi(x) = exp(-pi x^2 / sigma^2),  Phi^(y) = sigma exp(-pi sigma^2 y^2)
// bump_pair(R):     Phi = |f^|^2 with f(t) = exp(-1/(1-(t/R)^2)) on (-R, R), so
//                   Phi^ = f * f is a bump supported on [-2R, 2R]
// sharp_cutoff(h):  indicator of [-h, h]; usable for direct counts only

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace congruence_lab {

enum class WeightKind { gaussian, bump_pair, sharp_cutoff };

inline const char* weight_kind_name(WeightKind k) {
    switch (k) {
        case WeightKind::gaussian: return "gaussian";
        case WeightKind::bump_pair: return "bump_pair";
        case WeightKind::sharp_cutoff: return "sharp_cutoff";
    }
    return "unknown";
}

// Values below this are treated as outside the effective support.
inline constexpr double weight_tail_threshold = 1e-12;

namespace detail {

constexpr double two_pi = 2.0 * std::numbers::pi;

inline double seed_bump(double t, double R) {
    const double u = t / R;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

// Trapezoid rule with interval doubling until two successive values agree to `accuracy`.
// Integrands here are smooth and vanish to all orders at both ends, so convergence is
// faster than any power of the step.
template <class Fn>
double smooth_integral(Fn&& g, double lo, double hi, double accuracy, int min_intervals) {
    if (hi <= lo) return 0.0;
    int intervals = std::max(16, min_intervals);
    auto trapezoid = [&](int k) {
        const double h = (hi - lo) / k;
        double s = 0.5 * (g(lo) + g(hi));
        for (int i = 1; i < k; ++i) s += g(lo + i * h);
        return s * h;
    };
    double prev = trapezoid(intervals);
    for (int iter = 0; iter < 20; ++iter) {
        intervals *= 2;
        const double cur = trapezoid(intervals);
        if (std::abs(cur - prev) <= accuracy) return cur;
        prev = cur;
    }
    return prev;
}

// Uniform grid on [0, x_max] with 4-point cubic interpolation; zero beyond x_max.
class EvenGrid {
public:
    EvenGrid() = default;
    template <class Fn>
    EvenGrid(double x_max, std::size_t intervals, Fn&& fn) : x_max_(x_max), step_(x_max / static_cast<double>(intervals)) {
        values_.resize(intervals + 3);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = fn(static_cast<double>(i) * step_);
    }

    double operator()(double x) const {
        x = std::abs(x);
        if (x >= x_max_) return 0.0;
        const double pos = x / step_;
        std::size_t i = static_cast<std::size_t>(pos);
        const double t = pos - static_cast<double>(i);
        // nodes i-1, i, i+1, i+2, reflecting through 0 for the even extension
        const double ym1 = i == 0 ? values_[1] : values_[i - 1];
        const double y0 = values_[i], y1 = values_[i + 1], y2 = values_[i + 2];
        return y0 + t * (-(ym1 / 3.0) - y0 / 2.0 + y1 - y2 / 6.0) + t * t * (ym1 / 2.0 - y0 + y1 / 2.0) +
               t * t * t * (-(ym1 / 6.0) + y0 / 2.0 - y1 / 2.0 + y2 / 6.0);
    }

    double x_max() const { return x_max_; }

private:
    double x_max_ = 0.0;
    double step_ = 1.0;
    std::vector<double> values_;
};

struct BumpTables {
    double radius = 1.0;
    double accuracy = 1e-10;
    double phi_cutoff = 0.0;  // Phi(x) < threshold for |x| >= phi_cutoff
    EvenGrid phi;
    EvenGrid phi_hat;
    double phi_hat_zero = 0.0;
};

// f^(x) = 2 int_0^R f(t) cos(2 pi x t) dt
inline double bump_transform(double x, double R, double accuracy) {
    const int min_intervals = 8 * static_cast<int>(std::ceil(std::abs(x) * R)) + 32;
    return 2.0 * smooth_integral([&](double t) { return seed_bump(t, R) * std::cos(two_pi * x * t); }, 0.0, R, accuracy,
                                 min_intervals);
}

// (f * f)(y) = int f(t) f(y - t) dt over t in [|y| - R, R]
inline double bump_autoconvolution(double y, double R, double accuracy) {
    y = std::abs(y);
    if (y >= 2.0 * R) return 0.0;
    return smooth_integral([&](double t) { return seed_bump(t, R) * seed_bump(y - t, R); }, y - R, R, accuracy, 32);
}

inline std::shared_ptr<const BumpTables> build_bump_tables(double R, double accuracy) {
    auto tables = std::make_shared<BumpTables>();
    tables->radius = R;
    tables->accuracy = accuracy;
    // f^_R(x) = R f^_1(R x); the 1e-12 level of Phi_1 sits near |x| = 25, scan to 64 to be safe.
    const double scan_max = 64.0 / R;
    const std::size_t intervals = 512 * 64;
    const double h = scan_max / intervals;
    std::vector<double> raw(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double v = bump_transform(static_cast<double>(i) * h, R, accuracy * 1e-3);
        raw[i] = v * v;
    }
    std::size_t last = 0;
    for (std::size_t i = 0; i <= intervals; ++i)
        if (raw[i] >= weight_tail_threshold) last = i;
    tables->phi_cutoff = static_cast<double>(last + 1) * h;
    const std::size_t kept = last + 1;
    tables->phi = EvenGrid(static_cast<double>(kept) * h, kept, [&](double x) {
        const std::size_t j = static_cast<std::size_t>(std::llround(x / h));
        return j <= intervals ? raw[j] : 0.0;
    });
    tables->phi_hat = EvenGrid(2.0 * R, 4096, [&](double y) { return bump_autoconvolution(y, R, accuracy * 1e-3); });
    tables->phi_hat_zero = bump_autoconvolution(0.0, R, accuracy * 1e-3);
    return tables;
}

inline std::shared_ptr<const BumpTables> cached_bump_tables(double R, double accuracy) {
    static std::mutex lock;
    static std::map<std::pair<double, double>, std::shared_ptr<const BumpTables>> cache;
    std::lock_guard<std::mutex> guard(lock);
    auto& slot = cache[{R, accuracy}];
    if (!slot) slot = build_bump_tables(R, accuracy);
    return slot;
}

}  // namespace detail

class WeightSpec {
public:
    static WeightSpec gaussian(double sigma = 1.0) {
        if (!(sigma > 0)) fail(errc::invalid_argument, "Gaussian width must be positive");
        WeightSpec w;
        w.kind_ = WeightKind::gaussian;
        w.parameter_ = sigma;
        w.fourier_at_zero_ = sigma;
        return w;
    }

    static WeightSpec bump_pair(double radius = 1.0, double accuracy = 1e-10) {
        if (!(radius > 0)) fail(errc::invalid_argument, "bump radius must be positive");
        if (!(accuracy > 0)) fail(errc::invalid_argument, "quadrature accuracy must be positive");
        WeightSpec w;
        w.kind_ = WeightKind::bump_pair;
        w.parameter_ = radius;
        w.accuracy_ = accuracy;
        w.bump_ = detail::cached_bump_tables(radius, accuracy);
        w.fourier_at_zero_ = w.bump_->phi_hat_zero;
        return w;
    }

    static WeightSpec sharp_cutoff(double half_width = 1.0) {
        if (!(half_width > 0)) fail(errc::invalid_argument, "cutoff half-width must be positive");
        WeightSpec w;
        w.kind_ = WeightKind::sharp_cutoff;
        w.parameter_ = half_width;
        w.fourier_at_zero_ = 2.0 * half_width;
        return w;
    }

    WeightKind kind() const { return kind_; }
    double parameter() const { return parameter_; }
    double accuracy() const { return accuracy_; }
    double fourier_at_zero() const { return fourier_at_zero_; }

    // Phi(x)
    double eval(double x) const {
        switch (kind_) {
            case WeightKind::gaussian: return std::exp(-std::numbers::pi * x * x / (parameter_ * parameter_));
            case WeightKind::bump_pair: return std::max(0.0, bump_->phi(x));
            case WeightKind::sharp_cutoff: return std::abs(x) <= parameter_ ? 1.0 : 0.0;
        }
        return 0.0;
    }

    // Phi^(y)
    double fourier(double y) const {
        switch (kind_) {
            case WeightKind::gaussian:
                return parameter_ * std::exp(-std::numbers::pi * parameter_ * parameter_ * y * y);
            case WeightKind::bump_pair:
                if (y == 0.0) return fourier_at_zero_;
                return std::abs(y) >= 2.0 * parameter_ ? 0.0 : std::max(0.0, bump_->phi_hat(y));
            case WeightKind::sharp_cutoff:
                if (y == 0.0) return fourier_at_zero_;
                return std::sin(detail::two_pi * parameter_ * y) / (std::numbers::pi * y);
        }
        return 0.0;
    }

    // Direct quadrature values, bypassing the interpolation grids.
    double eval_exact(double x) const {
        if (kind_ != WeightKind::bump_pair) return eval(x);
        const double v = detail::bump_transform(x, parameter_, accuracy_ * 1e-3);
        return v * v;
    }
    double fourier_exact(double y) const {
        if (kind_ != WeightKind::bump_pair) return fourier(y);
        return detail::bump_autoconvolution(y, parameter_, accuracy_ * 1e-3);
    }

    // |x| beyond which Phi(x) < threshold.
    double support_radius() const {
        switch (kind_) {
            case WeightKind::gaussian: return parameter_ * std::sqrt(std::log(1.0 / weight_tail_threshold) / std::numbers::pi);
            case WeightKind::bump_pair: return bump_->phi_cutoff;
            case WeightKind::sharp_cutoff: return parameter_;
        }
        return 0.0;
    }

    // |y| beyond which |Phi^(y)| < threshold; infinite when Phi^ decays too slowly to truncate.
    double fourier_support_radius(double threshold = weight_tail_threshold) const {
        switch (kind_) {
            case WeightKind::gaussian: {
                const double ratio = parameter_ / threshold;
                return ratio <= 1.0 ? 0.0 : std::sqrt(std::log(ratio) / std::numbers::pi) / parameter_;
            }
            case WeightKind::bump_pair: return 2.0 * parameter_;
            case WeightKind::sharp_cutoff: return std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }

    std::string str() const {
        std::ostringstream os;
        os << weight_kind_name(kind_) << "(" << parameter_ << ")";
        return os.str();
    }

private:
    WeightKind kind_ = WeightKind::gaussian;
    double parameter_ = 1.0;
    double accuracy_ = 1e-10;
    double fourier_at_zero_ = 1.0;
    std::shared_ptr<const detail::BumpTables> bump_;
};

}  // namespace congruence_lab
