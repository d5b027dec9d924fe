#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixot {

using Vec = std::vector<double>;

// Contract violations (bad arguments, unsupported combinations) throw
// InvalidArgument; numerical breakdowns (solver stall, divergence) throw
// RuntimeFailure.  The CLI maps them to exit codes 1 and 2.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Axis-aligned box in parameter space, lo < hi coordinatewise.
struct Box {
    Vec lo;
    Vec hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& x, double slack = 0.0) const {
        if (x.size() != lo.size()) return false;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
        return true;
    }

    Vec clip(const Vec& x) const {
        Vec y = x;
        for (size_t i = 0; i < y.size(); ++i) {
            if (y[i] < lo[i]) y[i] = lo[i];
            if (y[i] > hi[i]) y[i] = hi[i];
        }
        return y;
    }

    void validate() const {
        if (lo.size() != hi.size() || lo.empty())
            throw InvalidArgument("box: lo/hi size mismatch or empty");
        for (size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i]))
                throw InvalidArgument("box: requires lo < hi coordinatewise");
    }
};

inline double sqr(double x) { return x * x; }

inline double euclidean(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += sqr(a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace mixot
