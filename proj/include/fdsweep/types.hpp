#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdsweep {

using Complex = std::complex<double>;

// Base class for all toolkit errors. The CLI maps each subclass to a
// distinct exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid user input: malformed configs, bad grids, out-of-domain arguments.
struct ValidationError : Error {
    using Error::Error;
};

// Numerical failure: rank deficiency, overflow, degenerate data.
struct NumericError : Error {
    using Error::Error;
};

// File and serialization problems, including version and schema mismatches.
struct IoError : Error {
    using Error::Error;
};

// Iteration budget exhausted without satisfying the convergence condition.
struct ConvergenceError : Error {
    using Error::Error;
};

// One frequency-domain solve: the contour frequency s and the complex
// response of every channel at s.
struct FrequencySample {
    Complex s;
    std::vector<Complex> values;

    bool operator==(const FrequencySample&) const = default;
};

// Real-valued response histories on a shared time grid, channel-major.
struct TimeSeries {
    std::vector<double> t;
    std::vector<std::vector<double>> values;  // values[k][n], channel k at t[n]
    std::vector<std::string> channel_labels;

    std::size_t channel_count() const { return values.size(); }

    bool operator==(const TimeSeries&) const = default;
};

}  // namespace fdsweep
