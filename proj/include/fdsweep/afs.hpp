#pragma once

// Adaptive frequency sampling. Starting from a few contour frequencies, each
// step fits the sampled responses with two rational models of different
// orders and inserts the next frequency where the fits disagree most.
// Convergence is declared only after both error measures stay below their
// thresholds for a run of consecutive validation steps.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fdsweep/systems.hpp"
#include "fdsweep/types.hpp"
#include "fdsweep/vecfit.hpp"

namespace fdsweep {

struct AfsConfig {
    int initial_count = 16;       // J0
    double alpha_high = 2.0;      // high-order divisor
    double alpha_low = 2.3;       // low-order divisor
    double e1_threshold = 1e-4;
    double e2_threshold = 2e-3;
    int validation_steps = 3;     // J_c
    std::vector<int> orf_indices;   // empty: draw 5 channels with the seed
    std::vector<int> test_indices;  // empty: every channel
    double omega_max = 0.0;       // band [0, omega_max] (rad/s)
    double eta = 0.0;             // contour abscissa (1/s)
    double period = 0.0;          // T (s)
    int grid_points = 4096;       // argmax grid density over [0, omega_max]
    int time_points = 512;        // E1 integral grid density over [0, T]
    int max_iterations = 500;
    std::uint64_t seed = 0;
    int n_relocations = 3;

    bool operator==(const AfsConfig&) const = default;
};

struct AfsIteration {
    int sample_count = 0;  // J used by the fits of this step
    int order_high = 0;
    int order_low = 0;
    std::optional<Complex> s_new;  // absent on the final converged check
    double e1 = 0.0;
    double e2 = 0.0;
};

struct AfsResult {
    RationalModel model_high;  // final high-order model over all channels
    std::vector<FrequencySample> samples;  // in sampling order
    int n_c = 0;                           // = samples.size()
    std::vector<AfsIteration> history;
    bool converged = false;
    std::vector<int> orf_indices;
    std::vector<int> test_indices;
    std::uint64_t seed = 0;
    int solver_calls = 0;  // fresh evaluations (differs from n_c when resuming)
};

// Chebyshev-spaced starting frequencies on the contour:
// s_j = eta + i omega_max [1 - cos(j pi / (2 (j0 - 1)))], j = 0 .. j0-1.
std::vector<Complex> initial_frequencies(int j0, double eta, double omega_max);

// (M_H, M_L) = (floor(J / alpha_high), floor(J / alpha_low)); on a tie the
// low order drops to M_H - 1 so the discrepancy signal stays defined.
std::pair<int, int> fit_orders(int sample_count, double alpha_high,
                               double alpha_low);

// Per-channel relative discrepancy of the two fits over a dense contour grid:
// e_k = max_s |f_H - f_L| / max_s |f_H|.
std::vector<double> channel_errors(const RationalModel& fit_high,
                                   const RationalModel& fit_low,
                                   std::span<const Complex> grid);

// Argmax of |f_H - f_L| for the worst ORF channel over the grid, skipping
// points within exclusion_radius of an already sampled frequency. Ties break
// toward the smallest omega.
Complex select_new_frequency(const RationalModel& fit_high,
                             const RationalModel& fit_low,
                             std::span<const Complex> grid,
                             std::span<const Complex> existing,
                             std::span<const int> orf_positions,
                             double exclusion_radius);

// Relative change of the test-channel time responses between two successive
// iterations: max_k integral[(f - f_prev)^2] / integral[f^2], trapezoidal.
double error_e1(const TimeSeries& current, const TimeSeries& previous);

// Frequency-domain convergence error: max of the test-channel e_k values.
double error_e2(std::span<const double> test_channel_errors);

// Runs the three-stage adaptive process. `resume` preloads previously
// evaluated samples (in original sampling order); `on_sample` observes every
// fresh solver evaluation as it happens.
AfsResult run_afs(const FrequencySystem& system, AfsConfig config,
                  std::span<const FrequencySample> resume = {},
                  const std::function<void(const FrequencySample&)>& on_sample = {});

}  // namespace fdsweep
