#pragma once

// Time-domain reconstruction. Two routes: the Fourier series method on
// equally spaced contour frequencies (trapezoidal Bromwich integral,
// evaluated with an FFT), and the closed-form inversion of a rational
// model as a sum of complex exponentials.

#include <span>
#include <string>
#include <vector>

#include "fdsweep/types.hpp"
#include "fdsweep/vecfit.hpp"

namespace fdsweep {

// Equally spaced sweep grid. The period T and the even sample count N_s fix
// the resolutions: delta_omega = 2*pi/T, delta_t = T/N_s, omega_max =
// pi/delta_t, and N_s/2 + 1 contour evaluations.
struct FsmGrid {
    FsmGrid(double period, int sample_count);

    double period;
    int sample_count;

    double delta_omega() const;
    double delta_t() const;
    double omega_max() const;
    int contour_count() const;  // N_s/2 + 1

    // s_k = eta + i k delta_omega for k = 0 .. N_s/2.
    std::vector<Complex> contour(double eta) const;
    // t_n = n delta_t for n = 0 .. N_s - 1.
    std::vector<double> time_grid() const;

    bool operator==(const FsmGrid&) const = default;
};

// Contour abscissa eta = kappa * ln(10) / T.
double damping_eta(double kappa, double period);

// W(s_k) = 0.5 * (1 + cos(2 pi k / N_s)) for 0 <= k < N_s.
double hanning_window(int k, int sample_count);

// Expands values at k = 0 .. N_s/2 to the full length-N_s spectrum using
// conjugate symmetry; entries k = 0 and k = N_s/2 are forced real.
std::vector<Complex> conjugate_fill(std::span<const Complex> half);

// Inverts per-channel half spectra sampled on the grid's contour:
// h(n dt) = exp(eta n dt) / T * sum_k W(s_k) h(s_k) exp(2 pi i n k / N_s).
TimeSeries fsm_invert(const FsmGrid& grid, double eta,
                      const std::vector<std::vector<Complex>>& half_spectra,
                      std::vector<std::string> channel_labels,
                      bool hanning = true);

// Closed-form inversion of a conjugate-closed rational model:
// h(t) = sum_m r_m exp(a_m t), evaluated on any time grid.
TimeSeries rational_invert(const RationalModel& model,
                           std::span<const double> t_grid);

}  // namespace fdsweep
