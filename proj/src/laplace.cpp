#include "fdsweep/laplace.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fdsweep {

namespace {

constexpr double kPi = std::numbers::pi;

// Unnormalized inverse DFT: y_n = sum_k x_k exp(+2 pi i n k / N).
std::vector<Complex> inverse_dft(const std::vector<Complex>& x) {
    const int n = static_cast<int>(x.size());
    std::vector<Complex> in(x);
    std::vector<Complex> out(n);
    fftw_plan plan = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(in.data()),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
        FFTW_ESTIMATE);
    if (!plan) throw NumericError("fsm_invert: FFT planning failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return out;
}

}  // namespace

FsmGrid::FsmGrid(double period_in, int sample_count_in)
    : period(period_in), sample_count(sample_count_in) {
    if (!(period > 0.0)) throw ValidationError("FsmGrid: period must be positive");
    if (sample_count < 2 || sample_count % 2 != 0) {
        throw ValidationError("FsmGrid: sample count must be even and positive");
    }
}

double FsmGrid::delta_omega() const { return 2.0 * kPi / period; }

double FsmGrid::delta_t() const { return period / sample_count; }

double FsmGrid::omega_max() const { return kPi / delta_t(); }

int FsmGrid::contour_count() const { return sample_count / 2 + 1; }

std::vector<Complex> FsmGrid::contour(double eta) const {
    std::vector<Complex> s(contour_count());
    const double dw = delta_omega();
    for (int k = 0; k < contour_count(); ++k) s[k] = Complex(eta, k * dw);
    return s;
}

std::vector<double> FsmGrid::time_grid() const {
    std::vector<double> t(sample_count);
    const double dt = delta_t();
    for (int n = 0; n < sample_count; ++n) t[n] = n * dt;
    return t;
}

double damping_eta(double kappa, double period) {
    if (!(period > 0.0)) throw ValidationError("damping_eta: period must be positive");
    return kappa * std::log(10.0) / period;
}

double hanning_window(int k, int sample_count) {
    if (k < 0 || k >= sample_count) {
        throw ValidationError("hanning_window: index out of range");
    }
    return 0.5 * (1.0 + std::cos(2.0 * kPi * k / sample_count));
}

std::vector<Complex> conjugate_fill(std::span<const Complex> half) {
    if (half.size() < 2) {
        throw ValidationError("conjugate_fill: need at least two entries");
    }
    const int n = 2 * (static_cast<int>(half.size()) - 1);
    std::vector<Complex> full(n);
    full[0] = Complex(half[0].real(), 0.0);
    full[n / 2] = Complex(half[n / 2].real(), 0.0);
    for (int k = 1; k < n / 2; ++k) {
        full[k] = half[k];
        full[n - k] = std::conj(half[k]);
    }
    return full;
}

TimeSeries fsm_invert(const FsmGrid& grid, double eta,
                      const std::vector<std::vector<Complex>>& half_spectra,
                      std::vector<std::string> channel_labels, bool hanning) {
    const int n = grid.sample_count;
    if (channel_labels.size() != half_spectra.size()) {
        throw ValidationError("fsm_invert: label count mismatch");
    }
    TimeSeries series;
    series.t = grid.time_grid();
    series.channel_labels = std::move(channel_labels);
    series.values.reserve(half_spectra.size());
    const double dt = grid.delta_t();
    for (const auto& half : half_spectra) {
        if (static_cast<int>(half.size()) != grid.contour_count()) {
            throw ValidationError("fsm_invert: half spectrum length mismatch");
        }
        std::vector<Complex> full = conjugate_fill(half);
        if (hanning) {
            for (int k = 0; k < n; ++k) full[k] *= hanning_window(k, n);
        }
        const std::vector<Complex> y = inverse_dft(full);
        std::vector<double> values(n);
        double max_abs = 0.0;
        double max_imag = 0.0;
        for (int i = 0; i < n; ++i) {
            const double weight = std::exp(eta * i * dt) / grid.period;
            values[i] = y[i].real() * weight;
            max_abs = std::max(max_abs, std::abs(values[i]));
            max_imag = std::max(max_imag, std::abs(y[i].imag() * weight));
        }
        if (max_imag > 1e-10 * max_abs) {
            throw NumericError("fsm_invert: inverse transform is not real");
        }
        series.values.push_back(std::move(values));
    }
    return series;
}

TimeSeries rational_invert(const RationalModel& model,
                           std::span<const double> t_grid) {
    if (t_grid.empty()) throw ValidationError("rational_invert: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > t_grid[i - 1])) {
            throw ValidationError("rational_invert: times must be strictly increasing");
        }
    }
    if (!is_conjugate_closed(model.poles)) {
        throw ValidationError("rational_invert: model poles not conjugate-closed");
    }
    const double t_max = t_grid.back();
    for (Complex p : model.poles) {
        if (p.real() * t_max > 700.0) {
            throw NumericError("rational_invert: exponential overflow on the grid");
        }
    }
    TimeSeries series;
    series.t.assign(t_grid.begin(), t_grid.end());
    series.channel_labels = model.channel_labels;
    series.values.assign(model.channel_count(),
                         std::vector<double>(t_grid.size(), 0.0));
    std::vector<Complex> exps(model.order());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        for (int m = 0; m < model.order(); ++m) {
            exps[m] = std::exp(model.poles[m] * t);
        }
        for (int k = 0; k < model.channel_count(); ++k) {
            Complex acc(0.0, 0.0);
            for (int m = 0; m < model.order(); ++m) {
                acc += model.residues[k][m] * exps[m];
            }
            series.values[k][i] = acc.real();
        }
    }
    return series;
}

}  // namespace fdsweep
