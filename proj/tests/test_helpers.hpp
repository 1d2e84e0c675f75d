#pragma once

// Shared oracles and generators for the test suites. Everything here is
// independent of the library's fitting/inversion code paths: responses are
// assembled term by term from known pole/residue data or closed forms.

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "fdsweep/systems.hpp"
#include "fdsweep/types.hpp"

namespace fdsweep::testing {

// Deterministic xorshift generator so expected values are stable across
// platforms and standard libraries.
class TestRng {
  public:
    explicit TestRng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
        if (state_ == 0) state_ = 1;
    }
    std::uint64_t next() {
        state_ ^= state_ << 13;
        state_ ^= state_ >> 7;
        state_ ^= state_ << 17;
        return state_;
    }
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next() >> 11) * 0x1p-53;
        return lo + (hi - lo) * u;
    }

  private:
    std::uint64_t state_;
};

// Term-by-term partial fraction sum; the reference route for rational data.
inline Complex rational_sum(const std::vector<Complex>& poles,
                            const std::vector<Complex>& residues, Complex s) {
    Complex acc(0.0, 0.0);
    for (std::size_t m = 0; m < poles.size(); ++m) {
        acc += residues[m] / (s - poles[m]);
    }
    return acc;
}

// Samples of a common-pole multi-channel rational model on given frequencies.
inline std::vector<FrequencySample> rational_samples(
    const std::vector<Complex>& poles,
    const std::vector<std::vector<Complex>>& residues,
    const std::vector<Complex>& freqs) {
    std::vector<FrequencySample> samples;
    for (Complex s : freqs) {
        FrequencySample smp;
        smp.s = s;
        for (const auto& row : residues) {
            smp.values.push_back(rational_sum(poles, row, s));
        }
        samples.push_back(std::move(smp));
    }
    return samples;
}

inline std::vector<FrequencySample> sample_system(const FrequencySystem& system,
                                                  const std::vector<Complex>& freqs) {
    std::vector<FrequencySample> samples;
    for (Complex s : freqs) samples.push_back({s, system.evaluate(s)});
    return samples;
}

inline std::vector<Complex> contour_points(double eta, double omega_max, int count) {
    std::vector<Complex> freqs(count);
    for (int j = 0; j < count; ++j) {
        freqs[j] = Complex(eta, omega_max * j / (count - 1));
    }
    return freqs;
}

// Analytic partial fractions of one second-order mode: the pair
// p = -zeta*omega +/- i*omega*sqrt(1-zeta^2) carries residues
// phi / (2i Im p) and its conjugate.
inline void mode_partial_fractions(double omega, double zeta, double phi,
                                   std::vector<Complex>& poles,
                                   std::vector<Complex>& residues) {
    const double damped = omega * std::sqrt(1.0 - zeta * zeta);
    const Complex p(-zeta * omega, damped);
    const Complex r = phi / (Complex(0.0, 2.0) * damped);
    poles.push_back(p);
    poles.push_back(std::conj(p));
    residues.push_back(r);
    residues.push_back(std::conj(r));
}

struct ModalFixture {
    std::vector<double> omega;
    std::vector<double> zeta;
    std::vector<std::vector<double>> participation;  // [channel][mode]
    std::vector<Complex> poles;                      // analytic, pairs adjacent
    std::vector<std::vector<Complex>> residues;      // [channel][pole]
    double band = 0.0;                               // largest damped frequency
};

// Eight modes with clustered peaks, ten channels with deterministic
// pseudo-random participation factors.
inline ModalFixture make_modal_fixture(int channels = 10) {
    ModalFixture fx;
    fx.omega = {2.1, 2.7, 5.3, 8.9, 13.1, 13.7, 21.4, 29.8};
    fx.zeta = {0.01, 0.02, 0.015, 0.01, 0.03, 0.025, 0.02, 0.05};
    TestRng rng(42);
    fx.participation.resize(channels);
    for (int k = 0; k < channels; ++k) {
        for (std::size_t n = 0; n < fx.omega.size(); ++n) {
            double phi = rng.uniform(0.2, 2.0);
            if (rng.next() % 2 == 0) phi = -phi;
            fx.participation[k].push_back(phi);
        }
    }
    fx.residues.resize(channels);
    for (int k = 0; k < channels; ++k) {
        std::vector<Complex> poles;
        for (std::size_t n = 0; n < fx.omega.size(); ++n) {
            mode_partial_fractions(fx.omega[n], fx.zeta[n],
                                   fx.participation[k][n], poles,
                                   fx.residues[k]);
            if (k == 0) {
                fx.poles.push_back(poles[2 * n]);
                fx.poles.push_back(poles[2 * n + 1]);
            }
        }
    }
    for (double w : fx.omega) fx.band = std::max(fx.band, w);
    return fx;
}

inline std::unique_ptr<ModalSystem> make_modal_system(const ModalFixture& fx) {
    return std::make_unique<ModalSystem>(fx.omega, fx.zeta, fx.participation);
}

// The seven-station rod layout used throughout: five observation channels
// (displacement at x = 3 and 1.53, traction at x = 0) plus two test
// channels (traction at x = 0, displacement at x = 1.898).
inline RodParameters make_rod_layout() {
    RodParameters rod;
    rod.stations = {
        {3.0, Quantity::displacement, "p1_disp"},
        {0.0, Quantity::traction, "p2_trac"},
        {3.0, Quantity::displacement, "p3_disp"},
        {0.0, Quantity::traction, "p4_trac"},
        {1.53, Quantity::displacement, "p5_disp"},
        {0.0, Quantity::traction, "p6_trac"},
        {1.898, Quantity::displacement, "p7_disp"},
    };
    return rod;
}

}  // namespace fdsweep::testing
