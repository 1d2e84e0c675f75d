#pragma once

// Multi-channel rational approximation with a common pole set.
// Pole identification relocates a trial pole set through the zeros of a
// scaling function fitted jointly with the data; residue identification is
// a linear least-squares solve per channel with the poles held fixed.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdsweep/types.hpp"

namespace fdsweep {

// Partial-fraction model: sum over m of residues[k][m] / (s - poles[m]) per
// channel k. Poles are conjugate-closed with pairs stored adjacently
// (positive-imaginary member first), real poles at the end; residue columns
// mirror that pairing.
struct RationalModel {
    std::vector<Complex> poles;
    std::vector<std::vector<Complex>> residues;  // residues[k][m]
    std::vector<std::string> channel_labels;

    int order() const { return static_cast<int>(poles.size()); }
    int channel_count() const { return static_cast<int>(residues.size()); }

    bool operator==(const RationalModel&) const = default;
};

// Diagnostics from a single pole-relocation step.
struct RelocationStats {
    std::vector<double> per_channel_rms;  // LS residual RMS inside the step
    double pole_movement = 0.0;           // max relative pole change
};

struct FitReport {
    int iterations_used = 0;
    double pole_movement = 0.0;  // movement in the last relocation performed
    int unstable_pole_count = 0;
    std::vector<double> per_channel_rms;  // after residue identification
    std::vector<double> relocation_rms;   // final relocation step, ORF channels
};

// True when every pole with nonzero imaginary part has its conjugate in the
// set (within relative tolerance) and multiplicities match.
bool is_conjugate_closed(std::span<const Complex> poles, double rel_tol = 1e-9);

// Reorders poles into the canonical layout (pairs adjacent, +im first, real
// poles last) and snaps near-conjugate pairs to exact conjugates. Throws
// ValidationError when the set is not closed under conjugation.
std::vector<Complex> canonical_poles(std::span<const Complex> poles);

// Starting poles for the identification loop: floor(order/2) conjugate pairs
// with imaginary parts equally spaced over (0, omega_max] and real parts
// -beta/100; one extra real pole at -omega_max/100 when the order is odd.
std::vector<Complex> initial_poles(double omega_max, int order);

// One relocation step on samples restricted to the ORF channels. Returns the
// zeros of the fitted scaling function as the new pole set; unstable poles
// are kept as computed.
std::vector<Complex> relocate_poles(std::span<const FrequencySample> samples,
                                    std::span<const Complex> poles,
                                    RelocationStats* stats = nullptr);

// Least-squares residues of one channel for a fixed pole set.
std::vector<Complex> identify_residues(std::span<const Complex> freqs,
                                       std::span<const Complex> values,
                                       std::span<const Complex> poles,
                                       double* residual_rms = nullptr);

// Full fit: poles identified from the ORF channels, then residues identified
// for every channel of the samples using those common poles.
std::pair<RationalModel, FitReport> vector_fit(
    std::span<const FrequencySample> samples, std::span<const int> orf_channels,
    int order, int n_relocations = 3,
    std::vector<std::string> channel_labels = {});

std::vector<Complex> eval_model(const RationalModel& model, Complex s);
Complex eval_model_channel(const RationalModel& model, int channel, Complex s);

// Relative fitting error of one channel over the given samples:
// sqrt(sum |model - data|^2 / sum |data|^2).
double fit_error_evf(const RationalModel& model, int channel,
                     std::span<const FrequencySample> samples);

}  // namespace fdsweep
