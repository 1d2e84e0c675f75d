#pragma once

// Pluggable frequency-domain systems: each stands in for one expensive
// frequency-domain solve and returns the complex response of every channel
// at a contour frequency s. Built-ins: an exact rational system, the
// analytic fixed-free rod under a step end traction, and damped modal
// oscillators with shared poles.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdsweep/types.hpp"
#include "fdsweep/vecfit.hpp"

namespace fdsweep {

enum class Quantity { displacement, traction };

struct Station {
    double x = 0.0;
    Quantity quantity = Quantity::displacement;
    std::string label;  // optional; generated when empty
};

struct SystemDescriptor {
    int channel_count = 0;
    std::vector<std::string> channel_labels;
    std::optional<double> band_hint;  // suggested omega_max (rad/s)
};

class FrequencySystem {
  public:
    virtual ~FrequencySystem() = default;
    virtual const SystemDescriptor& descriptor() const = 0;
    // Pure and deterministic; repeated calls at equal s return identical
    // values. Systems are immutable after construction, so concurrent
    // evaluations at distinct frequencies are safe.
    virtual std::vector<Complex> evaluate(Complex s) const = 0;
};

// Fixed-free prismatic rod, Poisson ratio zero, step end traction
// P0 * H(t). Stations observe axial displacement or axial traction.
struct RodParameters {
    double length = 3.0;
    double section_side = 1.0;  // metadata only
    double youngs_modulus = 2.11e11;
    double density = 7.85e3;
    double load_amplitude = -1.0e6;
    std::vector<Station> stations;

    double wave_speed() const;
};

// Contour response of one rod station:
//   u(x,s)     = P0 c sinh(s x / c) / (E s^2 cosh(s L / c))
//   sigma(x,s) = P0 cosh(s x / c) / (s cosh(s L / c))
// with c = sqrt(E / rho). s = 0 is rejected (pole of the step load).
Complex rod_frequency_response(const RodParameters& params, const Station& station,
                               Complex s);

// Modal-superposition reference solution for every station of the rod,
// evaluated on an arbitrary time grid. Truncation order n_modes.
TimeSeries rod_time_reference(const RodParameters& params,
                              std::span<const double> t_grid, int n_modes = 400);

class RationalSystem : public FrequencySystem {
  public:
    explicit RationalSystem(RationalModel model);
    const SystemDescriptor& descriptor() const override { return descriptor_; }
    std::vector<Complex> evaluate(Complex s) const override;
    const RationalModel& model() const { return model_; }

  private:
    RationalModel model_;
    SystemDescriptor descriptor_;
};

class RodSystem : public FrequencySystem {
  public:
    explicit RodSystem(RodParameters params);
    const SystemDescriptor& descriptor() const override { return descriptor_; }
    std::vector<Complex> evaluate(Complex s) const override;
    const RodParameters& parameters() const { return params_; }

  private:
    RodParameters params_;
    SystemDescriptor descriptor_;
};

// Channel k response = sum_n phi[k][n] / (s^2 + 2 zeta_n omega_n s + omega_n^2).
class ModalSystem : public FrequencySystem {
  public:
    ModalSystem(std::vector<double> omega, std::vector<double> zeta,
                std::vector<std::vector<double>> participation,
                std::vector<std::string> channel_labels = {});
    const SystemDescriptor& descriptor() const override { return descriptor_; }
    std::vector<Complex> evaluate(Complex s) const override;

  private:
    std::vector<double> omega_;
    std::vector<double> zeta_;
    std::vector<std::vector<double>> participation_;  // [channel][mode]
    SystemDescriptor descriptor_;
};

// Builds a system from its JSON description:
//   {"type": "rational" | "rod" | "modal", ...parameters...}
// See the README for the full schemas.
std::unique_ptr<FrequencySystem> make_system_from_json(const std::string& json_text);
std::unique_ptr<FrequencySystem> load_system(const std::string& path);

}  // namespace fdsweep
