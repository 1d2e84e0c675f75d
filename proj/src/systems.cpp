#include "fdsweep/systems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fdsweep {

namespace {

constexpr double kPi = std::numbers::pi;

// sinh(z_num) / cosh(z_den) with the dominant exponential factored out, so
// the ratio stays finite when |Re| is large. Requires |Re z_num| <= |Re z_den|.
Complex sinh_over_cosh(Complex z_num, Complex z_den) {
    if (z_den.real() >= 0.0) {
        const Complex num = std::exp(z_num - z_den) - std::exp(-z_num - z_den);
        return num / (1.0 + std::exp(-2.0 * z_den));
    }
    const Complex num = std::exp(z_num + z_den) - std::exp(-z_num + z_den);
    return num / (std::exp(2.0 * z_den) + 1.0);
}

Complex cosh_over_cosh(Complex z_num, Complex z_den) {
    if (z_den.real() >= 0.0) {
        const Complex num = std::exp(z_num - z_den) + std::exp(-z_num - z_den);
        return num / (1.0 + std::exp(-2.0 * z_den));
    }
    const Complex num = std::exp(z_num + z_den) + std::exp(-z_num + z_den);
    return num / (std::exp(2.0 * z_den) + 1.0);
}

std::string default_station_label(const Station& st, int index) {
    std::ostringstream os;
    os << (st.quantity == Quantity::displacement ? "disp" : "trac") << "_x"
       << st.x << "_" << index;
    return os.str();
}

void require_unique_labels(const std::vector<std::string>& labels) {
    std::set<std::string> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) {
            throw ValidationError("duplicate channel label: " + label);
        }
    }
}

void validate_rod(const RodParameters& p) {
    if (!(p.length > 0.0)) throw ValidationError("rod: length must be positive");
    if (!(p.youngs_modulus > 0.0)) {
        throw ValidationError("rod: Young's modulus must be positive");
    }
    if (!(p.density > 0.0)) throw ValidationError("rod: density must be positive");
    for (const auto& st : p.stations) {
        if (st.x < 0.0 || st.x > p.length) {
            throw ValidationError("rod: station outside [0, L]");
        }
    }
}

}  // namespace

double RodParameters::wave_speed() const {
    return std::sqrt(youngs_modulus / density);
}

Complex rod_frequency_response(const RodParameters& params,
                               const Station& station, Complex s) {
    if (s == 0.0) {
        throw ValidationError("rod response undefined at s = 0 (step-load pole)");
    }
    const double c = params.wave_speed();
    const Complex z_x = s * station.x / c;
    const Complex z_l = s * params.length / c;
    if (station.quantity == Quantity::displacement) {
        return params.load_amplitude * c * sinh_over_cosh(z_x, z_l) /
               (params.youngs_modulus * s * s);
    }
    return params.load_amplitude * cosh_over_cosh(z_x, z_l) / s;
}

TimeSeries rod_time_reference(const RodParameters& params,
                              std::span<const double> t_grid, int n_modes) {
    validate_rod(params);
    if (n_modes < 1) throw ValidationError("rod reference: n_modes must be >= 1");
    const double c = params.wave_speed();
    const double length = params.length;
    const double load = params.load_amplitude;
    const double modulus = params.youngs_modulus;

    TimeSeries series;
    series.t.assign(t_grid.begin(), t_grid.end());
    series.values.assign(params.stations.size(),
                         std::vector<double>(t_grid.size(), 0.0));
    for (std::size_t k = 0; k < params.stations.size(); ++k) {
        const Station& st = params.stations[k];
        series.channel_labels.push_back(
            st.label.empty() ? default_station_label(st, static_cast<int>(k))
                             : st.label);
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double t = t_grid[i];
            double sum = 0.0;
            for (int n = 1; n <= n_modes; ++n) {
                const double q = 2.0 * n - 1.0;
                const double sign = (n % 2 == 1) ? 1.0 : -1.0;
                const double time_factor = std::cos(q * kPi * c * t / (2.0 * length));
                if (st.quantity == Quantity::displacement) {
                    sum += sign / (q * q) * std::sin(q * kPi * st.x / (2.0 * length)) *
                           time_factor;
                } else {
                    sum += sign / q * std::cos(q * kPi * st.x / (2.0 * length)) *
                           time_factor;
                }
            }
            if (st.quantity == Quantity::displacement) {
                series.values[k][i] =
                    load / modulus * (st.x - 8.0 * length / (kPi * kPi) * sum);
            } else {
                series.values[k][i] = load * (1.0 - 4.0 / kPi * sum);
            }
        }
    }
    return series;
}

RationalSystem::RationalSystem(RationalModel model) : model_(std::move(model)) {
    if (model_.channel_count() < 1) {
        throw ValidationError("rational system: needs at least one channel");
    }
    if (!is_conjugate_closed(model_.poles)) {
        throw ValidationError("rational system: poles not conjugate-closed");
    }
    descriptor_.channel_count = model_.channel_count();
    descriptor_.channel_labels = model_.channel_labels;
    require_unique_labels(descriptor_.channel_labels);
    double band = 0.0;
    for (Complex p : model_.poles) band = std::max(band, std::abs(p.imag()));
    if (band > 0.0) descriptor_.band_hint = 1.2 * band;
}

std::vector<Complex> RationalSystem::evaluate(Complex s) const {
    return eval_model(model_, s);
}

RodSystem::RodSystem(RodParameters params) : params_(std::move(params)) {
    validate_rod(params_);
    if (params_.stations.empty()) {
        throw ValidationError("rod system: needs at least one station");
    }
    descriptor_.channel_count = static_cast<int>(params_.stations.size());
    for (std::size_t k = 0; k < params_.stations.size(); ++k) {
        const Station& st = params_.stations[k];
        descriptor_.channel_labels.push_back(
            st.label.empty() ? default_station_label(st, static_cast<int>(k))
                             : st.label);
    }
    require_unique_labels(descriptor_.channel_labels);
}

std::vector<Complex> RodSystem::evaluate(Complex s) const {
    std::vector<Complex> out(params_.stations.size());
    for (std::size_t k = 0; k < params_.stations.size(); ++k) {
        out[k] = rod_frequency_response(params_, params_.stations[k], s);
    }
    return out;
}

ModalSystem::ModalSystem(std::vector<double> omega, std::vector<double> zeta,
                         std::vector<std::vector<double>> participation,
                         std::vector<std::string> channel_labels)
    : omega_(std::move(omega)),
      zeta_(std::move(zeta)),
      participation_(std::move(participation)) {
    if (omega_.empty()) throw ValidationError("modal system: no modes");
    if (zeta_.size() != omega_.size()) {
        throw ValidationError("modal system: omega/zeta size mismatch");
    }
    for (double w : omega_) {
        if (!(w > 0.0)) throw ValidationError("modal system: omega must be positive");
    }
    for (double z : zeta_) {
        if (!(z > 0.0 && z < 1.0)) {
            throw ValidationError("modal system: zeta must lie in (0, 1)");
        }
    }
    if (participation_.empty()) {
        throw ValidationError("modal system: no channels");
    }
    for (const auto& row : participation_) {
        if (row.size() != omega_.size()) {
            throw ValidationError("modal system: participation row size mismatch");
        }
    }
    descriptor_.channel_count = static_cast<int>(participation_.size());
    if (channel_labels.empty()) {
        for (int k = 0; k < descriptor_.channel_count; ++k) {
            descriptor_.channel_labels.push_back("ch" + std::to_string(k));
        }
    } else {
        if (channel_labels.size() != participation_.size()) {
            throw ValidationError("modal system: label count mismatch");
        }
        descriptor_.channel_labels = std::move(channel_labels);
    }
    require_unique_labels(descriptor_.channel_labels);
    descriptor_.band_hint = 1.5 * *std::max_element(omega_.begin(), omega_.end());
}

std::vector<Complex> ModalSystem::evaluate(Complex s) const {
    std::vector<Complex> denom(omega_.size());
    for (std::size_t n = 0; n < omega_.size(); ++n) {
        denom[n] = s * s + 2.0 * zeta_[n] * omega_[n] * s + omega_[n] * omega_[n];
    }
    std::vector<Complex> out(participation_.size());
    for (std::size_t k = 0; k < participation_.size(); ++k) {
        Complex acc(0.0, 0.0);
        for (std::size_t n = 0; n < omega_.size(); ++n) {
            acc += participation_[k][n] / denom[n];
        }
        out[k] = acc;
    }
    return out;
}

namespace {

using nlohmann::ordered_json;

Complex parse_complex(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError("expected [re, im] pair at " + path);
    }
    return Complex(j[0].get<double>(), j[1].get<double>());
}

double require_number(const ordered_json& j, const char* key,
                      const std::string& path) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ValidationError("expected number at " + path + "/" + key);
    }
    return j[key].get<double>();
}

std::unique_ptr<FrequencySystem> parse_rational(const ordered_json& j) {
    RationalModel model;
    if (!j.contains("poles") || !j["poles"].is_array()) {
        throw ValidationError("expected array at /poles");
    }
    for (std::size_t m = 0; m < j["poles"].size(); ++m) {
        model.poles.push_back(
            parse_complex(j["poles"][m], "/poles/" + std::to_string(m)));
    }
    if (!j.contains("residues") || !j["residues"].is_object()) {
        throw ValidationError("expected object at /residues");
    }
    for (const auto& [label, arr] : j["residues"].items()) {
        if (!arr.is_array() || arr.size() != model.poles.size()) {
            throw ValidationError("residue list for channel '" + label +
                                  "' must match the pole count");
        }
        model.channel_labels.push_back(label);
        std::vector<Complex> row;
        for (std::size_t m = 0; m < arr.size(); ++m) {
            row.push_back(parse_complex(arr[m], "/residues/" + label + "/" +
                                                    std::to_string(m)));
        }
        model.residues.push_back(std::move(row));
    }
    return std::make_unique<RationalSystem>(std::move(model));
}

std::unique_ptr<FrequencySystem> parse_rod(const ordered_json& j) {
    RodParameters params;
    params.length = require_number(j, "length", "");
    if (j.contains("section_side")) {
        params.section_side = require_number(j, "section_side", "");
    }
    params.youngs_modulus = require_number(j, "youngs_modulus", "");
    params.density = require_number(j, "density", "");
    params.load_amplitude = require_number(j, "load_amplitude", "");
    if (!j.contains("stations") || !j["stations"].is_array() ||
        j["stations"].empty()) {
        throw ValidationError("expected nonempty array at /stations");
    }
    for (std::size_t k = 0; k < j["stations"].size(); ++k) {
        const auto& js = j["stations"][k];
        const std::string path = "/stations/" + std::to_string(k);
        Station st;
        st.x = require_number(js, "x", path);
        if (!js.contains("quantity") || !js["quantity"].is_string()) {
            throw ValidationError("expected string at " + path + "/quantity");
        }
        const std::string q = js["quantity"].get<std::string>();
        if (q == "displacement") {
            st.quantity = Quantity::displacement;
        } else if (q == "traction") {
            st.quantity = Quantity::traction;
        } else {
            throw ValidationError("unknown quantity '" + q + "' at " + path);
        }
        if (js.contains("label")) st.label = js["label"].get<std::string>();
        params.stations.push_back(std::move(st));
    }
    return std::make_unique<RodSystem>(std::move(params));
}

std::unique_ptr<FrequencySystem> parse_modal(const ordered_json& j) {
    if (!j.contains("omega") || !j["omega"].is_array()) {
        throw ValidationError("expected array at /omega");
    }
    if (!j.contains("zeta") || !j["zeta"].is_array()) {
        throw ValidationError("expected array at /zeta");
    }
    std::vector<double> omega = j["omega"].get<std::vector<double>>();
    std::vector<double> zeta = j["zeta"].get<std::vector<double>>();
    if (!j.contains("participation") || !j["participation"].is_object()) {
        throw ValidationError("expected object at /participation");
    }
    std::vector<std::string> labels;
    std::vector<std::vector<double>> participation;
    for (const auto& [label, arr] : j["participation"].items()) {
        if (!arr.is_array()) {
            throw ValidationError("expected array at /participation/" + label);
        }
        labels.push_back(label);
        participation.push_back(arr.get<std::vector<double>>());
    }
    return std::make_unique<ModalSystem>(std::move(omega), std::move(zeta),
                                         std::move(participation),
                                         std::move(labels));
}

}  // namespace

std::unique_ptr<FrequencySystem> make_system_from_json(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("system description is not valid JSON: ") +
                      e.what());
    }
    if (!j.contains("type") || !j["type"].is_string()) {
        throw ValidationError("system description needs a string field 'type'");
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "rational") return parse_rational(j);
    if (type == "rod") return parse_rod(j);
    if (type == "modal") return parse_modal(j);
    throw ValidationError("unknown system type '" + type + "'");
}

std::unique_ptr<FrequencySystem> load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open system file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return make_system_from_json(buffer.str());
}

}  // namespace fdsweep
