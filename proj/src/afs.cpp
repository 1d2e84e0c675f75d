#include "fdsweep/afs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "fdsweep/laplace.hpp"

namespace fdsweep {

namespace {

constexpr double kPi = std::numbers::pi;

double trapezoid(std::span<const double> t, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
    }
    return acc;
}

// Deterministic draw of k distinct indices from [0, n), independent of the
// standard library's distribution implementations.
std::vector<int> draw_indices(int n, int k, std::uint64_t seed) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ULL;
    auto next = [&state]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return state;
    };
    std::vector<int> out;
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(next() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

RationalModel select_channels(const RationalModel& model,
                              std::span<const int> positions) {
    RationalModel out;
    out.poles = model.poles;
    for (int k : positions) {
        out.residues.push_back(model.residues.at(k));
        out.channel_labels.push_back(model.channel_labels.at(k));
    }
    return out;
}

void validate_config(const AfsConfig& cfg) {
    if (cfg.initial_count < 4) {
        throw ValidationError("afs: initial_count must be >= 4");
    }
    if (!(cfg.alpha_high > 1.0) || !(cfg.alpha_low > cfg.alpha_high)) {
        throw ValidationError("afs: need 1 < alpha_high < alpha_low");
    }
    if (!(cfg.e1_threshold > 0.0) || !(cfg.e2_threshold > 0.0)) {
        throw ValidationError("afs: thresholds must be positive");
    }
    if (cfg.validation_steps < 0) {
        throw ValidationError("afs: validation_steps must be >= 0");
    }
    if (!(cfg.omega_max > 0.0)) {
        throw ValidationError("afs: omega_max must be positive");
    }
    if (!(cfg.period > 0.0)) throw ValidationError("afs: period must be positive");
    if (cfg.grid_points < 2) throw ValidationError("afs: grid_points must be >= 2");
    if (cfg.time_points < 2) throw ValidationError("afs: time_points must be >= 2");
    if (cfg.max_iterations < 1) {
        throw ValidationError("afs: max_iterations must be >= 1");
    }
    if (cfg.n_relocations < 1) {
        throw ValidationError("afs: n_relocations must be >= 1");
    }
}

}  // namespace

std::vector<Complex> initial_frequencies(int j0, double eta, double omega_max) {
    if (j0 < 2) throw ValidationError("initial_frequencies: j0 must be >= 2");
    if (!(omega_max > 0.0)) {
        throw ValidationError("initial_frequencies: omega_max must be positive");
    }
    std::vector<Complex> s(j0);
    for (int j = 0; j < j0; ++j) {
        const double omega =
            omega_max * (1.0 - std::cos(j * kPi / (2.0 * (j0 - 1))));
        s[j] = Complex(eta, omega);
    }
    return s;
}

std::pair<int, int> fit_orders(int sample_count, double alpha_high,
                               double alpha_low) {
    int order_high = static_cast<int>(std::floor(sample_count / alpha_high));
    int order_low = static_cast<int>(std::floor(sample_count / alpha_low));
    if (order_low < 1) {
        throw NumericError("fit_orders: degenerate low order for J = " +
                           std::to_string(sample_count));
    }
    if (order_low == order_high) order_low = std::max(order_high - 1, 1);
    if (!(order_low >= 1 && order_low < order_high)) {
        throw NumericError("fit_orders: cannot separate the two orders for J = " +
                           std::to_string(sample_count));
    }
    return {order_high, order_low};
}

std::vector<double> channel_errors(const RationalModel& fit_high,
                                   const RationalModel& fit_low,
                                   std::span<const Complex> grid) {
    if (fit_high.channel_count() != fit_low.channel_count()) {
        throw ValidationError("channel_errors: channel count mismatch");
    }
    if (grid.empty()) throw ValidationError("channel_errors: empty grid");
    const int channels = fit_high.channel_count();
    std::vector<double> max_diff(channels, 0.0);
    std::vector<double> max_high(channels, 0.0);
    for (Complex s : grid) {
        for (int k = 0; k < channels; ++k) {
            const Complex high = eval_model_channel(fit_high, k, s);
            const Complex low = eval_model_channel(fit_low, k, s);
            max_diff[k] = std::max(max_diff[k], std::abs(high - low));
            max_high[k] = std::max(max_high[k], std::abs(high));
        }
    }
    std::vector<double> errors(channels);
    for (int k = 0; k < channels; ++k) {
        if (max_high[k] == 0.0) {
            throw NumericError("channel_errors: channel " + std::to_string(k) +
                               " has identically zero high-order fit");
        }
        errors[k] = max_diff[k] / max_high[k];
    }
    return errors;
}

Complex select_new_frequency(const RationalModel& fit_high,
                             const RationalModel& fit_low,
                             std::span<const Complex> grid,
                             std::span<const Complex> existing,
                             std::span<const int> orf_positions,
                             double exclusion_radius) {
    if (orf_positions.empty()) {
        throw ValidationError("select_new_frequency: empty ORF set");
    }
    const std::vector<double> errors = channel_errors(fit_high, fit_low, grid);
    int k_max = orf_positions[0];
    double worst = -1.0;
    for (int k : orf_positions) {
        if (errors.at(k) > worst) {
            worst = errors.at(k);
            k_max = k;
        }
    }
    double best_diff = -1.0;
    std::optional<Complex> chosen;
    for (Complex s : grid) {
        bool excluded = false;
        for (Complex e : existing) {
            if (std::abs(s.imag() - e.imag()) < exclusion_radius) {
                excluded = true;
                break;
            }
        }
        if (excluded) continue;
        const double diff = std::abs(eval_model_channel(fit_high, k_max, s) -
                                     eval_model_channel(fit_low, k_max, s));
        if (diff > best_diff) {
            best_diff = diff;
            chosen = s;
        }
    }
    if (!chosen) {
        throw NumericError("select_new_frequency: every grid point is excluded");
    }
    return *chosen;
}

double error_e1(const TimeSeries& current, const TimeSeries& previous) {
    if (current.t != previous.t) {
        throw ValidationError("error_e1: time grids differ");
    }
    if (current.channel_count() != previous.channel_count()) {
        throw ValidationError("error_e1: channel counts differ");
    }
    if (current.channel_count() == 0) {
        throw ValidationError("error_e1: no channels");
    }
    double worst = 0.0;
    std::vector<double> diff_sq(current.t.size());
    std::vector<double> cur_sq(current.t.size());
    for (std::size_t k = 0; k < current.channel_count(); ++k) {
        for (std::size_t i = 0; i < current.t.size(); ++i) {
            const double d = current.values[k][i] - previous.values[k][i];
            diff_sq[i] = d * d;
            cur_sq[i] = current.values[k][i] * current.values[k][i];
        }
        const double denom = trapezoid(current.t, cur_sq);
        if (denom == 0.0) {
            throw NumericError("error_e1: test channel " + std::to_string(k) +
                               " has zero energy");
        }
        worst = std::max(worst, trapezoid(current.t, diff_sq) / denom);
    }
    return worst;
}

double error_e2(std::span<const double> test_channel_errors) {
    if (test_channel_errors.empty()) {
        throw ValidationError("error_e2: no test channels");
    }
    return *std::max_element(test_channel_errors.begin(),
                             test_channel_errors.end());
}

AfsResult run_afs(const FrequencySystem& system, AfsConfig cfg,
                  std::span<const FrequencySample> resume,
                  const std::function<void(const FrequencySample&)>& on_sample) {
    validate_config(cfg);
    const int channels = system.descriptor().channel_count;

    AfsResult result;
    result.seed = cfg.seed;
    if (cfg.orf_indices.empty()) {
        result.orf_indices = draw_indices(channels, std::min(5, channels), cfg.seed);
    } else {
        result.orf_indices = cfg.orf_indices;
    }
    if (cfg.test_indices.empty()) {
        result.test_indices.resize(channels);
        for (int k = 0; k < channels; ++k) result.test_indices[k] = k;
    } else {
        result.test_indices = cfg.test_indices;
    }
    for (const auto* set : {&result.orf_indices, &result.test_indices}) {
        std::set<int> seen;
        for (int k : *set) {
            if (k < 0 || k >= channels) {
                throw ValidationError("afs: channel index out of range");
            }
            if (!seen.insert(k).second) {
                throw ValidationError("afs: duplicate channel index");
            }
        }
    }

    // Channels the per-iteration fits carry: ORF and test channels, in
    // ascending order. Positions below are indices into that restriction.
    std::vector<int> fit_channels;
    {
        std::set<int> merged(result.orf_indices.begin(), result.orf_indices.end());
        merged.insert(result.test_indices.begin(), result.test_indices.end());
        fit_channels.assign(merged.begin(), merged.end());
    }
    auto positions_of = [&fit_channels](const std::vector<int>& indices) {
        std::vector<int> pos;
        for (int k : indices) {
            const auto it =
                std::find(fit_channels.begin(), fit_channels.end(), k);
            pos.push_back(static_cast<int>(it - fit_channels.begin()));
        }
        return pos;
    };
    const std::vector<int> orf_positions = positions_of(result.orf_indices);
    const std::vector<int> test_positions = positions_of(result.test_indices);
    std::vector<std::string> fit_labels;
    for (int k : fit_channels) {
        fit_labels.push_back(system.descriptor().channel_labels.at(k));
    }

    // Evaluation cache; resumed samples never hit the solver again.
    std::map<std::pair<double, double>, std::vector<Complex>> cache;
    for (const auto& smp : resume) {
        if (static_cast<int>(smp.values.size()) != channels) {
            throw ValidationError("afs: resume sample channel count mismatch");
        }
        cache[{smp.s.real(), smp.s.imag()}] = smp.values;
    }
    auto evaluate = [&](Complex s) {
        const std::pair<double, double> key{s.real(), s.imag()};
        auto it = cache.find(key);
        if (it == cache.end()) {
            std::vector<Complex> values = system.evaluate(s);
            if (static_cast<int>(values.size()) != channels) {
                throw NumericError("afs: system returned wrong channel count");
            }
            it = cache.emplace(key, std::move(values)).first;
            ++result.solver_calls;
            if (on_sample) on_sample({s, it->second});
        }
        return FrequencySample{s, it->second};
    };

    for (Complex s : initial_frequencies(cfg.initial_count, cfg.eta, cfg.omega_max)) {
        result.samples.push_back(evaluate(s));
    }

    std::vector<Complex> dense_grid(cfg.grid_points);
    for (int i = 0; i < cfg.grid_points; ++i) {
        dense_grid[i] =
            Complex(cfg.eta, cfg.omega_max * i / (cfg.grid_points - 1));
    }
    const double exclusion_radius = cfg.omega_max / (4.0 * cfg.grid_points);
    std::vector<double> e1_grid(cfg.time_points);
    for (int i = 0; i < cfg.time_points; ++i) {
        e1_grid[i] = cfg.period * i / (cfg.time_points - 1);
    }

    std::optional<TimeSeries> previous_series;
    int pass_streak = 0;
    std::vector<Complex> existing;
    RationalModel model_high;
    while (true) {
        if (static_cast<int>(result.history.size()) >= cfg.max_iterations) {
            throw ConvergenceError("afs: no convergence within max_iterations");
        }
        const int j = static_cast<int>(result.samples.size());
        const auto [order_high, order_low] =
            fit_orders(j, cfg.alpha_high, cfg.alpha_low);

        std::vector<FrequencySample> restricted(result.samples.size());
        for (std::size_t i = 0; i < result.samples.size(); ++i) {
            restricted[i].s = result.samples[i].s;
            for (int k : fit_channels) {
                restricted[i].values.push_back(result.samples[i].values[k]);
            }
        }
        auto [fit_high, report_high] = vector_fit(
            restricted, orf_positions, order_high, cfg.n_relocations, fit_labels);
        auto [fit_low, report_low] = vector_fit(
            restricted, orf_positions, order_low, cfg.n_relocations, fit_labels);

        const std::vector<double> errors =
            channel_errors(fit_high, fit_low, dense_grid);
        std::vector<double> test_errors;
        for (int pos : test_positions) test_errors.push_back(errors.at(pos));
        const double e2 = error_e2(test_errors);

        TimeSeries series =
            rational_invert(select_channels(fit_high, test_positions), e1_grid);
        const double e1 = previous_series
                              ? error_e1(series, *previous_series)
                              : std::numeric_limits<double>::infinity();
        previous_series = std::move(series);

        result.history.push_back({j, order_high, order_low, std::nullopt, e1, e2});
        model_high = std::move(fit_high);

        if (e1 <= cfg.e1_threshold && e2 <= cfg.e2_threshold) {
            if (++pass_streak > cfg.validation_steps) {
                result.converged = true;
                break;
            }
        } else {
            pass_streak = 0;
        }

        existing.resize(result.samples.size());
        for (std::size_t i = 0; i < result.samples.size(); ++i) {
            existing[i] = result.samples[i].s;
        }
        const Complex s_new =
            select_new_frequency(model_high, fit_low, dense_grid, existing,
                                 orf_positions, exclusion_radius);
        result.history.back().s_new = s_new;
        result.samples.push_back(evaluate(s_new));
    }

    // Final model over every system channel with the identified common poles.
    result.model_high.poles = model_high.poles;
    result.model_high.channel_labels = system.descriptor().channel_labels;
    std::vector<Complex> freqs(result.samples.size());
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
        freqs[i] = result.samples[i].s;
    }
    std::vector<Complex> values(result.samples.size());
    for (int k = 0; k < channels; ++k) {
        for (std::size_t i = 0; i < result.samples.size(); ++i) {
            values[i] = result.samples[i].values[k];
        }
        result.model_high.residues.push_back(
            identify_residues(freqs, values, model_high.poles));
    }
    result.n_c = static_cast<int>(result.samples.size());
    return result;
}

}  // namespace fdsweep
