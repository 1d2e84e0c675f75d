#include "fdsweep/vecfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fdsweep {

namespace {

constexpr double kPairRelTol = 1e-9;

bool nearly_conjugate(Complex a, Complex b, double rel_tol) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - std::conj(b)) <= rel_tol * scale;
}

void require_distinct_frequencies(std::span<const Complex> freqs) {
    std::vector<Complex> sorted(freqs.begin(), freqs.end());
    std::sort(sorted.begin(), sorted.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t j = 1; j < sorted.size(); ++j) {
        if (sorted[j] == sorted[j - 1]) {
            throw ValidationError("duplicate sample frequencies");
        }
    }
}

// Complex basis matrix: column m holds the real-parameterized partial
// fraction basis evaluated at every sample frequency. A conjugate pair
// (p, conj p) occupies two columns,
//   phi_m(s)   = 1/(s-p) + 1/(s-conj p)
//   phi_m+1(s) = i/(s-p) - i/(s-conj p)
// so that a real coefficient vector maps to a conjugate-symmetric function.
Eigen::MatrixXcd basis_matrix(std::span<const Complex> freqs,
                              std::span<const Complex> poles) {
    const int j_count = static_cast<int>(freqs.size());
    const int m_count = static_cast<int>(poles.size());
    Eigen::MatrixXcd phi(j_count, m_count);
    const Complex iu(0.0, 1.0);
    for (int j = 0; j < j_count; ++j) {
        const Complex s = freqs[j];
        int m = 0;
        while (m < m_count) {
            const Complex p = poles[m];
            if (p.imag() != 0.0) {
                const Complex d1 = s - p;
                const Complex d2 = s - std::conj(p);
                if (d1 == 0.0 || d2 == 0.0) {
                    throw NumericError("sample frequency coincides with a pole");
                }
                phi(j, m) = 1.0 / d1 + 1.0 / d2;
                phi(j, m + 1) = iu / d1 - iu / d2;
                m += 2;
            } else {
                const Complex d = s - p;
                if (d == 0.0) {
                    throw NumericError("sample frequency coincides with a pole");
                }
                phi(j, m) = 1.0 / d;
                m += 1;
            }
        }
    }
    return phi;
}

// Real coefficient vector -> complex residues in canonical slot order.
std::vector<Complex> coefficients_to_residues(const Eigen::VectorXd& x,
                                              std::span<const Complex> poles) {
    std::vector<Complex> res(poles.size());
    int m = 0;
    while (m < static_cast<int>(poles.size())) {
        if (poles[m].imag() != 0.0) {
            const Complex r(x[m], x[m + 1]);
            res[m] = r;
            res[m + 1] = std::conj(r);
            m += 2;
        } else {
            res[m] = Complex(x[m], 0.0);
            m += 1;
        }
    }
    return res;
}

double pole_movement(std::span<const Complex> old_poles,
                     std::span<const Complex> new_poles) {
    double worst = 0.0;
    for (Complex p : new_poles) {
        double best = std::numeric_limits<double>::infinity();
        Complex match = old_poles.empty() ? Complex(0, 0) : old_poles[0];
        for (Complex q : old_poles) {
            const double d = std::abs(p - q);
            if (d < best) {
                best = d;
                match = q;
            }
        }
        worst = std::max(worst, best / std::max(std::abs(match), 1e-30));
    }
    return worst;
}

std::vector<Complex> sample_frequencies(std::span<const FrequencySample> samples) {
    std::vector<Complex> freqs(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) freqs[j] = samples[j].s;
    return freqs;
}

}  // namespace

bool is_conjugate_closed(std::span<const Complex> poles, double rel_tol) {
    std::vector<bool> used(poles.size(), false);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (used[i] || poles[i].imag() == 0.0) continue;
        bool matched = false;
        for (std::size_t k = 0; k < poles.size(); ++k) {
            if (k == i || used[k]) continue;
            if (nearly_conjugate(poles[i], poles[k], rel_tol)) {
                used[i] = used[k] = true;
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return true;
}

std::vector<Complex> canonical_poles(std::span<const Complex> poles) {
    std::vector<Complex> pairs;
    std::vector<Complex> reals;
    std::vector<bool> used(poles.size(), false);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        if (used[i]) continue;
        if (poles[i].imag() == 0.0) {
            reals.push_back(poles[i]);
            used[i] = true;
            continue;
        }
        bool matched = false;
        for (std::size_t k = i + 1; k < poles.size(); ++k) {
            if (used[k] || poles[k].imag() == 0.0) continue;
            if (nearly_conjugate(poles[i], poles[k], kPairRelTol)) {
                const Complex head =
                    poles[i].imag() > 0.0 ? poles[i] : poles[k];
                pairs.push_back(head);
                used[i] = used[k] = true;
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw ValidationError("pole set is not closed under conjugation");
        }
    }
    std::vector<Complex> out;
    out.reserve(poles.size());
    for (Complex head : pairs) {
        out.push_back(head);
        out.push_back(std::conj(head));
    }
    out.insert(out.end(), reals.begin(), reals.end());
    return out;
}

std::vector<Complex> initial_poles(double omega_max, int order) {
    if (order < 1) throw ValidationError("initial_poles: order must be >= 1");
    if (!(omega_max > 0.0)) {
        throw ValidationError("initial_poles: omega_max must be positive");
    }
    std::vector<Complex> poles;
    poles.reserve(order);
    const int pair_count = order / 2;
    for (int i = 1; i <= pair_count; ++i) {
        const double beta = omega_max * static_cast<double>(i) / pair_count;
        poles.emplace_back(-beta / 100.0, beta);
        poles.emplace_back(-beta / 100.0, -beta);
    }
    if (order % 2 == 1) poles.emplace_back(-omega_max / 100.0, 0.0);
    return poles;
}

std::vector<Complex> relocate_poles(std::span<const FrequencySample> samples,
                                    std::span<const Complex> poles_in,
                                    RelocationStats* stats) {
    if (samples.empty()) throw ValidationError("relocate_poles: no samples");
    const int j_count = static_cast<int>(samples.size());
    const int m_count = static_cast<int>(poles_in.size());
    const int k_count = static_cast<int>(samples[0].values.size());
    if (k_count < 1) throw ValidationError("relocate_poles: no channels");
    for (const auto& smp : samples) {
        if (static_cast<int>(smp.values.size()) != k_count) {
            throw ValidationError("relocate_poles: inconsistent channel counts");
        }
    }
    if (2 * j_count < m_count + 1) {
        throw ValidationError("relocate_poles: too few samples for the order");
    }

    const std::vector<Complex> freqs = sample_frequencies(samples);
    require_distinct_frequencies(freqs);
    const std::vector<Complex> poles = canonical_poles(poles_in);
    const Eigen::MatrixXcd phi = basis_matrix(freqs, poles);

    // Per channel k the joint problem reads
    //   [phi | -diag(f_k) phi] [ctilde_k; c] ~ f_k
    // with c shared. Each channel block is reduced by a QR factorization and
    // only the rows coupling c are stacked into the final solve.
    const int rows = 2 * j_count;
    Eigen::VectorXd sigma_scale = Eigen::VectorXd::Ones(m_count);
    {
        // Shared column scaling for the c block, accumulated over channels.
        Eigen::VectorXd sq = Eigen::VectorXd::Zero(m_count);
        for (int k = 0; k < k_count; ++k) {
            for (int m = 0; m < m_count; ++m) {
                for (int j = 0; j < j_count; ++j) {
                    sq[m] += std::norm(samples[j].values[k] * phi(j, m));
                }
            }
        }
        for (int m = 0; m < m_count; ++m) {
            sigma_scale(m) = sq[m] > 0.0 ? 1.0 / std::sqrt(sq[m]) : 1.0;
        }
    }

    const int reduced_rows_per_channel =
        std::max(0, std::min(2 * m_count, rows) - m_count);
    Eigen::MatrixXd stacked(k_count * reduced_rows_per_channel, m_count);
    Eigen::VectorXd stacked_rhs(k_count * reduced_rows_per_channel);
    struct ChannelQr {
        Eigen::MatrixXd r22;       // rows coupling c, scaled units
        Eigen::VectorXd beta;      // matching part of Q^T b
        double tail_sq = 0.0;      // residual part orthogonal to all columns
    };
    std::vector<ChannelQr> channel_qr(k_count);

    for (int k = 0; k < k_count; ++k) {
        Eigen::MatrixXd a(rows, 2 * m_count);
        Eigen::VectorXd b(rows);
        for (int j = 0; j < j_count; ++j) {
            const Complex f = samples[j].values[k];
            for (int m = 0; m < m_count; ++m) {
                const Complex lhs = phi(j, m);
                const Complex rhs = -f * phi(j, m) * sigma_scale(m);
                a(2 * j, m) = lhs.real();
                a(2 * j + 1, m) = lhs.imag();
                a(2 * j, m_count + m) = rhs.real();
                a(2 * j + 1, m_count + m) = rhs.imag();
            }
            b[2 * j] = f.real();
            b[2 * j + 1] = f.imag();
        }
        // Channel-private columns get their own unit scaling.
        Eigen::VectorXd ctilde_scale(m_count);
        for (int m = 0; m < m_count; ++m) {
            const double n = a.col(m).norm();
            ctilde_scale(m) = n > 0.0 ? 1.0 / n : 1.0;
            a.col(m) *= ctilde_scale(m);
        }
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        const Eigen::MatrixXd r = qr.matrixQR()
                                      .topRows(std::min(rows, 2 * m_count))
                                      .triangularView<Eigen::Upper>();
        const Eigen::VectorXd qtb = qr.householderQ().transpose() * b;
        const int top = std::min(rows, 2 * m_count);
        ChannelQr& cq = channel_qr[k];
        cq.r22 = r.block(m_count, m_count, top - m_count, m_count);
        cq.beta = qtb.segment(m_count, top - m_count);
        cq.tail_sq = rows > top ? qtb.tail(rows - top).squaredNorm() : 0.0;
        stacked.middleRows(k * reduced_rows_per_channel,
                           reduced_rows_per_channel) = cq.r22;
        stacked_rhs.segment(k * reduced_rows_per_channel,
                            reduced_rows_per_channel) = cq.beta;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> solve(stacked);
    if (solve.rank() < m_count) {
        throw NumericError("relocate_poles: rank-deficient least-squares system");
    }
    const Eigen::VectorXd y = solve.solve(stacked_rhs);

    if (stats) {
        stats->per_channel_rms.assign(k_count, 0.0);
        for (int k = 0; k < k_count; ++k) {
            const ChannelQr& cq = channel_qr[k];
            const double coupled = (cq.r22 * y - cq.beta).squaredNorm();
            stats->per_channel_rms[k] =
                std::sqrt((coupled + cq.tail_sq) / j_count);
        }
    }

    // New poles are the zeros of sigma(s) = 1 + sum c_m/(s - a_m): the
    // eigenvalues of diag(a) - b c^T written in real block form.
    const Eigen::VectorXd c = sigma_scale.cwiseProduct(y);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m_count, m_count);
    Eigen::VectorXd bvec(m_count);
    Eigen::VectorXd crow(m_count);
    int m = 0;
    while (m < m_count) {
        if (poles[m].imag() != 0.0) {
            h(m, m) = poles[m].real();
            h(m, m + 1) = poles[m].imag();
            h(m + 1, m) = -poles[m].imag();
            h(m + 1, m + 1) = poles[m].real();
            bvec(m) = 2.0;
            bvec(m + 1) = 0.0;
            crow(m) = c(m);
            crow(m + 1) = c(m + 1);
            m += 2;
        } else {
            h(m, m) = poles[m].real();
            bvec(m) = 1.0;
            crow(m) = c(m);
            m += 1;
        }
    }
    h -= bvec * crow.transpose();

    const Eigen::EigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.info() != Eigen::Success) {
        throw NumericError("relocate_poles: eigenvalue iteration failed");
    }
    std::vector<Complex> heads;
    std::vector<Complex> reals;
    int negative = 0;
    for (int i = 0; i < m_count; ++i) {
        const Complex ev = eig.eigenvalues()[i];
        if (ev.imag() > 0.0) {
            heads.push_back(ev);
        } else if (ev.imag() < 0.0) {
            ++negative;
        } else {
            reals.push_back(ev);
        }
    }
    if (negative != static_cast<int>(heads.size())) {
        throw NumericError("relocate_poles: eigenvalues not conjugate-paired");
    }
    std::vector<Complex> new_poles;
    new_poles.reserve(m_count);
    for (Complex head : heads) {
        new_poles.push_back(head);
        new_poles.push_back(std::conj(head));
    }
    new_poles.insert(new_poles.end(), reals.begin(), reals.end());

    if (stats) stats->pole_movement = pole_movement(poles, new_poles);
    return new_poles;
}

std::vector<Complex> identify_residues(std::span<const Complex> freqs,
                                       std::span<const Complex> values,
                                       std::span<const Complex> poles_in,
                                       double* residual_rms) {
    const int j_count = static_cast<int>(freqs.size());
    const int m_count = static_cast<int>(poles_in.size());
    if (j_count < 1) throw ValidationError("identify_residues: no samples");
    if (static_cast<int>(values.size()) != j_count) {
        throw ValidationError("identify_residues: freqs/values size mismatch");
    }
    if (2 * j_count < m_count) {
        throw ValidationError("identify_residues: too few samples for the order");
    }
    require_distinct_frequencies(freqs);
    const std::vector<Complex> poles = canonical_poles(poles_in);
    const Eigen::MatrixXcd phi = basis_matrix(freqs, poles);

    Eigen::MatrixXd a(2 * j_count, m_count);
    Eigen::VectorXd b(2 * j_count);
    for (int j = 0; j < j_count; ++j) {
        for (int m = 0; m < m_count; ++m) {
            a(2 * j, m) = phi(j, m).real();
            a(2 * j + 1, m) = phi(j, m).imag();
        }
        b[2 * j] = values[j].real();
        b[2 * j + 1] = values[j].imag();
    }
    Eigen::VectorXd scale(m_count);
    for (int m = 0; m < m_count; ++m) {
        const double n = a.col(m).norm();
        scale(m) = n > 0.0 ? 1.0 / n : 1.0;
        a.col(m) *= scale(m);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < m_count) {
        throw NumericError("identify_residues: rank-deficient least-squares system");
    }
    const Eigen::VectorXd x = scale.cwiseProduct(qr.solve(b));
    std::vector<Complex> residues = coefficients_to_residues(x, poles);

    if (residual_rms) {
        double sq = 0.0;
        for (int j = 0; j < j_count; ++j) {
            Complex fit(0.0, 0.0);
            for (int m = 0; m < m_count; ++m) {
                fit += residues[m] / (freqs[j] - poles[m]);
            }
            sq += std::norm(fit - values[j]);
        }
        *residual_rms = std::sqrt(sq / j_count);
    }
    return residues;
}

std::pair<RationalModel, FitReport> vector_fit(
    std::span<const FrequencySample> samples, std::span<const int> orf_channels,
    int order, int n_relocations, std::vector<std::string> channel_labels) {
    if (samples.empty()) throw ValidationError("vector_fit: no samples");
    const int j_count = static_cast<int>(samples.size());
    const int k_count = static_cast<int>(samples[0].values.size());
    if (order < 1) throw ValidationError("vector_fit: order must be >= 1");
    if (order >= 2 * j_count) {
        throw ValidationError("vector_fit: order too high for the sample count");
    }
    if (n_relocations < 1) {
        throw ValidationError("vector_fit: n_relocations must be >= 1");
    }
    if (orf_channels.empty()) {
        throw ValidationError("vector_fit: ORF channel set is empty");
    }
    for (int k : orf_channels) {
        if (k < 0 || k >= k_count) {
            throw ValidationError("vector_fit: ORF channel index out of range");
        }
    }
    if (!channel_labels.empty() &&
        static_cast<int>(channel_labels.size()) != k_count) {
        throw ValidationError("vector_fit: label count mismatch");
    }

    std::vector<FrequencySample> orf_samples(j_count);
    for (int j = 0; j < j_count; ++j) {
        orf_samples[j].s = samples[j].s;
        orf_samples[j].values.reserve(orf_channels.size());
        for (int k : orf_channels) {
            orf_samples[j].values.push_back(samples[j].values[k]);
        }
    }

    double band = 0.0;
    for (const auto& smp : samples) band = std::max(band, std::abs(smp.s.imag()));
    if (band == 0.0) {
        for (const auto& smp : samples) band = std::max(band, std::abs(smp.s));
    }
    if (band == 0.0) {
        throw ValidationError("vector_fit: samples carry no frequency band");
    }

    std::vector<Complex> poles = initial_poles(band, order);
    FitReport report;
    RelocationStats stats;
    for (int it = 0; it < n_relocations; ++it) {
        poles = relocate_poles(orf_samples, poles, &stats);
        report.iterations_used = it + 1;
        report.pole_movement = stats.pole_movement;
        if (stats.pole_movement < 1e-8) break;
    }
    report.relocation_rms = stats.per_channel_rms;

    RationalModel model;
    model.poles = poles;
    model.residues.resize(k_count);
    report.per_channel_rms.resize(k_count);
    const std::vector<Complex> freqs = sample_frequencies(samples);
    std::vector<Complex> values(j_count);
    for (int k = 0; k < k_count; ++k) {
        for (int j = 0; j < j_count; ++j) values[j] = samples[j].values[k];
        model.residues[k] =
            identify_residues(freqs, values, poles, &report.per_channel_rms[k]);
    }
    if (!channel_labels.empty()) {
        model.channel_labels = std::move(channel_labels);
    } else {
        model.channel_labels.resize(k_count);
        for (int k = 0; k < k_count; ++k) {
            model.channel_labels[k] = "ch" + std::to_string(k);
        }
    }
    for (Complex p : poles) {
        if (p.real() > 0.0) ++report.unstable_pole_count;
    }
    return {std::move(model), std::move(report)};
}

Complex eval_model_channel(const RationalModel& model, int channel, Complex s) {
    if (channel < 0 || channel >= model.channel_count()) {
        throw ValidationError("eval_model_channel: channel out of range");
    }
    Complex acc(0.0, 0.0);
    for (int m = 0; m < model.order(); ++m) {
        const Complex d = s - model.poles[m];
        if (d == 0.0) throw NumericError("eval_model: s coincides with a pole");
        acc += model.residues[channel][m] / d;
    }
    return acc;
}

std::vector<Complex> eval_model(const RationalModel& model, Complex s) {
    std::vector<Complex> out(model.channel_count());
    for (int k = 0; k < model.channel_count(); ++k) {
        out[k] = eval_model_channel(model, k, s);
    }
    return out;
}

double fit_error_evf(const RationalModel& model, int channel,
                     std::span<const FrequencySample> samples) {
    if (samples.empty()) throw ValidationError("fit_error_evf: no samples");
    double num = 0.0;
    double den = 0.0;
    for (const auto& smp : samples) {
        const Complex data = smp.values.at(channel);
        const Complex fit = eval_model_channel(model, channel, smp.s);
        num += std::norm(fit - data);
        den += std::norm(data);
    }
    if (den == 0.0) {
        throw NumericError("fit_error_evf: zero-norm sample data");
    }
    return std::sqrt(num / den);
}

}  // namespace fdsweep
