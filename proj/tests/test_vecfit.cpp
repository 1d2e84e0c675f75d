#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "fdsweep/vecfit.hpp"
#include "test_helpers.hpp"

using namespace fdsweep;
using namespace fdsweep::testing;

namespace {

double rel_err(Complex got, Complex want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Matches each wanted value against its nearest candidate and returns the
// worst relative error.
double worst_match(const std::vector<Complex>& got,
                   const std::vector<Complex>& want) {
    double worst = 0.0;
    for (Complex w : want) {
        double best = 1e300;
        for (Complex g : got) best = std::min(best, rel_err(g, w));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

TEST_CASE("initial poles: single pair sits at the band edge") {
    const auto poles = initial_poles(100.0, 2);
    REQUIRE(poles.size() == 2);
    CHECK(poles[0] == Complex(-1.0, 100.0));
    CHECK(poles[1] == Complex(-1.0, -100.0));
}

TEST_CASE("initial poles: pairs equally spaced over the band") {
    const auto poles = initial_poles(100.0, 4);
    REQUIRE(poles.size() == 4);
    CHECK(poles[0] == Complex(-0.5, 50.0));
    CHECK(poles[2] == Complex(-1.0, 100.0));
    CHECK(is_conjugate_closed(poles));
}

TEST_CASE("initial poles: odd order adds one real pole") {
    const auto poles = initial_poles(200.0, 5);
    REQUIRE(poles.size() == 5);
    CHECK(poles[4] == Complex(-2.0, 0.0));
    CHECK(is_conjugate_closed(poles));
}

TEST_CASE("relocation recovers a two-pole model from far-off initial poles") {
    const std::vector<Complex> true_poles{{-1.0, 10.0}, {-1.0, -10.0}};
    const std::vector<std::vector<Complex>> residues{
        {{0.5, -0.3}, {0.5, 0.3}}};
    const auto samples =
        rational_samples(true_poles, residues, contour_points(1.0, 20.0, 12));

    std::vector<Complex> poles{{-0.5, 50.0}, {-0.5, -50.0}};
    for (int it = 0; it < 3; ++it) poles = relocate_poles(samples, poles);
    CHECK(worst_match(poles, true_poles) < 1e-8);
    CHECK(is_conjugate_closed(poles));
}

TEST_CASE("relocation leaves exact poles unchanged") {
    const std::vector<Complex> true_poles{{-2.0, 30.0}, {-2.0, -30.0},
                                          {-5.0, 0.0}};
    const std::vector<std::vector<Complex>> residues{
        {{1.0, 0.7}, {1.0, -0.7}, {2.0, 0.0}}};
    const auto samples =
        rational_samples(true_poles, residues, contour_points(0.5, 60.0, 16));
    const auto relocated = relocate_poles(samples, true_poles);
    CHECK(worst_match(relocated, true_poles) < 1e-10);
}

TEST_CASE("relocation keeps unstable poles unstable") {
    const std::vector<Complex> true_poles{{0.3, 0.0}, {-2.0, 0.0}};
    const std::vector<std::vector<Complex>> residues{{{1.0, 0.0}, {1.0, 0.0}}};
    const auto samples =
        rational_samples(true_poles, residues, contour_points(1.0, 10.0, 10));

    auto [model, report] = vector_fit(samples, std::vector<int>{0}, 2, 3);
    CHECK(report.unstable_pole_count == 1);
    CHECK(worst_match(model.poles, true_poles) < 1e-8);
}

TEST_CASE("residue identification on an exactly representable channel") {
    const std::vector<Complex> poles{{-2.0, 0.0}};
    const auto freqs = contour_points(1.0, 8.0, 8);
    std::vector<Complex> values;
    for (Complex s : freqs) values.push_back(1.0 / (s + 2.0));
    double rms = -1.0;
    const auto residues = identify_residues(freqs, values, poles, &rms);
    REQUIRE(residues.size() == 1);
    CHECK(rel_err(residues[0], Complex(1.0, 0.0)) < 1e-10);
    CHECK(rms < 1e-12);
}

TEST_CASE("residue identification maps zero data to zero residues") {
    const std::vector<Complex> poles{{-1.0, 5.0}, {-1.0, -5.0}};
    const auto freqs = contour_points(1.0, 10.0, 6);
    const std::vector<Complex> values(freqs.size(), Complex(0.0, 0.0));
    for (Complex r : identify_residues(freqs, values, poles)) {
        CHECK(std::abs(r) == 0.0);
    }
}

TEST_CASE("vector fit: one ORF channel fits all channels of a shared-pole model") {
    const std::vector<Complex> poles{
        {-1.0, 12.0}, {-1.0, -12.0}, {-3.0, 40.0}, {-3.0, -40.0}};
    const std::vector<std::vector<Complex>> residues{
        {{0.4, 0.1}, {0.4, -0.1}, {1.5, 0.0}, {1.5, 0.0}},
        {{-0.8, 0.2}, {-0.8, -0.2}, {0.3, -0.9}, {0.3, 0.9}},
        {{2.0, 0.0}, {2.0, 0.0}, {-0.5, 0.25}, {-0.5, -0.25}}};
    const auto samples =
        rational_samples(poles, residues, contour_points(0.8, 60.0, 14));

    auto [model, report] = vector_fit(samples, std::vector<int>{0}, 4, 3);
    REQUIRE(model.channel_count() == 3);
    for (double rms : report.per_channel_rms) CHECK(rms < 1e-8);
    CHECK(worst_match(model.poles, poles) < 1e-7);
    CHECK(is_conjugate_closed(model.poles));
    for (const auto& row : model.residues) {
        CHECK(worst_match(row, row) == 0.0);  // finite values
        CHECK(is_conjugate_closed(model.poles));
    }
}

TEST_CASE("vector fit: exact recovery at half the sample count") {
    const std::vector<Complex> poles{
        {-0.5, 8.0}, {-0.5, -8.0}, {-2.0, 25.0}, {-2.0, -25.0}};
    const std::vector<std::vector<Complex>> residues{
        {{1.0, -0.4}, {1.0, 0.4}, {0.7, 0.0}, {0.7, 0.0}}};
    const auto samples =
        rational_samples(poles, residues, contour_points(0.5, 40.0, 8));
    auto [model, report] = vector_fit(samples, std::vector<int>{0}, 4, 4);
    CHECK(worst_match(model.poles, poles) < 1e-8);
    CHECK(worst_match(model.residues[0], residues[0]) < 1e-8);
}

TEST_CASE("vector fit converges in a few relocations on the modal fixture") {
    const auto fx = make_modal_fixture(6);
    const auto system = make_modal_system(fx);
    const auto samples =
        sample_system(*system, contour_points(0.35, 1.5 * fx.band, 48));
    auto [model, report] =
        vector_fit(samples, std::vector<int>{0, 1, 2}, 16, 3);
    CHECK(report.iterations_used <= 3);
    CHECK(report.pole_movement < 1e-6);
    CHECK(worst_match(model.poles, fx.poles) < 1e-6);
}

TEST_CASE("model evaluation basics") {
    RationalModel model;
    model.poles = {{-2.0, 0.0}};
    model.residues = {{{1.0, 0.0}}};
    model.channel_labels = {"ch0"};
    CHECK(eval_model(model, Complex(0.0, 0.0))[0] == Complex(0.5, 0.0));

    const Complex s(0.3, 4.0);
    CHECK(rel_err(eval_model_channel(model, 0, std::conj(s)),
                  std::conj(eval_model_channel(model, 0, s))) < 1e-15);

    RationalModel doubled = model;
    doubled.residues[0][0] *= 2.0;
    CHECK(rel_err(eval_model_channel(doubled, 0, s),
                  2.0 * eval_model_channel(model, 0, s)) < 1e-15);

    CHECK_THROWS_AS(eval_model(model, Complex(-2.0, 0.0)), NumericError);
}

TEST_CASE("fitting error: exact fit, zero model, degenerate data") {
    const std::vector<Complex> poles{{-2.0, 0.0}};
    const std::vector<std::vector<Complex>> residues{{{1.0, 0.0}}};
    const auto freqs = contour_points(1.0, 10.0, 6);
    const auto samples = rational_samples(poles, residues, freqs);

    RationalModel exact;
    exact.poles = poles;
    exact.residues = residues;
    exact.channel_labels = {"ch0"};
    CHECK(fit_error_evf(exact, 0, samples) == 0.0);

    RationalModel zero = exact;
    zero.residues[0][0] = 0.0;
    CHECK(fit_error_evf(zero, 0, samples) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<FrequencySample> silent = samples;
    for (auto& smp : silent) smp.values[0] = 0.0;
    CHECK_THROWS_AS(fit_error_evf(exact, 0, silent), NumericError);
}

TEST_CASE("property: well-separated conjugate-closed models are recovered") {
    const double band = 100.0;
    TestRng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int order = 2 * (1 + static_cast<int>(rng.next() % 5));
        std::vector<Complex> poles;
        while (static_cast<int>(poles.size()) < order) {
            const Complex candidate(-rng.uniform(0.5, band / 10.0),
                                    rng.uniform(band / 50.0, band));
            bool separated = true;
            for (Complex p : poles) {
                if (std::abs(p - candidate) < band / 50.0 ||
                    std::abs(p - std::conj(candidate)) < band / 50.0) {
                    separated = false;
                    break;
                }
            }
            if (!separated) continue;
            poles.push_back(candidate);
            poles.push_back(std::conj(candidate));
        }
        std::vector<std::vector<Complex>> residues(1);
        for (int m = 0; m < order; m += 2) {
            const Complex r(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0));
            residues[0].push_back(r);
            residues[0].push_back(std::conj(r));
        }
        const auto samples = rational_samples(
            poles, residues, contour_points(band / 100.0, band, 2 * order + 4));
        auto [model, report] = vector_fit(samples, std::vector<int>{0}, order, 5);
        CHECK(worst_match(model.poles, poles) < 1e-7);
        CHECK(is_conjugate_closed(model.poles));
    }
}

TEST_CASE("residue identification never lags the final relocation residual") {
    const auto fx = make_modal_fixture(4);
    const auto system = make_modal_system(fx);
    const auto samples =
        sample_system(*system, contour_points(0.35, 1.5 * fx.band, 40));
    // Order below the exact representation so residuals stay meaningfully
    // nonzero.
    auto [model, report] = vector_fit(samples, std::vector<int>{0, 1}, 12, 6);
    REQUIRE(report.relocation_rms.size() == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(report.per_channel_rms[k] <=
              report.relocation_rms[k] * (1.0 + 1e-6) + 1e-15);
    }
}

TEST_CASE("raising the order on smooth data does not degrade the fit") {
    const auto fx = make_modal_fixture(3);
    const auto system = make_modal_system(fx);
    const int j = 64;
    const auto samples =
        sample_system(*system, contour_points(0.35, 1.5 * fx.band, j));
    double previous = -1.0;
    for (int order = 4; order <= j / 2; order += 2) {
        auto [model, report] = vector_fit(samples, std::vector<int>{0}, order, 3);
        const double evf = fit_error_evf(model, 0, samples);
        if (previous >= 0.0) CHECK(evf <= 1.1 * previous + 1e-12);
        previous = evf;
    }
}

TEST_CASE("validation failures") {
    const std::vector<Complex> poles{{-1.0, 2.0}, {-1.0, -2.0}};
    const std::vector<std::vector<Complex>> residues{{{1.0, 0.0}, {1.0, 0.0}}};
    auto samples = rational_samples(poles, residues, contour_points(1.0, 10.0, 6));

    SUBCASE("duplicate frequencies are rejected") {
        samples.push_back(samples.front());
        CHECK_THROWS_AS(vector_fit(samples, std::vector<int>{0}, 2, 3),
                        ValidationError);
    }
    SUBCASE("order must stay below twice the sample count") {
        CHECK_THROWS_AS(vector_fit(samples, std::vector<int>{0}, 12, 3),
                        ValidationError);
    }
    SUBCASE("non conjugate-closed poles are rejected") {
        CHECK_THROWS_AS(
            identify_residues(contour_points(1.0, 10.0, 6),
                              std::vector<Complex>(6, Complex(1.0, 0.0)),
                              std::vector<Complex>{{-1.0, 2.0}}),
            ValidationError);
    }
    SUBCASE("all-zero data cannot drive a relocation") {
        for (auto& smp : samples) smp.values[0] = 0.0;
        CHECK_THROWS_AS(relocate_poles(samples, poles), NumericError);
    }
}
