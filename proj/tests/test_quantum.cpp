#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <doctest.h>

#include "entdist/quantum.hpp"
#include "entdist/rng.hpp"

using namespace entdist;
using cd = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

// Haar-random SU(2) from a normalized quaternion.
Eigen::Matrix2cd haar_su2(CounterRng& rng) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal(), d = rng.normal();
    const double n = std::sqrt(a * a + b * b + c * c + d * d);
    Eigen::Matrix2cd u;
    u << cd(a / n, b / n), cd(c / n, d / n), cd(-c / n, d / n), cd(a / n, -b / n);
    return u;
}

// Random full-rank density matrix rho = G G^dagger / tr(G G^dagger).
TwoQubitState ginibre_state(CounterRng& rng) {
    Eigen::Matrix4cd g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = cd(rng.normal(), rng.normal());
    Eigen::Matrix4cd rho = g * g.adjoint();
    rho /= rho.trace();
    TwoQubitState state;
    state.rho = 0.5 * (rho + rho.adjoint().eval());
    return state;
}

// Minimal Frobenius distance of M to a global-phase multiple of the identity.
double phase_distance_to_identity(const Eigen::Matrix2cd& m) {
    const cd tr = m.trace();
    if (std::abs(tr) < 1e-12) return (m - Eigen::Matrix2cd::Identity()).norm();
    const cd phase = tr / std::abs(tr);
    return (m / phase - Eigen::Matrix2cd::Identity()).norm();
}

// Projector onto cos(theta)|H> + sin(theta)|V>, or its complement.
Eigen::Matrix2cd analyzer_projector(double theta, bool plus) {
    Eigen::Vector2cd v;
    if (plus)
        v << cd(std::cos(theta), 0.0), cd(std::sin(theta), 0.0);
    else
        v << cd(-std::sin(theta), 0.0), cd(std::cos(theta), 0.0);
    return v * v.adjoint();
}

}  // namespace

TEST_CASE("state and source validation name the violated invariant") {
    SUBCASE("valid states pass") {
        CHECK_NOTHROW(validate(make_entangled_pair()));
        CHECK_NOTHROW(validate(make_werner(0.907)));
    }
    SUBCASE("non-unit trace") {
        TwoQubitState s = make_entangled_pair();
        s.rho *= 2.0;
        CHECK_THROWS_AS(validate(s), std::invalid_argument);
    }
    SUBCASE("non-Hermitian") {
        TwoQubitState s = make_entangled_pair();
        s.rho(0, 3) += cd(0.0, 0.1);
        CHECK_THROWS_AS(validate(s), std::invalid_argument);
    }
    SUBCASE("negative eigenvalue") {
        TwoQubitState s;
        s.rho.setZero();
        s.rho(0, 0) = 1.5;
        s.rho(1, 1) = -0.5;
        CHECK_THROWS_AS(validate(s), std::invalid_argument);
    }
    SUBCASE("source parameter ranges") {
        SourceParams ok;
        CHECK_NOTHROW(validate(ok));
        SourceParams bad = ok;
        bad.pair_rate_hz = 0.0;
        CHECK_THROWS_AS(validate(bad), std::invalid_argument);
        bad = ok;
        bad.target_fidelity = 0.2;
        CHECK_THROWS_AS(validate(bad), std::invalid_argument);
        bad = ok;
        bad.onboard_sampling_fraction_per_arm = 0.0;
        CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    }
}

TEST_CASE("entangled pair density matrix") {
    const TwoQubitState psi = make_entangled_pair();
    CHECK(std::abs(psi.rho(0, 0)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(psi.rho(1, 1).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(psi.rho(2, 2).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(psi.rho(3, 3)) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(psi.rho(1, 2).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(psi.rho(2, 1).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(psi.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(exact_fidelity(psi) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Werner mixture: diagonal, fidelity round-trip, bounds") {
    SUBCASE("working-point diagonal") {
        // p = (4*0.907 - 1)/3 = 0.876; diag = ((1-p)/4, (1+p)/4, (1+p)/4, (1-p)/4).
        const TwoQubitState w = make_werner(0.907);
        CHECK(w.rho(0, 0).real() == doctest::Approx(0.031).epsilon(1e-12));
        CHECK(w.rho(1, 1).real() == doctest::Approx(0.469).epsilon(1e-12));
        CHECK(w.rho(2, 2).real() == doctest::Approx(0.469).epsilon(1e-12));
        CHECK(w.rho(3, 3).real() == doctest::Approx(0.031).epsilon(1e-12));
        CHECK(w.rho(1, 2).real() == doctest::Approx(0.876 / 2.0).epsilon(1e-12));
    }
    SUBCASE("exact_fidelity inverts make_werner across the full range") {
        for (int k = 5; k <= 20; ++k) {
            const double f = k / 20.0;
            CHECK(exact_fidelity(make_werner(f)) == doctest::Approx(f).epsilon(1e-12));
        }
    }
    SUBCASE("F = 1/4 is the maximally mixed state") {
        const TwoQubitState w = make_werner(0.25);
        for (int i = 0; i < 4; ++i) CHECK(w.rho(i, i).real() == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(w.rho.norm() == doctest::Approx(0.5).epsilon(1e-12));  // sqrt(4 * 0.25^2)
    }
    SUBCASE("out-of-range fidelity throws") {
        CHECK_THROWS_AS(make_werner(0.2), std::invalid_argument);
        CHECK_THROWS_AS(make_werner(1.01), std::invalid_argument);
    }
}

TEST_CASE("local unitaries: invariances and a direct tensor-product oracle") {
    const TwoQubitState psi = make_entangled_pair();
    Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    Eigen::Matrix2cd sx;
    sx << cd(0, 0), cd(1, 0), cd(1, 0), cd(0, 0);

    SUBCASE("identity on both arms is a no-op") {
        const TwoQubitState out = apply_local_unitaries(psi, id, id);
        CHECK((out.rho - psi.rho).norm() == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("sigma_x on both arms preserves |HV>+|VH>") {
        const TwoQubitState out = apply_local_unitaries(psi, sx, sx);
        CHECK((out.rho - psi.rho).norm() == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(exact_fidelity(out) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("sigma_x on one arm maps to the orthogonal |HH>+|VV> state") {
        const TwoQubitState out = apply_local_unitaries(psi, sx, id);
        CHECK(exact_fidelity(out) == doctest::Approx(0.0).epsilon(1e-13));
        CHECK(out.rho(0, 0).real() == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(out.rho(3, 3).real() == doctest::Approx(0.5).epsilon(1e-13));
    }
    SUBCASE("matches kron(u1,u2) rho kron(u1,u2)^dagger for random inputs") {
        CounterRng rng(0xA11CEu, 0, 0);
        for (int k = 0; k < 50; ++k) {
            const TwoQubitState rho = ginibre_state(rng);
            const Eigen::Matrix2cd u1 = haar_su2(rng);
            const Eigen::Matrix2cd u2 = haar_su2(rng);
            const Eigen::Matrix4cd u = kron(u1, u2);
            const Eigen::Matrix4cd expect = u * rho.rho * u.adjoint();
            const TwoQubitState out = apply_local_unitaries(rho, u1, u2);
            CHECK((out.rho - expect).norm() <= 1e-12);
        }
    }
    SUBCASE("non-unitary input is rejected") {
        CHECK_THROWS_AS(apply_local_unitaries(psi, 2.0 * id, id), std::invalid_argument);
        Eigen::Matrix2cd nearly = id;
        nearly(0, 0) = cd(1.0 + 1e-6, 0.0);
        CHECK_THROWS_AS(apply_local_unitaries(psi, nearly, id), std::invalid_argument);
    }
}

TEST_CASE("retarders and waveplate stacks") {
    SUBCASE("zero retardance is the identity at any axis angle") {
        for (double theta : {0.0, 0.3, 1.1, 2.9}) {
            CHECK((retarder_unitary(0.0, theta) - Eigen::Matrix2cd::Identity()).norm() <= 1e-15);
        }
    }
    SUBCASE("quarter-wave plate at zero axis is the canonical phase diag") {
        const Eigen::Matrix2cd q = retarder_unitary(kPi / 2.0, 0.0);
        CHECK(std::abs(q(0, 0) - std::exp(cd(0.0, -kPi / 4.0))) <= 1e-14);
        CHECK(std::abs(q(1, 1) - std::exp(cd(0.0, kPi / 4.0))) <= 1e-14);
        CHECK(std::abs(q(0, 1)) <= 1e-15);
    }
    SUBCASE("half-wave plate crossed-polarizer law sin^2(2 theta)") {
        for (double theta = 0.0; theta < kPi; theta += kPi / 17.0) {
            const Eigen::Matrix2cd h = retarder_unitary(kPi, theta);
            const double leak = std::norm(h(1, 0));  // |<V| HWP |H>|^2
            CHECK(leak == doctest::Approx(std::pow(std::sin(2.0 * theta), 2)).epsilon(1e-12));
        }
    }
    SUBCASE("every stack is unitary") {
        CounterRng rng(0xBEEFu, 0, 0);
        for (int k = 0; k < 100; ++k) {
            WaveplateSetting s;
            s.qwp1_angle_rad = rng.uniform(0.0, kPi);
            s.hwp_angle_rad = rng.uniform(0.0, kPi);
            s.qwp2_angle_rad = rng.uniform(0.0, kPi);
            const Eigen::Matrix2cd u = waveplate_unitary(s);
            CHECK((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() <= 1e-12);
        }
    }
    SUBCASE("stack equals the explicit product of its three retarders") {
        WaveplateSetting s;
        s.qwp1_angle_rad = 0.4;
        s.hwp_angle_rad = 1.1;
        s.qwp2_angle_rad = 2.3;
        const Eigen::Matrix2cd expect = retarder_unitary(kPi / 2.0, s.qwp2_angle_rad) *
                                        retarder_unitary(kPi, s.hwp_angle_rad) *
                                        retarder_unitary(kPi / 2.0, s.qwp1_angle_rad);
        CHECK((waveplate_unitary(s) - expect).norm() <= 1e-14);
    }
}

TEST_CASE("compensation solver inverts channels up to global phase") {
    SUBCASE("identity channel") {
        const WaveplateSetting s = solve_compensation(Eigen::Matrix2cd::Identity());
        CHECK(phase_distance_to_identity(waveplate_unitary(s)) <= 1e-6);
    }
    SUBCASE("fixed 17-degree rotation") {
        const double a = 17.0 * kPi / 180.0;
        Eigen::Matrix2cd rot;
        rot << cd(std::cos(a), 0), cd(-std::sin(a), 0), cd(std::sin(a), 0), cd(std::cos(a), 0);
        const WaveplateSetting s = solve_compensation(rot);
        CHECK(phase_distance_to_identity(waveplate_unitary(s) * rot) <= 1e-6);
    }
    SUBCASE("one hundred Haar-random channels") {
        CounterRng rng(0xC0FFEEu, 0, 0);
        for (int k = 0; k < 100; ++k) {
            const Eigen::Matrix2cd u = haar_su2(rng);
            const WaveplateSetting s = solve_compensation(u);
            CHECK(phase_distance_to_identity(waveplate_unitary(s) * u) <= 1e-6);
        }
    }
    SUBCASE("round-trips channels that are themselves waveplate stacks") {
        CounterRng rng(0xD1CEu, 0, 0);
        for (int k = 0; k < 20; ++k) {
            WaveplateSetting truth;
            truth.qwp1_angle_rad = rng.uniform(0.0, kPi);
            truth.hwp_angle_rad = rng.uniform(0.0, kPi);
            truth.qwp2_angle_rad = rng.uniform(0.0, kPi);
            const Eigen::Matrix2cd channel = waveplate_unitary(truth);
            const WaveplateSetting s = solve_compensation(channel);
            CHECK(phase_distance_to_identity(waveplate_unitary(s) * channel) <= 1e-6);
        }
    }
}

TEST_CASE("extinction-contrast error models") {
    SUBCASE("rotation magnitude: frozen oracle and limits") {
        // atan(1/sqrt(80)) = 0.11134101434096388 rad.
        CHECK(residual_rotation_from_contrast(80.0) ==
              doctest::Approx(0.11134101434096388).epsilon(1e-12));
        CHECK(residual_rotation_from_contrast(1.0) ==
              doctest::Approx(kPi / 4.0).epsilon(1e-15));
        CHECK(residual_rotation_from_contrast(1e12) <= 2e-6);
        CHECK_THROWS_AS(residual_rotation_from_contrast(0.999), std::invalid_argument);
        CHECK_THROWS_AS(residual_rotation_from_contrast(0.5), std::invalid_argument);
    }
    SUBCASE("rotation magnitude decreases as contrast improves") {
        double prev = residual_rotation_from_contrast(2.0);
        for (double c = 4.0; c <= 4096.0; c *= 2.0) {
            const double cur = residual_rotation_from_contrast(c);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    SUBCASE("dephasing coherence scale (C-1)/(C+1)") {
        CHECK(dephasing_from_contrast(16.0) == doctest::Approx(15.0 / 17.0).epsilon(1e-15));
        CHECK(dephasing_from_contrast(80.0) == doctest::Approx(79.0 / 81.0).epsilon(1e-15));
    }
}

TEST_CASE("measurement probabilities and correlations") {
    const TwoQubitState psi = make_entangled_pair();

    SUBCASE("H/V basis on the ideal pair is perfectly anticorrelated") {
        const auto p = measurement_probabilities(psi, AnalyzerSetting{0.0, +1},
                                                 AnalyzerSetting{0.0, +1});
        CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(p[2] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(p[3] == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("Werner working point leaks the expected same-outcome fraction") {
        const auto p = measurement_probabilities(make_werner(0.907), AnalyzerSetting{0.0, +1},
                                                 AnalyzerSetting{0.0, +1});
        CHECK(p[0] == doctest::Approx(0.031).epsilon(1e-12));
        CHECK(p[3] == doctest::Approx(0.031).epsilon(1e-12));
    }
    SUBCASE("ideal-pair correlation is -cos 2(a + s b) for both handedness signs") {
        for (int s : {+1, -1}) {
            for (double a = 0.0; a < kPi; a += kPi / 12.0) {
                for (double b = 0.0; b < kPi; b += kPi / 12.0) {
                    const double e = correlation_value(psi, AnalyzerSetting{a, +1},
                                                       AnalyzerSetting{b, s});
                    CHECK(e == doctest::Approx(-std::cos(2.0 * (a + s * b))).epsilon(1e-12));
                }
            }
        }
    }
    SUBCASE("Werner correlation scales the ideal one by p") {
        const double f = 0.869;
        const double p_mix = (4.0 * f - 1.0) / 3.0;
        const TwoQubitState w = make_werner(f);
        for (double a = 0.0; a < kPi; a += kPi / 7.0) {
            const double e =
                correlation_value(w, AnalyzerSetting{a, +1}, AnalyzerSetting{a / 2.0, -1});
            CHECK(e ==
                  doctest::Approx(-p_mix * std::cos(2.0 * (a - a / 2.0))).epsilon(1e-12));
        }
    }
    SUBCASE("matches a hand-built projector oracle on random states") {
        CounterRng rng(0xFACEu, 0, 0);
        for (int k = 0; k < 20; ++k) {
            const TwoQubitState rho = ginibre_state(rng);
            const double a = rng.uniform(0.0, kPi);
            const double b = rng.uniform(0.0, kPi);
            const int s = rng.bernoulli(0.5) ? +1 : -1;
            const auto p = measurement_probabilities(rho, AnalyzerSetting{a, +1},
                                                     AnalyzerSetting{b, s});
            double sum = 0.0;
            int idx = 0;
            for (bool aplus : {true, false}) {
                for (bool bplus : {true, false}) {
                    const Eigen::Matrix4cd proj =
                        kron(analyzer_projector(a, aplus), analyzer_projector(s * b, bplus));
                    const double expect = (rho.rho * proj).trace().real();
                    CHECK(p[idx] == doctest::Approx(expect).epsilon(1e-10));
                    CHECK(p[idx] >= -1e-12);
                    sum += p[idx];
                    ++idx;
                }
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("handedness calibration picks the sign that restores the Bell combination") {
    CHECK(calibrate_handedness(make_entangled_pair()) == -1);
    CHECK(calibrate_handedness(make_werner(0.907)) == -1);
    CHECK(calibrate_handedness(make_werner(0.869)) == -1);
}

TEST_CASE("onboard sampling monitor rate") {
    SourceParams s;
    s.pair_rate_hz = 5.9e6;
    s.onboard_sampling_fraction_per_arm = 0.01;
    CHECK(onboard_sampling_rate_hz(s) == doctest::Approx(590.0).epsilon(1e-12));
    s.pair_rate_hz = 1.0e4;
    CHECK(onboard_sampling_rate_hz(s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no state at shared settings exceeds the Tsirelson bound") {
    // Property sweep: random mixed states and random *shared* analyzer
    // settings (a, a' for station 1; b, b' for station 2). The quantum bound
    // |E(a,b) - E(a,b') + E(a',b) + E(a',b')| <= 2*sqrt(2) must hold for all.
    CounterRng rng(0x7517u, 0, 0);
    const double bound = 2.0 * std::sqrt(2.0) + 1e-9;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const TwoQubitState rho = ginibre_state(rng);
        const double a = rng.uniform(0.0, kPi), ap = rng.uniform(0.0, kPi);
        const double b = rng.uniform(0.0, kPi), bp = rng.uniform(0.0, kPi);
        const int s = rng.bernoulli(0.5) ? +1 : -1;
        const auto e = [&](double x, double y) {
            return correlation_value(rho, AnalyzerSetting{x, +1}, AnalyzerSetting{y, s});
        };
        const double chsh = std::abs(e(a, b) - e(a, bp) + e(ap, b) + e(ap, bp));
        CHECK(chsh <= bound);
        worst = std::max(worst, chsh);
    }
    CHECK(worst <= bound);
    // The ideal pair at the canonical settings saturates it.
    const auto e = [&](double x, double y) {
        return correlation_value(make_entangled_pair(), AnalyzerSetting{x, +1},
                                 AnalyzerSetting{y, -1});
    };
    const double s_max =
        std::abs(e(0.0, kPi / 8.0) - e(0.0, 3.0 * kPi / 8.0) + e(kPi / 4.0, kPi / 8.0) +
                 e(kPi / 4.0, 3.0 * kPi / 8.0));
    CHECK(s_max == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("density-matrix invariants survive long random channel chains") {
    CounterRng rng(0x1Eafu, 0, 0);
    TwoQubitState state = make_werner(0.907);
    for (int k = 0; k < 1000; ++k) {
        state = apply_local_unitaries(state, haar_su2(rng), haar_su2(rng));
        if (k % 97 == 0) {
            CHECK_NOTHROW(validate(state));
        }
        CHECK(std::abs(state.rho.trace() - cd(1.0, 0.0)) <= 1e-10);
        CHECK((state.rho - state.rho.adjoint().eval()).norm() <= 1e-10);
        const double f = exact_fidelity(state);
        CHECK(f >= -1e-12);
        CHECK(f <= 1.0 + 1e-12);
    }
    // Unitary channels preserve the spectrum, so purity is conserved.
    const TwoQubitState w = make_werner(0.907);
    CHECK((state.rho * state.rho).trace().real() ==
          doctest::Approx((w.rho * w.rho).trace().real()).epsilon(1e-9));
}
