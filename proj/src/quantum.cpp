#include "entdist/quantum.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "entdist/constants.hpp"
#include "entdist/rng.hpp"

namespace entdist {

namespace {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using Eigen::Vector4cd;
using std::complex;

const complex<double> kI{0.0, 1.0};

Vector4cd bell_vector() {
    Vector4cd psi;
    psi << 0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;  // (|HV> + |VH>)/sqrt(2)
    return psi;
}

Matrix4cd kron2(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

bool is_unitary(const Matrix2cd& u, double tol) {
    return (u * u.adjoint() - Matrix2cd::Identity()).norm() <= tol;
}

// Analyzer projector onto cos(theta)|H> + sin(theta)|V> (plus = true) or its
// orthogonal complement.
Matrix2cd analyzer_projector(double theta, bool plus) {
    Eigen::Vector2cd v;
    if (plus) {
        v << std::cos(theta), std::sin(theta);
    } else {
        v << -std::sin(theta), std::cos(theta);
    }
    return v * v.adjoint();
}

// |tr(W(setting) * C)| — the coordinate-ascent objective. The operator
// distance to the identity (up to global phase) is sqrt(4 - 2|tr|).
double abs_trace(const WaveplateSetting& s, const Matrix2cd& channel) {
    return std::abs((waveplate_unitary(s) * channel).trace());
}

double wrap_angle(double a) {
    a = std::fmod(a, kPi);
    if (a < 0.0) a += kPi;
    return a;
}

}  // namespace

void validate(const TwoQubitState& state) {
    const Matrix4cd& rho = state.rho;
    if ((rho - rho.adjoint()).norm() > 1e-12) {
        throw std::invalid_argument("state: density matrix is not Hermitian");
    }
    if (std::abs(rho.trace().real() - 1.0) > 1e-12 || std::abs(rho.trace().imag()) > 1e-12) {
        throw std::invalid_argument("state: trace must equal 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument("state: density matrix has a negative eigenvalue");
    }
}

void validate(const SourceParams& params) {
    if (!(params.pair_rate_hz > 0.0)) {
        throw std::invalid_argument("source: pair_rate_hz must be > 0");
    }
    if (!(params.target_fidelity >= 0.25 && params.target_fidelity <= 1.0)) {
        throw std::invalid_argument("source: target_fidelity must lie in [0.25, 1]");
    }
    if (!(params.onboard_sampling_fraction_per_arm > 0.0 &&
          params.onboard_sampling_fraction_per_arm < 1.0)) {
        throw std::invalid_argument("source: onboard_sampling_fraction_per_arm must lie in (0, 1)");
    }
}

TwoQubitState make_entangled_pair() {
    TwoQubitState state;
    const Vector4cd psi = bell_vector();
    state.rho = psi * psi.adjoint();
    return state;
}

TwoQubitState make_werner(double fidelity) {
    if (!(fidelity >= 0.25 && fidelity <= 1.0)) {
        throw std::invalid_argument("make_werner: fidelity must lie in [0.25, 1], got " +
                                    std::to_string(fidelity));
    }
    const double p = (4.0 * fidelity - 1.0) / 3.0;
    TwoQubitState state;
    state.rho = p * make_entangled_pair().rho + (1.0 - p) / 4.0 * Matrix4cd::Identity();
    return state;
}

double exact_fidelity(const TwoQubitState& state) {
    const Vector4cd psi = bell_vector();
    return (psi.adjoint() * state.rho * psi)(0, 0).real();
}

TwoQubitState apply_local_unitaries(const TwoQubitState& state, const Matrix2cd& u1,
                                    const Matrix2cd& u2) {
    if (!is_unitary(u1, 1e-12) || !is_unitary(u2, 1e-12)) {
        throw std::invalid_argument("apply_local_unitaries: inputs must be unitary to 1e-12");
    }
    const Matrix4cd u = kron2(u1, u2);
    TwoQubitState out;
    out.rho = u * state.rho * u.adjoint();
    out.rho = 0.5 * (out.rho + out.rho.adjoint().eval());  // re-symmetrize
    return out;
}

Matrix2cd retarder_unitary(double retardance_rad, double fast_axis_angle_rad) {
    const double c = std::cos(fast_axis_angle_rad);
    const double s = std::sin(fast_axis_angle_rad);
    Matrix2cd rot;
    rot << c, -s, s, c;
    Matrix2cd phase = Matrix2cd::Zero();
    phase(0, 0) = std::exp(-kI * (retardance_rad / 2.0));
    phase(1, 1) = std::exp(kI * (retardance_rad / 2.0));
    return rot * phase * rot.transpose();
}

Matrix2cd waveplate_unitary(const WaveplateSetting& setting) {
    return retarder_unitary(kPi / 2.0, setting.qwp2_angle_rad) *
           retarder_unitary(kPi, setting.hwp_angle_rad) *
           retarder_unitary(kPi / 2.0, setting.qwp1_angle_rad);
}

namespace {

// Exact maximizer of |tr(QWP(q2) HWP(h) QWP(q1) C)| over h alone:
// HWP(h) = -i(cos(2h) s3 + sin(2h) s1), so the trace is linear in
// (cos 2h, sin 2h) and the optimum is a closed-form phase.
double best_hwp_angle(const WaveplateSetting& s, const Matrix2cd& channel) {
    Matrix2cd s3;
    s3 << 1.0, 0.0, 0.0, -1.0;
    Matrix2cd s1;
    s1 << 0.0, 1.0, 1.0, 0.0;
    const Matrix2cd left = retarder_unitary(kPi / 2.0, s.qwp2_angle_rad);
    const Matrix2cd right = retarder_unitary(kPi / 2.0, s.qwp1_angle_rad) * channel;
    const complex<double> a = (left * (-kI * s3) * right).trace();
    const complex<double> b = (left * (-kI * s1) * right).trace();
    const double two_h = std::atan2(2.0 * (std::conj(a) * b).real(),
                                    std::norm(a) - std::norm(b)) / 2.0;
    return wrap_angle(two_h / 2.0);
}

// 1-D maximization over one QWP angle: golden-section bracket on [0, pi)
// followed by Newton polishing of the derivative to machine precision.
template <typename F>
double maximize_periodic(F f) {
    const int kCoarse = 64;
    double best_x = 0.0, best_f = f(0.0);
    for (int i = 1; i < kCoarse; ++i) {
        const double x = kPi * i / kCoarse;
        const double v = f(x);
        if (v > best_f) {
            best_f = v;
            best_x = x;
        }
    }
    double lo = best_x - kPi / kCoarse, hi = best_x + kPi / kCoarse;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 40; ++i) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    double x = 0.5 * (lo + hi);
    // Newton on f'(x) via central differences; the objective is a smooth
    // trigonometric polynomial, so a few steps reach machine precision.
    const double h = 1e-5;
    for (int i = 0; i < 6; ++i) {
        const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        const double d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        if (!(std::abs(d2) > 0.0)) break;
        const double step = d1 / d2;
        if (!std::isfinite(step)) break;
        x -= step;
    }
    return wrap_angle(x);
}

// Joint Levenberg-Marquardt polish over all three angles, minimizing
// q = 4 - |tr(W C)|^2 (zero exactly when W C is a phase times identity).
// All derivatives are exact: for an axis-rotated retarder, dU/dtheta = [G, U]
// with G the 90-degree rotation generator, so every first and second partial
// of tr(W C) is a trace of 2x2 products. Coordinate ascent alone can crawl
// along a nearly flat ridge of the objective; this closes the last few
// decades to machine precision.
WaveplateSetting joint_polish(const WaveplateSetting& start, const Matrix2cd& channel) {
    Matrix2cd g;
    g << 0.0, -1.0, 1.0, 0.0;
    const auto commutator = [&g](const Matrix2cd& u) -> Matrix2cd { return g * u - u * g; };
    Eigen::Vector3d x(start.qwp1_angle_rad, start.hwp_angle_rad, start.qwp2_angle_rad);

    const auto eval_q = [&](const Eigen::Vector3d& v) {
        const double t = abs_trace(WaveplateSetting{v[0], v[1], v[2]}, channel);
        return 4.0 - t * t;
    };

    double lambda = 1e-3;
    double q = eval_q(x);
    for (int iter = 0; iter < 80 && q > 1e-14; ++iter) {
        const Matrix2cd q1 = retarder_unitary(kPi / 2.0, x[0]);
        const Matrix2cd h = retarder_unitary(kPi, x[1]);
        const Matrix2cd q2 = retarder_unitary(kPi / 2.0, x[2]);
        const Matrix2cd dq1 = commutator(q1), dh = commutator(h), dq2 = commutator(q2);
        const Matrix2cd d2q1 = commutator(dq1), d2h = commutator(dh), d2q2 = commutator(dq2);

        const complex<double> t = (q2 * h * q1 * channel).trace();
        Eigen::Vector3cd dt;
        dt[0] = (q2 * h * dq1 * channel).trace();
        dt[1] = (q2 * dh * q1 * channel).trace();
        dt[2] = (dq2 * h * q1 * channel).trace();
        Eigen::Matrix3cd d2t;
        d2t(0, 0) = (q2 * h * d2q1 * channel).trace();
        d2t(1, 1) = (q2 * d2h * q1 * channel).trace();
        d2t(2, 2) = (d2q2 * h * q1 * channel).trace();
        d2t(0, 1) = d2t(1, 0) = (q2 * dh * dq1 * channel).trace();
        d2t(0, 2) = d2t(2, 0) = (dq2 * h * dq1 * channel).trace();
        d2t(1, 2) = d2t(2, 1) = (dq2 * dh * q1 * channel).trace();

        Eigen::Vector3d grad;
        Eigen::Matrix3d hess;
        for (int i = 0; i < 3; ++i) {
            grad[i] = -2.0 * (std::conj(t) * dt[i]).real();
            for (int j = 0; j < 3; ++j) {
                hess(i, j) = -2.0 * ((std::conj(dt[i]) * dt[j]).real() +
                                     (std::conj(t) * d2t(i, j)).real());
            }
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            const Eigen::Matrix3d m = hess + lambda * Eigen::Matrix3d::Identity();
            const Eigen::Vector3d trial = x + m.fullPivLu().solve(-grad).eval();
            const double q_trial = eval_q(trial);
            if (q_trial < q) {
                x = trial;
                q = q_trial;
                lambda = std::max(lambda * 0.25, 1e-12);
                accepted = true;
            } else {
                lambda *= 8.0;
            }
        }
        if (!accepted) break;
    }
    return WaveplateSetting{wrap_angle(x[0]), wrap_angle(x[1]), wrap_angle(x[2])};
}

}  // namespace

WaveplateSetting solve_compensation(const Matrix2cd& channel_unitary) {
    if (!is_unitary(channel_unitary, 1e-12)) {
        throw std::invalid_argument("solve_compensation: channel must be unitary to 1e-12");
    }
    const int kRestarts = 8;
    const int kSweeps = 200;
    WaveplateSetting best{};
    double best_trace = -1.0;
    for (int restart = 0; restart < kRestarts && best_trace < 2.0 - 1e-13; ++restart) {
        CounterRng rng(0x9E3779B97F4A7C15ull, static_cast<std::uint64_t>(restart), 7);
        WaveplateSetting s{rng.uniform(0.0, kPi), rng.uniform(0.0, kPi), rng.uniform(0.0, kPi)};
        if (restart == 0) s = WaveplateSetting{0.0, 0.0, 0.0};
        double prev = abs_trace(s, channel_unitary);
        for (int sweep = 0; sweep < kSweeps; ++sweep) {
            s.hwp_angle_rad = best_hwp_angle(s, channel_unitary);
            s.qwp1_angle_rad = maximize_periodic([&](double q) {
                WaveplateSetting t = s;
                t.qwp1_angle_rad = q;
                return abs_trace(t, channel_unitary);
            });
            s.qwp2_angle_rad = maximize_periodic([&](double q) {
                WaveplateSetting t = s;
                t.qwp2_angle_rad = q;
                return abs_trace(t, channel_unitary);
            });
            const double cur = abs_trace(s, channel_unitary);
            if (cur >= 2.0 - 1e-13 || cur - prev < 1e-15) {
                prev = cur;
                break;
            }
            prev = cur;
        }
        s = joint_polish(s, channel_unitary);
        const double polished = abs_trace(s, channel_unitary);
        if (polished > best_trace) {
            best_trace = polished;
            best = s;
        }
    }
    const double residual = std::sqrt(std::max(0.0, 4.0 - 2.0 * best_trace));
    if (residual > 1e-6) {
        throw std::runtime_error("solve_compensation failed to converge; residual " +
                                 std::to_string(residual));
    }
    return best;
}

double residual_rotation_from_contrast(double contrast) {
    if (!(contrast >= 1.0)) {
        throw std::invalid_argument("residual_rotation_from_contrast: contrast must be >= 1");
    }
    return std::atan(1.0 / std::sqrt(contrast));
}

double dephasing_from_contrast(double contrast) {
    if (!(contrast >= 1.0)) {
        throw std::invalid_argument("dephasing_from_contrast: contrast must be >= 1");
    }
    return (contrast - 1.0) / (contrast + 1.0);
}

std::array<double, 4> measurement_probabilities(const TwoQubitState& state,
                                                const AnalyzerSetting& a,
                                                const AnalyzerSetting& b) {
    const double theta1 = a.angle_rad;
    const double theta2 = b.handedness_sign * b.angle_rad;
    std::array<double, 4> probs{};
    int idx = 0;
    for (bool plus1 : {true, false}) {
        for (bool plus2 : {true, false}) {
            const Matrix4cd proj =
                kron2(analyzer_projector(theta1, plus1), analyzer_projector(theta2, plus2));
            double p = (proj * state.rho).trace().real();
            probs[idx++] = std::min(1.0, std::max(0.0, p));
        }
    }
    return probs;
}

double correlation_value(const TwoQubitState& state, const AnalyzerSetting& a,
                         const AnalyzerSetting& b) {
    const auto p = measurement_probabilities(state, a, b);
    return p[0] - p[1] - p[2] + p[3];
}

int calibrate_handedness(const TwoQubitState& state) {
    const double a0 = 0.0, a1 = kPi / 4.0, b0 = kPi / 8.0, b1 = 3.0 * kPi / 8.0;
    double best_s = -1.0;
    int best_sign = +1;
    for (int sign : {+1, -1}) {
        auto e = [&](double a, double b) {
            return correlation_value(state, AnalyzerSetting{a, +1}, AnalyzerSetting{b, sign});
        };
        const double s = std::abs(e(a0, b0) - e(a0, b1) + e(a1, b0) + e(a1, b1));
        if (s > best_s + 1e-12) {
            best_s = s;
            best_sign = sign;
        }
    }
    return best_sign;
}

double onboard_sampling_rate_hz(const SourceParams& source) {
    validate(source);
    return source.pair_rate_hz * source.onboard_sampling_fraction_per_arm *
           source.onboard_sampling_fraction_per_arm;
}

}  // namespace entdist
