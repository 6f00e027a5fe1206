#pragma once

#include <Eigen/Dense>
#include <array>

namespace entdist {

// Two-qubit polarization state as a density matrix in the product basis
// {HH, HV, VH, VV}. Kept Hermitian, unit-trace, and positive semidefinite
// (eigenvalues >= -1e-10) by construction and re-symmetrization.
struct TwoQubitState {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
};

struct SourceParams {
    double pair_rate_hz = 5.9e6;
    double target_fidelity = 0.907;
    double onboard_sampling_fraction_per_arm = 0.01;
};

// Fast-axis angles of the QWP-HWP-QWP compensation stack, radians in [0, pi).
struct WaveplateSetting {
    double qwp1_angle_rad = 0.0;
    double hwp_angle_rad = 0.0;
    double qwp2_angle_rad = 0.0;
};

// Polarization analyzer measuring cos(theta)|H> + sin(theta)|V> against its
// orthogonal complement. handedness_sign flips the sense of the second
// station's analyzer frame; it is fixed once per dataset by calibration.
struct AnalyzerSetting {
    double angle_rad = 0.0;
    int handedness_sign = +1;
};

// Throws std::invalid_argument naming the violated invariant.
void validate(const TwoQubitState& state);
void validate(const SourceParams& params);

// |psi>12 = (|HV> + |VH>)/sqrt(2) as a density matrix.
TwoQubitState make_entangled_pair();

// Isotropic (Werner) mixture p|psi><psi| + (1-p) I/4 with p = (4F-1)/3,
// so exact_fidelity(make_werner(F)) == F. Requires F in [0.25, 1].
TwoQubitState make_werner(double fidelity);

// Overlap <psi12| rho |psi12>.
double exact_fidelity(const TwoQubitState& state);

// (U1 (x) U2) rho (U1 (x) U2)^dagger, re-symmetrized. Inputs must be unitary
// to 1e-12 or std::invalid_argument is thrown.
TwoQubitState apply_local_unitaries(const TwoQubitState& state, const Eigen::Matrix2cd& u1,
                                    const Eigen::Matrix2cd& u2);

// Jones matrix of a linear retarder: R(theta) diag(e^{-i delta/2}, e^{+i delta/2}) R(-theta).
Eigen::Matrix2cd retarder_unitary(double retardance_rad, double fast_axis_angle_rad);

// Product QWP(q2) * HWP(h) * QWP(q1) of standard retarders (pi/2, pi, pi/2).
Eigen::Matrix2cd waveplate_unitary(const WaveplateSetting& setting);

// Finds a setting whose waveplate stack inverts the channel up to global
// phase, operator distance <= 1e-6. Coordinate-ascent maximization of
// |tr(W C)| with exact half-wave-plate updates and a quarter-wave-plate line
// search; throws std::runtime_error carrying the residual on non-convergence.
WaveplateSetting solve_compensation(const Eigen::Matrix2cd& channel_unitary);

// Residual linear-rotation magnitude implied by a single-arm extinction
// contrast C:1, rotation-like model: epsilon = atan(1/sqrt(C)). Requires
// C >= 1 (C -> infinity gives 0; the worst case C = 1 gives pi/4).
double residual_rotation_from_contrast(double contrast);

// Dephasing-strength alternative for the same contrast: off-diagonal
// coherence scale lambda = (C-1)/(C+1) so the one-basis visibility matches.
double dephasing_from_contrast(double contrast);

// Born-rule probabilities (P++, P+-, P-+, P--) of joint analyzer outcomes.
// The second analyzer angle enters as handedness_sign * angle.
std::array<double, 4> measurement_probabilities(const TwoQubitState& state,
                                                const AnalyzerSetting& a,
                                                const AnalyzerSetting& b);

// Correlation E = P++ + P-- - P+- - P-+ at the given settings.
double correlation_value(const TwoQubitState& state, const AnalyzerSetting& a,
                         const AnalyzerSetting& b);

// Picks the handedness sign in {+1, -1} maximizing the ideal CHSH combination
// for the given state at the canonical angle set (0, pi/4) x (pi/8, 3*pi/8).
int calibrate_handedness(const TwoQubitState& state);

// Two-fold rate seen by the onboard sampling monitors:
// pair_rate * (sampling fraction per arm)^2.
double onboard_sampling_rate_hz(const SourceParams& source);

}  // namespace entdist
