#pragma once

#include "ownrecon/field.hpp"
#include "ownrecon/layers.hpp"

namespace ownrecon {

/// Selective-scan configuration. Defaults: d_model 96, d_state 16, d_head 64,
/// MIMO rank 4, chunk 16, input expansion 2 (so 3 heads of width 64).
struct SsmConfig {
  Index d_model = 96;
  Index d_state = 16;
  Index d_head = 64;
  Index rank = 4;
  Index chunk = 16;
  Index expand = 2;
  double alpha_mu = 0.1;
  double alpha_nu = 0.1;

  Index d_inner() const { return d_model * expand; }
  Index heads() const { return d_inner() / d_head; }
  /// Sub-channel width m = d_head / rank.
  Index sub_width() const { return d_head / rank; }
  /// Flattened hidden-state channels: heads x d_state x m.
  Index hidden_channels() const { return heads() * d_state * sub_width(); }
  /// Width of one interface (B or C) row: heads x d_state x rank.
  Index interface_width() const { return heads() * d_state * rank; }

  bool operator==(const SsmConfig&) const = default;
};

void validate(const SsmConfig& cfg);

/// Per-token, per-head scan parameters.
///   delta, lambda: tokens x heads
///   a:             heads (input-independent, negative)
///   b, c:          tokens x interface_width, entry (h * d_state + s) * rank + r
///                  is row s, column r of head h's d_state x rank interface
///   b_mod, c_mod:  the same after interface modulation
template <typename Scalar>
struct SsmParamsT {
  RowMatrix<Scalar> delta;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a;
  RowMatrix<Scalar> lambda;
  RowMatrix<Scalar> b;
  RowMatrix<Scalar> c;
  RowMatrix<Scalar> b_mod;
  RowMatrix<Scalar> c_mod;

  Index tokens() const { return delta.rows(); }

  template <typename Other>
  SsmParamsT<Other> cast() const {
    return {delta.template cast<Other>(), a.template cast<Other>(), lambda.template cast<Other>(),
            b.template cast<Other>(),     c.template cast<Other>(), b_mod.template cast<Other>(),
            c_mod.template cast<Other>()};
  }
};

using SsmParams = SsmParamsT<double>;

/// Scan result.
///   states:  tokens x hidden_channels, entry (h * d_state + s) * m + j is
///            H_n[s, j] of head h (empty when states were not requested)
///   readout: tokens x d_inner, entry h * d_head + r * m + j is Y_n[r, j]
template <typename Scalar>
struct ScanOutputT {
  RowMatrix<Scalar> states;
  RowMatrix<Scalar> readout;
};

using ScanOutput = ScanOutputT<double>;

/// Generation maps from content tokens (tokens x d_inner) to scan parameters.
struct ScanWeights {
  Linear delta;            // heads x d_inner, pre-activation of softplus
  Eigen::VectorXd a_log;   // heads, A = -exp(a_log)
  Linear lambda;           // heads x d_inner, pre-activation of sigmoid
  Linear b_proj;           // interface_width x d_inner
  Linear c_proj;           // interface_width x d_inner

  bool operator==(const ScanWeights&) const = default;
};

/// Projection P for the interface modulation M = P(Norm(G)). Output row
/// layout per head h: [mu_B | nu_B | mu_C | nu_C], each d_state wide.
struct ModulationWeights {
  Linear proj;  // heads * 4 * d_state x evidence channels

  bool operator==(const ModulationWeights&) const = default;
};

/// Parameter-tying switches.
///   a_delta: delta = softplus(a_log) per head (the scalar that drives A)
///   b_c:     C is generated by the B map
struct ParamTying {
  bool a_delta = false;
  bool b_c = false;
};

/// RMS normalization epsilon used on evidence tokens before P.
inline constexpr double kModulationNormEps = 1e-6;

SsmParams generate_ssm_params(const Eigen::MatrixXd& tokens, const ScanWeights& w, const SsmConfig& cfg,
                              ParamTying tying = {});

/// Affine modulation of the B/C interfaces from evidence tokens:
///   b' = b * (1 + alpha_mu tanh(mu_B)) + alpha_nu tanh(nu_B)   (same for c)
/// with mu/nu per token, head and state row, broadcast over rank.
SsmParams modulate_interfaces(const SsmParams& params, const Eigen::MatrixXd& evidence_tokens,
                              const ModulationWeights& w, const SsmConfig& cfg);

/// Throws DomainError unless delta > 0, a <= 0, lambda in [0, 1] (all finite),
/// and ShapeError on inconsistent dimensions.
template <typename Scalar>
void check_scan_inputs(const RowMatrix<Scalar>& u, const SsmParamsT<Scalar>& p, const SsmConfig& cfg);

/// Reference recurrence, one token at a time. Per head, with U_n the
/// rank x m reshaped content token:
///   V_n = B'_n U_n
///   H_n = alpha_n H_{n-1} + beta_n V_{n-1} + gamma_n V_n
///   Y_n = C'_n^T H_n
///   alpha = exp(delta a), beta = (1 - lambda) delta alpha, gamma = lambda delta
/// H_0 = 0, V_0 = 0.
template <typename Scalar>
ScanOutputT<Scalar> selective_scan_sequential(const RowMatrix<Scalar>& u, const SsmParamsT<Scalar>& p,
                                              const SsmConfig& cfg, bool keep_states = true);

/// Same recurrence evaluated chunk by chunk (cfg.chunk tokens). Inside a chunk
/// the readout uses the quadratic dual form with cumulative decay weights;
/// the state is carried across chunk boundaries once per chunk.
template <typename Scalar>
ScanOutputT<Scalar> selective_scan_chunked(const RowMatrix<Scalar>& u, const SsmParamsT<Scalar>& p,
                                           const SsmConfig& cfg, bool keep_states = true);

}  // namespace ownrecon
