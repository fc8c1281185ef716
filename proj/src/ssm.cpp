#include "ownrecon/ssm.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ownrecon {

void validate(const SsmConfig& cfg) {
  if (cfg.d_model < 1 || cfg.d_state < 1 || cfg.d_head < 1 || cfg.rank < 1 || cfg.expand < 1)
    throw ConfigError("ssm dimensions must be positive");
  if (cfg.chunk < 1) throw ConfigError("chunk must be >= 1");
  if (cfg.d_head % cfg.rank != 0)
    throw ConfigError("d_head (" + std::to_string(cfg.d_head) + ") must be divisible by rank (" +
                      std::to_string(cfg.rank) + ")");
  if (cfg.d_inner() % cfg.d_head != 0)
    throw ConfigError("d_model x expand (" + std::to_string(cfg.d_inner()) + ") must be a multiple of d_head (" +
                      std::to_string(cfg.d_head) + ")");
  if (!(cfg.alpha_mu >= 0.0) || !(cfg.alpha_nu >= 0.0)) throw ConfigError("modulation strengths must be >= 0");
}

namespace {

void require_finite(const Linear& l, const char* name) {
  if (!l.weight.allFinite() || !l.bias.allFinite())
    throw DataIntegrityError(std::string(name) + " weights contain NaN or Inf");
}

void require_shape(const Linear& l, Index out, Index in, const char* name) {
  if (l.out_features() != out || l.in_features() != in || l.bias.size() != out)
    throw ShapeError(std::string(name) + " must be " + std::to_string(out) + "x" + std::to_string(in));
}

}  // namespace

SsmParams generate_ssm_params(const Eigen::MatrixXd& tokens, const ScanWeights& w, const SsmConfig& cfg,
                              ParamTying tying) {
  validate(cfg);
  const Index heads = cfg.heads();
  if (tokens.cols() != cfg.d_inner())
    throw ShapeError("token width " + std::to_string(tokens.cols()) + " != d_model x expand " +
                     std::to_string(cfg.d_inner()));
  require_shape(w.delta, heads, cfg.d_inner(), "delta map");
  require_shape(w.lambda, heads, cfg.d_inner(), "lambda map");
  require_shape(w.b_proj, cfg.interface_width(), cfg.d_inner(), "B map");
  if (!tying.b_c) require_shape(w.c_proj, cfg.interface_width(), cfg.d_inner(), "C map");
  if (w.a_log.size() != heads) throw ShapeError("a_log must have one entry per head");
  require_finite(w.delta, "delta map");
  require_finite(w.lambda, "lambda map");
  require_finite(w.b_proj, "B map");
  if (!tying.b_c) require_finite(w.c_proj, "C map");
  if (!w.a_log.allFinite()) throw DataIntegrityError("a_log contains NaN or Inf");

  const Index n = tokens.rows();
  SsmParams p;
  p.a = -w.a_log.array().exp();
  if (tying.a_delta) {
    p.delta.resize(n, heads);
    for (Index h = 0; h < heads; ++h) p.delta.col(h).setConstant(softplus(w.a_log(h)));
  } else {
    p.delta = apply_rows(w.delta, tokens).unaryExpr([](double v) { return softplus(v); });
  }
  p.lambda = apply_rows(w.lambda, tokens).unaryExpr([](double v) { return sigmoid(v); });
  p.b = apply_rows(w.b_proj, tokens);
  p.c = tying.b_c ? p.b : RowMatrix<double>(apply_rows(w.c_proj, tokens));
  p.b_mod = p.b;
  p.c_mod = p.c;
  return p;
}

SsmParams modulate_interfaces(const SsmParams& params, const Eigen::MatrixXd& evidence_tokens,
                              const ModulationWeights& w, const SsmConfig& cfg) {
  validate(cfg);
  const Index n = params.tokens();
  if (evidence_tokens.rows() != n)
    throw ShapeError("evidence tokens (" + std::to_string(evidence_tokens.rows()) + ") do not align with content tokens (" +
                     std::to_string(n) + ")");
  const Index heads = cfg.heads();
  const Index ds = cfg.d_state;
  const Index rank = cfg.rank;
  require_shape(w.proj, heads * 4 * ds, evidence_tokens.cols(), "modulation projection");
  require_finite(w.proj, "modulation projection");

  // Per-token RMS normalization over channels.
  const Eigen::VectorXd rms =
      ((evidence_tokens.array().square().rowwise().sum() / static_cast<double>(evidence_tokens.cols())) +
       kModulationNormEps)
          .sqrt();
  const Eigen::MatrixXd normed = evidence_tokens.array().colwise() / rms.array();
  const Eigen::MatrixXd m = apply_rows(w.proj, normed);

  SsmParams out = params;
  const double am = cfg.alpha_mu;
  const double an = cfg.alpha_nu;
  for (Index t = 0; t < n; ++t) {
    for (Index h = 0; h < heads; ++h) {
      const Index base = h * 4 * ds;
      for (Index s = 0; s < ds; ++s) {
        const double scale_b = 1.0 + am * std::tanh(m(t, base + s));
        const double shift_b = an * std::tanh(m(t, base + ds + s));
        const double scale_c = 1.0 + am * std::tanh(m(t, base + 2 * ds + s));
        const double shift_c = an * std::tanh(m(t, base + 3 * ds + s));
        for (Index r = 0; r < rank; ++r) {
          const Index e = (h * ds + s) * rank + r;
          out.b_mod(t, e) = params.b(t, e) * scale_b + shift_b;
          out.c_mod(t, e) = params.c(t, e) * scale_c + shift_c;
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
void check_scan_inputs(const RowMatrix<Scalar>& u, const SsmParamsT<Scalar>& p, const SsmConfig& cfg) {
  validate(cfg);
  const Index n = u.rows();
  const Index heads = cfg.heads();
  if (u.cols() != cfg.d_inner())
    throw ShapeError("content width " + std::to_string(u.cols()) + " != " + std::to_string(cfg.d_inner()));
  if (p.delta.rows() != n || p.delta.cols() != heads || p.lambda.rows() != n || p.lambda.cols() != heads ||
      p.a.size() != heads)
    throw ShapeError("scan parameters do not match tokens x heads");
  if (p.b_mod.rows() != n || p.c_mod.rows() != n || p.b_mod.cols() != cfg.interface_width() ||
      p.c_mod.cols() != cfg.interface_width())
    throw ShapeError("B/C interfaces do not match tokens x (heads x d_state x rank)");
  if (!u.allFinite() || !p.b_mod.allFinite() || !p.c_mod.allFinite())
    throw DataIntegrityError("scan input contains NaN or Inf");
  if (!p.delta.allFinite() || (p.delta.array() <= Scalar(0)).any()) throw DomainError("delta must be > 0");
  if (!p.a.allFinite() || (p.a.array() > Scalar(0)).any()) throw DomainError("A must be <= 0");
  if (!p.lambda.allFinite() || (p.lambda.array() < Scalar(0)).any() || (p.lambda.array() > Scalar(1)).any())
    throw DomainError("lambda must lie in [0, 1]");
}

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct HeadView {
  Index ds, rank, m, d_head, head;

  Eigen::Map<const Mat<Scalar>> interface(const RowMatrix<Scalar>& src, Index t) const {
    return {src.row(t).data() + head * ds * rank, ds, rank};
  }
  Eigen::Map<const Mat<Scalar>> content(const RowMatrix<Scalar>& u, Index t) const {
    return {u.row(t).data() + head * d_head, rank, m};
  }
  Eigen::Map<Mat<Scalar>> readout(RowMatrix<Scalar>& y, Index t) const { return {y.row(t).data() + head * d_head, rank, m}; }
  Eigen::Map<Mat<Scalar>> state(RowMatrix<Scalar>& s, Index t) const { return {s.row(t).data() + head * ds * m, ds, m}; }
};

}  // namespace

template <typename Scalar>
ScanOutputT<Scalar> selective_scan_sequential(const RowMatrix<Scalar>& u, const SsmParamsT<Scalar>& p,
                                              const SsmConfig& cfg, bool keep_states) {
  check_scan_inputs(u, p, cfg);
  const Index n = u.rows();
  const Index ds = cfg.d_state;
  const Index m = cfg.sub_width();

  ScanOutputT<Scalar> out;
  out.readout = RowMatrix<Scalar>::Zero(n, cfg.d_inner());
  if (keep_states) out.states = RowMatrix<Scalar>::Zero(n, cfg.hidden_channels());

  for (Index h = 0; h < cfg.heads(); ++h) {
    const HeadView<Scalar> view{ds, cfg.rank, m, cfg.d_head, h};
    Mat<Scalar> state = Mat<Scalar>::Zero(ds, m);
    Mat<Scalar> v_prev = Mat<Scalar>::Zero(ds, m);
    Mat<Scalar> v(ds, m);
    for (Index t = 0; t < n; ++t) {
      const Scalar delta = p.delta(t, h);
      const Scalar lambda = p.lambda(t, h);
      const Scalar alpha = std::exp(delta * p.a(h));
      const Scalar beta = (Scalar(1) - lambda) * delta * alpha;
      const Scalar gamma = lambda * delta;

      v.noalias() = view.interface(p.b_mod, t) * view.content(u, t);
      state = alpha * state + beta * v_prev + gamma * v;
      view.readout(out.readout, t).noalias() = view.interface(p.c_mod, t).transpose() * state;
      if (keep_states) view.state(out.states, t) = state;
      v_prev.swap(v);
    }
  }
  return out;
}

template <typename Scalar>
ScanOutputT<Scalar> selective_scan_chunked(const RowMatrix<Scalar>& u, const SsmParamsT<Scalar>& p,
                                           const SsmConfig& cfg, bool keep_states) {
  check_scan_inputs(u, p, cfg);
  const Index n = u.rows();
  const Index ds = cfg.d_state;
  const Index rank = cfg.rank;
  const Index m = cfg.sub_width();
  const Index chunk = cfg.chunk;

  ScanOutputT<Scalar> out;
  out.readout = RowMatrix<Scalar>::Zero(n, cfg.d_inner());
  if (keep_states) out.states = RowMatrix<Scalar>::Zero(n, cfg.hidden_channels());

  std::vector<Scalar> cum(static_cast<size_t>(chunk));
  Mat<Scalar> weights(chunk, chunk);      // K(t, i): weight of V_i in H_t
  std::vector<Scalar> from_state(static_cast<size_t>(chunk));  // weight of H_prev in H_t
  std::vector<Scalar> from_prev(static_cast<size_t>(chunk));   // weight of V_prev in H_t
  std::vector<Mat<Scalar>> v(static_cast<size_t>(chunk), Mat<Scalar>(ds, m));
  Mat<Scalar> score(rank, rank);

  for (Index h = 0; h < cfg.heads(); ++h) {
    const HeadView<Scalar> view{ds, rank, m, cfg.d_head, h};
    Mat<Scalar> state = Mat<Scalar>::Zero(ds, m);   // H at the end of the previous chunk
    Mat<Scalar> v_prev = Mat<Scalar>::Zero(ds, m);  // V of the last token of the previous chunk

    for (Index start = 0; start < n; start += chunk) {
      const Index len = std::min(chunk, n - start);

      // Log-decay prefix sums: cum[t] = sum_{s <= t} delta_s a.
      Scalar running = 0;
      for (Index t = 0; t < len; ++t) {
        running += p.delta(start + t, h) * p.a(h);
        cum[static_cast<size_t>(t)] = running;
      }
      auto decay = [&](Index t, Index i) { return std::exp(cum[static_cast<size_t>(t)] - cum[static_cast<size_t>(i)]); };
      auto beta = [&](Index t) {
        const Scalar d = p.delta(start + t, h);
        return (Scalar(1) - p.lambda(start + t, h)) * d * std::exp(d * p.a(h));
      };
      auto gamma = [&](Index t) { return p.lambda(start + t, h) * p.delta(start + t, h); };

      // V_i enters H_i through gamma_i and H_{i+1} through beta_{i+1}; both
      // then decay to H_t.
      weights.setZero();
      for (Index t = 0; t < len; ++t) {
        from_state[static_cast<size_t>(t)] = std::exp(cum[static_cast<size_t>(t)]);
        from_prev[static_cast<size_t>(t)] = beta(0) * decay(t, 0);
        weights(t, t) = gamma(t);
        for (Index i = 0; i < t; ++i) weights(t, i) = gamma(i) * decay(t, i) + beta(i + 1) * decay(t, i + 1);
      }

      for (Index i = 0; i < len; ++i)
        v[static_cast<size_t>(i)].noalias() = view.interface(p.b_mod, start + i) * view.content(u, start + i);

      // Readout, dual form:
      //   Y_t = C_t^T (w_h H_prev + w_v V_prev) + sum_{i<=t} K(t,i) (C_t^T B_i) U_i
      for (Index t = 0; t < len; ++t) {
        const auto c_t = view.interface(p.c_mod, start + t);
        auto y = view.readout(out.readout, start + t);
        y.noalias() = c_t.transpose() *
                      (from_state[static_cast<size_t>(t)] * state + from_prev[static_cast<size_t>(t)] * v_prev);
        for (Index i = 0; i <= t; ++i) {
          score.noalias() = c_t.transpose() * view.interface(p.b_mod, start + i);
          y.noalias() += (weights(t, i) * score) * view.content(u, start + i);
        }
      }

      // States: every token if requested, otherwise only the chunk end.
      const Index first_state = keep_states ? 0 : len - 1;
      Mat<Scalar> h_t(ds, m);
      for (Index t = first_state; t < len; ++t) {
        h_t = from_state[static_cast<size_t>(t)] * state + from_prev[static_cast<size_t>(t)] * v_prev;
        for (Index i = 0; i <= t; ++i) h_t += weights(t, i) * v[static_cast<size_t>(i)];
        if (keep_states) view.state(out.states, start + t) = h_t;
      }
      state = h_t;
      v_prev = v[static_cast<size_t>(len - 1)];
    }
  }
  return out;
}

template void check_scan_inputs<double>(const RowMatrix<double>&, const SsmParamsT<double>&, const SsmConfig&);
template void check_scan_inputs<float>(const RowMatrix<float>&, const SsmParamsT<float>&, const SsmConfig&);
template ScanOutputT<double> selective_scan_sequential<double>(const RowMatrix<double>&, const SsmParamsT<double>&,
                                                               const SsmConfig&, bool);
template ScanOutputT<float> selective_scan_sequential<float>(const RowMatrix<float>&, const SsmParamsT<float>&,
                                                             const SsmConfig&, bool);
template ScanOutputT<double> selective_scan_chunked<double>(const RowMatrix<double>&, const SsmParamsT<double>&,
                                                            const SsmConfig&, bool);
template ScanOutputT<float> selective_scan_chunked<float>(const RowMatrix<float>&, const SsmParamsT<float>&,
                                                          const SsmConfig&, bool);

}  // namespace ownrecon
