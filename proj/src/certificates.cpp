#include "tensoraux/certificates.hpp"

#include "tensoraux/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tensoraux {

namespace {

struct TheoremInfo {
  Theorem theorem;
  const char* name;
  int offset;
};

constexpr TheoremInfo kTheorems[] = {
    {Theorem::T5_1, "T5_1", -2},  {Theorem::T3_10a, "T3_10a", -1}, {Theorem::T3_10b, "T3_10b", -1},
    {Theorem::TA_2, "TA_2", 0},   {Theorem::CA_5, "CA_5", 0},      {Theorem::CA_6, "CA_6", -1},
    {Theorem::T4_2, "T4_2", -2},  {Theorem::CA_10, "CA_10", -2},
};

const TheoremInfo& info(Theorem t) {
  for (const auto& i : kTheorems) {
    if (i.theorem == t) return i;
  }
  throw ContractViolation("unknown theorem");
}

bool is_composite(Theorem t) { return t == Theorem::T4_2 || t == Theorem::CA_10; }

[[noreturn]] void inapplicable(Theorem t, const std::string& why) {
  throw InapplicableCertificate(std::string(theorem_name(t)) + ": " + why);
}

}  // namespace

const char* theorem_name(Theorem t) { return info(t).name; }

std::optional<Theorem> parse_theorem(const std::string& name) {
  for (const auto& i : kTheorems) {
    if (name == i.name) return i.theorem;
  }
  return std::nullopt;
}

const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_applicable: return "not_applicable";
  }
  return "unknown";
}

CertificateInputs certificate_inputs(const ModelInstance& model, const ModelNorms& norms, double L0, double eps,
                                     std::optional<double> R0) {
  const DiagnosticBounds b = hessian_bounds(model, norms, R0, NormPolicy::upper);
  CertificateInputs in;
  in.eps = eps;
  in.H = model.H();
  in.H_f = model.H_f();
  in.nu = model.nu();
  in.L0 = L0;
  in.N_hat = b.N_hat;
  in.F_x = b.F_x;
  if (b.N_x) {
    in.N = *b.N_x;
  } else if (b.N_hat) {
    in.N = *b.N_hat;
  }
  return in;
}

Certificate certificate(Theorem theorem, const CertificateInputs& in) {
  if (!(in.eps > 0.0)) throw ContractViolation("certificate: eps must be positive");
  if (!(in.L0 > 0.0)) throw ContractViolation("certificate: L0 must be positive");
  const ModelConstants c = model_constants(in.H_f, in.nu, in.H);
  const double q = 3.0 + in.nu;
  const double sigma = std::pow(2.0, -(1.0 + in.nu));
  const double log_inv_eps = std::max(0.0, -std::log2(in.eps));

  Certificate cert;
  cert.theorem = theorem;
  cert.index_offset = info(theorem).offset;
  auto& named = cert.inputs;
  named["eps"] = in.eps;
  named["q"] = q;
  named["sigma_q"] = sigma;
  named["nu"] = in.nu;
  named["H"] = in.H;
  named["H_f"] = in.H_f;
  named["L0"] = in.L0;
  named["L_H"] = c.L_H;

  const double M_H = std::max(2.0 * in.L0, 4.0 * c.L_H);
  const double M = is_composite(theorem) ? 2.0 * c.L_H : M_H;
  named["M"] = M;

  auto need_N = [&] {
    if (!(in.N > 0.0)) inapplicable(theorem, "needs a Hessian bound N > 0 (N_x or N_hat)");
    named["N"] = in.N;
    return in.N;
  };
  auto need_mu_positive = [&] {
    if (!c.mu_H || !(*c.mu_H > 0.0)) inapplicable(theorem, "needs mu_H > 0 (H above 6 H_f / (3 + nu))");
    named["mu_H"] = *c.mu_H;
    return *c.mu_H;
  };
  auto need_N_hat = [&] {
    if (!in.N_hat) inapplicable(theorem, "needs N_hat (nu > 0)");
    named["N_hat"] = *in.N_hat;
    return *in.N_hat;
  };
  auto need_beta = [&] {
    const double beta = in.beta ? *in.beta : 0.5 * std::pow(need_N_hat(), 2);
    named["beta"] = beta;
    return beta;
  };
  auto linear = [&](double mu, double C) {
    const double rate = std::log2(M / (M - mu));
    cert.validity_floor = 1.0 / std::log2(1.0 + mu / (M - mu));
    cert.predicted_T = (C + q) * log_inv_eps / rate;
    named["C"] = C;
  };

  switch (theorem) {
    case Theorem::T5_1: {
      const double mu = need_mu_positive();
      const double N = need_N();
      linear(mu, std::log2(4.0 * q * std::pow(M, 2.0 + in.nu) * N * N * N * mu / sigma));
      break;
    }
    case Theorem::T3_10a: {
      if (c.regime != Regime::below) inapplicable(theorem, "needs H below 6 H_f / (3 + nu)");
      if (in.nu == 0.0) inapplicable(theorem, "needs nu > 0");
      const double Nh = need_N_hat();
      if (!in.F_x) inapplicable(theorem, "needs F_x");
      named["F_x"] = *in.F_x;
      cert.predicted_T = std::pow(Nh, q) * q * std::pow(M, 2.0 + in.nu) * *in.F_x / sigma * std::pow(in.eps, -q);
      break;
    }
    case Theorem::T3_10b: {
      if (c.regime != Regime::at) inapplicable(theorem, "needs H equal to 6 H_f / (3 + nu)");
      if (in.nu == 0.0) inapplicable(theorem, "needs nu > 0");
      const double Nh = need_N_hat();
      cert.predicted_T = 3.0 * std::pow(M * Nh, q / 2.0) *
                         std::sqrt(q * Nh * Nh / std::pow(2.0, -(2.0 + in.nu))) * std::pow(in.eps, -q / 2.0);
      cert.multiple_of_three = true;
      cert.note = "T rounded up to a multiple of 3";
      break;
    }
    case Theorem::TA_2: {
      const double N = need_N();
      double gap;
      if (in.gap) {
        gap = *in.gap;
      } else if (in.F_x) {
        gap = *in.F_x;
      } else {
        inapplicable(theorem, "needs a value gap (or F_x)");
      }
      named["gap"] = gap;
      cert.predicted_T = std::pow(N, q) * q * std::pow(M, q - 1.0) * gap / sigma * std::pow(in.eps, -q);
      break;
    }
    case Theorem::CA_5: {
      if (!c.mu_H) inapplicable(theorem, "needs relative convexity (H at or above 6 H_f / (3 + nu))");
      const double N = need_N();
      const double beta = need_beta();
      cert.predicted_T = 3.0 * std::pow(M * N, q / 2.0) * std::sqrt(q * beta / sigma) * std::pow(in.eps, -q / 2.0);
      cert.multiple_of_three = true;
      cert.note = "T rounded up to a multiple of 3";
      break;
    }
    case Theorem::CA_6: {
      const double mu = need_mu_positive();
      const double N = need_N();
      const double beta = need_beta();
      linear(mu, std::log2(2.0 * q * std::pow(M, q - 1.0) * N * mu * beta / sigma));
      break;
    }
    case Theorem::T4_2:
    case Theorem::CA_10: {
      if (in.H < c.convex_threshold * (1.0 - 1e-12)) inapplicable(theorem, "needs H >= 2 H_f");
      const double mu = need_mu_positive();
      const double N = need_N();
      if (theorem == Theorem::T4_2) {
        linear(mu, std::log2(4.0 * q * std::pow(M, 2.0 + in.nu) * N * N * N * mu / sigma));
      } else {
        linear(mu, std::log2(2.0 * q * std::pow(M, q - 1.0) * N * mu * need_beta() / sigma));
      }
      break;
    }
  }
  if (cert.validity_floor) {
    if (!cert.note.empty()) cert.note += "; ";
    cert.note += "bound claimed only for T >= " + std::to_string(*cert.validity_floor);
  }
  if (!std::isfinite(cert.predicted_T)) inapplicable(theorem, "bound is not finite for these inputs");
  return cert;
}

std::vector<Theorem> applicable_theorems(const CertificateInputs& in, bool composite) {
  const std::vector<Theorem> candidates =
      composite ? std::vector<Theorem>{Theorem::T4_2, Theorem::CA_10}
                : std::vector<Theorem>{Theorem::T5_1, Theorem::T3_10a, Theorem::T3_10b, Theorem::TA_2,
                                       Theorem::CA_5, Theorem::CA_6};
  std::vector<Theorem> out;
  for (Theorem t : candidates) {
    try {
      certificate(t, in);
      out.push_back(t);
    } catch (const InapplicableCertificate&) {
    }
  }
  return out;
}

CertificateCheck certificate_check(const IterationTrace& trace, const Certificate& cert) {
  if (is_composite(cert.theorem) != trace.composite) {
    throw ContractViolation("certificate_check: certificate and trace use different methods");
  }
  CertificateCheck out;
  const double eps = cert.inputs.at("eps");
  const double L0 = cert.inputs.at("L0");
  const double L_H = cert.inputs.at("L_H");

  std::optional<std::size_t> first;
  for (const auto& row : trace.rows) {
    if (row.grad_norm <= eps) {
      first = row.k;
      break;
    }
  }
  if (!first) {
    out.detail = "trace did not reach the certified tolerance";
    return out;
  }

  const double cap = std::max(L0, 2.0 * L_H) * (1.0 + 1e-12);
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    if (!trace.composite && row.L_k > cap) ++out.cap_violations;
    if (row.i_k < 0 || k + 1 >= trace.rows.size()) continue;
    const double bound = trace.composite ? L_H * row.bregman_bwd : 2.0 * trace.rows[k + 1].L_k * row.bregman_fwd;
    if (row.decrease < bound - 1e-10) ++out.decrease_violations;
  }

  double T = static_cast<double>(*first) + cert.index_offset;
  if (cert.multiple_of_three && T > 0.0) T = 3.0 * std::ceil(T / 3.0);
  out.certified_T = T;
  const bool bounded = T <= 0.0 || T <= cert.predicted_T;
  out.vacuous = !bounded && cert.validity_floor && T < *cert.validity_floor;
  const bool within = bounded || out.vacuous;

  if (out.cap_violations > 0 || out.decrease_violations > 0 || !within) {
    out.status = CheckStatus::fail;
  } else {
    out.status = CheckStatus::pass;
  }
  out.detail = "T=" + std::to_string(T) + " predicted=" + std::to_string(cert.predicted_T) +
               (out.vacuous ? " (below validity floor)" : "") +
               " cap_violations=" + std::to_string(out.cap_violations) +
               " decrease_violations=" + std::to_string(out.decrease_violations);
  return out;
}

double rate_envelope(std::size_t k, double M, double mu, double beta0) {
  if (k == 0) throw ContractViolation("rate_envelope: k must be >= 1");
  if (!(M > mu) || !(mu >= 0.0)) throw ContractViolation("rate_envelope: need 0 <= mu < M");
  if (mu == 0.0) return M * beta0 / static_cast<double>(k);
  return mu * beta0 / std::expm1(static_cast<double>(k) * std::log1p(mu / (M - mu)));
}

}  // namespace tensoraux
