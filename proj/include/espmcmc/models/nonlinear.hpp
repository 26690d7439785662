#ifndef ESPMCMC_MODELS_NONLINEAR_HPP
#define ESPMCMC_MODELS_NONLINEAR_HPP

#include <cmath>
#include <optional>

#include "espmcmc/math.hpp"
#include "espmcmc/param_blocks.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc::models {

/// The standard nonlinear growth benchmark:
///   y_t = x_t^2 / 20 + sigma eps_t
///   x_{t+1} = x_t/2 + 25 x_t/(1 + x_t^2) + 8 cos(1.2 t) + tau eta_{t+1}
/// with x_1 ~ N(0, 5).  theta = [sigma^2, tau^2], both with IG(1, 0.1)
/// priors.  Bootstrap importance density.
class NonlinearBenchmark {
 public:
  using State = double;
  using Obs = double;

  static constexpr int kObsVar = 0, kStateVar = 1;
  static constexpr double kInitVar = 5.0;
  static constexpr double kPriorShape = 1.0, kPriorScale = 0.1;

  int state_dim() const { return 1; }

  static Params make_params(double obs_var, double state_var) {
    Params th(2);
    th << obs_var, state_var;
    return th;
  }

  /// Drift of the transition into 0-based time index t.
  static double drift(double xp, int t) {
    return 0.5 * xp + 25.0 * xp / (1.0 + xp * xp) +
           8.0 * std::cos(1.2 * static_cast<double>(t));
  }

  double log_f1(State x, const Params&) const {
    return log_normal_pdf(x, 0.0, kInitVar);
  }
  State sample_f1(const Params&, Rng& rng) const {
    return rng.normal(0.0, std::sqrt(kInitVar));
  }

  double log_ft(int t, State x, State xp, const Params& th) const {
    return log_normal_pdf(x, drift(xp, t), th[kStateVar]);
  }
  State sample_ft(int t, State xp, const Params& th, Rng& rng) const {
    return rng.normal(drift(xp, t), std::sqrt(th[kStateVar]));
  }

  double log_gt(int, Obs y, State x, const Params& th) const {
    return log_normal_pdf(y, x * x / 20.0, th[kObsVar]);
  }
  Obs sample_gt(int, State x, const Params& th, Rng& rng) const {
    return rng.normal(x * x / 20.0, std::sqrt(th[kObsVar]));
  }

  double log_M1(Obs, State x, const Params& th) const { return log_f1(x, th); }
  State sample_M1(Obs, const Params& th, Rng& rng) const {
    return sample_f1(th, rng);
  }
  double log_Mt(int t, Obs, State x, State xp, const Params& th) const {
    return log_ft(t, x, xp, th);
  }
  State sample_Mt(int t, Obs, State xp, const Params& th, Rng& rng) const {
    return sample_ft(t, xp, th, rng);
  }

  std::optional<Linearization> linearization(int, const Params&) const {
    return std::nullopt;
  }

  double log_prior(const Params& th) const {
    return log_inverse_gamma_pdf(th[kObsVar], kPriorShape, kPriorScale) +
           log_inverse_gamma_pdf(th[kStateVar], kPriorShape, kPriorScale);
  }

  /// Conditional draws of the two variances are exact inverse-gamma updates
  /// given the trajectory; the marginal-MH alternative is a log-scale random
  /// walk.
  ParamBlocks<NonlinearBenchmark> parameter_blocks(double rw_step = 0.5) const {
    using B = ParamBlockUpdate<NonlinearBenchmark>;
    ParamBlocks<NonlinearBenchmark> out;

    B obs_var;
    obs_var.name = "sigma2";
    obs_var.indices = {kObsVar};
    obs_var.kind = B::Kind::gibbs;
    obs_var.gibbs_draw = [](const Params& th, const B::Path& x,
                            const B::Series& y, Rng& rng) {
      double ssr = 0.0;
      const int T = y.horizon();
      for (int t = 0; t < T; ++t) {
        double r = y[t] - x[t] * x[t] / 20.0;
        ssr += r * r;
      }
      Params out_th = th;
      out_th[kObsVar] =
          rng.inverse_gamma(kPriorShape + 0.5 * T, kPriorScale + 0.5 * ssr);
      return out_th;
    };
    obs_var.pmmh_propose = [rw_step](const Params& th, Rng& rng) {
      return lognormal_rw_block(th, kObsVar, rw_step, rng);
    };
    obs_var.log_prior = [](const Params& th) {
      return log_inverse_gamma_pdf(th[kObsVar], kPriorShape, kPriorScale);
    };
    out.blocks.push_back(std::move(obs_var));

    B state_var;
    state_var.name = "tau2";
    state_var.indices = {kStateVar};
    state_var.kind = B::Kind::gibbs;
    state_var.gibbs_draw = [](const Params& th, const B::Path& x,
                              const B::Series& y, Rng& rng) {
      double ssr = 0.0;
      const int T = y.horizon();
      for (int t = 1; t < T; ++t) {
        double r = x[t] - drift(x[t - 1], t);
        ssr += r * r;
      }
      Params out_th = th;
      out_th[kStateVar] = rng.inverse_gamma(kPriorShape + 0.5 * (T - 1),
                                            kPriorScale + 0.5 * ssr);
      return out_th;
    };
    state_var.pmmh_propose = [rw_step](const Params& th, Rng& rng) {
      return lognormal_rw_block(th, kStateVar, rw_step, rng);
    };
    state_var.log_prior = [](const Params& th) {
      return log_inverse_gamma_pdf(th[kStateVar], kPriorShape, kPriorScale);
    };
    out.blocks.push_back(std::move(state_var));
    return out;
  }
};

}  // namespace espmcmc::models

#endif  // ESPMCMC_MODELS_NONLINEAR_HPP
