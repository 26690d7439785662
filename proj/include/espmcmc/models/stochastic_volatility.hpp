#ifndef ESPMCMC_MODELS_STOCHASTIC_VOLATILITY_HPP
#define ESPMCMC_MODELS_STOCHASTIC_VOLATILITY_HPP

#include <atomic>
#include <cmath>
#include <memory>
#include <optional>

#include "espmcmc/math.hpp"
#include "espmcmc/param_blocks.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc::models {

/// Stochastic volatility in the standardized parametrization
///   y_t = exp(mu + tau x_t) eps_t,   x_{t+1} = phi x_t + eta_{t+1},
///   x_1 ~ N(0, 1/(1-phi^2)).
/// theta = [mu, tau, phi].  Priors: mu ~ N(0, 2^2), tau half-t with 4
/// degrees of freedom, phi uniform on (-1, 1).
///
/// Two importance-density configurations of the same engine: the bootstrap
/// filter (M = f) and an adapted filter that fits a Gaussian to
/// p(x_t | x_{t-1}, y_t) by a second-order expansion of log g around the
/// prior mean (one Newton step).
class StochasticVolatility {
 public:
  using State = double;
  using Obs = double;

  static constexpr int kMu = 0, kTau = 1, kPhi = 2;
  static constexpr double kMuPriorVar = 4.0;
  static constexpr double kTauPriorDof = 4.0, kTauPriorScale = 1.0;

  explicit StochasticVolatility(bool adapted = true)
      : adapted_(adapted),
        adapted_fallbacks_(std::make_shared<std::atomic<long>>(0)),
        laplace_fallbacks_(std::make_shared<std::atomic<long>>(0)) {}

  int state_dim() const { return 1; }
  bool adapted() const { return adapted_; }
  long adapted_fallbacks() const { return adapted_fallbacks_->load(); }
  long laplace_fallbacks() const { return laplace_fallbacks_->load(); }

  static Params make_params(double mu, double tau, double phi) {
    Params th(3);
    th << mu, tau, phi;
    return th;
  }

  double init_var(const Params& th) const {
    return 1.0 / (1.0 - th[kPhi] * th[kPhi]);
  }

  double log_f1(State x, const Params& th) const {
    return log_normal_pdf(x, 0.0, init_var(th));
  }
  State sample_f1(const Params& th, Rng& rng) const {
    return rng.normal(0.0, std::sqrt(init_var(th)));
  }

  double log_ft(int, State x, State xp, const Params& th) const {
    return log_normal_pdf(x, th[kPhi] * xp, 1.0);
  }
  State sample_ft(int, State xp, const Params& th, Rng& rng) const {
    return rng.normal(th[kPhi] * xp, 1.0);
  }

  double log_gt(int, Obs y, State x, const Params& th) const {
    double u = th[kMu] + th[kTau] * x;
    return -0.5 * log_two_pi - u - 0.5 * y * y * std::exp(-2.0 * u);
  }
  Obs sample_gt(int, State x, const Params& th, Rng& rng) const {
    return std::exp(th[kMu] + th[kTau] * x) * rng.normal();
  }

  /// Gaussian fit to p(x | prior N(m0, v0), y): expand the y-dependent part
  /// of log g to second order around m0 and take one Newton step.  Zero
  /// curvature (y ~ 0) carries no usable observation information, so the
  /// proposal falls back to the prior.
  struct AdaptedMoments {
    double mean;
    double var;
    bool fell_back;
  };
  AdaptedMoments adapted_moments(Obs y, double m0, double v0,
                                 const Params& th) const {
    double tau = th[kTau];
    double u0 = th[kMu] + tau * m0;
    double w = y * y * std::exp(-2.0 * u0);
    double curvature = 2.0 * tau * tau * w;  // -d2/dx2 of log g at m0
    if (!(curvature > 1e-12)) return {m0, v0, true};
    double grad = -tau + tau * w;  // d/dx of log g at m0
    double prec = 1.0 / v0 + curvature;
    return {m0 + grad / prec, 1.0 / prec, false};
  }

  double log_M1(Obs y, State x, const Params& th) const {
    if (!adapted_) return log_f1(x, th);
    auto m = adapted_moments(y, 0.0, init_var(th), th);
    return log_normal_pdf(x, m.mean, m.var);
  }
  State sample_M1(Obs y, const Params& th, Rng& rng) const {
    if (!adapted_) return sample_f1(th, rng);
    auto m = adapted_moments(y, 0.0, init_var(th), th);
    if (m.fell_back) adapted_fallbacks_->fetch_add(1);
    return rng.normal(m.mean, std::sqrt(m.var));
  }
  double log_Mt(int t, Obs y, State x, State xp, const Params& th) const {
    if (!adapted_) return log_ft(t, x, xp, th);
    auto m = adapted_moments(y, th[kPhi] * xp, 1.0, th);
    return log_normal_pdf(x, m.mean, m.var);
  }
  State sample_Mt(int, Obs y, State xp, const Params& th, Rng& rng) const {
    if (!adapted_) return rng.normal(th[kPhi] * xp, 1.0);
    auto m = adapted_moments(y, th[kPhi] * xp, 1.0, th);
    if (m.fell_back) adapted_fallbacks_->fetch_add(1);
    return rng.normal(m.mean, std::sqrt(m.var));
  }

  /// The state evolution is exactly linear-Gaussian.
  std::optional<Linearization> linearization(int, const Params& th) const {
    Linearization lin;
    lin.shift = Eigen::VectorXd::Zero(1);
    lin.slope = Eigen::MatrixXd::Constant(1, 1, th[kPhi]);
    lin.noise_cov = Eigen::MatrixXd::Constant(1, 1, 1.0);
    return lin;
  }

  double log_prior(const Params& th) const {
    if (std::abs(th[kPhi]) >= 1.0 || th[kTau] <= 0.0) return neg_inf;
    return log_normal_pdf(th[kMu], 0.0, kMuPriorVar) +
           log_half_t_pdf(th[kTau], kTauPriorDof, kTauPriorScale) -
           std::log(2.0);  // phi uniform on (-1, 1)
  }

  // --- conditional posteriors for the block updates -----------------------

  /// log p(mu, tau | x, y) up to a constant.
  double level_scale_logpost(const Params& th,
                             const std::vector<State>& x,
                             const ObservationSeries<Obs>& y) const {
    if (th[kTau] <= 0.0) return neg_inf;
    double lp = log_normal_pdf(th[kMu], 0.0, kMuPriorVar) +
                log_half_t_pdf(th[kTau], kTauPriorDof, kTauPriorScale);
    for (int t = 0; t < y.horizon(); ++t) lp += log_gt(t, y[t], x[t], th);
    return lp;
  }

  /// log p(phi | x) up to a constant (uniform prior).
  double persistence_logpost(const Params& th,
                             const std::vector<State>& x) const {
    double phi = th[kPhi];
    if (std::abs(phi) >= 1.0) return neg_inf;
    double lp = 0.5 * std::log(1.0 - phi * phi) -
                0.5 * x[0] * x[0] * (1.0 - phi * phi);
    for (std::size_t t = 1; t < x.size(); ++t) {
      double r = x[t] - phi * x[t - 1];
      lp += -0.5 * r * r;
    }
    return lp;
  }

  ParamBlocks<StochasticVolatility> parameter_blocks() const;

 private:
  struct Laplace2 {
    Eigen::Vector2d mode;
    Eigen::Matrix2d cov;
    bool widened = false;
  };

  /// Newton mode search for (mu, tau); covariance from the negative inverse
  /// Hessian, widened once through a ridge when the Hessian is not
  /// negative-definite.
  void level_scale_derivs(const Eigen::Vector2d& p, const std::vector<State>& x,
                          const ObservationSeries<Obs>& y, Eigen::Vector2d& g,
                          Eigen::Matrix2d& H) const {
    g.setZero();
    H.setZero();
    for (int t = 0; t < y.horizon(); ++t) {
      double u = p[0] + p[1] * x[t];
      double w = y[t] * y[t] * std::exp(-2.0 * u);
      double c = -1.0 + w;
      g[0] += c;
      g[1] += c * x[t];
      H(0, 0) += -2.0 * w;
      H(0, 1) += -2.0 * w * x[t];
      H(1, 1) += -2.0 * w * x[t] * x[t];
    }
    H(1, 0) = H(0, 1);
    g[0] += -p[0] / kMuPriorVar;
    H(0, 0) += -1.0 / kMuPriorVar;
    double d = kTauPriorDof, A2 = kTauPriorScale * kTauPriorScale;
    g[1] += -(d + 1.0) * p[1] / (d * A2 + p[1] * p[1]);
    H(1, 1) += -(d + 1.0) * (d * A2 - p[1] * p[1]) /
               ((d * A2 + p[1] * p[1]) * (d * A2 + p[1] * p[1]));
  }

  Laplace2 level_scale_laplace(const Params& th, const std::vector<State>& x,
                               const ObservationSeries<Obs>& y) const {
    Eigen::Vector2d p(th[kMu], std::max(th[kTau], 1e-3));
    Eigen::Vector2d g;
    Eigen::Matrix2d H;
    for (int it = 0; it < 80; ++it) {
      level_scale_derivs(p, x, y, g, H);
      if (g.norm() < 1e-9) break;
      Eigen::Vector2d step = (-H).ldlt().solve(g);
      double lambda = 1.0;
      while (p[1] + lambda * step[1] <= 1e-6 && lambda > 1e-6) lambda *= 0.5;
      p += lambda * step;
    }
    level_scale_derivs(p, x, y, g, H);
    Laplace2 out;
    out.mode = p;
    Eigen::Matrix2d negH = -H;
    Eigen::LLT<Eigen::Matrix2d> llt(negH);
    if (llt.info() != Eigen::Success) {
      double ridge = std::abs(negH.trace()) * 1e-3 + 1e-6;
      negH.diagonal().array() += ridge;
      out.cov = 2.0 * negH.inverse();  // widened retry
      out.widened = true;
    } else {
      out.cov = negH.inverse();
    }
    return out;
  }

  struct Laplace1 {
    double mode;
    double var;
    bool widened = false;
  };

  Laplace1 persistence_laplace(const Params& th,
                               const std::vector<State>& x) const {
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t) {
      sxx += x[t - 1] * x[t - 1];
      sxy += x[t] * x[t - 1];
    }
    double phi = std::clamp(th[kPhi], -0.999, 0.999);
    double h = 0.0;
    for (int it = 0; it < 60; ++it) {
      double om = 1.0 - phi * phi;
      double g = -phi / om + x[0] * x[0] * phi + sxy - phi * sxx;
      h = -(1.0 + phi * phi) / (om * om) + x[0] * x[0] - sxx;
      if (h >= 0.0) break;  // leave the guard below to handle it
      double step = -g / h;
      double next = phi + step;
      double lambda = 1.0;
      while (std::abs(next) >= 0.9999 && lambda > 1e-6) {
        lambda *= 0.5;
        next = phi + lambda * step;
      }
      phi = next;
      if (std::abs(g) < 1e-10) break;
    }
    Laplace1 out;
    out.mode = phi;
    if (h < 0.0) {
      out.var = -1.0 / h;
    } else {
      out.var = 2.0 * 0.01;  // widened fallback scale
      out.widened = true;
    }
    return out;
  }

  bool adapted_;
  std::shared_ptr<std::atomic<long>> adapted_fallbacks_;
  std::shared_ptr<std::atomic<long>> laplace_fallbacks_;
};

/// Block updates: independence MH with Laplace-approximation proposals for
/// (mu, tau) given states and data, and for phi given states; the marginal-MH
/// alternatives are random walks (log scale for tau, atanh scale for phi).
inline ParamBlocks<StochasticVolatility> StochasticVolatility::parameter_blocks()
    const {
  using B = ParamBlockUpdate<StochasticVolatility>;
  ParamBlocks<StochasticVolatility> out;
  const StochasticVolatility self = *this;  // cheap copy, immutable

  B level_scale;
  level_scale.name = "mu-tau";
  level_scale.indices = {kMu, kTau};
  level_scale.kind = B::Kind::mwg;
  level_scale.mwg_propose = [self](const Params& th, const B::Path& x,
                                   const B::Series& y, Rng& rng) {
    BlockProposal p;
    p.theta = th;
    try {
      auto lap = self.level_scale_laplace(th, x, y);
      if (lap.widened) self.laplace_fallbacks_->fetch_add(1);
      MvNormal q = MvNormal::from_moments(lap.mode, lap.cov);
      Eigen::VectorXd draw = q.sample(rng);
      p.theta[kMu] = draw[0];
      p.theta[kTau] = draw[1];
      p.log_fwd = q.log_pdf(draw);
      Eigen::Vector2d cur(th[kMu], th[kTau]);
      p.log_rev = q.log_pdf(cur);
    } catch (const ProposalError&) {
      // last resort: symmetric random walk around the current values
      self.laplace_fallbacks_->fetch_add(1);
      p.theta[kMu] = th[kMu] + 0.1 * rng.normal();
      p.theta[kTau] = th[kTau] + 0.1 * rng.normal();
      p.log_fwd = 0.0;
      p.log_rev = 0.0;
    }
    return p;
  };
  level_scale.cond_logpost = [self](const Params& th, const B::Path& x,
                                    const B::Series& y) {
    return self.level_scale_logpost(th, x, y);
  };
  level_scale.pmmh_propose = [](const Params& th, Rng& rng) {
    BlockProposal p;
    p.theta = th;
    p.theta[kMu] = th[kMu] + 0.1 * rng.normal();
    double z = 0.1 * rng.normal();
    p.theta[kTau] = th[kTau] * std::exp(z);
    p.log_fwd = -std::log(p.theta[kTau]);
    p.log_rev = -std::log(th[kTau]);
    return p;
  };
  level_scale.log_prior = [](const Params& th) {
    if (th[kTau] <= 0.0) return neg_inf;
    return log_normal_pdf(th[kMu], 0.0, kMuPriorVar) +
           log_half_t_pdf(th[kTau], kTauPriorDof, kTauPriorScale);
  };
  out.blocks.push_back(std::move(level_scale));

  B persistence;
  persistence.name = "phi";
  persistence.indices = {kPhi};
  persistence.kind = B::Kind::mwg;
  persistence.mwg_propose = [self](const Params& th, const B::Path& x,
                                   const B::Series&, Rng& rng) {
    auto lap = self.persistence_laplace(th, x);
    if (lap.widened) self.laplace_fallbacks_->fetch_add(1);
    double sd = std::sqrt(lap.var);
    double draw = rng.normal(lap.mode, sd);
    BlockProposal p;
    p.theta = th;
    p.theta[kPhi] = draw;
    p.log_fwd = log_normal_pdf(draw, lap.mode, lap.var);
    p.log_rev = log_normal_pdf(th[kPhi], lap.mode, lap.var);
    return p;
  };
  persistence.cond_logpost = [self](const Params& th, const B::Path& x,
                                    const B::Series&) {
    return self.persistence_logpost(th, x);
  };
  persistence.pmmh_propose = [](const Params& th, Rng& rng) {
    BlockProposal p;
    p.theta = th;
    double a = std::atanh(std::clamp(th[kPhi], -0.999999, 0.999999));
    double a2 = a + 0.2 * rng.normal();
    p.theta[kPhi] = std::tanh(a2);
    // Jacobian of tanh: density wrt phi = N(atanh(phi'); a, s) / (1 - phi'^2)
    p.log_fwd = -std::log1p(-p.theta[kPhi] * p.theta[kPhi]);
    p.log_rev = -std::log1p(-th[kPhi] * th[kPhi]);
    return p;
  };
  persistence.log_prior = [](const Params& th) {
    return std::abs(th[kPhi]) < 1.0 ? -std::log(2.0) : neg_inf;
  };
  out.blocks.push_back(std::move(persistence));
  return out;
}

}  // namespace espmcmc::models

#endif  // ESPMCMC_MODELS_STOCHASTIC_VOLATILITY_HPP
