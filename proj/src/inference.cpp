#include "bdagar/inference.hpp"

#include "bdagar/errors.hpp"
#include "bdagar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bdagar {

void Dataset::validate() const {
  const int n = k();
  if (y.rows() != n || y.cols() != 2)
    throw ValidationError("outcomes must be k x 2 with k = " + std::to_string(n));
  if (!y.allFinite()) throw ValidationError("outcomes contain missing or non-finite values");
  for (int i = 0; i < 2; ++i) {
    if (x[i].rows() != n) throw ValidationError("covariate rows must equal k");
    if (x[i].cols() < 1) throw ValidationError("each disease needs at least the intercept column");
    if (!x[i].allFinite()) throw ValidationError("covariates contain missing or non-finite values");
    if ((x[i].col(0).array() != 1.0).any())
      throw ValidationError("first covariate column must be the all-ones intercept");
    if (coef_names[i].size() != static_cast<std::size_t>(x[i].cols()))
      throw ValidationError("coefficient names do not match covariate columns");
  }
  if (disease_names[0] == disease_names[1])
    throw ValidationError("disease names must be distinct");
}

void PriorSpec::validate() const {
  if (!(a_tau > 0 && b_tau > 0 && a_sigma > 0 && b_sigma > 0 && beta_var > 0 && eta_var > 0))
    throw ValidationError("prior shapes, rates and variances must be strictly positive");
}

void McmcConfig::validate() const {
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw ValidationError("burn_in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) throw ValidationError("thin must be >= 1");
  if (n_chains < 1) throw ValidationError("n_chains must be >= 1");
  if (!(init_step > 0)) throw ValidationError("initial step size must be positive");
}

NormalConditional::NormalConditional(Eigen::VectorXd mean, Eigen::MatrixXd precision)
    : mean_(std::move(mean)), prec_(std::move(precision)), llt_(prec_) {
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("conditional precision is not positive definite");
  logdet_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd NormalConditional::sample(RngStream& rng) const {
  // x = mean + L^{-T} z has covariance (L L^T)^{-1}
  Eigen::VectorXd z = rng.normal_vector(mean_.size());
  llt_.matrixU().solveInPlace(z);
  return mean_ + z;
}

double NormalConditional::log_pdf(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd d = x - mean_;
  return -0.5 * double(mean_.size()) * kLog2Pi + 0.5 * logdet_ - 0.5 * d.dot(prec_ * d);
}

double GammaConditional::log_pdf(double x) const { return log_gamma_pdf(x, shape, rate); }

double InvGammaConditional::log_pdf(double x) const { return log_inv_gamma_pdf(x, shape, rate); }

namespace {

BdagarSpec spec_of(const ModelContext& ctx, const ChainState& state) {
  BdagarSpec spec;
  spec.kind = ctx.kind;
  spec.rho1 = state.rho[0];
  spec.rho2 = state.rho[1];
  spec.tau1 = state.tau[0];
  spec.tau2 = state.tau[1];
  spec.link = state.eta;
  return spec;
}

// w2 - A21 w1 with A21 = eta0 I + eta1 M
Eigen::VectorXd conditional_residual(const ModelContext& ctx, const ChainState& state) {
  const int k = ctx.data->k();
  const Eigen::VectorXd w1 = state.w.head(k);
  return state.w.tail(k) - state.eta.eta0 * w1 - state.eta.eta1 * (ctx.adjacency * w1);
}

}  // namespace

WFullConditional::WFullConditional(const ModelContext& ctx, const ChainState& state) {
  const Dataset& data = *ctx.data;
  const int k = data.k();
  JointGaussian joint = joint_precision(spec_of(ctx, state), data.graph);
  prec_ = std::move(joint.qw);
  for (int i = 0; i < k; ++i) {
    prec_.coeffRef(i, i) += 1.0 / state.sigma2[0];
    prec_.coeffRef(k + i, k + i) += 1.0 / state.sigma2[1];
  }
  Eigen::VectorXd b(2 * k);
  b.head(k) = (data.y.col(0) - data.x[0] * state.beta[0]) / state.sigma2[0];
  b.tail(k) = (data.y.col(1) - data.x[1] * state.beta[1]) / state.sigma2[1];
  chol_ = std::make_unique<SparseCholesky>(prec_);
  mean_ = chol_->solve(b);
}

Eigen::VectorXd WFullConditional::sample(RngStream& rng) const {
  return mean_ + chol_->sample_precision(rng);
}

double WFullConditional::log_pdf(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd d = x - mean_;
  return -0.5 * double(mean_.size()) * kLog2Pi + 0.5 * chol_->log_det() -
         0.5 * d.dot(prec_ * d);
}

NormalConditional beta_conditional(const ModelContext& ctx, const ChainState& state, int disease) {
  const Dataset& data = *ctx.data;
  const int k = data.k();
  const Eigen::MatrixXd& xi = data.x[disease];
  const Eigen::VectorXd resid = data.y.col(disease) - state.w.segment(disease * k, k);
  Eigen::MatrixXd prec = xi.transpose() * xi / state.sigma2[disease];
  prec.diagonal().array() += 1.0 / ctx.prior.beta_var;
  const Eigen::VectorXd b = xi.transpose() * resid / state.sigma2[disease];
  Eigen::VectorXd mean = Eigen::LLT<Eigen::MatrixXd>(prec).solve(b);
  return NormalConditional(std::move(mean), std::move(prec));
}

InvGammaConditional sigma2_conditional(const ModelContext& ctx, const ChainState& state,
                                       int disease) {
  const Dataset& data = *ctx.data;
  const int k = data.k();
  const Eigen::VectorXd resid =
      data.y.col(disease) - data.x[disease] * state.beta[disease] - state.w.segment(disease * k, k);
  return {ctx.prior.a_sigma + 0.5 * k, ctx.prior.b_sigma + 0.5 * resid.squaredNorm()};
}

GammaConditional tau_conditional(const ModelContext& ctx, const ChainState& state, int disease) {
  const int k = ctx.data->k();
  const Eigen::VectorXd v =
      disease == 0 ? Eigen::VectorXd(state.w.head(k)) : conditional_residual(ctx, state);
  const double quad = ctx.model.quad_form(state.rho[disease], v);
  return {ctx.prior.a_tau + 0.5 * k, ctx.prior.b_tau + 0.5 * quad};
}

NormalConditional eta_conditional(const ModelContext& ctx, const ChainState& state) {
  const int k = ctx.data->k();
  const Eigen::VectorXd w1 = state.w.head(k);
  const Eigen::VectorXd w2 = state.w.tail(k);
  Eigen::MatrixXd u(k, 2);
  u.col(0) = w1;
  u.col(1) = ctx.adjacency * w1;
  const Eigen::SparseMatrix<double> q2 = ctx.model.build(state.rho[1]).q;
  const Eigen::MatrixXd q2u = q2 * u;
  Eigen::MatrixXd prec = state.tau[1] * (u.transpose() * q2u);
  prec.diagonal().array() += 1.0 / ctx.prior.eta_var;
  const Eigen::VectorXd b = state.tau[1] * (q2u.transpose() * w2);
  Eigen::VectorXd mean = Eigen::LLT<Eigen::MatrixXd>(prec).solve(b);
  return NormalConditional(std::move(mean), std::move(prec));
}

double rho_log_target(const ModelContext& ctx, const ChainState& state, int which, double rho) {
  const int k = ctx.data->k();
  const Eigen::VectorXd v =
      which == 0 ? Eigen::VectorXd(state.w.head(k)) : conditional_residual(ctx, state);
  return 0.5 * ctx.model.log_det(rho) - 0.5 * state.tau[which] * ctx.model.quad_form(rho, v);
}

double log_joint(const ModelContext& ctx, const ChainState& state) {
  const Dataset& data = *ctx.data;
  const PriorSpec& prior = ctx.prior;
  const int k = data.k();
  for (int i = 0; i < 2; ++i) {
    if (!(state.rho[i] > 0.0 && state.rho[i] < 1.0) || !(state.tau[i] > 0.0) ||
        !(state.sigma2[i] > 0.0))
      return -std::numeric_limits<double>::infinity();
  }

  double lp = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd mean = data.x[i] * state.beta[i] + state.w.segment(i * k, k);
    for (int j = 0; j < k; ++j) lp += log_normal_pdf(data.y(j, i), mean(j), state.sigma2[i]);
  }

  const Eigen::VectorXd w1 = state.w.head(k);
  const Eigen::VectorXd r = conditional_residual(ctx, state);
  lp += -double(k) * kLog2Pi +
        0.5 * (k * std::log(state.tau[0]) + ctx.model.log_det(state.rho[0]) +
               k * std::log(state.tau[1]) + ctx.model.log_det(state.rho[1])) -
        0.5 * (state.tau[0] * ctx.model.quad_form(state.rho[0], w1) +
               state.tau[1] * ctx.model.quad_form(state.rho[1], r));

  for (int i = 0; i < 2; ++i) {
    lp += log_gamma_pdf(state.tau[i], prior.a_tau, prior.b_tau);
    lp += log_inv_gamma_pdf(state.sigma2[i], prior.a_sigma, prior.b_sigma);
    for (int l = 0; l < state.beta[i].size(); ++l)
      lp += log_normal_pdf(state.beta[i](l), 0.0, prior.beta_var);
  }
  lp += log_normal_pdf(state.eta.eta0, 0.0, prior.eta_var);
  lp += log_normal_pdf(state.eta.eta1, 0.0, prior.eta_var);
  return lp;
}

ChainState initial_state(const ModelContext& ctx, const McmcConfig& config) {
  const Dataset& data = *ctx.data;
  const int k = data.k();
  ChainState state;
  for (int i = 0; i < 2; ++i) {
    const Eigen::MatrixXd& xi = data.x[i];
    state.beta[i] = xi.colPivHouseholderQr().solve(data.y.col(i));
    const double dof = std::max(1, k - int(xi.cols()));
    double s2 = (data.y.col(i) - xi * state.beta[i]).squaredNorm() / dof;
    if (!std::isfinite(s2) || s2 < 1e-8) s2 = 1.0;
    state.sigma2[i] = s2;
    state.tau[i] = ctx.prior.a_tau / ctx.prior.b_tau;  // prior mean
    state.rho[i] = 0.5;
    state.step[i] = config.init_step;
  }
  state.w = Eigen::VectorXd::Zero(2 * k);
  state.eta = LinkingParams{};
  return state;
}

void gibbs_cycle(const ModelContext& ctx, ChainState& state, RngStream& rng,
                 std::array<int, 2>* accept_counter) {
  state.beta[0] = beta_conditional(ctx, state, 0).sample(rng);
  state.beta[1] = beta_conditional(ctx, state, 1).sample(rng);
  state.w = WFullConditional(ctx, state).sample(rng);
  state.sigma2[0] = sigma2_conditional(ctx, state, 0).sample(rng);
  state.sigma2[1] = sigma2_conditional(ctx, state, 1).sample(rng);
  state.tau[0] = tau_conditional(ctx, state, 0).sample(rng);
  state.tau[1] = tau_conditional(ctx, state, 1).sample(rng);
  const Eigen::VectorXd eta = eta_conditional(ctx, state).sample(rng);
  state.eta = LinkingParams{eta(0), eta(1)};

  for (int which = 0; which < 2; ++which) {
    const double rho = state.rho[which];
    const double theta = logit(rho);
    const double proposal_theta = theta + state.step[which] * rng.normal();
    const double proposal = inv_logit(proposal_theta);
    bool accepted = false;
    if (proposal > 0.0 && proposal < 1.0) {
      const double cur = rho_log_target(ctx, state, which, rho) + std::log(rho * (1.0 - rho));
      const double prop = rho_log_target(ctx, state, which, proposal) +
                          std::log(proposal * (1.0 - proposal));
      accepted = std::log(rng.uniform()) < prop - cur;
    }
    if (accepted) state.rho[which] = proposal;
    if (accept_counter) (*accept_counter)[which] += accepted ? 1 : 0;
  }
}

std::vector<std::string> draw_column_names(const Dataset& data) {
  std::vector<std::string> names;
  for (int i = 0; i < 2; ++i)
    for (const auto& c : data.coef_names[i])
      names.push_back("beta" + std::to_string(i + 1) + "_" + c);
  for (const char* base : {"sigma2", "tau", "rho"})
    for (int i = 1; i <= 2; ++i) names.push_back(std::string(base) + "_" + std::to_string(i));
  names.push_back("eta_0");
  names.push_back("eta_1");
  for (int i = 1; i <= 2; ++i)
    for (const auto& id : data.graph.ids()) names.push_back("w" + std::to_string(i) + "_" + id);
  return names;
}

namespace {

struct SingleChainResult {
  Eigen::MatrixXd draws;
  std::vector<int> iterations;
  std::array<double, 2> acceptance{0.0, 0.0};
};

void record_row(Eigen::MatrixXd& draws, int row, const ChainState& state, const DrawsLayout& lay) {
  draws.block(row, lay.beta1(), 1, lay.p1) = state.beta[0].transpose();
  draws.block(row, lay.beta2(), 1, lay.p2) = state.beta[1].transpose();
  draws(row, lay.sigma2()) = state.sigma2[0];
  draws(row, lay.sigma2() + 1) = state.sigma2[1];
  draws(row, lay.tau()) = state.tau[0];
  draws(row, lay.tau() + 1) = state.tau[1];
  draws(row, lay.rho()) = state.rho[0];
  draws(row, lay.rho() + 1) = state.rho[1];
  draws(row, lay.eta()) = state.eta.eta0;
  draws(row, lay.eta() + 1) = state.eta.eta1;
  draws.block(row, lay.w1(), 1, 2 * lay.k) = state.w.transpose();
}

SingleChainResult run_single_chain(const ModelContext& ctx, const McmcConfig& config,
                                   int chain_index, const DrawsLayout& lay) {
  RngStream rng(config.seed + static_cast<std::uint64_t>(chain_index));
  ChainState state = initial_state(ctx, config);

  SingleChainResult result;
  const int retained = config.retained_per_chain();
  result.draws.resize(retained, lay.total());

  constexpr int kAdaptBatch = 50;
  std::array<int, 2> batch_acc{0, 0};
  std::array<long, 2> post_acc{0, 0};
  int row = 0;

  for (int t = 1; t <= config.iterations; ++t) {
    std::array<int, 2> acc{0, 0};
    try {
      gibbs_cycle(ctx, state, rng, &acc);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "chain " << chain_index << " failed at iteration " << t << ": " << e.what()
          << " [state: sigma2=(" << state.sigma2[0] << "," << state.sigma2[1] << ") tau=("
          << state.tau[0] << "," << state.tau[1] << ") rho=(" << state.rho[0] << ","
          << state.rho[1] << ") eta=(" << state.eta.eta0 << "," << state.eta.eta1 << ")]";
      throw std::runtime_error(msg.str());
    }

    if (t <= config.burn_in) {
      if (config.adapt) {
        batch_acc[0] += acc[0];
        batch_acc[1] += acc[1];
        if (t % kAdaptBatch == 0) {
          for (int i = 0; i < 2; ++i) {
            const double rate = double(batch_acc[i]) / kAdaptBatch;
            state.step[i] = std::clamp(state.step[i] * std::exp(rate - 0.40), 1e-4, 20.0);
          }
          batch_acc = {0, 0};
        }
      }
    } else {
      post_acc[0] += acc[0];
      post_acc[1] += acc[1];
      if ((t - config.burn_in) % config.thin == 0 && row < retained) {
        record_row(result.draws, row, state, lay);
        result.iterations.push_back(t);
        ++row;
      }
    }
  }
  const double post_n = config.iterations - config.burn_in;
  result.acceptance = {post_acc[0] / post_n, post_acc[1] / post_n};
  return result;
}

}  // namespace

PosteriorDraws run_mcmc(const Dataset& data, PrecisionKind kind, const PriorSpec& prior,
                        const McmcConfig& config) {
  config.validate();
  const ModelContext ctx(data, kind, prior);

  PosteriorDraws out;
  out.layout = DrawsLayout{data.p(0), data.p(1), data.k()};
  out.names = draw_column_names(data);
  out.n_chains = config.n_chains;

  std::vector<SingleChainResult> results(config.n_chains);
  std::vector<std::string> errors(config.n_chains);
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < config.n_chains; ++c) {
    try {
      results[c] = run_single_chain(ctx, config, c, out.layout);
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  const int per_chain = config.retained_per_chain();
  out.values.resize(static_cast<Eigen::Index>(per_chain) * config.n_chains, out.layout.total());
  for (int c = 0; c < config.n_chains; ++c) {
    out.values.middleRows(static_cast<Eigen::Index>(c) * per_chain, per_chain) = results[c].draws;
    for (int r = 0; r < per_chain; ++r) {
      out.chain_of_row.push_back(c);
      out.iteration_of_row.push_back(results[c].iterations[r]);
    }
    out.acceptance.push_back(results[c].acceptance);
  }
  return out;
}

int PosteriorDraws::column_index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

Eigen::VectorXd PosteriorDraws::column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw ValidationError("unknown parameter '" + name + "'");
  return values.col(idx);
}

}  // namespace bdagar
