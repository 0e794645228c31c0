// SPDX-License-Identifier: Apache-2.0
#include "blalab/parametric_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "blalab/errors.hpp"

namespace blalab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinDenominator = 1e-12;

// Roots of c[0] x^d + c[1] x^(d-1) + ... + c[d].
std::vector<Complex> polynomial_roots(std::vector<double> c) {
  while (!c.empty() && c.front() == 0.0) c.erase(c.begin());
  if (c.size() < 2) return {};
  const auto degree = static_cast<Eigen::Index>(c.size() - 1);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (Eigen::Index j = 0; j < degree; ++j) companion(0, j) = -c[static_cast<std::size_t>(j + 1)] / c.front();
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<Complex> roots;
  for (Eigen::Index i = 0; i < degree; ++i) roots.push_back(solver.eigenvalues()(i));
  std::sort(roots.begin(), roots.end(), [](const Complex& x, const Complex& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return roots;
}

struct Problem {
  const FitData& data;
  std::vector<double> sqrt_weight;
  std::vector<std::vector<Complex>> zinv_powers;  // [k][i] = exp(-j theta_k i)
  int nb;
  int na;

  Problem(const FitData& d, int nb_, int na_, Weighting weighting) : data(d), nb(nb_), na(na_) {
    const auto f = d.size();
    sqrt_weight.resize(f);
    for (std::size_t k = 0; k < f; ++k) {
      if (weighting == Weighting::uniform) {
        sqrt_weight[k] = 1.0;
      } else {
        const double v = d.variance[k];
        if (!(std::isfinite(v) && v > 0.0)) {
          throw ConfigError("fit: variance weight at bin " + std::to_string(d.bins.empty() ? int(k) : d.bins[k]) +
                            " is not finite and positive; use uniform weighting");
        }
        sqrt_weight[k] = 1.0 / std::sqrt(v);
      }
    }
    const int order = std::max(nb, na);
    zinv_powers.assign(f, std::vector<Complex>(static_cast<std::size_t>(order + 1)));
    for (std::size_t k = 0; k < f; ++k) {
      const Complex zinv = std::polar(1.0, -d.theta[k]);
      Complex p{1.0, 0.0};
      for (int i = 0; i <= order; ++i) {
        zinv_powers[k][static_cast<std::size_t>(i)] = p;
        p *= zinv;
      }
    }
  }

  int n_params() const { return nb + 1 + na; }

  Complex numerator(const Eigen::VectorXd& p, std::size_t k) const {
    Complex acc{0.0, 0.0};
    for (int i = 0; i <= nb; ++i) acc += p(i) * zinv_powers[k][static_cast<std::size_t>(i)];
    return acc;
  }

  Complex denominator(const Eigen::VectorXd& p, std::size_t k) const {
    Complex acc{1.0, 0.0};
    for (int i = 1; i <= na; ++i) acc += p(nb + i) * zinv_powers[k][static_cast<std::size_t>(i)];
    return acc;
  }

  // Weighted residual stacked as [re; im]; false when A vanishes somewhere.
  bool residual(const Eigen::VectorXd& p, Eigen::VectorXd& e) const {
    const auto f = data.size();
    e.resize(static_cast<Eigen::Index>(2 * f));
    for (std::size_t k = 0; k < f; ++k) {
      const Complex a = denominator(p, k);
      if (std::abs(a) < kMinDenominator) return false;
      const Complex r = sqrt_weight[k] * (data.g[k] - numerator(p, k) / a);
      e(static_cast<Eigen::Index>(k)) = r.real();
      e(static_cast<Eigen::Index>(k + f)) = r.imag();
    }
    return e.allFinite();
  }

  void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    const auto f = data.size();
    j.resize(static_cast<Eigen::Index>(2 * f), n_params());
    for (std::size_t k = 0; k < f; ++k) {
      const Complex a = denominator(p, k);
      const Complex b = numerator(p, k);
      const auto row = static_cast<Eigen::Index>(k);
      const auto row_im = static_cast<Eigen::Index>(k + f);
      for (int i = 0; i <= nb; ++i) {
        const Complex d = -sqrt_weight[k] * zinv_powers[k][static_cast<std::size_t>(i)] / a;
        j(row, i) = d.real();
        j(row_im, i) = d.imag();
      }
      for (int i = 1; i <= na; ++i) {
        const Complex d = sqrt_weight[k] * b * zinv_powers[k][static_cast<std::size_t>(i)] / (a * a);
        j(row, nb + i) = d.real();
        j(row_im, nb + i) = d.imag();
      }
    }
  }

  double cost(const Eigen::VectorXd& e) const { return e.squaredNorm() / static_cast<double>(data.size()); }

  // Linear least squares min sum w / |A_prev|^2 |A G - B|^2.
  Eigen::VectorXd sanathanan_koerner_step(const std::vector<double>& prev_denominator_abs) const {
    const auto f = data.size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(2 * f), n_params());
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(2 * f));
    for (std::size_t k = 0; k < f; ++k) {
      const double s = sqrt_weight[k] / prev_denominator_abs[k];
      const auto row = static_cast<Eigen::Index>(k);
      const auto row_im = static_cast<Eigen::Index>(k + f);
      for (int i = 0; i <= nb; ++i) {
        const Complex c = -s * zinv_powers[k][static_cast<std::size_t>(i)];
        m(row, i) = c.real();
        m(row_im, i) = c.imag();
      }
      for (int i = 1; i <= na; ++i) {
        const Complex c = s * zinv_powers[k][static_cast<std::size_t>(i)] * data.g[k];
        m(row, nb + i) = c.real();
        m(row_im, nb + i) = c.imag();
      }
      const Complex t = -s * data.g[k];
      rhs(row) = t.real();
      rhs(row_im) = t.imag();
    }
    return solve_scaled(m, rhs);
  }

  static Eigen::VectorXd solve_scaled(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs) {
    Eigen::VectorXd norms = m.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < norms.size(); ++i) {
      if (!(norms(i) > 0.0)) norms(i) = 1.0;
    }
    const Eigen::MatrixXd scaled = m * norms.cwiseInverse().asDiagonal();
    return scaled.colPivHouseholderQr().solve(rhs).cwiseQuotient(norms);
  }

  RationalModel to_model(const Eigen::VectorXd& p, double cost_value) const {
    RationalModel model;
    model.b.assign(p.data(), p.data() + nb + 1);
    model.a.assign(1, 1.0);
    for (int i = 1; i <= na; ++i) model.a.push_back(p(nb + i));
    model.cost = cost_value;
    model.n_freqs_used = static_cast<int>(data.size());
    model.mdl = mdl_criterion(cost_value, model.n_params(), model.n_freqs_used);
    return model;
  }
};

}  // namespace

Complex RationalModel::response(double theta) const {
  const Complex zinv = std::polar(1.0, -theta);
  Complex num{0.0, 0.0};
  for (auto it = b.rbegin(); it != b.rend(); ++it) num = num * zinv + *it;
  Complex den{0.0, 0.0};
  for (auto it = a.rbegin(); it != a.rend(); ++it) den = den * zinv + *it;
  return num / den;
}

ComplexVector RationalModel::response_at_bins(std::span<const int> bins, int n_lines) const {
  ComplexVector out;
  out.reserve(bins.size());
  for (int k : bins) out.push_back(response(2.0 * std::numbers::pi * k / n_lines));
  return out;
}

std::vector<Complex> RationalModel::poles() const { return polynomial_roots(a); }

std::vector<Complex> RationalModel::zeros() const { return polynomial_roots(b); }

void RationalModel::validate() const {
  if (b.empty() || a.empty()) throw ConfigError("model: coefficient arrays must be non-empty");
  if (a.front() != 1.0) throw ConfigError("model: a[0] must equal 1");
  if (!(cost >= 0.0)) throw ConfigError("model: cost must be non-negative");
}

FitData fit_data_from(const FrfEstimate& estimate) {
  FitData d;
  d.bins = estimate.bins;
  d.g = estimate.g_bla;
  d.variance = estimate.g_var;
  d.sample_rate_hz = estimate.sample_rate_hz;
  d.n_lines = estimate.n_lines;
  for (int k : estimate.bins) d.theta.push_back(2.0 * std::numbers::pi * k / estimate.n_lines);
  return d;
}

FitData fit_data_from(const CommonBla& common) {
  FitData d;
  d.bins = common.bins;
  d.g = common.c_bla;
  d.sample_rate_hz = common.sample_rate_hz;
  d.n_lines = common.n_lines;
  for (std::size_t i = 0; i < common.size(); ++i) {
    d.theta.push_back(2.0 * std::numbers::pi * common.bins[i] / common.n_lines);
    d.variance.push_back(common.has_variance() ? common.sample_var[i] / common.m_experiments : kNaN);
  }
  return d;
}

double mdl_criterion(double cost, int n_params, int n_freqs) {
  const double f = static_cast<double>(n_freqs);
  return cost * (1.0 + n_params * std::log(f) / f);
}

RationalModel fit_tf(const FitData& data, int nb, int na, const FitOptions& options,
                     const std::optional<RationalModel>& initial) {
  if (nb < 0 || na < 0) throw ConfigError("fit: orders must be non-negative");
  if (data.theta.size() != data.size() || (options.weighting == Weighting::variance && data.variance.size() != data.size())) {
    throw ConfigError("fit: data arrays differ in length");
  }
  if (static_cast<int>(data.size()) < nb + na + 1) {
    throw ConfigError("fit: " + std::to_string(data.size()) + " frequencies cannot determine " +
                      std::to_string(nb + na + 1) + " parameters");
  }
  const Problem problem(data, nb, na, options.weighting);
  const auto f = data.size();

  Eigen::VectorXd p = Eigen::VectorXd::Zero(problem.n_params());
  Eigen::VectorXd e;
  double cost = std::numeric_limits<double>::infinity();

  if (initial) {
    if (initial->nb() > nb || initial->na() > na) throw ConfigError("fit: initial model exceeds the requested order");
    for (int i = 0; i <= initial->nb(); ++i) p(i) = initial->b[static_cast<std::size_t>(i)];
    for (int i = 1; i <= initial->na(); ++i) p(nb + i) = initial->a[static_cast<std::size_t>(i)];
    if (problem.residual(p, e)) cost = problem.cost(e);
  } else {
    std::vector<double> prev(f, 1.0);
    for (int it = 0; it < std::max(options.sk_iterations, 1); ++it) {
      const Eigen::VectorXd candidate = problem.sanathanan_koerner_step(prev);
      if (!candidate.allFinite()) break;
      Eigen::VectorXd ce;
      if (problem.residual(candidate, ce)) {
        const double c = problem.cost(ce);
        if (c < cost) {
          p = candidate;
          e = ce;
          cost = c;
        }
      }
      bool usable = true;
      for (std::size_t k = 0; k < f; ++k) {
        prev[k] = std::abs(problem.denominator(candidate, k));
        if (!(prev[k] > kMinDenominator)) usable = false;
      }
      if (!usable) break;
    }
  }
  if (!std::isfinite(cost)) {
    // Fall back to A = 1 with a linear numerator fit.
    std::vector<double> ones(f, 1.0);
    Problem numerator_only(data, nb, 0, options.weighting);
    const Eigen::VectorXd q = numerator_only.sanathanan_koerner_step(ones);
    p.setZero();
    p.head(nb + 1) = q;
    if (!problem.residual(p, e)) throw FitDivergedError("fit: no finite initial model", problem.to_model(p, kNaN));
    cost = problem.cost(e);
  }

  // Levenberg-Marquardt on the weighted cost.
  double lambda = 1e-3;
  bool any_accepted = false;
  Eigen::MatrixXd j;
  problem.jacobian(p, j);
  const double initial_gradient = (j.transpose() * e).norm();
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd scale = j.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < scale.size(); ++i) {
      if (!(scale(i) > 0.0)) scale(i) = 1.0;
    }
    const auto rows = j.rows();
    const auto cols = j.cols();
    Eigen::MatrixXd augmented(rows + cols, cols);
    augmented.topRows(rows) = j;
    augmented.bottomRows(cols) = (std::sqrt(lambda) * scale).asDiagonal();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + cols);
    rhs.head(rows) = -e;
    const Eigen::VectorXd step = Problem::solve_scaled(augmented, rhs);

    const Eigen::VectorXd trial = p + step;
    Eigen::VectorXd trial_e;
    const bool finite = step.allFinite() && problem.residual(trial, trial_e);
    const double trial_cost = finite ? problem.cost(trial_e) : std::numeric_limits<double>::infinity();
    if (trial_cost < cost) {
      const double decrease = (cost - trial_cost) / std::max(cost, std::numeric_limits<double>::min());
      p = trial;
      e = trial_e;
      cost = trial_cost;
      any_accepted = true;
      lambda = std::max(lambda / 10.0, 1e-15);
      problem.jacobian(p, j);
      if (decrease < options.relative_tolerance) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) break;
    }
  }

  auto model = problem.to_model(p, cost);
  if (!std::isfinite(cost)) throw FitDivergedError("fit: cost is not finite", model);
  const double gradient_scale = std::max(1.0, std::sqrt(cost * static_cast<double>(f)));
  if (!any_accepted && initial_gradient > 1e-6 * gradient_scale && cost > 1e-20) {
    throw FitDivergedError("fit: cost did not decrease within the iteration budget", model);
  }
  return model;
}

OrderSelection select_order(const FitData& data, std::span<const std::pair<int, int>> grid,
                            const FitOptions& options) {
  if (grid.empty()) throw ConfigError("order selection: empty order grid");
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return grid[x].first + grid[x].second < grid[y].first + grid[y].second;
  });

  OrderSelection out;
  out.table.resize(grid.size());
  std::vector<std::optional<RationalModel>> fitted(grid.size());
  for (std::size_t idx : order) {
    const auto [nb, na] = grid[idx];
    OrderRow& row = out.table[idx];
    row.nb = nb;
    row.na = na;
    std::optional<RationalModel> best;
    std::string message;
    try {
      best = fit_tf(data, nb, na, options);
    } catch (const FitDivergedError& err) {
      message = err.what();
    } catch (const NumericalError& err) {
      message = err.what();
    }
    // Warm start from the best nested model that is already fitted.
    std::optional<RationalModel> nested;
    for (std::size_t other = 0; other < grid.size(); ++other) {
      if (!fitted[other] || other == idx) continue;
      if (grid[other].first <= nb && grid[other].second <= na && (!nested || fitted[other]->cost < nested->cost)) {
        nested = fitted[other];
      }
    }
    if (nested) {
      try {
        auto warm = fit_tf(data, nb, na, options, nested);
        if (!best || warm.cost < best->cost) best = warm;
      } catch (const NumericalError& err) {
        if (!best) message = err.what();
      }
    }
    if (best) {
      fitted[idx] = best;
      row.cost = best->cost;
      row.mdl = best->mdl;
      row.ok = true;
    } else {
      row.cost = kNaN;
      row.mdl = kNaN;
      row.message = message;
    }
  }

  std::optional<std::size_t> winner;
  for (std::size_t idx : order) {
    if (!fitted[idx]) continue;
    if (!winner) {
      winner = idx;
      continue;
    }
    const auto& cand = *fitted[idx];
    const auto& cur = *fitted[*winner];
    if (cand.mdl < cur.mdl || (cand.mdl == cur.mdl && cand.n_params() < cur.n_params())) winner = idx;
  }
  if (!winner) {
    std::ostringstream msg;
    msg << "order selection: every fit failed:";
    for (const auto& row : out.table) msg << " (" << row.nb << "," << row.na << "): " << row.message << ";";
    throw NumericalError(msg.str());
  }
  out.best = *fitted[*winner];
  return out;
}

}  // namespace blalab
