#include "thpsim/decay_fit.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace thpsim {

double DecayFit::model(double t) const {
  double y = floor;
  for (const auto& c : components) {
    if (c.lifetime_s > 0.0) y += c.amplitude * std::exp(-t / c.lifetime_s);
  }
  return y;
}

namespace {

struct Data {
  Eigen::VectorXd t;  // seconds, scaled to microseconds internally
  Eigen::VectorXd y;
  Eigen::VectorXd w;  // 1 / sigma
};

// Linear solve for [floor, a1, a2] at fixed lifetimes; returns weighted SSE.
double solve_linear(const Data& d, double tau1, double tau2, Eigen::Vector3d& coef) {
  const Eigen::Index n = d.t.size();
  Eigen::MatrixXd a(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = d.w(i);
    a(i, 1) = d.w(i) * std::exp(-d.t(i) / tau1);
    a(i, 2) = d.w(i) * std::exp(-d.t(i) / tau2);
  }
  const Eigen::VectorXd b = d.y.cwiseProduct(d.w);
  coef = a.colPivHouseholderQr().solve(b);
  return (a * coef - b).squaredNorm();
}

// Parameters: floor, a1, log tau1, a2, log tau2 (tau in microseconds).
struct Residual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const Data* d;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(d->t.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    const double tau1 = std::exp(p(2));
    const double tau2 = std::exp(p(4));
    for (Eigen::Index i = 0; i < d->t.size(); ++i) {
      const double m = p(0) + p(1) * std::exp(-d->t(i) / tau1) + p(3) * std::exp(-d->t(i) / tau2);
      f(i) = (d->y(i) - m) * d->w(i);
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    const double tau1 = std::exp(p(2));
    const double tau2 = std::exp(p(4));
    for (Eigen::Index i = 0; i < d->t.size(); ++i) {
      const double t = d->t(i);
      const double e1 = std::exp(-t / tau1);
      const double e2 = std::exp(-t / tau2);
      const double w = d->w(i);
      jac(i, 0) = -w;
      jac(i, 1) = -w * e1;
      jac(i, 2) = -w * p(1) * e1 * (t / tau1);
      jac(i, 3) = -w * e2;
      jac(i, 4) = -w * p(3) * e2 * (t / tau2);
    }
    return 0;
  }
};

}  // namespace

DecayFit fit_two_exponential(const CountHistogram& hist, std::size_t first_bin) {
  hist.validate();
  if (first_bin + 6 > hist.counts.size()) {
    throw std::invalid_argument("too few bins for a two-lifetime fit");
  }
  constexpr double kMicro = 1e6;
  Data d;
  const auto n = static_cast<Eigen::Index>(hist.counts.size() - first_bin);
  d.t.resize(n);
  d.y.resize(n);
  d.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto bin = first_bin + static_cast<std::size_t>(i);
    d.t(i) = (hist.bin_centre(bin) - hist.bin_centre(first_bin)) * kMicro;
    d.y(i) = hist.counts[bin];
    d.w(i) = 1.0 / std::sqrt(std::max(hist.counts[bin], 1.0));
  }
  const double t0 = hist.bin_centre(first_bin);

  DecayFit fit;
  const double span_us = d.t(n - 1);
  const double step_us = std::max(hist.bin_width_s * kMicro, 1e-9);

  // Coarse grid over lifetime pairs.
  std::vector<double> grid;
  const double lo = std::log(0.5 * step_us);
  const double hi = std::log(span_us);
  constexpr int kGrid = 30;
  for (int k = 0; k < kGrid; ++k) grid.push_back(std::exp(lo + (hi - lo) * k / (kGrid - 1)));
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd p(5);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      Eigen::Vector3d coef;
      const double sse = solve_linear(d, grid[i], grid[j], coef);
      if (sse < best && coef(1) >= 0.0 && coef(2) >= 0.0) {
        best = sse;
        p << coef(0), coef(1), std::log(grid[i]), coef(2), std::log(grid[j]);
      }
    }
  }

  const double peak = d.y.maxCoeff();
  if (!std::isfinite(best)) {
    fit.degenerate = true;
    fit.floor = d.y.mean();
  } else {
    Residual functor{&d};
    Eigen::LevenbergMarquardt<Residual> lm(functor);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-12;
    const auto status = lm.minimize(p);
    fit.converged = status > 0 && status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
    std::array<DecayComponent, 2> comps{
        DecayComponent{p(1), std::exp(p(2)) / kMicro},
        DecayComponent{p(3), std::exp(p(4)) / kMicro}};
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return a.lifetime_s < b.lifetime_s; });
    fit.floor = p(0);
    fit.components = comps;
    // Amplitudes are referred to t = 0 of the histogram rather than to the
    // first fitted bin.
    for (auto& c : fit.components) c.amplitude *= std::exp(t0 / c.lifetime_s);
    const double signal = std::max(0.0, peak - std::max(fit.floor, 0.0));
    const double noise = 5.0 * std::sqrt(std::max(fit.floor, 1.0));
    fit.degenerate = signal <= noise || (fit.components[0].amplitude <= 0.0 &&
                                         fit.components[1].amplitude <= 0.0);
  }

  fit.residuals.resize(hist.counts.size());
  double chi2 = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double r = hist.counts[i] - fit.model(hist.bin_centre(i));
    fit.residuals[i] = r;
    if (i >= first_bin) {
      chi2 += r * r / std::max(hist.counts[i], 1.0);
      sq += r * r;
    }
  }
  fit.chi2 = chi2;
  fit.rms_residual = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

}  // namespace thpsim
