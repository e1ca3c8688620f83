#include "gresfa/residuals.hpp"

#include "gresfa/error.hpp"
#include "gresfa/numeric.hpp"
#include "gresfa/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gresfa {
namespace {

constexpr std::uint64_t kDrawStream = 0xd2a;

/// M model draws produced in fixed blocks, each from its own derived stream.
Matrix shared_draws(const ParamSet& params, std::size_t count, std::uint64_t seed, std::size_t workers) {
  Matrix draws(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(params.m()));
  const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const auto start = static_cast<Eigen::Index>(b) * kReductionBlock;
    const Eigen::Index len = std::min<Eigen::Index>(kReductionBlock, draws.rows() - start);
    RandomStream rng = RandomStream::derive(seed, kDrawStream, b);
    draws.middleRows(start, len) = simulate_observations(params, static_cast<std::size_t>(len), rng);
  });
  return draws;
}

void check_problem(const ResidualProblem& problem, const FactorModel& model) {
  if (!problem.battery || !problem.transformation) throw ConfigurationError("residual problem is incomplete");
  if (problem.battery->size() == 0) throw ConfigurationError("battery must have at least one component");
  if (problem.transformation->input_size() != problem.battery->size()) {
    throw DimensionError("transformation expects " + std::to_string(problem.transformation->input_size()) +
                         " inputs, battery has " + std::to_string(problem.battery->size()));
  }
  const auto k_out = static_cast<Eigen::Index>(problem.transformation->output_size());
  if (problem.coordinates.rows() != k_out) throw DimensionError("one coordinate row is needed per residual");
  if (problem.coordinates.cols() != static_cast<Eigen::Index>(model.d())) {
    throw DimensionError("coordinate dimension does not match the number of latent variables");
  }
  for (std::size_t r : problem.summary_subset) {
    if (r >= problem.transformation->output_size()) throw IndexError("summary subset index out of range");
  }
}

}  // namespace

Vector IdentityTransformation::apply(const Vector& g) const {
  if (static_cast<std::size_t>(g.size()) != k_) throw DimensionError("identity transformation input size");
  return g;
}

Matrix IdentityTransformation::jacobian(const Vector& g) const {
  if (static_cast<std::size_t>(g.size()) != k_) throw DimensionError("identity transformation input size");
  return Matrix::Identity(g.size(), g.size());
}

Vector RatioTransformation::apply(const Vector& g) const {
  if (static_cast<std::size_t>(g.size()) != 2 * q_) throw DimensionError("ratio transformation input size");
  const auto q = static_cast<Eigen::Index>(q_);
  return g.head(q).cwiseQuotient(g.tail(q));
}

Matrix RatioTransformation::jacobian(const Vector& g) const {
  if (static_cast<std::size_t>(g.size()) != 2 * q_) throw DimensionError("ratio transformation input size");
  const auto q = static_cast<Eigen::Index>(q_);
  Matrix jac = Matrix::Zero(q, 2 * q);
  for (Eigen::Index l = 0; l < q; ++l) {
    const double den = g(q + l);
    jac(l, l) = 1.0 / den;
    jac(l, q + l) = -g(l) / (den * den);
  }
  return jac;
}

bool RatioTransformation::unstable_component(const Vector& g_hat, std::size_t n, std::size_t r) const {
  const double den = g_hat(static_cast<Eigen::Index>(q_ + r));
  return !(den * static_cast<double>(n) >= kMinDenominatorSum);
}

Matrix battery_matrix(const SummaryBattery& battery, const FactorModel& model, const Matrix& observations,
                      std::size_t workers) {
  if (observations.cols() != static_cast<Eigen::Index>(model.m())) throw DimensionError("observation width");
  Matrix out(observations.rows(), static_cast<Eigen::Index>(battery.size()));
  const auto rows = static_cast<std::size_t>(observations.rows());
  const std::size_t blocks = (rows + kReductionBlock - 1) / kReductionBlock;
  parallel_for(blocks, workers, [&](std::size_t b) {
    const auto start = static_cast<Eigen::Index>(b) * kReductionBlock;
    const Eigen::Index end = std::min<Eigen::Index>(start + kReductionBlock, observations.rows());
    Vector h(out.cols());
    for (Eigen::Index i = start; i < end; ++i) {
      battery.evaluate(observations.row(i).transpose(), model, h);
      out.row(i) = h.transpose();
    }
  });
  return out;
}

Vector eta_hat(const SummaryBattery& battery, const DataMatrix& data, const FactorModel& model, std::size_t workers) {
  if (data.n() == 0) throw DataError("no observations");
  const Matrix h = battery_matrix(battery, model, data.values, workers);
  return blocked_column_sum(h) / static_cast<double>(data.n());
}

Vector eta(const SummaryBattery& battery, const FactorModel& model, std::optional<McBudget> fallback) {
  if (auto closed = battery.closed_form_eta(model)) return *closed;
  if (!fallback || fallback->draws == 0) {
    throw ConfigurationError("battery '" + battery.name() + "' has no closed-form expectation and no Monte Carlo budget");
  }
  const Matrix draws = shared_draws(model.params(), fallback->draws, fallback->seed, 1);
  return blocked_column_sum(battery_matrix(battery, model, draws)) / static_cast<double>(fallback->draws);
}

Matrix estimate_A(const Matrix& h_draws, const Matrix& score_draws) {
  if (h_draws.rows() < 1) throw ConfigurationError("A needs at least one draw");
  if (h_draws.cols() < 1) throw ConfigurationError("battery must have at least one component");
  return blocked_cross_product(h_draws, score_draws) / static_cast<double>(h_draws.rows());
}

Matrix estimate_sigma_H(const Matrix& h_draws) {
  if (h_draws.rows() < 2) throw ConfigurationError("Sigma_H needs at least two draws");
  if (h_draws.cols() < 1) throw ConfigurationError("battery must have at least one component");
  const auto M = static_cast<double>(h_draws.rows());
  const Vector mean = blocked_column_sum(h_draws) / M;
  const Matrix centered = h_draws.rowwise() - mean.transpose();
  Matrix cov = blocked_cross_product(centered, centered) / (M - 1.0);
  return 0.5 * (cov + cov.transpose());
}

Matrix estimate_A(const SummaryBattery& battery, const ParamLayout& layout, const FactorModel& model,
                  const Matrix& draws) {
  return estimate_A(battery_matrix(battery, model, draws), score_matrix(layout, model, draws));
}

Matrix estimate_sigma_H(const SummaryBattery& battery, const FactorModel& model, const Matrix& draws) {
  return estimate_sigma_H(battery_matrix(battery, model, draws));
}

AcmEstimate assemble_acm(const Matrix& jac, const Matrix& A, const Matrix& inv_info, const Matrix& sigma_H) {
  if (jac.cols() != A.rows() || A.cols() != inv_info.rows() || inv_info.rows() != inv_info.cols() ||
      sigma_H.rows() != A.rows() || sigma_H.cols() != A.rows()) {
    throw DimensionError("ACM component shapes do not agree");
  }
  AcmEstimate out;
  out.A_hat = A;
  out.inv_info = inv_info;
  out.sigma_H_hat = sigma_H;
  const Matrix inner = sigma_H - A * inv_info * A.transpose();
  const Matrix raw = jac * inner * jac.transpose();
  out.diagnostics.symmetrization_delta = raw.size() ? (raw - raw.transpose()).cwiseAbs().maxCoeff() : 0.0;
  out.sigma_phi_hat = 0.5 * (raw + raw.transpose());
  if (out.sigma_phi_hat.size()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(out.sigma_phi_hat, Eigen::EigenvaluesOnly);
    out.diagnostics.min_eigenvalue = eig.eigenvalues()(0);
    out.diagnostics.max_eigenvalue = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  }
  out.diagnostics.unstable.resize(static_cast<std::size_t>(out.sigma_phi_hat.rows()));
  for (Eigen::Index r = 0; r < out.sigma_phi_hat.rows(); ++r) {
    out.diagnostics.unstable[static_cast<std::size_t>(r)] = !(out.sigma_phi_hat(r, r) > kUnstableVariance);
  }
  return out;
}

std::optional<ZTest> z_statistic(double residual, double se, std::size_t n) {
  if (!(se > 0.0) || n == 0) return std::nullopt;
  ZTest out;
  out.z = residual / (se / std::sqrt(static_cast<double>(n)));
  out.p = normal_two_sided_p(out.z);
  return out;
}

std::size_t numerical_rank(const Matrix& sigma) {
  if (sigma.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  const Vector& w = eig.eigenvalues();
  const double largest = w(w.size() - 1);
  if (!(largest > 0.0)) return 0;
  return static_cast<std::size_t>((w.array() > kEigenTolerance * largest).count());
}

Matrix truncated_inverse(const Matrix& sigma, std::size_t s) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("truncated inverse needs a square matrix");
  if (s == 0) throw RankError("s must be at least 1");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  const Vector& w = eig.eigenvalues();
  const Eigen::Index k = w.size();
  const double largest = k ? w(k - 1) : 0.0;
  std::size_t positive = 0;
  if (largest > 0.0) positive = static_cast<std::size_t>((w.array() > kEigenTolerance * largest).count());
  if (s > positive) {
    throw RankError("s = " + std::to_string(s) + " exceeds the " + std::to_string(positive) +
                    " numerically positive eigenvalues");
  }
  Matrix out = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < s; ++i) {
    const Eigen::Index idx = k - 1 - static_cast<Eigen::Index>(i);
    out += eig.eigenvectors().col(idx) * eig.eigenvectors().col(idx).transpose() / w(idx);
  }
  return out;
}

Chi2Test chi2_statistic(const Vector& e, const Matrix& sigma, std::size_t n, std::size_t s) {
  if (e.size() != sigma.rows()) throw DimensionError("residual and ACM sizes differ");
  const Matrix w = truncated_inverse(sigma, s);
  Chi2Test out;
  out.s = s;
  out.T = static_cast<double>(n) * e.dot(w * e);
  out.p = chi2_survival(out.T, static_cast<double>(s));
  return out;
}

std::vector<TestReport> run_residual_tests(std::span<const ResidualProblem> problems, const FitResult& fit,
                                           const DataMatrix& data, const McConfig& mc) {
  if (!fit.converged) throw ConvergenceError("residual tests need a converged fit");
  if (mc.draws < 2) throw ConfigurationError("Monte Carlo size M must be at least 2");
  if (data.m() != fit.spec.m) throw DimensionError("data width does not match the fitted model");
  if (data.n() != fit.n) throw DataError("data row count differs from the fitted sample size");
  const FactorModel model(fit.params);
  for (const auto& problem : problems) check_problem(problem, model);

  const ParamLayout layout(fit.spec);
  const Matrix draws = shared_draws(fit.params, mc.draws, mc.seed, mc.workers);
  const Matrix scores = score_matrix(layout, model, draws, mc.workers);
  Matrix info = blocked_cross_product(scores, scores) / static_cast<double>(mc.draws);
  info = 0.5 * (info + info.transpose()).eval();
  const InformationEstimate inverse = invert_information(info);

  std::vector<TestReport> reports;
  reports.reserve(problems.size());
  for (const auto& problem : problems) {
    const SummaryBattery& battery = *problem.battery;
    const Transformation& phi = *problem.transformation;
    TestReport report;
    report.label = problem.label;
    report.n = data.n();
    report.M = mc.draws;
    report.seed = mc.seed;
    report.s = mc.s;
    report.summary_subset = problem.summary_subset;

    const Matrix h_draws = battery_matrix(battery, model, draws, mc.workers);
    const Vector g_hat = eta_hat(battery, data, model, mc.workers);
    Vector g;
    if (auto closed = battery.closed_form_eta(model)) {
      g = *closed;
    } else {
      g = blocked_column_sum(h_draws) / static_cast<double>(mc.draws);
      report.notes.push_back("model expectation estimated from the Monte Carlo draws");
    }
    const Vector e_hat = phi.apply(g_hat);
    const Vector e_model = phi.apply(g);
    const Vector e = e_hat - e_model;

    report.acm = assemble_acm(phi.jacobian(g), estimate_A(h_draws, scores), inverse.inverse, estimate_sigma_H(h_draws));
    report.acm.M = mc.draws;
    const Matrix& sigma = report.acm.sigma_phi_hat;

    const auto k_out = phi.output_size();
    std::vector<bool> unstable(k_out);
    report.points.resize(k_out);
    for (std::size_t r = 0; r < k_out; ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      ReportPoint& pt = report.points[r];
      pt.coordinates = problem.coordinates.row(ri).transpose();
      pt.eta_hat = e_hat(ri);
      pt.eta = e_model(ri);
      pt.residual = e(ri);
      const double var = sigma(ri, ri);
      pt.se = var > 0.0 ? std::sqrt(var) : 0.0;
      unstable[r] = report.acm.diagnostics.unstable[r] || phi.unstable_component(g_hat, data.n(), r) ||
                    !std::isfinite(pt.residual);
      pt.unstable = unstable[r];
      if (!pt.unstable) {
        if (auto zt = z_statistic(pt.residual, pt.se, data.n())) {
          pt.z = zt->z;
          pt.p = zt->p;
        } else {
          pt.unstable = unstable[r] = true;
        }
      }
      if (pt.unstable) {
        pt.z = std::nan("");
        pt.p = std::nan("");
      }
    }

    std::vector<std::size_t> used;
    for (std::size_t r : problem.summary_subset) {
      if (!unstable[r]) used.push_back(r);
    }
    const std::size_t dropped = problem.summary_subset.size() - used.size();
    if (dropped > 0) {
      report.notes.push_back(std::to_string(dropped) + " unstable summary point(s) excluded from T");
    }
    if (!used.empty()) {
      const auto u = static_cast<Eigen::Index>(used.size());
      Vector e_sub(u);
      Matrix sigma_sub(u, u);
      for (Eigen::Index a = 0; a < u; ++a) {
        e_sub(a) = e(static_cast<Eigen::Index>(used[a]));
        for (Eigen::Index b = 0; b < u; ++b) {
          sigma_sub(a, b) = sigma(static_cast<Eigen::Index>(used[a]), static_cast<Eigen::Index>(used[b]));
        }
      }
      const Chi2Test t = chi2_statistic(e_sub, sigma_sub, data.n(), mc.s);
      report.summary = SummaryResult{t.T, t.s, t.p, used.size()};
    } else if (!problem.summary_subset.empty()) {
      report.notes.push_back("no stable summary points; T not computed");
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

TestReport run_residual_test(const ResidualProblem& problem, const FitResult& fit, const DataMatrix& data,
                             const McConfig& mc) {
  return std::move(run_residual_tests(std::span<const ResidualProblem>(&problem, 1), fit, data, mc).front());
}

}  // namespace gresfa
