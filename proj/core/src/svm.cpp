// Copyright 2026 The lungcadx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lungcadx/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "lungcadx/errors.hpp"

namespace lungcadx {
namespace {

// Sequential minimal optimization over a precomputed kernel. Second index is
// drawn at random; if that pair cannot move, every other index is tried in
// turn from a random starting offset.
class SmoSolver {
 public:
  SmoSolver(const Matrix& kernel, std::span<const int> y, const SvmParams& params)
      : k_(kernel),
        y_(y),
        n_(y.size()),
        c_(params.c),
        params_(params),
        alpha_(n_, 0.0),
        error_(n_),
        rng_(params.seed) {
    for (std::size_t i = 0; i < n_; ++i) {
      error_[i] = -static_cast<double>(y_[i]);
    }
  }

  void solve() {
    int quiet_sweeps = 0;
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 2);
    while (quiet_sweeps < params_.max_passes) {
      std::int64_t changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!violates_kkt(i)) {
          continue;
        }
        std::size_t j = pick(rng_);
        if (j >= i) {
          ++j;
        }
        if (take_step(i, j)) {
          ++changed;
          continue;
        }
        const std::size_t start = pick(rng_);
        for (std::size_t t = 0; t < n_; ++t) {
          const std::size_t jj = (start + t) % n_;
          if (jj != i && jj != j && take_step(i, jj)) {
            ++changed;
            break;
          }
        }
      }
      ++sweeps_;
      quiet_sweeps = changed == 0 ? quiet_sweeps + 1 : 0;
    }
    finalize_bias();
  }

  const std::vector<double>& alphas() const noexcept { return alpha_; }
  double bias() const noexcept { return b_; }
  std::int64_t updates() const noexcept { return updates_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  // Checked at tol/2 so the bias re-estimate in finalize_bias, which moves b
  // by at most tol/2, leaves every multiplier within tol.
  bool violates_kkt(std::size_t i) const {
    const double r = y_[i] * error_[i];
    const double t = 0.5 * params_.tol;
    return (r < -t && alpha_[i] < c_) || (r > t && alpha_[i] > 0.0);
  }

  bool take_step(std::size_t i, std::size_t j) {
    const double ai = alpha_[i];
    const double aj = alpha_[j];
    const int yi = y_[i];
    const int yj = y_[j];
    double lo;
    double hi;
    if (yi != yj) {
      lo = std::max(0.0, aj - ai);
      hi = std::min(c_, c_ + aj - ai);
    } else {
      lo = std::max(0.0, ai + aj - c_);
      hi = std::min(c_, ai + aj);
    }
    if (!(hi > lo)) {
      return false;
    }
    const double kii = k_(i, i);
    const double kjj = k_(j, j);
    const double kij = k_(i, j);
    const double eta = 2.0 * kij - kii - kjj;
    if (!(eta < -1e-12)) {
      return false;
    }
    const double ei = error_[i];
    const double ej = error_[j];
    double aj_new = std::clamp(aj - yj * (ei - ej) / eta, lo, hi);
    if (std::abs(aj_new - aj) < 1e-12 * std::max(1.0, c_)) {
      return false;
    }
    double ai_new = std::clamp(ai + yi * yj * (aj - aj_new), 0.0, c_);
    ai_new = snap(ai_new);
    aj_new = snap(aj_new);

    const double dai = ai_new - ai;
    const double daj = aj_new - aj;
    const double b1 = b_ - ei - yi * dai * kii - yj * daj * kij;
    const double b2 = b_ - ej - yi * dai * kij - yj * daj * kjj;
    double b_new;
    if (ai_new > 0.0 && ai_new < c_) {
      b_new = b1;
    } else if (aj_new > 0.0 && aj_new < c_) {
      b_new = b2;
    } else {
      b_new = 0.5 * (b1 + b2);
    }
    const double db = b_new - b_;
    for (std::size_t t = 0; t < n_; ++t) {
      error_[t] += yi * dai * k_(i, t) + yj * daj * k_(j, t) + db;
    }
    alpha_[i] = ai_new;
    alpha_[j] = aj_new;
    b_ = b_new;

    if (++updates_ > params_.max_updates) {
      std::ostringstream msg;
      msg << "SMO exceeded " << params_.max_updates << " pair updates (n=" << n_ << ", C=" << c_
          << ", gamma=" << params_.gamma_rbf << ", sweeps=" << sweeps_ << ")";
      throw ConvergenceError(msg.str());
    }
    return true;
  }

  // Rounding residue next to a bound would otherwise count as a free vector.
  double snap(double a) const {
    const double eps = 1e-12 * std::max(1.0, c_);
    if (a < eps) {
      return 0.0;
    }
    if (a > c_ - eps) {
      return c_;
    }
    return a;
  }

  // Bias from the free support vectors, or the midpoint of the feasible
  // interval when every alpha sits at a bound.
  void finalize_bias() {
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double f_no_bias = error_[i] + y_[i] - b_;
      const double target = y_[i] - f_no_bias;
      if (alpha_[i] > 0.0 && alpha_[i] < c_) {
        free_sum += target;
        ++free_count;
      } else {
        // alpha = 0 needs y f >= 1; alpha = C needs y f <= 1.
        const bool at_zero = alpha_[i] <= 0.0;
        if ((y_[i] > 0) == at_zero) {
          lower = std::max(lower, target);
        } else {
          upper = std::min(upper, target);
        }
      }
    }
    double b_new = b_;
    if (free_count > 0) {
      b_new = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
      b_new = 0.5 * (lower + upper);
    } else if (std::isfinite(lower)) {
      b_new = lower;
    } else if (std::isfinite(upper)) {
      b_new = upper;
    }
    for (auto& e : error_) {
      e += b_new - b_;
    }
    b_ = b_new;
  }

  const Matrix& k_;
  std::span<const int> y_;
  std::size_t n_;
  double c_;
  const SvmParams& params_;
  std::vector<double> alpha_;
  std::vector<double> error_;  // f(x_i) - y_i
  double b_ = 0.0;
  std::mt19937_64 rng_;
  std::int64_t updates_ = 0;
  int sweeps_ = 0;
};

// Negative log-likelihood term for one point in the numerically stable form.
double platt_term(double target, double f_apb) {
  return f_apb >= 0.0 ? target * f_apb + std::log1p(std::exp(-f_apb))
                      : (target - 1.0) * f_apb + std::log1p(std::exp(f_apb));
}

}  // namespace

void SvmParams::validate() const {
  if (!std::isfinite(c) || c <= 0.0 || !std::isfinite(gamma_rbf) || gamma_rbf <= 0.0) {
    throw ContractViolation("SVM requires finite C > 0 and gamma > 0");
  }
  if (!(tol > 0.0) || max_passes < 1 || max_updates < 1) {
    throw ContractViolation("SVM requires tol > 0, max_passes >= 1 and max_updates >= 1");
  }
}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma_rbf) {
  if (x.size() != z.size()) {
    throw ContractViolation("rbf_kernel length mismatch");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    sq += d * d;
  }
  return std::exp(-gamma_rbf * sq);
}

Matrix rbf_kernel_matrix(const Matrix& x, double gamma_rbf) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = rbf_kernel(x.row(i), x.row(j), gamma_rbf);
    }
  }
  return k;
}

double PlattScaling::operator()(double decision) const {
  const double f_apb = a * decision + b;
  if (f_apb >= 0.0) {
    const double e = std::exp(-f_apb);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(f_apb));
}

PlattScaling fit_platt(std::span<const double> decision_values,
                       std::span<const int> signed_labels) {
  const std::size_t n = decision_values.size();
  double prior1 = 0.0;
  double prior0 = 0.0;
  for (const int y : signed_labels) {
    (y > 0 ? prior1 : prior0) += 1.0;
  }
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = signed_labels[i] > 0 ? hi_target : lo_target;
  }

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f += platt_term(t[i], decision_values[i] * aa + bb);
    }
    return f;
  };
  double fval = objective(a, b);

  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma;
    double h22 = kSigma;
    double h21 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f_apb = decision_values[i] * a + b;
      double p;
      double q;
      if (f_apb >= 0.0) {
        const double e = std::exp(-f_apb);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(f_apb);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += decision_values[i] * decision_values[i] * d2;
      h22 += d2;
      h21 += decision_values[i] * d2;
      const double d1 = t[i] - p;
      g1 += decision_values[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) {
      break;
    }
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double new_a = a + step * da;
      const double new_b = b + step * db;
      const double new_f = objective(new_a, new_b);
      if (new_f < fval + 1e-4 * step * gd) {
        a = new_a;
        b = new_b;
        fval = new_f;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) {
      break;
    }
  }
  return {a, b};
}

SvmModel::SvmModel(SvmParams params, Matrix support_vectors, std::vector<double> alphas,
                   std::vector<int> signed_labels, double bias, PlattScaling platt)
    : params_(params),
      support_vectors_(std::move(support_vectors)),
      alphas_(std::move(alphas)),
      signed_labels_(std::move(signed_labels)),
      bias_(bias),
      platt_(platt) {}

double SvmModel::decision_value(std::span<const double> x) const {
  if (x.size() != width()) {
    throw ContractViolation("feature width " + std::to_string(x.size()) +
                            " does not match model width " + std::to_string(width()));
  }
  double f = bias_;
  for (std::size_t i = 0; i < alphas_.size(); ++i) {
    f += alphas_[i] * signed_labels_[i] * rbf_kernel(support_vectors_.row(i), x, params_.gamma_rbf);
  }
  return f;
}

double SvmModel::predict_proba(std::span<const double> x) const {
  return platt_(decision_value(x));
}

SvmModel train_svm(const Matrix& x, std::span<const int> labels, const SvmParams& params,
                   SvmTrainingInfo* info) {
  params.validate();
  const std::size_t n = x.rows();
  if (labels.size() != n) {
    throw ContractViolation("label count does not match feature rows");
  }
  std::vector<int> y(n);
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == 1 ? 1 : -1;
    (y[i] > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw ContractViolation("train_svm needs both classes");
  }

  const Matrix kernel = rbf_kernel_matrix(x, params.gamma_rbf);
  SmoSolver solver(kernel, y, params);
  solver.solve();
  const auto& alpha = solver.alphas();

  std::vector<double> decision(n, solver.bias());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      decision[i] += alpha[j] * y[j] * kernel(j, i);
    }
  }
  const PlattScaling platt = fit_platt(decision, y);

  Matrix sv;
  std::vector<double> sv_alpha;
  std::vector<int> sv_y;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > 0.0) {
      sv.push_row(x.row(i));
      sv_alpha.push_back(alpha[i]);
      sv_y.push_back(y[i]);
    }
  }
  if (sv.rows() == 0) {
    sv = Matrix(0, x.cols());
  }
  if (info != nullptr) {
    info->alphas = alpha;
    info->bias = solver.bias();
    info->updates = solver.updates();
    info->sweeps = solver.sweeps();
  }
  return SvmModel(params, std::move(sv), std::move(sv_alpha), std::move(sv_y), solver.bias(),
                  platt);
}

SvmModel train_svm(const LabeledDataset& data, const SvmParams& params, SvmTrainingInfo* info) {
  return train_svm(data.features, data.labels, params, info);
}

double predict_proba_svm(const SvmModel& model, std::span<const double> x) {
  return model.predict_proba(x);
}

double svm_dual_objective(std::span<const double> alphas, std::span<const int> signed_labels,
                          const Matrix& kernel) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    linear += alphas[i];
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      quad += alphas[i] * alphas[j] * signed_labels[i] * signed_labels[j] * kernel(i, j);
    }
  }
  return linear - 0.5 * quad;
}

}  // namespace lungcadx
