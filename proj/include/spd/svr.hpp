#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "spd/errors.hpp"

namespace spd {

enum class KernelType { Poly, Rbf, Sigmoid };

std::string to_string(KernelType k);
KernelType kernel_from_string(const std::string& s);

struct SvrHyper {
  KernelType kernel = KernelType::Rbf;
  double C = 300;
  double gamma = 0.01;
  double epsilon = 0.1;
  int degree = 3;
  double coef0 = 0;

  friend bool operator==(const SvrHyper&, const SvrHyper&) = default;
};

struct SmoOptions {
  double tolerance = 1e-3;
  std::int64_t max_iterations = 100000;
};

struct SmoStats {
  std::int64_t iterations = 0;
  bool converged = false;
};

// K(X_r, x) for every row r of X.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> kernel_column(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& row_sq_norms,
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& x, const SvrHyper& h) {
  const auto gamma = static_cast<Scalar>(h.gamma);
  const auto coef0 = static_cast<Scalar>(h.coef0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dot = X * x.transpose();
  switch (h.kernel) {
    case KernelType::Rbf: {
      const Scalar xx = x.squaredNorm();
      return (-gamma * ((row_sq_norms.array() + xx) - Scalar(2) * dot.array()).max(Scalar(0)))
          .exp()
          .matrix();
    }
    case KernelType::Poly:
      return (gamma * dot.array() + coef0).pow(static_cast<Scalar>(h.degree)).matrix();
    case KernelType::Sigmoid:
      return (gamma * dot.array() + coef0).tanh().matrix();
  }
  return dot;
}

// f(x) = sum_i coef_i K(sv_i, x) + bias.
template <typename Scalar>
struct KernelExpansion {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  SvrHyper hyper;
  Matrix support;
  Vector coef;
  Scalar bias = 0;

  Vector predict(const Matrix& X) const {
    Vector out = Vector::Constant(X.rows(), bias);
    if (support.rows() == 0) return out;
    const Vector sv_norms = support.rowwise().squaredNorm();
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> x = X.row(r);
      out(r) += coef.dot(kernel_column<Scalar>(support, sv_norms, x, hyper));
    }
    return out;
  }
};

// epsilon-insensitive support vector regression, trained on the dual with
// second-order working-set selection (no shrinking). The 2l dual variables
// are (alpha, alpha*); coefficients of the expansion are alpha - alpha*.
template <typename Scalar>
KernelExpansion<Scalar> fit_epsilon_svr(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X,
                                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y,
                                        const SvrHyper& hyper, const SmoOptions& opt = {},
                                        SmoStats* stats = nullptr) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Row = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  constexpr Scalar kTau = Scalar(1e-12);
  const Eigen::Index l = X.rows();
  if (l < 2) throw ConfigError("support vector regression needs at least two samples");
  if (y.size() != l) throw ConfigError("target length differs from sample count");
  if (!(hyper.C > 0) || !(hyper.gamma > 0) || !(hyper.epsilon >= 0)) {
    throw ConfigError("SVR hyperparameters must be positive");
  }
  const Eigen::Index n = 2 * l;
  const auto C = static_cast<Scalar>(hyper.C);
  const auto eps = static_cast<Scalar>(hyper.epsilon);

  const Vector sq_norms = X.rowwise().squaredNorm();
  Vector kdiag(l);
  const auto gamma = static_cast<Scalar>(hyper.gamma);
  const auto coef0 = static_cast<Scalar>(hyper.coef0);
  for (Eigen::Index r = 0; r < l; ++r) {
    switch (hyper.kernel) {
      case KernelType::Rbf:
        kdiag(r) = 1;
        break;
      case KernelType::Poly:
        kdiag(r) = std::pow(gamma * sq_norms(r) + coef0, static_cast<Scalar>(hyper.degree));
        break;
      case KernelType::Sigmoid:
        kdiag(r) = std::tanh(gamma * sq_norms(r) + coef0);
        break;
    }
  }
  const auto sign = [l](Eigen::Index t) { return t < l ? Scalar(1) : Scalar(-1); };
  const auto base = [l](Eigen::Index t) { return t < l ? t : t - l; };

  Vector alpha = Vector::Zero(n);
  Vector grad(n);
  grad.head(l) = eps - y.array();
  grad.tail(l) = eps + y.array();
  const auto at_upper = [&](Eigen::Index t) { return alpha(t) >= C; };
  const auto at_lower = [&](Eigen::Index t) { return alpha(t) <= 0; };

  // Row t of Q has entries y_t y_s K(base t, base s).
  const auto q_row = [&](Eigen::Index t) {
    const Row x = X.row(base(t));
    const Vector k = kernel_column<Scalar>(X, sq_norms, x, hyper);
    Vector q(n);
    q.head(l) = sign(t) * k;
    q.tail(l) = -sign(t) * k;
    return q;
  };

  SmoStats local;
  std::int64_t iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    Scalar gmax = -std::numeric_limits<Scalar>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (sign(t) > 0) {
        if (!at_upper(t) && -grad(t) >= gmax) {
          gmax = -grad(t);
          i = t;
        }
      } else if (!at_lower(t) && grad(t) >= gmax) {
        gmax = grad(t);
        i = t;
      }
    }
    if (i < 0) {
      local.converged = true;
      break;
    }
    const Vector qi = q_row(i);
    const Scalar qd_i = kdiag(base(i));
    Scalar gmax2 = -std::numeric_limits<Scalar>::infinity();
    Eigen::Index j = -1;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const Scalar qd_t = kdiag(base(t));
      if (sign(t) > 0) {
        if (at_lower(t)) continue;
        const Scalar diff = gmax + grad(t);
        gmax2 = std::max(gmax2, grad(t));
        if (diff > 0) {
          Scalar quad = qd_i + qd_t - Scalar(2) * sign(i) * qi(t);
          if (quad <= 0) quad = kTau;
          const Scalar obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            j = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const Scalar diff = gmax - grad(t);
        gmax2 = std::max(gmax2, -grad(t));
        if (diff > 0) {
          Scalar quad = qd_i + qd_t + Scalar(2) * sign(i) * qi(t);
          if (quad <= 0) quad = kTau;
          const Scalar obj = -(diff * diff) / quad;
          if (obj <= best) {
            best = obj;
            j = t;
          }
        }
      }
    }
    if (gmax + gmax2 < static_cast<Scalar>(opt.tolerance) || j < 0) {
      local.converged = true;
      break;
    }

    const Vector qj = q_row(j);
    const Scalar qd_j = kdiag(base(j));
    const Scalar old_i = alpha(i);
    const Scalar old_j = alpha(j);
    Scalar& ai = alpha(i);
    Scalar& aj = alpha(j);
    if (sign(i) != sign(j)) {
      Scalar quad = qd_i + qd_j + Scalar(2) * qi(j);
      if (quad <= 0) quad = kTau;
      const Scalar delta = (-grad(i) - grad(j)) / quad;
      const Scalar diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C) {
          ai = C;
          aj = C - diff;
        }
      } else if (aj > C) {
        aj = C;
        ai = C + diff;
      }
    } else {
      Scalar quad = qd_i + qd_j - Scalar(2) * qi(j);
      if (quad <= 0) quad = kTau;
      const Scalar delta = (grad(i) - grad(j)) / quad;
      const Scalar sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C) {
        if (ai > C) {
          ai = C;
          aj = sum - C;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C) {
        if (aj > C) {
          aj = C;
          ai = sum - C;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    grad += qi * (ai - old_i) + qj * (aj - old_j);
  }
  local.iterations = iter;

  // Bias from the free variables, or the midpoint of the feasible interval.
  Scalar ub = std::numeric_limits<Scalar>::infinity();
  Scalar lb = -std::numeric_limits<Scalar>::infinity();
  Scalar sum_free = 0;
  Eigen::Index n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Scalar yg = sign(t) * grad(t);
    if (at_upper(t)) {
      if (sign(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (sign(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const Scalar rho = n_free > 0 ? sum_free / static_cast<Scalar>(n_free) : (ub + lb) / 2;

  KernelExpansion<Scalar> model;
  model.hyper = hyper;
  model.bias = -rho;
  Eigen::Index n_sv = 0;
  for (Eigen::Index r = 0; r < l; ++r) {
    if (alpha(r) - alpha(r + l) != 0) ++n_sv;
  }
  model.support.resize(n_sv, X.cols());
  model.coef.resize(n_sv);
  for (Eigen::Index r = 0, k = 0; r < l; ++r) {
    const Scalar c = alpha(r) - alpha(r + l);
    if (c == 0) continue;
    model.support.row(k) = X.row(r);
    model.coef(k) = c;
    ++k;
  }
  if (stats) *stats = local;
  return model;
}

// Coefficient of determination; 1 - SS_res / SS_tot.
template <typename Derived1, typename Derived2>
double r2_score(const Eigen::MatrixBase<Derived1>& truth, const Eigen::MatrixBase<Derived2>& pred) {
  const double mean = truth.mean();
  const double ss_tot = (truth.array() - mean).square().sum();
  const double ss_res = (truth - pred).squaredNorm();
  if (ss_tot == 0) return ss_res == 0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace spd
