#pragma once

// Restarted Lanczos for the lowest eigenpair of a symmetric operator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "multispin/errors.hpp"

namespace multispin {

struct LanczosConfig {
  double tol = 1e-10;  // residual |Hx - e x| relative to max(1, |e|)
  int krylov_dim = 32;
  int max_restarts = 50;
};

struct LanczosResult {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  int matvecs = 0;
  bool converged = false;
};

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Full reorthogonalization; each restart continues from the current Ritz vector.
inline LanczosResult lanczos_lowest(const MatVec& apply, Eigen::VectorXd x0, const LanczosConfig& cfg = {}) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw invalid_argument("empty Lanczos start vector");
  LanczosResult out;
  double nrm = x0.norm();
  if (!(nrm > 0.0)) {
    x0 = Eigen::VectorXd::Ones(n);
    nrm = x0.norm();
  }
  x0 /= nrm;
  Eigen::VectorXd w(n);
  if (n == 1) {
    apply(x0, w);
    out.value = w(0) / x0(0);
    out.vector = x0;
    out.matvecs = 1;
    out.converged = true;
    return out;
  }
  const int m_max = static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, n));
  Eigen::MatrixXd V(n, m_max);
  for (int restart = 0; restart <= cfg.max_restarts; ++restart) {
    std::vector<double> alpha, beta;
    V.col(0) = x0;
    Eigen::VectorXd ritz;
    bool exhausted = false;
    int m = 0;
    while (true) {
      apply(V.col(m), w);
      ++out.matvecs;
      alpha.push_back(V.col(m).dot(w));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
      const double b = w.norm();
      ++m;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      out.value = es.eigenvalues()(0);
      ritz = es.eigenvectors().col(0);
      // |H x - theta x| = beta_m |last component of the Ritz vector|.
      out.residual = b * std::abs(ritz(m - 1));
      exhausted = b < 1e-14 * std::max(1.0, std::abs(out.value));
      if (exhausted || m == m_max || out.residual <= cfg.tol * std::max(1.0, std::abs(out.value))) break;
      beta.push_back(b);
      V.col(m) = w / b;
    }
    x0 = V.leftCols(m) * ritz;
    x0.normalize();
    out.vector = x0;
    if (exhausted || out.residual <= cfg.tol * std::max(1.0, std::abs(out.value))) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace multispin
