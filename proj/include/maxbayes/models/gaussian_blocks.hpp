#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "maxbayes/errors.hpp"
#include "maxbayes/partition.hpp"

namespace maxbayes::models::detail {

inline std::vector<int> indices_of(Block b) { return elements(b); }

inline Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m, const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError(std::string(who) + ": matrix not positive definite");
  const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 1e-10 * std::max(1.0, diag.maxCoeff())))
    throw NotPositiveDefiniteError(std::string(who) + ": matrix numerically singular");
  return llt;
}

inline double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline void check_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1) throw DomainError(std::string(who) + ": matrix must be square");
  if (m.rows() > kMaxElements) throw DomainError(std::string(who) + ": dimension out of range");
  if (!m.allFinite()) throw DomainError(std::string(who) + ": non-finite matrix entry");
  if (!m.isApprox(m.transpose(), 1e-12) && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError(std::string(who) + ": matrix not symmetric");
}

}  // namespace maxbayes::models::detail
