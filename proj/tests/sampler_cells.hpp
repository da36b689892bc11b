#pragma once

#include <string>
#include <vector>

#include "maxbayes/models/model.hpp"
#include "maxbayes/models/spatial.hpp"

namespace cells {

struct Cell {
  std::string name;
  maxbayes::models::ModelSpec spec;
};

inline Eigen::MatrixXd line_sites(int k) {
  Eigen::MatrixXd s(k, 2);
  for (int i = 0; i < k; ++i) {
    s(i, 0) = 0.5 * i;
    s(i, 1) = 0.25 * (i % 2);
  }
  return s;
}

/// Every family and parameter cell that the experiments and acceptance runs draw from.
inline std::vector<Cell> sampler_cells() {
  using namespace maxbayes::models;
  std::vector<Cell> out;
  for (int k : {3, 6, 10})
    for (double th : {0.4, 0.5, 0.7, 0.9}) out.push_back({"logistic k=" + std::to_string(k) + " theta=" + std::to_string(th), ModelSpec(Logistic(k, th))});
  out.push_back({"dirichlet (1,1)", ModelSpec(Dirichlet({1.0, 1.0}))});
  out.push_back({"dirichlet (0.5,1,2)", ModelSpec(Dirichlet({0.5, 1.0, 2.0}))});
  Eigen::MatrixXd l2 = Eigen::MatrixXd::Zero(2, 2);
  l2(0, 1) = l2(1, 0) = 1.0;
  out.push_back({"husler-reiss lambda2=1", ModelSpec(HuslerReiss(l2))});
  out.push_back({"brown-resnick k=4", ModelSpec(HuslerReiss(brown_resnick_lambda_sq(line_sites(4), 1.0, 1.0)))});
  Eigen::MatrixXd c3 = Eigen::MatrixXd::Constant(3, 3, 0.3) + 0.7 * Eigen::MatrixXd::Identity(3, 3);
  out.push_back({"extremal-t k=3 nu=2 rho=0.3", ModelSpec(ExtremalT(c3, 2.0))});
  out.push_back({"extremal-t spatial k=4 nu=3", ModelSpec(ExtremalT(powered_exponential_correlation(line_sites(4), 1.0, 1.0), 3.0))});
  return out;
}

}  // namespace cells
