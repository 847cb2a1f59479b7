#include "scoco/regime_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scoco {

void validate_transition_matrix(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() < 1) {
    throw std::invalid_argument("transition matrix must be square and non-empty");
  }
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (P(i, j) < 0.0) {
        throw std::invalid_argument("transition matrix has a negative entry");
      }
      row += P(i, j);
    }
    if (std::abs(row - 1.0) > 1e-12) {
      throw std::invalid_argument("transition matrix row does not sum to 1");
    }
  }
}

Eigen::VectorXd empirical_stationary(const std::vector<int>& regime_ids,
                                     int n_regimes) {
  if (regime_ids.empty()) throw std::invalid_argument("no observations");
  int max_id = 0;
  for (int r : regime_ids) {
    if (r < 0) throw std::invalid_argument("negative regime id");
    max_id = std::max(max_id, r);
  }
  const int S = n_regimes < 0 ? max_id + 1 : n_regimes;
  if (max_id >= S) throw std::invalid_argument("regime id out of range");
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(S);
  for (int r : regime_ids) pi[r] += 1.0;
  pi /= static_cast<double>(regime_ids.size());
  return pi;
}

Eigen::VectorXd stationary_of(const Eigen::MatrixXd& P) {
  validate_transition_matrix(P);
  const Eigen::Index S = P.rows();

  // Uniqueness: multiplicity of the eigenvalue 1.
  Eigen::EigenSolver<Eigen::MatrixXd> es(P);
  int at_one = 0;
  for (Eigen::Index i = 0; i < S; ++i) {
    if (std::abs(es.eigenvalues()[i] - std::complex<double>(1.0, 0.0)) < 1e-10) {
      ++at_one;
    }
  }
  if (at_one != 1) throw std::runtime_error("stationary distribution not unique");

  // Least squares on the stacked system [P^T - I; 1^T] pi = [0; 1].
  Eigen::MatrixXd A(S + 1, S);
  A.topRows(S) = P.transpose() - Eigen::MatrixXd::Identity(S, S);
  A.row(S).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(S + 1);
  b[S] = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);

  for (Eigen::Index i = 0; i < S; ++i) {
    if (pi[i] < -1e-9) {
      throw std::runtime_error("stationary solve produced a negative probability");
    }
    pi[i] = std::max(pi[i], 0.0);
  }
  pi /= pi.sum();
  return pi;
}

double expected_duration(const Eigen::MatrixXd& P, int i) {
  if (i < 0 || i >= P.rows()) throw std::invalid_argument("regime index out of range");
  const double pii = P(i, i);
  if (pii >= 1.0) throw std::invalid_argument("infinite expected duration");
  return 1.0 / (1.0 - pii);
}

double matrix_entropy(const Eigen::MatrixXd& P) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const double p = P(i, j);
      if (p > 0.0) h -= p * std::log(p);
    }
  }
  return h;
}

std::vector<double> default_eigenvalues(int n_regimes) {
  if (n_regimes < 1) throw std::invalid_argument("need at least one regime");
  std::vector<double> lam(static_cast<std::size_t>(n_regimes - 1));
  for (int i = 1; i < n_regimes; ++i) {
    lam[static_cast<std::size_t>(i - 1)] = 1.0 - static_cast<double>(i) * 1e-3;
  }
  return lam;
}

RegimePath simulate_regimes(const Eigen::MatrixXd& P, int initial_state,
                            int steps, RngStream& stream) {
  validate_transition_matrix(P);
  const int S = static_cast<int>(P.rows());
  if (initial_state < 0 || initial_state >= S) {
    throw std::invalid_argument("initial regime out of range");
  }
  if (steps < 1) throw std::invalid_argument("need at least one step");

  RegimePath path;
  path.states.resize(static_cast<std::size_t>(steps));
  int cur = initial_state;
  path.states[0] = cur;
  for (int t = 1; t < steps; ++t) {
    const double u = stream.uniform();
    double acc = 0.0;
    int next = S - 1;
    for (int j = 0; j < S; ++j) {
      acc += P(cur, j);
      if (u <= acc) {
        next = j;
        break;
      }
    }
    cur = next;
    path.states[static_cast<std::size_t>(t)] = cur;
  }
  return path;
}

RegimePath simulate_regimes(const Eigen::MatrixXd& P, int initial_state,
                            int steps, std::uint64_t seed) {
  RngStream stream(seed);
  return simulate_regimes(P, initial_state, steps, stream);
}

Eigen::MatrixXd two_state_matrix(const Eigen::VectorXd& pi, double lambda2) {
  if (pi.size() != 2) throw std::invalid_argument("two_state_matrix: need 2 states");
  const double p11 = 1.0 - pi[1] * (1.0 - lambda2);
  const double p22 = 1.0 - pi[0] * (1.0 - lambda2);
  if (p11 < 0.0 || p11 > 1.0 || p22 < 0.0 || p22 > 1.0) {
    throw std::runtime_error("two_state_matrix: infeasible target/eigenvalue pair");
  }
  Eigen::MatrixXd P(2, 2);
  P << p11, 1.0 - p11, 1.0 - p22, p22;
  return P;
}

}  // namespace scoco
