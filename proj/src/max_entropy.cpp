// Maximum-entropy transition-matrix estimation.
//
// minimize    sum_ij p_ij log p_ij  -  beta sum_ij log p_ij
// subject to  U V = I,  U D V = P,  P 1 = 1,  p_ij > 0
//
// with U's first column fixed to ones (right eigenvector of the unit
// eigenvalue) and V's first row fixed to the stationary target (left
// eigenvector). D carries the prescribed spectrum. Note that U V = I together
// with the fixed first column/row already forces row sums and stationarity;
// keeping the explicit P block and row-sum constraint matches the augmented
// Lagrangian formulation and keeps the barrier separable.
//
// Solved by an augmented Lagrangian with analytic gradients, an L-BFGS inner
// loop with Armijo backtracking, and multi-start. Starts are random
// perturbations of the rank-one matrix with rows equal to the target: V is the
// target row stacked on a randomly rotated basis of the sum-zero subspace,
// U = V^-1, P = U D V (clipped into the barrier domain). After convergence the
// result is polished back onto the exact manifold (project V's free rows to
// sum-zero, recompute U = V^-1 and P = U D V, renormalize rows), which makes
// row sums exact at machine precision while moving entries by no more than the
// final constraint residual.
//
// When every random start stalls (typical once a stationary weight is small
// relative to 1 - lambda and the feasible set shrinks to a thin slab), a
// deterministic rescue is tried: the reversible chain
// P = Dpi^-1/2 (sum_k d_k u_k u_k^T) Dpi^1/2 with u_1 = sqrt(pi) carries the
// exact spectrum and stationary vector for any orthonormal completion {u_k}.
// The completion is tuned to maximize entropy subject to strict positivity,
// the NLP is restarted from that member, and if it still cannot reach the
// residual tolerance the member itself is accepted: it satisfies every
// equality constraint at machine precision, and its entropy is a lower bound
// for the unrestricted optimum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scoco/regime_model.hpp"

namespace scoco {

namespace {

struct Problem {
  int S = 0;
  Eigen::VectorXd pi;      // fixed first row of V
  Eigen::VectorXd d;       // diag of D, d[0] = 1
  double beta = 1e-6;      // barrier coefficient
  double rho = 10.0;       // penalty
  Eigen::MatrixXd lam_uv;  // multipliers for U V - I
  Eigen::MatrixXd lam_p;   // multipliers for U D V - P
  Eigen::VectorXd lam_row; // multipliers for P 1 - 1
};

struct Vars {
  Eigen::MatrixXd U, V, P;
};

int n_free(int S) { return 3 * S * S - 2 * S; }

void pack(const Vars& v, Eigen::VectorXd& x) {
  const int S = static_cast<int>(v.U.rows());
  int k = 0;
  for (int i = 0; i < S; ++i)
    for (int j = 1; j < S; ++j) x[k++] = v.U(i, j);
  for (int i = 1; i < S; ++i)
    for (int j = 0; j < S; ++j) x[k++] = v.V(i, j);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) x[k++] = v.P(i, j);
}

void unpack(const Eigen::VectorXd& x, const Problem& pb, Vars& v) {
  const int S = pb.S;
  v.U.resize(S, S);
  v.V.resize(S, S);
  v.P.resize(S, S);
  v.U.col(0).setOnes();
  v.V.row(0) = pb.pi.transpose();
  int k = 0;
  for (int i = 0; i < S; ++i)
    for (int j = 1; j < S; ++j) v.U(i, j) = x[k++];
  for (int i = 1; i < S; ++i)
    for (int j = 0; j < S; ++j) v.V(i, j) = x[k++];
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) v.P(i, j) = x[k++];
}

struct EvalResult {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad;
  double violation = 0.0;
};

EvalResult evaluate(const Eigen::VectorXd& x, const Problem& pb,
                    bool want_grad) {
  const int S = pb.S;
  Vars v;
  unpack(x, pb, v);

  EvalResult out;
  if ((v.P.array() <= 0.0).any()) return out;  // outside barrier domain

  const Eigen::MatrixXd C1 = v.U * v.V - Eigen::MatrixXd::Identity(S, S);
  const Eigen::MatrixXd DV = pb.d.asDiagonal() * v.V;
  const Eigen::MatrixXd C2 = v.U * DV - v.P;
  const Eigen::VectorXd C3 = v.P.rowwise().sum() - Eigen::VectorXd::Ones(S);

  const double f = (v.P.array() * v.P.array().log()).sum() -
                   pb.beta * v.P.array().log().sum();

  double value = f;
  value += (pb.lam_uv.array() * C1.array()).sum() + 0.5 * pb.rho * C1.squaredNorm();
  value += (pb.lam_p.array() * C2.array()).sum() + 0.5 * pb.rho * C2.squaredNorm();
  value += pb.lam_row.dot(C3) + 0.5 * pb.rho * C3.squaredNorm();
  out.value = value;
  out.violation = std::max({C1.cwiseAbs().maxCoeff(), C2.cwiseAbs().maxCoeff(),
                            C3.cwiseAbs().maxCoeff()});
  if (!want_grad) return out;

  const Eigen::MatrixXd Y1 = pb.lam_uv + pb.rho * C1;
  const Eigen::MatrixXd Y2 = pb.lam_p + pb.rho * C2;
  const Eigen::VectorXd y3 = pb.lam_row + pb.rho * C3;

  Eigen::MatrixXd gU = Y1 * v.V.transpose() + Y2 * DV.transpose();
  Eigen::MatrixXd gV = v.U.transpose() * Y1 +
                       pb.d.asDiagonal() * (v.U.transpose() * Y2);
  Eigen::MatrixXd gP = (v.P.array().log() + 1.0 - pb.beta / v.P.array()).matrix();
  gP -= Y2;
  gP.colwise() += y3;

  out.grad.resize(n_free(S));
  int k = 0;
  for (int i = 0; i < S; ++i)
    for (int j = 1; j < S; ++j) out.grad[k++] = gU(i, j);
  for (int i = 1; i < S; ++i)
    for (int j = 0; j < S; ++j) out.grad[k++] = gV(i, j);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) out.grad[k++] = gP(i, j);
  return out;
}

// L-BFGS with Armijo backtracking. Returns the final gradient infinity norm.
double lbfgs_minimize(Eigen::VectorXd& x, const Problem& pb, int max_iter,
                      double grad_tol) {
  constexpr int kMemory = 8;
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  EvalResult cur = evaluate(x, pb, true);
  if (!std::isfinite(cur.value)) {
    throw std::runtime_error("max-entropy inner solver started outside domain");
  }
  double gnorm = cur.grad.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter && gnorm > grad_tol; ++it) {
    // two-loop recursion
    Eigen::VectorXd q = cur.grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      const double rho_i = 1.0 / y_hist[static_cast<std::size_t>(i)].dot(
                                     s_hist[static_cast<std::size_t>(i)]);
      alpha[static_cast<std::size_t>(i)] =
          rho_i * s_hist[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (m > 0) {
      const auto& sl = s_hist.back();
      const auto& yl = y_hist.back();
      q *= sl.dot(yl) / yl.dot(yl);
    }
    for (int i = 0; i < m; ++i) {
      const double rho_i = 1.0 / y_hist[static_cast<std::size_t>(i)].dot(
                                     s_hist[static_cast<std::size_t>(i)]);
      const double beta_i = rho_i * y_hist[static_cast<std::size_t>(i)].dot(q);
      q += (alpha[static_cast<std::size_t>(i)] - beta_i) *
           s_hist[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd dir = -q;
    double slope = cur.grad.dot(dir);
    if (slope >= 0.0) {  // fall back to steepest descent
      dir = -cur.grad;
      slope = -cur.grad.squaredNorm();
      s_hist.clear();
      y_hist.clear();
    }

    double t = 1.0;
    Eigen::VectorXd x_new;
    EvalResult nxt;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + t * dir;
      nxt = evaluate(x_new, pb, true);
      if (std::isfinite(nxt.value) && nxt.value <= cur.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = nxt.grad - cur.grad;
    if (s.dot(y) > 1e-14 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      if (static_cast<int>(s_hist.size()) > kMemory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
      }
    }
    x = std::move(x_new);
    cur = std::move(nxt);
    gnorm = cur.grad.lpNorm<Eigen::Infinity>();
  }
  return gnorm;
}

// Orthonormal basis of the sum-zero subspace, columns of an S x (S-1) matrix.
Eigen::MatrixXd sum_zero_basis(int S) {
  const Eigen::MatrixXd C =
      Eigen::MatrixXd::Identity(S, S) - Eigen::MatrixXd::Ones(S, S) / S;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  Eigen::MatrixXd Q = qr.householderQ();
  // C has rank S-1; the basis is the first S-1 columns of Q re-projected.
  Eigen::MatrixXd B(S, S - 1);
  int got = 0;
  for (int j = 0; j < S && got < S - 1; ++j) {
    Eigen::VectorXd col = Q.col(j);
    col.array() -= col.mean();  // enforce exact sum-zero
    if (col.norm() > 1e-8) {
      B.col(got++) = col / col.norm();
    }
  }
  if (got != S - 1) throw std::runtime_error("sum-zero basis construction failed");
  return B;
}

Vars make_start(const Problem& pb, RngStream& stream) {
  const int S = pb.S;
  Vars v;
  v.V.resize(S, S);
  v.V.row(0) = pb.pi.transpose();
  const Eigen::MatrixXd B = sum_zero_basis(S);
  // Random rotation of the sum-zero basis: rows 2..S of V.
  Eigen::MatrixXd G(S - 1, S - 1);
  for (int i = 0; i < S - 1; ++i)
    for (int j = 0; j < S - 1; ++j) G(i, j) = stream.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  v.V.bottomRows(S - 1) = Q * B.transpose();

  v.U = v.V.inverse();
  v.P = v.U * pb.d.asDiagonal() * v.V;
  // Clip into the barrier domain; the penalty terms absorb the residual.
  v.P = v.P.cwiseMax(1e-10);
  return v;
}

// Augmented-Lagrangian outer loop from a packed start. Multipliers start at
// zero; the barrier is annealed and the penalty grows when progress on the
// equality residual stalls. Returns the final residual, leaving the iterate
// in x.
double solve_al(Eigen::VectorXd& x, Problem pb, const MaxEntropyOptions& options) {
  const int S = pb.S;
  pb.lam_uv = Eigen::MatrixXd::Zero(S, S);
  pb.lam_p = Eigen::MatrixXd::Zero(S, S);
  pb.lam_row = Eigen::VectorXd::Zero(S);
  pb.beta = 1e-6;
  pb.rho = 10.0;

  double prev_vio = std::numeric_limits<double>::infinity();
  double vio = prev_vio;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    const double gtol =
        std::max(options.gradient_tol, 1e-3 * std::pow(0.3, outer));
    lbfgs_minimize(x, pb, options.max_inner, gtol);

    const EvalResult ev = evaluate(x, pb, false);
    if (!std::isfinite(ev.value)) break;
    vio = ev.violation;
    if (vio <= options.constraint_tol && gtol <= options.gradient_tol) break;

    Vars cur;
    unpack(x, pb, cur);
    const Eigen::MatrixXd C1 = cur.U * cur.V - Eigen::MatrixXd::Identity(S, S);
    const Eigen::MatrixXd C2 =
        cur.U * (pb.d.asDiagonal() * cur.V) - cur.P;
    const Eigen::VectorXd C3 =
        cur.P.rowwise().sum() - Eigen::VectorXd::Ones(S);
    pb.lam_uv += pb.rho * C1;
    pb.lam_p += pb.rho * C2;
    pb.lam_row += pb.rho * C3;
    if (vio > 0.3 * prev_vio) pb.rho = std::min(pb.rho * 4.0, 1e12);
    prev_vio = vio;
    pb.beta = std::max(pb.beta * 0.2, 1e-12);
  }
  return vio;
}

// Orthonormal basis of the hyperplane orthogonal to the unit vector r,
// as the columns of an S x (S-1) matrix.
Eigen::MatrixXd perp_basis(const Eigen::VectorXd& r) {
  const int S = static_cast<int>(r.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S);
  M.col(0) = r;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ();
  return Q.rightCols(S - 1);
}

// Transition matrix of the reversible chain with stationary pi and spectrum d
// whose non-unit eigenvector block is Dpi^-1/2 B for orthonormal columns B
// spanning the hyperplane orthogonal to sqrt(pi).
Eigen::MatrixXd reversible_member(const Problem& pb, const Eigen::VectorXd& r,
                                  const Eigen::MatrixXd& B) {
  Eigen::MatrixXd sym = r * r.transpose();
  for (int k = 1; k < pb.S; ++k)
    sym += pb.d[k] * B.col(k - 1) * B.col(k - 1).transpose();
  return r.cwiseInverse().asDiagonal() * sym * r.asDiagonal();
}

// Searches the orthonormal completions for a strictly positive member: a
// coarse random scan plus plane-rotation coordinate sweeps (entries are
// pi-periodic in each angle) first push up the smallest entry, then, staying
// positive, the entropy objective. Fills v with the winning member as an
// exactly feasible start; returns false when no positive member is found.
bool reversible_start(const Problem& pb, RngStream& stream, Vars& v) {
  const int S = pb.S;
  const Eigen::VectorXd r = pb.pi.array().sqrt();
  const Eigen::MatrixXd B0 = perp_basis(r);

  const auto margin_score = [&](const Eigen::MatrixXd& B) {
    return reversible_member(pb, r, B).minCoeff();
  };
  const auto entropy_score = [&](const Eigen::MatrixXd& B) {
    const Eigen::MatrixXd P = reversible_member(pb, r, B);
    if (!(P.minCoeff() > 0.0))
      return -std::numeric_limits<double>::infinity();
    return -(P.array() * P.array().log()).sum();
  };

  const auto sweep_rotations = [&](Eigen::MatrixXd& best, double best_score,
                                   const auto& score) {
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int a = 0; a + 1 < S - 1; ++a) {
        for (int b = a + 1; b < S - 1; ++b) {
          double local_best = best_score;
          double local_phi = 0.0;
          constexpr int kGrid = 256;
          const auto rotated = [&](double phi) {
            Eigen::MatrixXd cand = best;
            cand.col(a) =
                std::cos(phi) * best.col(a) + std::sin(phi) * best.col(b);
            cand.col(b) =
                -std::sin(phi) * best.col(a) + std::cos(phi) * best.col(b);
            return cand;
          };
          for (int g = 1; g < kGrid; ++g) {
            const double phi = M_PI * g / kGrid;
            const double s = score(rotated(phi));
            if (s > local_best) {
              local_best = s;
              local_phi = phi;
            }
          }
          for (int g = -63; g < 64; ++g) {
            const double phi = local_phi + (M_PI / kGrid) * g / 64.0;
            const double s = score(rotated(phi));
            if (s > local_best) {
              local_best = s;
              local_phi = phi;
            }
          }
          if (local_best > best_score) {
            best = rotated(local_phi);
            best_score = local_best;
          }
        }
      }
    }
    return best_score;
  };

  // Positive members can occupy a sliver of the completion manifold, so scan
  // widely and keep a shortlist: the margin sweeps are coordinate ascents
  // that stall in local optima when started from a single bad draw.
  std::vector<std::pair<double, Eigen::MatrixXd>> shortlist;
  shortlist.emplace_back(margin_score(B0), B0);
  constexpr std::size_t kShortlist = 8;
  for (int trial = 0; trial < 4096; ++trial) {
    Eigen::MatrixXd G(S - 1, S - 1);
    for (int i = 0; i < S - 1; ++i)
      for (int j = 0; j < S - 1; ++j) G(i, j) = stream.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd cand = B0 * Eigen::MatrixXd(qr.householderQ());
    const double m = margin_score(cand);
    if (shortlist.size() < kShortlist || m > shortlist.back().first) {
      const auto at = std::upper_bound(
          shortlist.begin(), shortlist.end(), m,
          [](double v, const auto& e) { return v > e.first; });
      shortlist.emplace(at, m, std::move(cand));
      if (shortlist.size() > kShortlist) shortlist.pop_back();
    }
  }

  Eigen::MatrixXd best = shortlist.front().second;
  double best_margin = shortlist.front().first;
  for (auto& [m, cand] : shortlist) {
    const double swept = sweep_rotations(cand, m, margin_score);
    if (swept > best_margin) {
      best_margin = swept;
      best = cand;
    }
    if (best_margin > 0.0) break;
  }
  if (!(best_margin > 0.0)) return false;
  sweep_rotations(best, entropy_score(best), entropy_score);

  v.V.resize(S, S);
  v.V.row(0) = pb.pi.transpose();
  for (int k = 1; k < S; ++k)
    v.V.row(k) = (best.col(k - 1).array() * r.array()).transpose();
  v.U = v.V.inverse();
  v.P = v.U * pb.d.asDiagonal() * v.V;
  return (v.P.array() > 0.0).all();
}

Eigen::MatrixXd polish(const Vars& v, const Problem& pb) {
  const int S = pb.S;
  Eigen::MatrixXd V = v.V;
  V.row(0) = pb.pi.transpose();
  for (int i = 1; i < S; ++i) V.row(i).array() -= V.row(i).mean();
  const Eigen::MatrixXd U = V.inverse();
  Eigen::MatrixXd P = U * pb.d.asDiagonal() * V;
  for (int i = 0; i < S; ++i) {
    const double row = P.row(i).sum();
    if (row <= 0.0) throw std::runtime_error("max-entropy polish failed");
    P.row(i) /= row;
  }
  return P;
}

}  // namespace

MaxEntropyResult estimate_max_entropy(const Eigen::VectorXd& stationary_target,
                                      const std::vector<double>& eigenvalues,
                                      const MaxEntropyOptions& options) {
  const int S = static_cast<int>(stationary_target.size());
  if (S < 1) throw std::invalid_argument("empty stationary target");
  if (std::abs(stationary_target.sum() - 1.0) > 1e-10) {
    throw std::invalid_argument("stationary target must sum to 1");
  }
  for (int i = 0; i < S; ++i) {
    if (!(stationary_target[i] > 0.0)) {
      throw std::invalid_argument(
          "stationary target entries must be strictly positive");
    }
  }
  if (static_cast<int>(eigenvalues.size()) != S - 1) {
    throw std::invalid_argument("need S - 1 subdominant eigenvalues");
  }
  for (double l : eigenvalues) {
    if (!(std::abs(l) < 1.0)) {
      throw std::invalid_argument("subdominant eigenvalues must satisfy |lambda| < 1");
    }
  }

  MaxEntropyResult best;
  if (S == 1) {
    best.P = Eigen::MatrixXd::Ones(1, 1);
    best.entropy = 0.0;
    best.converged_starts = 1;
    return best;
  }

  Problem pb0;
  pb0.S = S;
  pb0.pi = stationary_target;
  pb0.d.resize(S);
  pb0.d[0] = 1.0;
  for (int i = 1; i < S; ++i) pb0.d[i] = eigenvalues[static_cast<std::size_t>(i - 1)];

  double best_entropy = -std::numeric_limits<double>::infinity();
  double best_violation = std::numeric_limits<double>::infinity();
  int converged = 0;

  const auto take_if_better = [&](const Eigen::VectorXd& x, double vio) {
    Vars fin;
    unpack(x, pb0, fin);
    Eigen::MatrixXd P;
    try {
      P = polish(fin, pb0);
    } catch (const std::exception&) {
      return;
    }
    if ((P.array() <= 0.0).any()) return;
    ++converged;
    const double h = matrix_entropy(P);
    if (h > best_entropy) {
      best_entropy = h;
      best.P = P;
      best.entropy = h;
      best.constraint_violation = vio;
    }
  };

  for (int start = 0; start < options.starts; ++start) {
    RngStream stream(options.seed, 0x4d61784eULL, static_cast<std::uint64_t>(start));
    Vars v;
    try {
      v = make_start(pb0, stream);
    } catch (const std::exception&) {
      continue;  // singular random rotation, effectively never
    }
    Eigen::VectorXd x(n_free(S));
    pack(v, x);
    const double vio = solve_al(x, pb0, options);
    best_violation = std::min(best_violation, vio);
    if (vio > options.constraint_tol) continue;
    take_if_better(x, vio);
  }

  if (converged == 0) {
    RngStream stream(options.seed, 0x526576ULL);
    Vars v;
    if (reversible_start(pb0, stream, v)) {
      Eigen::VectorXd x(n_free(S));
      pack(v, x);
      const double vio = solve_al(x, pb0, options);
      best_violation = std::min(best_violation, vio);
      if (vio <= options.constraint_tol) take_if_better(x, vio);
      if (converged == 0) {
        // The NLP cannot hold the residual tolerance even from a feasible
        // point; keep the member itself, which is exact by construction.
        const Eigen::MatrixXd C1 =
            v.U * v.V - Eigen::MatrixXd::Identity(S, S);
        const Eigen::MatrixXd C2 = v.U * (pb0.d.asDiagonal() * v.V) - v.P;
        const Eigen::VectorXd C3 =
            v.P.rowwise().sum() - Eigen::VectorXd::Ones(S);
        const double vio0 =
            std::max({C1.cwiseAbs().maxCoeff(), C2.cwiseAbs().maxCoeff(),
                      C3.cwiseAbs().maxCoeff()});
        best_violation = std::min(best_violation, vio0);
        Eigen::VectorXd x0(n_free(S));
        pack(v, x0);
        take_if_better(x0, vio0);
      }
    }
  }

  best.converged_starts = converged;
  if (converged == 0) {
    std::ostringstream msg;
    msg << "max-entropy estimation infeasible or not converged; best equality "
           "residual "
        << best_violation;
    throw std::runtime_error(msg.str());
  }
  return best;
}

}  // namespace scoco
