#include "d2pc/qp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <ostream>

namespace d2pc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed rho for rows with no finite bound; they never bind.
constexpr double kFreeRho = 1e-6;
constexpr double kEqualityRhoFactor = 1e3;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kScalingMin = 1e-6;
constexpr double kScalingMax = 1e6;

double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Problem data after Ruiz equilibration: P = c D H D, q = c D f, A = E M D,
// bounds scaled by E. D, E, c are the accumulated scalings.
struct Scaled {
  Matrix P;
  Vector q;
  Matrix A;
  Vector l, u;
  Vector D, E;
  double c = 1.0;
};

Scaled equilibrate(const QpProblem& prob, const QpSettings& s) {
  const Eigen::Index d = prob.dimension();
  const Eigen::Index c = prob.constraints();
  Scaled out;
  out.P = prob.H;
  out.q = prob.f;
  out.A = prob.M;
  out.l = prob.lower;
  out.u = prob.upper;
  out.D = Vector::Ones(d);
  out.E = Vector::Ones(c);
  if (!s.scaling) return out;

  const auto clamp_scale = [](double v) {
    return std::clamp(v, kScalingMin, kScalingMax);
  };
  for (int pass = 0; pass < s.scaling_iterations; ++pass) {
    Vector dx(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      double norm = out.P.col(j).cwiseAbs().maxCoeff();
      if (c > 0) norm = std::max(norm, out.A.col(j).cwiseAbs().maxCoeff());
      dx(j) = norm > 0.0 ? clamp_scale(1.0 / std::sqrt(norm)) : 1.0;
    }
    Vector dy(c);
    for (Eigen::Index i = 0; i < c; ++i) {
      const double norm = out.A.row(i).cwiseAbs().maxCoeff();
      dy(i) = norm > 0.0 ? clamp_scale(1.0 / std::sqrt(norm)) : 1.0;
    }
    out.P = dx.asDiagonal() * out.P * dx.asDiagonal();
    out.q = dx.cwiseProduct(out.q);
    if (c > 0) {
      out.A = dy.asDiagonal() * out.A * dx.asDiagonal();
      out.l = dy.cwiseProduct(out.l);  // +-inf entries stay infinite
      out.u = dy.cwiseProduct(out.u);
    }
    out.D = out.D.cwiseProduct(dx);
    out.E = out.E.cwiseProduct(dy);

    // Cost normalization, as in the equilibration of the objective.
    double mean_col = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      mean_col += out.P.col(j).cwiseAbs().maxCoeff();
    }
    mean_col /= static_cast<double>(d);
    const double denom = std::max(mean_col, inf_norm(out.q));
    if (denom > 0.0) {
      const double gamma = clamp_scale(1.0 / denom);
      out.P *= gamma;
      out.q *= gamma;
      out.c *= gamma;
    }
  }
  return out;
}

Vector rho_rows(const Vector& l, const Vector& u, double rho_bar) {
  Vector r(l.size());
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (l(i) == -kInf && u(i) == kInf) {
      r(i) = kFreeRho;
    } else if (l(i) == u(i)) {
      r(i) = std::clamp(kEqualityRhoFactor * rho_bar, kRhoMin, kRhoMax * 1e3);
    } else {
      r(i) = std::clamp(rho_bar, kRhoMin, kRhoMax);
    }
  }
  return r;
}

struct Residuals {
  double rp = 0.0, rd = 0.0;      // normalized
  double rp_raw = 0.0, rd_raw = 0.0;
};

Residuals residuals_at(const QpProblem& prob, const Vector& x, const Vector& z,
                       const Vector& y) {
  Residuals r;
  const Vector Hx = prob.H * x;
  Vector dual = Hx + prob.f;
  double sd = std::max(inf_norm(Hx), inf_norm(prob.f));
  if (prob.constraints() > 0) {
    const Vector Mx = prob.M * x;
    const Vector Mty = prob.M.transpose() * y;
    dual += Mty;
    sd = std::max(sd, inf_norm(Mty));
    r.rp_raw = inf_norm(Mx - z);
    r.rp = r.rp_raw / (1.0 + std::max(inf_norm(Mx), inf_norm(z)));
  }
  r.rd_raw = inf_norm(dual);
  r.rd = r.rd_raw / (1.0 + sd);
  return r;
}

// H must be positive semidefinite; a factorization with a clearly negative
// pivot rejects the problem before any iteration runs.
void require_psd(const Matrix& H) {
  Eigen::LDLT<Matrix> ldlt(H);
  const Vector dvec = ldlt.vectorD();
  const double dmax = dvec.size() > 0 ? dvec.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-8 * std::max(1.0, dmax);
  if (ldlt.info() != Eigen::Success || dvec.minCoeff() < -tol) {
    throw InvalidInputError("solve: H is not positive semidefinite");
  }
}

QpSolution solve_unconstrained(const QpProblem& prob, const QpSettings& s) {
  QpSolution sol;
  sol.y.resize(0);
  Eigen::LLT<Matrix> llt(prob.H);
  if (llt.info() == Eigen::Success) {
    sol.z = llt.solve(-prob.f);
  } else {
    sol.z = Eigen::LDLT<Matrix>(prob.H).solve(-prob.f);
  }
  if (!sol.z.allFinite()) {
    sol.z = Vector::Zero(prob.dimension());
    sol.status = QpStatus::Failure;
    return sol;
  }
  const Residuals r = residuals_at(prob, sol.z, Vector(), Vector());
  sol.primal_residual = 0.0;
  sol.dual_residual = r.rd;
  sol.objective = 0.5 * sol.z.dot(prob.H * sol.z) + prob.f.dot(sol.z);
  // A consistent solve leaves a tiny gradient; anything else means the
  // objective is unbounded below along a singular direction.
  sol.status = r.rd <= s.eps_dual ? QpStatus::Solved : QpStatus::Failure;
  return sol;
}

// Active-set refinement of a converged iterate. Solves the KKT system
// restricted to the constraints the duals mark as active, with small
// regularization and iterative refinement, and keeps the result only if the
// residuals do not get worse.
void polish(const QpProblem& prob, const QpSettings& s, QpSolution& sol,
            Residuals& best) {
  const Eigen::Index c = prob.constraints();
  const double ythresh =
      100.0 * std::numeric_limits<double>::epsilon() *
      std::max(1.0, inf_norm(sol.y));

  std::vector<Eigen::Index> act;
  std::vector<double> rhs;
  for (Eigen::Index i = 0; i < c; ++i) {
    if (prob.lower(i) == prob.upper(i)) {
      act.push_back(i);
      rhs.push_back(prob.lower(i));
    } else if (sol.y(i) < -ythresh && prob.lower(i) > -kInf) {
      act.push_back(i);
      rhs.push_back(prob.lower(i));
    } else if (sol.y(i) > ythresh && prob.upper(i) < kInf) {
      act.push_back(i);
      rhs.push_back(prob.upper(i));
    }
  }
  const Eigen::Index na = static_cast<Eigen::Index>(act.size());
  const Eigen::Index d = prob.dimension();
  Matrix Aact(na, d);
  Vector b(na);
  for (Eigen::Index k = 0; k < na; ++k) {
    Aact.row(k) = prob.M.row(act[static_cast<std::size_t>(k)]);
    b(k) = rhs[static_cast<std::size_t>(k)];
  }

  const double delta = s.polish_delta;
  Matrix K = prob.H + delta * Matrix::Identity(d, d);
  if (na > 0) K += Aact.transpose() * Aact / delta;
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) return;

  const auto kkt_solve = [&](const Vector& r1, const Vector& r2, Vector& dt,
                             Vector& dn) {
    Vector w = r1;
    if (na > 0) w += Aact.transpose() * r2 / delta;
    dt = llt.solve(w);
    if (na > 0) dn = (Aact * dt - r2) / delta;
  };

  // The factor is of the regularized system, so one backsolve is only
  // accurate to O(delta) against the true KKT conditions; refinement closes
  // the gap geometrically. Keep the best iterate seen and stop once the
  // error stalls or turns around.
  const auto kkt_error = [&](const Vector& tv, const Vector& nv) {
    Vector r1 = prob.f + prob.H * tv;
    if (na > 0) r1 += Aact.transpose() * nv;
    double e = inf_norm(r1);
    if (na > 0) e = std::max(e, inf_norm(Aact * tv - b));
    return e;
  };

  Vector t, nu;
  kkt_solve(-prob.f, b, t, nu);
  if (!t.allFinite() || (na > 0 && !nu.allFinite())) return;
  Vector best_t = t, best_nu = nu;
  double best_err = kkt_error(t, nu);
  for (int it = 0; it < s.polish_refine_iterations; ++it) {
    Vector r1 = -prob.f - prob.H * t;
    if (na > 0) r1 -= Aact.transpose() * nu;
    Vector r2(na);
    if (na > 0) r2 = b - Aact * t;
    Vector dt, dn;
    kkt_solve(r1, r2, dt, dn);
    t += dt;
    if (na > 0) nu += dn;
    if (!t.allFinite() || (na > 0 && !nu.allFinite())) break;
    const double err = kkt_error(t, nu);
    if (err < best_err) {
      best_err = err;
      best_t = t;
      best_nu = nu;
    } else if (err > 10.0 * best_err) {
      break;
    }
  }
  t = best_t;
  nu = best_nu;

  Vector y_pol = Vector::Zero(c);
  for (Eigen::Index k = 0; k < na; ++k) y_pol(act[static_cast<std::size_t>(k)]) = nu(k);
  const Vector Mt = prob.M * t;
  const Vector z_pol = Mt.cwiseMax(prob.lower).cwiseMin(prob.upper);

  const Residuals r = residuals_at(prob, t, z_pol, y_pol);
  if (std::max(r.rp, r.rd) <= std::max(best.rp, best.rd)) {
    sol.z = t;
    sol.y = y_pol;
    sol.polished = true;
    best = r;
  }
}

bool primal_infeasibility_certificate(const QpProblem& prob, const Vector& dy,
                                      double eps) {
  const double norm_dy = inf_norm(dy);
  if (norm_dy <= 0.0) return false;
  if (inf_norm(prob.M.transpose() * dy) > eps * norm_dy) return false;
  double support = 0.0;
  for (Eigen::Index i = 0; i < dy.size(); ++i) {
    const double pos = std::max(dy(i), 0.0);
    const double neg = std::min(dy(i), 0.0);
    if (prob.upper(i) == kInf) {
      if (pos > eps * norm_dy) return false;
    } else {
      support += prob.upper(i) * pos;
    }
    if (prob.lower(i) == -kInf) {
      if (neg < -eps * norm_dy) return false;
    } else {
      support += prob.lower(i) * neg;
    }
  }
  return support <= -eps * norm_dy;
}

bool dual_infeasibility_certificate(const QpProblem& prob, const Vector& dx,
                                    double eps) {
  const double norm_dx = inf_norm(dx);
  if (norm_dx <= 0.0) return false;
  if (inf_norm(prob.H * dx) > eps * norm_dx) return false;
  if (prob.f.dot(dx) > -eps * norm_dx) return false;
  if (prob.constraints() > 0) {
    const Vector Mdx = prob.M * dx;
    for (Eigen::Index i = 0; i < Mdx.size(); ++i) {
      if (prob.upper(i) < kInf && Mdx(i) > eps * norm_dx) return false;
      if (prob.lower(i) > -kInf && Mdx(i) < -eps * norm_dx) return false;
    }
  }
  return true;
}

} // namespace

void QpProblem::validate() const {
  const Eigen::Index d = H.rows();
  if (d == 0 || H.cols() != d) {
    throw InvalidInputError("QpProblem: H must be square and non-empty");
  }
  if (f.size() != d) throw InvalidInputError("QpProblem: f size mismatch");
  const Eigen::Index c = M.rows();
  if (c > 0 && M.cols() != d) {
    throw InvalidInputError("QpProblem: M column count mismatch");
  }
  if (lower.size() != c || upper.size() != c) {
    throw InvalidInputError("QpProblem: bound sizes do not match M rows");
  }
  require_finite(H, "QpProblem: H");
  require_finite(f, "QpProblem: f");
  if (c > 0) require_finite(M, "QpProblem: M");
  const double hmax = H.cwiseAbs().maxCoeff();
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + hmax)) {
    throw InvalidInputError("QpProblem: H is not symmetric");
  }
  for (Eigen::Index i = 0; i < c; ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i))) {
      throw InvalidInputError("QpProblem: NaN bound");
    }
    if (lower(i) == kInf || upper(i) == -kInf) {
      throw InvalidInputError("QpProblem: bound closes no interval");
    }
    if (lower(i) > upper(i)) {
      throw InvalidInputError("QpProblem: lower bound above upper bound");
    }
  }
}

QpSolution solve(const QpProblem& prob, const QpSettings& s) {
  prob.validate();
  require_psd(prob.H);
  const Eigen::Index d = prob.dimension();
  const Eigen::Index c = prob.constraints();
  if (c == 0) return solve_unconstrained(prob, s);

  const Scaled sc = equilibrate(prob, s);
  double rho_bar = s.rho;
  Vector R = rho_rows(sc.l, sc.u, rho_bar);

  const Matrix sigmaI = s.sigma * Matrix::Identity(d, d);
  Eigen::LLT<Matrix> llt(sc.P + sigmaI +
                         sc.A.transpose() * R.asDiagonal() * sc.A);
  if (llt.info() != Eigen::Success) {
    QpSolution sol;
    sol.z = Vector::Zero(d);
    sol.y = Vector::Zero(c);
    sol.status = QpStatus::Failure;
    return sol;
  }

  // Scaled iterates.
  Vector x = Vector::Zero(d);
  Vector y = Vector::Zero(c);
  if (s.warm_start) {
    if (s.z0.size() != d || s.y0.size() != c) {
      throw InvalidInputError("solve: warm start sizes do not match problem");
    }
    x = sc.D.cwiseInverse().cwiseProduct(s.z0);
    y = sc.c * sc.E.cwiseInverse().cwiseProduct(s.y0);
  }
  Vector z = sc.A * x;
  Vector dx = Vector::Zero(d);
  Vector dy = Vector::Zero(c);

  QpSolution sol;
  sol.status = QpStatus::MaxIterations;
  Residuals best;
  auto unscale_x = [&](const Vector& v) { return sc.D.cwiseProduct(v); };
  auto unscale_y = [&](const Vector& v) {
    return sc.E.cwiseProduct(v) / sc.c;
  };

  int iter = 0;
  while (iter < s.max_iterations) {
    ++iter;
    const Vector x_prev = x;
    const Vector y_prev = y;

    const Vector rhs =
        s.sigma * x - sc.q + sc.A.transpose() * (R.cwiseProduct(z) - y);
    const Vector xt = llt.solve(rhs);
    const Vector zt = sc.A * xt;
    x = s.alpha * xt + (1.0 - s.alpha) * x;
    const Vector ztmp =
        s.alpha * zt + (1.0 - s.alpha) * z + y.cwiseQuotient(R);
    const Vector z_new = ztmp.cwiseMax(sc.l).cwiseMin(sc.u);
    y = R.cwiseProduct(ztmp - z_new);
    z = z_new;
    dx = x - x_prev;
    dy = y - y_prev;

    if (iter % s.check_interval != 0 && iter != s.max_iterations) continue;

    if (!x.allFinite() || !z.allFinite() || !y.allFinite()) {
      sol.status = QpStatus::Failure;
      break;
    }
    const Vector xu = unscale_x(x);
    const Vector zu = sc.E.cwiseInverse().cwiseProduct(z);
    const Vector yu = unscale_y(y);
    const Residuals r = residuals_at(prob, xu, zu, yu);
    if (r.rp <= s.eps_primal && r.rd <= s.eps_dual) {
      sol.status = QpStatus::Solved;
      break;
    }
    if (primal_infeasibility_certificate(prob, unscale_y(dy),
                                         s.eps_infeasible) ||
        dual_infeasibility_certificate(prob, unscale_x(dx),
                                       s.eps_infeasible)) {
      sol.status = QpStatus::Failure;
      break;
    }
    if (s.adaptive_rho && iter < s.max_iterations) {
      const double ratio =
          std::sqrt(std::max(r.rp, 1e-30) / std::max(r.rd, 1e-30));
      if (ratio > s.adaptive_rho_tolerance ||
          ratio < 1.0 / s.adaptive_rho_tolerance) {
        rho_bar = std::clamp(rho_bar * ratio, kRhoMin, kRhoMax);
        R = rho_rows(sc.l, sc.u, rho_bar);
        llt.compute(sc.P + sigmaI +
                    sc.A.transpose() * R.asDiagonal() * sc.A);
        if (llt.info() != Eigen::Success) {
          sol.status = QpStatus::Failure;
          break;
        }
      }
    }
  }

  sol.iterations = iter;
  sol.z = unscale_x(x);
  sol.y = unscale_y(y);
  Vector zu = sc.E.cwiseInverse().cwiseProduct(z);
  if (!sol.z.allFinite() || !sol.y.allFinite() || !zu.allFinite()) {
    sol.status = QpStatus::Failure;
    sol.z = Vector::Zero(d);
    sol.y = Vector::Zero(c);
    zu = Vector::Zero(c);
  }
  best = residuals_at(prob, sol.z, zu, sol.y);
  if (sol.status == QpStatus::Solved && s.polish) {
    polish(prob, s, sol, best);
  }
  sol.primal_residual = best.rp;
  sol.dual_residual = best.rd;
  sol.objective = 0.5 * sol.z.dot(prob.H * sol.z) + prob.f.dot(sol.z);
  return sol;
}

void dump(const QpProblem& prob, std::ostream& os) {
  const auto write_matrix = [&os](const char* name, const Matrix& m) {
    os << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j > 0) os << " ";
        os << m(i, j);
      }
      os << "\n";
    }
  };
  const auto precision = os.precision(17);
  os << "qp " << prob.dimension() << " " << prob.constraints() << "\n";
  write_matrix("H", prob.H);
  write_matrix("f", prob.f);
  write_matrix("M", prob.M);
  write_matrix("lower", prob.lower);
  write_matrix("upper", prob.upper);
  os.precision(precision);
}

} // namespace d2pc
