#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ridgefind/error.hpp"
#include "ridgefind/estimators.hpp"
#include "ridgefind/quadrature.hpp"

namespace ridgefind {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-42.25) ~ 4e-19: Gaussian tails beyond 6.5 standard units are dropped.
constexpr double kTail = 6.5;
constexpr double kFallbackRange = 1e3;

// Columns spanning the orthogonal complement of the columns of U.
Eigen::MatrixXd complement(const Eigen::MatrixXd& U) {
  const Eigen::Index d = U.rows(), k = U.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
  Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return full.rightCols(d - k);
}

// Returns S = A - A R (ell^2 I + R^T A R)^{-1} R^T A and log det of the inner matrix.
std::pair<Eigen::MatrixXd, double> schur_after(const Eigen::MatrixXd& A, const Eigen::MatrixXd& R, double ell) {
  if (R.cols() == 0) return {A, 0.0};
  const Eigen::MatrixXd AR = A * R;
  Eigen::MatrixXd N = R.transpose() * AR;
  N.diagonal().array() += ell * ell;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (N + N.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("quadrature mass oracle: Gaussian factor is not positive definite");
  const Eigen::MatrixXd S = A - AR * llt.solve(AR.transpose());
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return {0.5 * (S + S.transpose()), logdet};
}

int panels_for(double len, double ell) {
  return std::clamp(static_cast<int>(std::ceil(len * ell / 2.0)), 4, 4000);
}

}  // namespace

struct QuadratureMassOracle::Prepared {
  struct Own {
    Eigen::MatrixXd T;   // v^T T v = nu - mu^2 / kappa
    Eigen::VectorXd p;   // t0 = p . v
    double kappa = 0.0;
    double log_pref = 0.0;  // log of ell^{2d-2} pi^{(d-1)/2} / sqrt(det M), coefficient excluded
  };
  struct Pair {
    std::size_t i = 0, j = 0;
    Eigen::MatrixXd T;                  // v^T T v = c0 - b^T K^{-1} b
    Eigen::Matrix<double, 2, Eigen::Dynamic> P;  // z0 = P v
    Eigen::Matrix2d K;
    double log_pref = 0.0;
    double log_gauss_mass = 0.0;  // log(pi / sqrt(det K))
  };
  std::vector<Own> own;
  std::vector<Pair> pairs;
};

QuadratureMassOracle::QuadratureMassOracle(std::shared_ptr<const SumOfFeaturesModel> model, double ell,
                                           QuadratureMassOptions opt)
    : model_(std::move(model)), ell_(ell), opt_(opt), spectrum_(model_, ell, opt.t_table) {
  double asum = 0.0;
  for (const auto& f : model_->features()) asum += f.coeff * f.coeff;
  floor_ = 1e-13 * std::pow(kPi * ell * ell, 0.5 * static_cast<double>(model_->dim())) * std::max(asum, 1e-300);
}

QuadratureMassOracle::~QuadratureMassOracle() = default;

std::shared_ptr<const QuadratureMassOracle::Prepared> QuadratureMassOracle::prepare(const Eigen::MatrixXd& A) {
  std::vector<double> key(A.data(), A.data() + A.size());
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const std::size_t d = model_->dim();
  const auto& feats = model_->features();
  const double log_ell = std::log(ell_);
  auto prep = std::make_shared<Prepared>();

  for (const auto& f : feats) {
    Prepared::Own o;
    const Eigen::MatrixXd Q = complement(f.direction);
    auto [S, logdet] = schur_after(A, Q, ell_);
    const Eigen::VectorXd Sv = S * f.direction;
    o.kappa = std::max(0.0, f.direction.dot(Sv));
    if (o.kappa > 1e-300) {
      o.T = S - Sv * Sv.transpose() / o.kappa;
      o.p = Sv / o.kappa;
    } else {
      o.kappa = 0.0;
      o.T = S;
      o.p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    }
    o.log_pref = (2.0 * d - 2.0) * log_ell + 0.5 * (d - 1.0) * std::log(kPi) - 0.5 * logdet;
    prep->own.push_back(std::move(o));
  }

  for (std::size_t i = 0; i < feats.size(); ++i) {
    for (std::size_t j = i + 1; j < feats.size(); ++j) {
      if (d < 2) continue;
      Prepared::Pair pr;
      pr.i = i;
      pr.j = j;
      Eigen::MatrixXd U(d, 2);
      U.col(0) = feats[i].direction;
      U.col(1) = feats[j].direction;
      const double c = feats[i].direction.dot(feats[j].direction);
      if (!(std::abs(c) < 1.0 - 1e-12)) throw InputError("quadrature mass oracle: parallel feature directions");
      Eigen::Matrix2d G;
      G << 1.0, c, c, 1.0;
      const Eigen::Matrix2d Gi = G.inverse();
      const Eigen::MatrixXd B = U * Gi;
      const Eigen::MatrixXd R = complement(U);
      auto [S, logdet] = schur_after(A, R, ell_);
      const Eigen::MatrixXd BS = B.transpose() * S;  // 2 x d
      pr.K = 0.5 * ell_ * ell_ * (2.0 * Gi - Eigen::Matrix2d::Identity()) + BS * B;
      pr.K = 0.5 * (pr.K + pr.K.transpose()).eval();
      const Eigen::Matrix2d Ki = pr.K.inverse();
      pr.P = Ki * BS;
      pr.T = S - BS.transpose() * Ki * BS;
      pr.log_pref = (2.0 * d - 2.0) * log_ell + 0.5 * (d - 2.0) * std::log(kPi) - 0.5 * logdet -
                    0.5 * std::log(G.determinant());
      pr.log_gauss_mass = std::log(kPi) - 0.5 * std::log(pr.K.determinant());
      prep->pairs.push_back(std::move(pr));
    }
  }

  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(prep));
  return it->second;
}

double QuadratureMassOracle::mass(const Eigen::VectorXd& v, const Eigen::MatrixXd& A) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  if (static_cast<std::size_t>(v.size()) != dim() || A.rows() != v.size() || A.cols() != v.size())
    throw InputError("quadrature mass oracle: dimension mismatch");
  auto prep = prepare(A);
  const auto& feats = model_->features();
  const std::size_t n = feats.size();
  const double n_terms = static_cast<double>(n * (n + 1) / 2 + 1);
  const double term_tol = 0.1 * floor_ / n_terms;

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& o = prep->own[i];
    const double a = feats[i].coeff;
    if (a == 0.0) continue;
    const double expo = v.dot(o.T * v);
    const double log_pref = std::log(a * a) + o.log_pref - expo;
    const SigmaHat& sh = spectrum_.sigma_hat(i);
    const double cut = std::min(sh.cutoff(), kFallbackRange);
    const double t0 = o.p.dot(v);
    double lo = -cut, hi = cut;
    if (o.kappa > 0.0) {
      const double w = kTail / std::sqrt(o.kappa);
      lo = std::max(lo, t0 - w);
      hi = std::min(hi, t0 + w);
    }
    if (!(hi > lo)) continue;
    const double gauss = o.kappa > 0.0 ? std::sqrt(kPi / o.kappa) : (hi - lo);
    const double bound_log = log_pref + 2.0 * std::log(sh.sup_bound()) + std::log(gauss);
    if (bound_log < std::log(term_tol)) continue;
    const double pref = std::exp(log_pref);
    quad::Options q;
    q.abs_tol = term_tol / pref;
    q.rel_tol = opt_.rel_tol;
    q.initial_panels = panels_for(hi - lo, ell_);
    q.max_panels = 100000;
    const double kap = o.kappa;
    auto r = quad::integrate(
        [&](double t) {
          const double dt = t - t0;
          return std::norm(sh(t)) * std::exp(-kap * dt * dt);
        },
        lo, hi, q);
    total += pref * r.value;
  }

  for (const auto& pr : prep->pairs) {
    const double ai = feats[pr.i].coeff, aj = feats[pr.j].coeff;
    if (ai == 0.0 || aj == 0.0) continue;
    const SigmaHat& si = spectrum_.sigma_hat(pr.i);
    const SigmaHat& sj = spectrum_.sigma_hat(pr.j);
    const double expo = v.dot(pr.T * v);
    const double log_pref = std::log(std::abs(ai * aj)) + pr.log_pref - expo;
    const double bound_log =
        log_pref + std::log(si.sup_bound()) + std::log(sj.sup_bound()) + pr.log_gauss_mass + std::log(2.0);
    if (bound_log < std::log(term_tol)) continue;

    const Eigen::Vector2d z0 = pr.P * v;
    const double kpp = pr.K(0, 0), kpq = pr.K(0, 1), kqq = pr.K(1, 1);
    const double schur = kpp - kpq * kpq / kqq;
    const double wp = kTail / std::sqrt(schur), wq = kTail / std::sqrt(kqq);
    const double cut_i = std::min(si.cutoff(), kFallbackRange), cut_j = std::min(sj.cutoff(), kFallbackRange);
    const double plo = std::max(-cut_i, z0[0] - wp), phi = std::min(cut_i, z0[0] + wp);
    if (!(phi > plo)) continue;

    const double pref = std::exp(log_pref);
    const double tol = term_tol / pref;
    quad::Options qi;
    qi.abs_tol = 0.1 * tol / (phi - plo);
    qi.rel_tol = opt_.rel_tol;
    qi.max_panels = 20000;
    quad::Options qo;
    qo.abs_tol = 0.5 * tol;
    qo.rel_tol = opt_.rel_tol;
    qo.initial_panels = panels_for(phi - plo, ell_);
    qo.max_panels = 20000;
    auto outer = quad::integrate(
        [&](double p) -> Complex {
          const double dp = p - z0[0];
          const double qc = z0[1] - kpq / kqq * dp;  // conditional center
          const double lo = std::max(-cut_j, qc - wq), hi = std::min(cut_j, qc + wq);
          if (!(hi > lo)) return 0.0;
          const Complex hp = si(p);
          if (hp == 0.0) return 0.0;
          qi.initial_panels = panels_for(hi - lo, ell_);
          auto inner = quad::integrate(
              [&](double q) -> Complex {
                const double dq = q - qc;
                return std::conj(sj(q)) * std::exp(-kqq * dq * dq);
              },
              lo, hi, qi);
          return hp * inner.value * std::exp(-schur * dp * dp);
        },
        plo, phi, qo);
    const double sign = (ai * aj) < 0 ? -1.0 : 1.0;
    total += 2.0 * sign * pref * outer.value.real();
  }

  const double value = std::max(0.0, total);
  if (trace_) {
    trace_->write(Json{{"v", to_json(v)}, {"A", [&] {
                         Json rows = Json::array();
                         for (Eigen::Index r = 0; r < A.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(A.row(r).transpose())));
                         return rows;
                       }()},
                       {"value", value}});
  }
  return value;
}

double quadrature_mass_1d(const std::function<double(double)>& fn, double ell, double v, double a,
                          const std::vector<double>& breakpoints) {
  if (!(ell > 0) || !(a > 0)) throw InputError("quadrature_mass_1d: need ell > 0 and a > 0");
  const double half = 9.0 / std::sqrt(a);  // window below exp(-81) outside
  quad::Options q;
  q.abs_tol = 1e-12 * ell * ell;
  q.rel_tol = 1e-9;
  // Transform features have width ~ 1/ell; start with a few panels per feature width.
  q.initial_panels = std::max(32, static_cast<int>(std::ceil(2 * half * ell * 4)));
  auto r = quad::integrate(
      [&](double y) {
        const double w = std::exp(-a * (y - v) * (y - v));
        return w < 1e-300 ? 0.0 : std::norm(function_hat_quadrature(fn, ell, y, breakpoints)) * w;
      },
      v - half, v + half, q);
  if (!r.converged) throw NumericalError("quadrature_mass_1d did not converge");
  return r.value;
}

}  // namespace ridgefind
