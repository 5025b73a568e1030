#include "ridgefind/estimators.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "ridgefind/error.hpp"
#include "ridgefind/log.hpp"
#include "ridgefind/parallel.hpp"

namespace ridgefind {

namespace {

constexpr double kPi = std::numbers::pi;

std::function<void(const std::string&)>& warning_sink() {
  static std::function<void(const std::string&)> sink;
  return sink;
}

// Returns sum_j w_j Re z_j and advances z_j by r_j, four interleaved partial sums.
double sweep_step(double* __restrict zr, double* __restrict zi, const double* __restrict rr,
                  const double* __restrict ri, const double* __restrict w, std::size_t n) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t q = 0;
  for (; q + 4 <= n; q += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const std::size_t j = q + l;
      s[l] += w[j] * zr[j];
      const double nr = zr[j] * rr[j] - zi[j] * ri[j];
      const double ni = zr[j] * ri[j] + zi[j] * rr[j];
      zr[j] = nr;
      zi[j] = ni;
    }
  }
  for (; q < n; ++q) {
    s[0] += w[q] * zr[q];
    const double nr = zr[q] * rr[q] - zi[q] * ri[q];
    const double ni = zr[q] * ri[q] + zi[q] * rr[q];
    zr[q] = nr;
    zi[q] = ni;
  }
  return (s[0] + s[1]) + (s[2] + s[3]);
}

std::vector<double> matrix_key(const Eigen::MatrixXd& A) {
  return std::vector<double>(A.data(), A.data() + A.size());
}

std::uint64_t hash_weight(const Eigen::VectorXd& v, const Eigen::MatrixXd& A) {
  const std::uint64_t h = hash_doubles(0x5eedULL, v.data(), static_cast<std::size_t>(v.size()));
  return hash_doubles(h, A.data(), static_cast<std::size_t>(A.size()));
}

std::uint64_t block_count(std::uint64_t m) { return (m + kSampleBlock - 1) / kSampleBlock; }

// Transform from standard normals to N(0, 2A): U diag(sqrt(2 lambda)).
Eigen::MatrixXd difference_factor(const GaussianWeight& w) {
  Eigen::VectorXd s = (2.0 * w.eigenvalues().array()).sqrt().matrix();
  return w.eigenvectors() * s.asDiagonal();
}

bool uniformly_spaced(const std::vector<double>& cs) {
  if (cs.size() < 3) return false;
  const double h = cs[1] - cs[0];
  if (!(h != 0)) return false;
  for (std::size_t k = 2; k < cs.size(); ++k)
    if (std::abs((cs[k] - cs[0]) - k * h) > 1e-9 * std::max(1.0, std::abs(cs[k]))) return false;
  return true;
}

Json weight_trace(const Eigen::VectorXd& v, const GaussianWeight& w, std::uint64_t m, double value, double radius) {
  return Json{{"v", to_json(v)},
              {"A_eigenvalues", to_json(w.eigenvalues())},
              {"A_eigenvectors", [&] {
                 Json cols = Json::array();
                 for (Eigen::Index k = 0; k < w.eigenvectors().cols(); ++k)
                   cols.push_back(to_json(w.eigenvectors().col(k)));
                 return cols;
               }()},
              {"m", m},
              {"value", value},
              {"radius", radius}};
}

}  // namespace

void warn(const std::string& message) {
  if (warning_sink()) warning_sink()(message);
  else std::cerr << "warning: " << message << '\n';
}

void set_warning_sink(std::function<void(const std::string&)> sink) { warning_sink() = std::move(sink); }

GaussianWeight::GaussianWeight(Eigen::VectorXd v, Eigen::MatrixXd A) : v_(std::move(v)), A_(std::move(A)) {
  const Eigen::Index d = v_.size();
  if (A_.rows() != d || A_.cols() != d) throw InputError("GaussianWeight: A must be d x d");
  const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("GaussianWeight: A is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A_ + A_.transpose()));
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (evals_[k] < -1e-12 * scale) throw InputError("GaussianWeight: A is not positive semidefinite");
    evals_[k] = std::max(0.0, evals_[k]);
  }
}

SmoothingScale::SmoothingScale(double l, ScaleRole r) : ell(l), role(r) {
  if (!(l > 0) || !std::isfinite(l)) throw InputError("smoothing scale must be positive");
}

double weight_radius(double ell, std::size_t d, double eps, double delta, std::uint64_t m) {
  return 8.0 * std::pow(kPi * ell * ell, 0.5 * static_cast<double>(d)) *
         (eps + std::sqrt(2.0 * std::log(8.0 / delta) / static_cast<double>(m)));
}

double value_radius(double ell, std::size_t d, double eps, double delta, std::uint64_t m) {
  return 4.0 * std::pow(ell, static_cast<double>(d)) *
         (eps + std::sqrt(2.0 * std::log(8.0 / delta) / static_cast<double>(m)));
}

namespace {

std::uint64_t invert_radius(double prefactor, double tau, double eps, double delta, const SampleBudget& budget,
                            const char* what) {
  if (!(tau > 0) || !(delta > 0 && delta < 1)) throw InputError(std::string(what) + ": need tau > 0 and delta in (0,1)");
  const double slack = tau / prefactor - eps;
  if (!(slack > 0)) {
    std::ostringstream os;
    os << what << ": tolerance " << tau << " is below the noise floor " << prefactor * eps << "; no sample count suffices";
    throw BudgetError(os.str(), 0);
  }
  const double need = 2.0 * std::log(8.0 / delta) / (slack * slack);
  if (need > static_cast<double>(budget.max_samples)) {
    const std::uint64_t req = need > 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(std::ceil(need));
    std::ostringstream os;
    os << what << ": required m = " << req << " exceeds the cap " << budget.max_samples;
    throw BudgetError(os.str(), req);
  }
  std::uint64_t m = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(need)));
  return m;
}

}  // namespace

std::uint64_t weight_samples_for(double tau, double ell, std::size_t d, double eps, double delta,
                                 const SampleBudget& budget) {
  const double pre = 8.0 * std::pow(kPi * ell * ell, 0.5 * static_cast<double>(d));
  std::uint64_t m = invert_radius(pre, tau, eps, delta, budget, "mass oracle");
  while (m > 1 && weight_radius(ell, d, eps, delta, m - 1) <= tau) --m;
  while (weight_radius(ell, d, eps, delta, m) > tau) ++m;
  return m;
}

std::uint64_t value_samples_for(double tau, double ell, std::size_t d, double eps, double delta,
                                const SampleBudget& budget) {
  const double pre = 4.0 * std::pow(ell, static_cast<double>(d));
  std::uint64_t m = invert_radius(pre, tau, eps, delta, budget, "value oracle");
  while (m > 1 && value_radius(ell, d, eps, delta, m - 1) <= tau) --m;
  while (value_radius(ell, d, eps, delta, m) > tau) ++m;
  return m;
}

Estimate est_weight(QueryAccess& oracle, const SmoothingScale& scale, const GaussianWeight& w, std::uint64_t m,
                    const RngStream& rng, double delta, int threads) {
  if (m < 1) throw InputError("est_weight: m must be >= 1");
  const std::size_t d = oracle.dim();
  if (w.dim() != d) throw InputError("est_weight: dimension mismatch");
  const double ell = scale.ell;
  const Eigen::MatrixXd factor = difference_factor(w);
  const Eigen::VectorXd& v = w.v();
  const double zsd = ell / std::sqrt(2.0);
  const double inv4l2 = 1.0 / (4 * ell * ell);
  const std::uint64_t nb = block_count(m);
  std::vector<std::complex<double>> partial(nb);

  parallel_for(nb, threads, [&](std::size_t b) {
    auto eng = rng.engine(b);
    std::normal_distribution<double> normal;
    const std::uint64_t lo = b * kSampleBlock, hi = std::min<std::uint64_t>(m, lo + kSampleBlock);
    Eigen::VectorXd g(d), z(d), diff(d), xm(d), xp(d);
    double re = 0.0, im = 0.0;
    for (std::uint64_t j = lo; j < hi; ++j) {
      for (std::size_t k = 0; k < d; ++k) g[k] = normal(eng);
      for (std::size_t k = 0; k < d; ++k) z[k] = zsd * normal(eng);
      diff.noalias() = factor * g;
      xm = z - 0.5 * diff;
      xp = z + 0.5 * diff;
      const double prod = oracle.query_raw(xm.data()) * oracle.query_raw(xp.data());
      const double amp = std::exp(-diff.squaredNorm() * inv4l2) * prod;
      const double phase = v.dot(diff);
      re += amp * std::cos(phase);
      im -= amp * std::sin(phase);
    }
    partial[b] = {re, im};
  });

  std::complex<double> sum = 0.0;
  for (const auto& p : partial) sum += p;
  Estimate e;
  e.m = m;
  e.delta = delta;
  e.value = sum * (std::pow(kPi * ell * ell, 0.5 * static_cast<double>(d)) / static_cast<double>(m));
  e.radius = weight_radius(ell, d, oracle.eps(), delta, m);
  return e;
}

Estimate est_val(QueryAccess& oracle, const SmoothingScale& scale, const Eigen::VectorXd& y, std::uint64_t m,
                 const RngStream& rng, double delta, int threads) {
  if (m < 1) throw InputError("est_val: m must be >= 1");
  const std::size_t d = oracle.dim();
  if (static_cast<std::size_t>(y.size()) != d) throw InputError("est_val: dimension mismatch");
  const double ell = scale.ell;
  const std::uint64_t nb = block_count(m);
  std::vector<std::complex<double>> partial(nb);
  parallel_for(nb, threads, [&](std::size_t b) {
    auto eng = rng.engine(b);
    std::normal_distribution<double> normal;
    const std::uint64_t lo = b * kSampleBlock, hi = std::min<std::uint64_t>(m, lo + kSampleBlock);
    Eigen::VectorXd x(d);
    double re = 0.0, im = 0.0;
    for (std::uint64_t j = lo; j < hi; ++j) {
      for (std::size_t k = 0; k < d; ++k) x[k] = ell * normal(eng);
      const double f = oracle.query_raw(x.data());
      const double phase = y.dot(x);
      re += f * std::cos(phase);
      im -= f * std::sin(phase);
    }
    partial[b] = {re, im};
  });
  std::complex<double> sum = 0.0;
  for (const auto& p : partial) sum += p;
  Estimate e;
  e.m = m;
  e.delta = delta;
  e.value = sum * (std::pow(ell, static_cast<double>(d)) / static_cast<double>(m));
  e.radius = value_radius(ell, d, oracle.eps(), delta, m);
  return e;
}

double fourier_mass_oracle(QueryAccess& oracle, const SmoothingScale& scale, const GaussianWeight& w, double tau,
                           double delta, const RngStream& rng, const SampleBudget& budget, int threads) {
  const std::size_t d = oracle.dim();
  const double floor = 10.0 * oracle.eps() * std::pow(kPi * scale.ell * scale.ell, 0.5 * static_cast<double>(d));
  if (tau < floor) {
    std::ostringstream os;
    os << "mass oracle tolerance " << tau << " is below 10 eps (pi ell^2)^{d/2} = " << floor;
    warn(os.str());
  }
  const std::uint64_t m = weight_samples_for(tau, scale.ell, d, oracle.eps(), delta, budget);
  return est_weight(oracle, scale, w, m, rng, delta, threads).value.real();
}

std::complex<double> fourier_value_oracle(QueryAccess& oracle, const SmoothingScale& scale, const Eigen::VectorXd& y,
                                          double tau, double delta, const RngStream& rng, const SampleBudget& budget,
                                          int threads) {
  const std::uint64_t m = value_samples_for(tau, scale.ell, oracle.dim(), oracle.eps(), delta, budget);
  return est_val(oracle, scale, y, m, rng, delta, threads).value;
}

void TraceLog::write(const Json& record) {
  std::lock_guard<std::mutex> lock(mu_);
  append_json_line(path_, record);
}

void MassOracle::mass_line(const Eigen::VectorXd& base, const Eigen::VectorXd& dir, const std::vector<double>& cs,
                           const Eigen::MatrixXd& A, std::vector<double>& out) {
  out.resize(cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) out[k] = mass(base + cs[k] * dir, A);
}

void ValueOracle::value_ray(const Eigen::VectorXd& u, const std::vector<double>& ts,
                            std::vector<std::complex<double>>& out) {
  out.resize(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) out[k] = value(ts[k] * u);
}

// ---------------------------------------------------------------------------
// Monte-Carlo mass oracle

McMassOracle::McMassOracle(QueryAccess& oracle, double ell, McOracleOptions opt, RngStream rng)
    : oracle_(oracle), ell_(ell), opt_(opt), rng_(rng) {
  const std::size_t d = oracle_.dim();
  scale_ = std::pow(kPi * ell * ell, 0.5 * static_cast<double>(d));
  if (opt_.samples > 0) {
    m_ = opt_.samples;
    if (m_ > opt_.budget.max_samples) {
      std::ostringstream os;
      os << "mass oracle: m = " << m_ << " exceeds the cap " << opt_.budget.max_samples;
      throw BudgetError(os.str(), m_);
    }
  } else {
    if (opt_.tau < 10.0 * oracle_.eps() * scale_) {
      std::ostringstream os;
      os << "mass oracle tolerance " << opt_.tau << " is below 10 eps (pi ell^2)^{d/2} = " << 10.0 * oracle_.eps() * scale_;
      warn(os.str());
    }
    m_ = weight_samples_for(opt_.tau, ell, d, oracle_.eps(), opt_.delta, opt_.budget);
  }
}

double McMassOracle::radius() const { return weight_radius(ell_, oracle_.dim(), oracle_.eps(), opt_.delta, m_); }

std::shared_ptr<const McMassOracle::Batch> McMassOracle::batch_for(const Eigen::MatrixXd& A) {
  // The first caller for a window builds its batch; concurrent callers wait for it,
  // so each batch is queried exactly once whatever the thread count.
  std::promise<std::shared_ptr<const Batch>> promise;
  std::shared_future<std::shared_ptr<const Batch>> pending;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = batches_.try_emplace(matrix_key(A));
    if (inserted)
      it->second = promise.get_future().share();
    else
      pending = it->second;
  }
  if (pending.valid()) return pending.get();
  try {
    auto built = build_batch(A);
    promise.set_value(built);
    return built;
  } catch (...) {
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::shared_ptr<const McMassOracle::Batch> McMassOracle::build_batch(const Eigen::MatrixXd& A) {
  const std::size_t d = oracle_.dim();
  GaussianWeight w(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)), A);
  const Eigen::MatrixXd factor = difference_factor(w);
  const RngStream stream = rng_.child(hash_doubles(0xba7c4ULL, A.data(), static_cast<std::size_t>(A.size())));
  auto batch = std::make_shared<Batch>();
  batch->delta.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(d));
  batch->weight.resize(m_);
  const double zsd = ell_ / std::sqrt(2.0);
  const double inv4l2 = 1.0 / (4 * ell_ * ell_);
  parallel_for(block_count(m_), opt_.threads, [&](std::size_t b) {
    auto eng = stream.engine(b);
    std::normal_distribution<double> normal;
    const std::uint64_t lo = b * kSampleBlock, hi = std::min<std::uint64_t>(m_, lo + kSampleBlock);
    Eigen::VectorXd g(d), z(d), diff(d), xm(d), xp(d);
    for (std::uint64_t j = lo; j < hi; ++j) {
      for (std::size_t k = 0; k < d; ++k) g[k] = normal(eng);
      for (std::size_t k = 0; k < d; ++k) z[k] = zsd * normal(eng);
      diff.noalias() = factor * g;
      xm = z - 0.5 * diff;
      xp = z + 0.5 * diff;
      const double prod = oracle_.query_raw(xm.data()) * oracle_.query_raw(xp.data());
      batch->delta.row(static_cast<Eigen::Index>(j)) = diff.transpose();
      batch->weight[j] = std::exp(-diff.squaredNorm() * inv4l2) * prod;
    }
  });
  return batch;
}

std::shared_ptr<const McMassOracle::Rotation> McMassOracle::rotation_for(const Eigen::MatrixXd& A, const Batch& batch,
                                                                        const Eigen::VectorXd& dir, double h) {
  auto key = matrix_key(A);
  key.insert(key.end(), dir.data(), dir.data() + dir.size());
  key.push_back(h);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = rotations_.find(key);
    if (it != rotations_.end()) return it->second;
  }
  const Eigen::VectorXd b = batch.delta * dir;
  auto rot = std::make_shared<Rotation>();
  rot->re.resize(m_);
  rot->im.resize(m_);
  for (std::size_t j = 0; j < m_; ++j) {
    rot->re[j] = std::cos(h * b[static_cast<Eigen::Index>(j)]);
    rot->im[j] = std::sin(h * b[static_cast<Eigen::Index>(j)]);
  }
  std::lock_guard<std::mutex> lock(mu_);
  if (rotations_.size() >= 16) rotations_.clear();
  auto [it, inserted] = rotations_.emplace(std::move(key), std::move(rot));
  return it->second;
}

double McMassOracle::mass(const Eigen::VectorXd& v, const Eigen::MatrixXd& A) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  double value;
  if (opt_.mode == SamplingMode::kPerCall) {
    GaussianWeight w(v, A);
    const RngStream stream = rng_.child(hash_weight(v, A));
    value = est_weight(oracle_, SmoothingScale(ell_, ScaleRole::kDirectionSearch), w, m_, stream, opt_.delta, 1)
                .value.real();
  } else {
    auto batch = batch_for(A);
    const Eigen::VectorXd phase = batch->delta * v;
    double s = 0.0;
    for (std::uint64_t j = 0; j < m_; ++j) s += batch->weight[j] * std::cos(phase[static_cast<Eigen::Index>(j)]);
    value = scale_ * s / static_cast<double>(m_);
  }
  if (trace_) trace_->write(weight_trace(v, GaussianWeight(v, A), m_, value, radius()));
  return value;
}

void McMassOracle::mass_line(const Eigen::VectorXd& base, const Eigen::VectorXd& dir, const std::vector<double>& cs,
                             const Eigen::MatrixXd& A, std::vector<double>& out) {
  if (opt_.mode == SamplingMode::kPerCall || trace_ || !uniformly_spaced(cs)) {
    MassOracle::mass_line(base, dir, cs, A, out);
    return;
  }
  calls_.fetch_add(cs.size(), std::memory_order_relaxed);
  auto batch = batch_for(A);
  const std::size_t m = m_;
  const double h = cs[1] - cs[0];
  auto rot = rotation_for(A, *batch, dir, h);
  // z_j = exp(i (a_j + c b_j)), advanced by the rotation exp(i h b_j) per step.
  const Eigen::VectorXd a = batch->delta * (base + cs[0] * dir);
  thread_local std::vector<double> zr, zi;
  zr.resize(m);
  zi.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    zr[j] = std::cos(a[static_cast<Eigen::Index>(j)]);
    zi[j] = std::sin(a[static_cast<Eigen::Index>(j)]);
  }
  const std::vector<double>& rr = rot->re;
  const std::vector<double>& ri = rot->im;
  const std::vector<double>& wt = batch->weight;
  // Chunks of samples stay cache resident while every c is swept; per-chunk
  // partial sums are added in a fixed order so the result is thread-count free.
  constexpr std::size_t kChunk = 2048;
  const std::size_t nk = cs.size();
  std::vector<double> partial(nk * ((m + kChunk - 1) / kChunk), 0.0);
  for (std::size_t lo = 0, ci = 0; lo < m; lo += kChunk, ++ci) {
    const std::size_t hi = std::min(m, lo + kChunk);
    for (std::size_t k = 0; k < nk; ++k)
      partial[ci * nk + k] = sweep_step(zr.data() + lo, zi.data() + lo, rr.data() + lo, ri.data() + lo, wt.data() + lo, hi - lo);
  }
  out.assign(nk, 0.0);
  const double norm = scale_ / static_cast<double>(m);
  for (std::size_t k = 0; k < nk; ++k) {
    double s = 0.0;
    for (std::size_t ci = 0; ci * kChunk < m; ++ci) s += partial[ci * nk + k];
    out[k] = norm * s;
  }
}

// ---------------------------------------------------------------------------
// Monte-Carlo value oracle

McValueOracle::McValueOracle(QueryAccess& oracle, double ell, McOracleOptions opt, RngStream rng)
    : oracle_(oracle), ell_(ell), opt_(opt), rng_(rng) {
  if (opt_.samples > 0) {
    m_ = opt_.samples;
    if (m_ > opt_.budget.max_samples) {
      std::ostringstream os;
      os << "value oracle: m = " << m_ << " exceeds the cap " << opt_.budget.max_samples;
      throw BudgetError(os.str(), m_);
    }
  } else {
    m_ = value_samples_for(opt_.tau, ell, oracle_.dim(), oracle_.eps(), opt_.delta, opt_.budget);
  }
}

std::shared_ptr<const McValueOracle::Batch> McValueOracle::batch() {
  std::lock_guard<std::mutex> lock(mu_);
  if (batch_) return batch_;
  const std::size_t d = oracle_.dim();
  auto b = std::make_shared<Batch>();
  b->x.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(d));
  b->f.resize(m_);
  const RngStream stream = rng_.child(0x7a1eULL);
  parallel_for(block_count(m_), opt_.threads, [&](std::size_t blk) {
    auto eng = stream.engine(blk);
    std::normal_distribution<double> normal;
    const std::uint64_t lo = blk * kSampleBlock, hi = std::min<std::uint64_t>(m_, lo + kSampleBlock);
    Eigen::VectorXd x(d);
    for (std::uint64_t j = lo; j < hi; ++j) {
      for (std::size_t k = 0; k < d; ++k) x[k] = ell_ * normal(eng);
      b->x.row(static_cast<Eigen::Index>(j)) = x.transpose();
      b->f[j] = oracle_.query_raw(x.data());
    }
  });
  batch_ = b;
  return batch_;
}

std::complex<double> McValueOracle::value(const Eigen::VectorXd& y) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  if (opt_.mode == SamplingMode::kPerCall) {
    const RngStream stream = rng_.child(hash_doubles(0x7a1ULL, y.data(), static_cast<std::size_t>(y.size())));
    return est_val(oracle_, SmoothingScale(ell_, ScaleRole::kFunctionRecovery), y, m_, stream, opt_.delta, 1).value;
  }
  auto b = batch();
  const Eigen::VectorXd phase = b->x * y;
  double re = 0, im = 0;
  for (std::uint64_t j = 0; j < m_; ++j) {
    re += b->f[j] * std::cos(phase[static_cast<Eigen::Index>(j)]);
    im -= b->f[j] * std::sin(phase[static_cast<Eigen::Index>(j)]);
  }
  const double norm = std::pow(ell_, static_cast<double>(oracle_.dim())) / static_cast<double>(m_);
  return {re * norm, im * norm};
}

void McValueOracle::value_ray(const Eigen::VectorXd& u, const std::vector<double>& ts,
                              std::vector<std::complex<double>>& out) {
  if (opt_.mode == SamplingMode::kPerCall || !uniformly_spaced(ts)) {
    ValueOracle::value_ray(u, ts, out);
    return;
  }
  calls_.fetch_add(ts.size(), std::memory_order_relaxed);
  auto b = batch();
  const std::size_t m = m_;
  const Eigen::VectorXd s = b->x * u;
  const double h = ts[1] - ts[0];
  std::vector<double> zr(m), zi(m), rr(m), ri(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double sj = s[static_cast<Eigen::Index>(j)];
    zr[j] = std::cos(ts[0] * sj);
    zi[j] = -std::sin(ts[0] * sj);
    rr[j] = std::cos(h * sj);
    ri[j] = -std::sin(h * sj);
  }
  const double norm = std::pow(ell_, static_cast<double>(oracle_.dim())) / static_cast<double>(m);
  out.assign(ts.size(), 0.0);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double re0 = 0, re1 = 0, im0 = 0, im1 = 0;
    std::size_t j = 0;
    for (; j + 2 <= m; j += 2) {
      re0 += b->f[j] * zr[j];
      im0 += b->f[j] * zi[j];
      re1 += b->f[j + 1] * zr[j + 1];
      im1 += b->f[j + 1] * zi[j + 1];
    }
    for (; j < m; ++j) {
      re0 += b->f[j] * zr[j];
      im0 += b->f[j] * zi[j];
    }
    out[k] = {norm * (re0 + re1), norm * (im0 + im1)};
    if (k + 1 == ts.size()) break;
    for (std::size_t q = 0; q < m; ++q) {
      const double nr = zr[q] * rr[q] - zi[q] * ri[q];
      const double ni = zr[q] * ri[q] + zi[q] * rr[q];
      zr[q] = nr;
      zi[q] = ni;
    }
  }
}

// ---------------------------------------------------------------------------

QuadratureValueOracle::QuadratureValueOracle(std::shared_ptr<const SumOfFeaturesModel> model, double ell,
                                             double t_table)
    : spectrum_(std::move(model), ell, t_table) {}

std::complex<double> QuadratureValueOracle::value(const Eigen::VectorXd& y) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  if (static_cast<std::size_t>(y.size()) != dim()) throw InputError("value oracle: dimension mismatch");
  return spectrum_(y);
}

}  // namespace ridgefind
