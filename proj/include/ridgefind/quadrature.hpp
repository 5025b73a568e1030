#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration for real or complex
// integrands on finite intervals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <type_traits>
#include <utility>
#include <vector>

namespace ridgefind::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  int initial_panels = 1;
  int max_panels = 200000;
  std::vector<double> breakpoints;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  long evaluations = 0;
  int panels = 0;
  bool converged = false;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& x) { return std::abs(x); }

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One 15-point Kronrod rule with embedded 7-point Gauss estimate and the
// usual error heuristic.
template <class F, class T>
Panel<T> kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T resk = fc * kWgk[7];
  T resg = fc * kWg[3];
  double resabs = magnitude(fc) * kWgk[7];
  T fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    fv1[j] = f(c - dx);
    fv2[j] = f(c + dx);
    resk += (fv1[j] + fv2[j]) * kWgk[j];
    resabs += (magnitude(fv1[j]) + magnitude(fv2[j])) * kWgk[j];
    if (j % 2 == 1) resg += (fv1[j] + fv2[j]) * kWg[j / 2];
  }
  const T mean = resk * 0.5;
  double resasc = kWgk[7] * magnitude(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (magnitude(fv1[j] - mean) + magnitude(fv2[j] - mean));
  const double ah = std::abs(h);
  resasc *= ah;
  resabs *= ah;
  double err = magnitude((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double kEpmach = 2.220446049250313e-16;
  if (resabs > 1e-290 / (50 * kEpmach)) err = std::max(50 * kEpmach * resabs, err);
  return {a, b, resk * h, err};
}

}  // namespace detail

template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {}) {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  Result<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);

  std::vector<double> cuts{lo};
  for (double p : opt.breakpoints)
    if (p > lo && p < hi) cuts.push_back(p);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<detail::Panel<T>> heap;
  T total{};
  double total_err = 0.0;
  const int n0 = std::max(1, opt.initial_panels);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double len = cuts[s + 1] - cuts[s];
    const int k = std::max(1, static_cast<int>(std::ceil(n0 * len / (hi - lo))));
    for (int i = 0; i < k; ++i) {
      const double pa = cuts[s] + len * i / k;
      const double pb = (i + 1 == k) ? cuts[s + 1] : cuts[s] + len * (i + 1) / k;
      auto p = detail::kronrod15<decltype(f), T>(f, pa, pb);
      out.evaluations += 15;
      total += p.value;
      total_err += p.error;
      heap.push(p);
    }
  }

  while (total_err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total))) {
    if (static_cast<int>(heap.size()) >= opt.max_panels) break;
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at double precision
    heap.pop();
    auto l = detail::kronrod15<decltype(f), T>(f, worst.a, mid);
    auto r = detail::kronrod15<decltype(f), T>(f, mid, worst.b);
    out.evaluations += 30;
    total += (l.value + r.value) - worst.value;
    total_err += (l.error + r.error) - worst.error;
    heap.push(l);
    heap.push(r);
  }

  // Re-sum to shed the drift of incremental updates.
  T sum{};
  double err = 0.0;
  out.panels = static_cast<int>(heap.size());
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum * sign;
  out.error = err;
  out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum)) * (1 + 1e-12);
  return out;
}

}  // namespace ridgefind::quad
