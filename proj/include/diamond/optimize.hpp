#pragma once

// Derivative-free optimizers used by the bound evaluators.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace diamond {

/// Worker count: DIAMOND_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DIAMOND_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(i) for i in [0, n). Results must be written to index-addressed slots,
/// so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}

struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section search for a minimum of f on [lo, hi], stopping when the bracket is below tol.
inline ScalarMin golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                                         double tol = 1e-9, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  ScalarMin best{c, fc};
  if (fd < best.value) best = {d, fd};
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < best.value) best = {x, fx};
  }
  return best;
}

struct BoxMax {
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
};

struct NelderMeadOptions {
  double initial_step = 0.05;
  double ftol = 1e-12;
  double xtol = 1e-10;
  int max_evals = 4000;
  int restarts = 4;
};

/// Nelder-Mead maximization inside [lo, hi]^d. Points are clamped to the box;
/// the objective may return -infinity for infeasible points.
inline BoxMax nelder_mead_maximize(const std::function<double(const std::vector<double>&)>& f,
                                   std::vector<double> start, double lo, double hi,
                                   const NelderMeadOptions& opt = {}) {
  const std::size_t d = start.size();
  auto clamp = [&](std::vector<double> x) {
    for (auto& v : x) v = std::clamp(v, lo, hi);
    return x;
  };
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };

  BoxMax best{clamp(start), 0.0};
  best.value = eval(best.x);

  double step = opt.initial_step;
  for (int round = 0; round <= opt.restarts; ++round) {
    std::vector<std::vector<double>> simplex{best.x};
    std::vector<double> vals{best.value};
    for (std::size_t i = 0; i < d; ++i) {
      auto p = best.x;
      p[i] += (p[i] + step <= hi) ? step : -step;
      p = clamp(p);
      simplex.push_back(p);
      vals.push_back(eval(p));
    }
    const double round_start = best.value;
    while (evals < opt.max_evals) {
      std::vector<std::size_t> order(d + 1);
      for (std::size_t i = 0; i <= d; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
      std::vector<std::vector<double>> s2;
      std::vector<double> v2;
      for (auto i : order) {
        s2.push_back(simplex[i]);
        v2.push_back(vals[i]);
      }
      simplex.swap(s2);
      vals.swap(v2);

      double xspread = 0.0;
      for (std::size_t i = 1; i <= d; ++i)
        for (std::size_t k = 0; k < d; ++k) xspread = std::max(xspread, std::abs(simplex[i][k] - simplex[0][k]));
      const bool finite = std::isfinite(vals[0]) && std::isfinite(vals[d]);
      if (finite && std::abs(vals[0] - vals[d]) <= opt.ftol && xspread <= 1e3 * opt.xtol) break;
      if (xspread <= opt.xtol) break;

      std::vector<double> centroid(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);
      auto along = [&](double t) {
        std::vector<double> p(d);
        for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (simplex[d][k] - centroid[k]);
        return clamp(p);
      };
      auto xr = along(-1.0);
      double fr = eval(xr);
      if (fr > vals[0]) {
        auto xe = along(-2.0);
        double fe = eval(xe);
        if (fe > fr) {
          simplex[d] = xe;
          vals[d] = fe;
        } else {
          simplex[d] = xr;
          vals[d] = fr;
        }
      } else if (fr > vals[d - 1]) {
        simplex[d] = xr;
        vals[d] = fr;
      } else {
        const bool outside = fr > vals[d];
        auto xc = along(outside ? -0.5 : 0.5);
        double fc = eval(xc);
        if (fc > std::max(fr, vals[d])) {
          simplex[d] = xc;
          vals[d] = fc;
        } else {
          for (std::size_t i = 1; i <= d; ++i) {
            for (std::size_t k = 0; k < d; ++k) simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
            simplex[i] = clamp(simplex[i]);
            vals[i] = eval(simplex[i]);
          }
        }
      }
    }
    for (std::size_t i = 0; i <= d; ++i)
      if (vals[i] > best.value) best = {simplex[i], vals[i]};
    if (evals >= opt.max_evals) break;
    if (round > 0 && best.value <= round_start + opt.ftol) break;
    step *= 0.5;
  }
  return best;
}

struct GridMaxOptions {
  std::size_t points_per_axis = 41;
  std::size_t top_k = 5;
  NelderMeadOptions refine{};
};

/// Uniform grid over [0,1]^d, then Nelder-Mead refinement from the best distinct grid points.
/// The returned value is never below the best grid value.
inline BoxMax grid_then_refine_maximize(const std::function<double(const std::vector<double>&)>& f,
                                        std::size_t dims, const GridMaxOptions& opt = {}) {
  const std::size_t res = std::max<std::size_t>(opt.points_per_axis, 2);
  std::size_t total = 1;
  for (std::size_t i = 0; i < dims; ++i) total *= res;
  auto point = [&](std::size_t flat) {
    std::vector<double> x(dims);
    for (std::size_t k = dims; k-- > 0;) {
      x[k] = static_cast<double>(flat % res) / static_cast<double>(res - 1);
      flat /= res;
    }
    return x;
  };
  std::vector<double> vals(total);
  parallel_for(total, [&](std::size_t i) {
    const double v = f(point(i));
    vals[i] = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  });

  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });

  BoxMax best{point(order[0]), vals[order[0]]};
  if (!std::isfinite(best.value)) return best;

  const std::size_t k = std::min(opt.top_k, total);
  std::vector<BoxMax> refined(k);
  NelderMeadOptions nm = opt.refine;
  nm.initial_step = 1.0 / static_cast<double>(res - 1);
  parallel_for(k, [&](std::size_t i) {
    if (!std::isfinite(vals[order[i]])) {
      refined[i] = {point(order[i]), vals[order[i]]};
      return;
    }
    refined[i] = nelder_mead_maximize(f, point(order[i]), 0.0, 1.0, nm);
  });
  for (const auto& r : refined)
    if (r.value > best.value) best = r;
  return best;
}

}  // namespace diamond
