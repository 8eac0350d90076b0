// Independent reference computations used only by the tests. Nothing here
// calls the library's cost formulas.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "eoq/axioms.hpp"
#include "eoq/core.hpp"
#include "eoq/rules.hpp"

namespace eoq::testing {

struct RawItem {
  double d;
  double h;
  double c;
};

/// Average cost per time of ordering every `cycle` time units: the ordering
/// cost is paid unless the order price reaches `exemption_price`.
inline double cycle_cost(double holding, double acquisition, double a, double exemption_price,
                         double cycle) {
  const bool exempt = acquisition * cycle >= exemption_price;
  return (exempt ? 0.0 : a / cycle) + holding * cycle / 2.0;
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f1, f2, f(lo), f(hi)});
}

/// Minimum over cycle lengths by a log-spaced grid refined with golden
/// section on each side of the exemption breakpoint.
inline double grid_min_cost(const std::vector<RawItem>& items, double a, double exemption_price) {
  double holding = 0.0;
  double acquisition = 0.0;
  for (const auto& it : items) {
    holding += it.h * it.d;
    acquisition += it.c * it.d;
  }
  if (items.empty()) return 0.0;
  const double breakpoint = exemption_price / acquisition;
  auto f = [&](double t) { return cycle_cost(holding, acquisition, a, exemption_price, t); };
  // At the breakpoint the order price equals B; C * (B / C) may round below B.
  const double at_breakpoint = holding * breakpoint / 2.0;

  const double scale = std::max(breakpoint, std::sqrt(a / holding));
  const double lo = scale * 1e-6;
  const double hi = scale * 1e3;
  constexpr int kGrid = 4000;
  double best = std::numeric_limits<double>::infinity();
  double best_t = lo;
  for (int k = 0; k <= kGrid; ++k) {
    const double t = lo * std::pow(hi / lo, static_cast<double>(k) / kGrid);
    if (f(t) < best) {
      best = f(t);
      best_t = t;
    }
  }
  const double step = std::pow(hi / lo, 1.0 / kGrid);
  const double left = best_t / step;
  const double right = best_t * step;
  // Never let the refinement straddle the breakpoint.
  if (left < breakpoint && breakpoint < right) {
    best = std::min(best, golden_min(f, left, std::nextafter(breakpoint, 0.0)));
    best = std::min(best, golden_min(f, std::nextafter(breakpoint, right), right));
  } else {
    best = std::min(best, golden_min(f, left, right));
  }
  return std::min(best, at_breakpoint);
}

/// Basic model: average cost of order size q, ordering cost waived at q >= A.
inline double basic_cost(double d, double h, double a, double A, double q) {
  return (q >= A ? 0.0 : a * d / q) + h * q / 2.0;
}

/// Shapley value by enumerating all n! orders.
inline std::vector<double> permutation_shapley(std::size_t n,
                                               const std::function<double(unsigned)>& cost) {
  std::vector<double> phi(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  double count = 0.0;
  do {
    unsigned mask = 0;
    double prev = cost(0);
    for (std::size_t i : order) {
      mask |= 1u << i;
      const double now = cost(mask);
      phi[i] += now - prev;
      prev = now;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& v : phi) v /= count;
  return phi;
}

/// Coalition cost from raw item data via the cycle-length formulation:
/// the better of the unconstrained optimum (if not exempt) and the
/// breakpoint cycle.
inline double direct_cost(const std::vector<RawItem>& items, unsigned mask, double a,
                          double exemption_price) {
  double holding = 0.0;
  double acquisition = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (mask & (1u << i)) {
      holding += items[i].h * items[i].d;
      acquisition += items[i].c * items[i].d;
    }
  }
  if (holding == 0.0) return 0.0;
  const double breakpoint = exemption_price / acquisition;
  double best = holding * breakpoint / 2.0;
  const double free_cycle = std::sqrt(2.0 * a / holding);
  if (free_cycle < breakpoint) {
    best = std::min(best, cycle_cost(holding, acquisition, a, exemption_price, free_cycle));
  }
  return best;
}

inline std::vector<RawItem> raw_items(const Problem& p) {
  std::vector<RawItem> out;
  for (const auto& it : p.items()) {
    out.push_back({it.demand_rate, it.holding_cost_rate, it.acquisition_cost});
  }
  return out;
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t l, std::size_t r) { return v[l] < v[r]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Negative-control rules: each one is efficient (or nearly so) but breaks a
// specific property.

inline double total_cost_of(const Problem& p) { return hd_proportional(p).total; }

inline Allocation allocation_skeleton(const Problem& p) {
  Allocation x;
  for (const auto& it : p.items()) x.players.push_back(it.item_id);
  x.total = total_cost_of(p);
  return x;
}

/// Equal split tilted by position: any two players get different amounts.
inline AllocationRule symmetry_breaker() {
  return {"symmetry-breaker", [](const Problem& p) {
            Allocation x = allocation_skeleton(p);
            const double n = static_cast<double>(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) {
              x.values.push_back(x.total / n + 1e-3 * (static_cast<double>(i) - (n - 1) / 2));
            }
            return x;
          }};
}

/// Equal split: merging players changes everyone's share.
inline AllocationRule equal_split() {
  return {"equal-split", [](const Problem& p) {
            Allocation x = allocation_skeleton(p);
            x.values.assign(p.size(), x.total / static_cast<double>(p.size()));
            return x;
          }};
}

/// The item with the smallest H is paid 1 and the rest is spread by H.
inline AllocationRule smallest_paid() {
  return {"smallest-paid", [](const Problem& p) {
            Allocation x = hd_proportional(p);
            if (p.size() < 2) return x;
            std::size_t low = 0;
            for (std::size_t i = 1; i < p.size(); ++i) {
              if (p.items()[i].holding_demand() < p.items()[low].holding_demand()) low = i;
            }
            const double shift = x.values[low] + 1.0;
            x.values[low] -= shift;
            for (std::size_t i = 0; i < p.size(); ++i) {
              if (i != low) x.values[i] += shift / static_cast<double>(p.size() - 1);
            }
            return x;
          }};
}

/// Shares inversely proportional to H: reverses the hd ranking.
inline AllocationRule inverse_hd() {
  return {"inverse-hd", [](const Problem& p) {
            Allocation x = allocation_skeleton(p);
            double norm = 0.0;
            for (const auto& it : p.items()) norm += 1.0 / it.holding_demand();
            for (const auto& it : p.items()) {
              x.values.push_back(x.total * (1.0 / it.holding_demand()) / norm);
            }
            return x;
          }};
}

/// The first item pays the whole grand cost: outside the core whenever
/// n >= 2 since a lone item would rather order alone.
inline AllocationRule first_pays_all() {
  return {"first-pays-all", [](const Problem& p) {
            Allocation x = allocation_skeleton(p);
            x.values.assign(p.size(), 0.0);
            x.values.front() = x.total;
            return x;
          }};
}

}  // namespace eoq::testing
