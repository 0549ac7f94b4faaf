#include "spex/empirical/chi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spex/common/error.hpp"
#include "spex/common/log.hpp"
#include "spex/common/parallel.hpp"

namespace spex::empirical {

std::vector<double> ecdf(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> out(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank / static_cast<double>(n + 1);
    i = j + 1;
  }
  return out;
}

std::optional<double> chi_q(const std::vector<double>& x1, const std::vector<double>& x2, double q) {
  if (x1.size() != x2.size()) throw DataError("chi_q: series lengths differ");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("chi_q: q must lie in (0, 1)");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    if (std::isnan(x1[i]) || std::isnan(x2[i])) continue;
    a.push_back(x1[i]);
    b.push_back(x2[i]);
  }
  if (a.size() < 20) throw DataError("chi_q: at least 20 complete pairs are required");
  const auto fa = ecdf(a), fb = ecdf(b);
  std::size_t joint = 0, marginal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (fb[i] > q) {
      ++marginal;
      if (fa[i] > q) ++joint;
    }
  }
  if (marginal == 0) return std::nullopt;
  return static_cast<double>(joint) / static_cast<double>(marginal);
}

double sample_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ChiCurve binned_chi(const Eigen::MatrixXd& data, const Eigen::MatrixXd& distances, double q, int n_bins,
                    const std::vector<int>& time_months, const std::set<int>& months, std::string season) {
  const Eigen::Index n_sites = data.cols();
  if (distances.rows() != n_sites || distances.cols() != n_sites) throw DataError("binned_chi: distance matrix size mismatch");
  if (n_bins < 1) throw ConfigError("binned_chi: n_bins must be positive");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    if (!months.empty()) {
      if (time_months.size() != static_cast<std::size_t>(data.rows())) throw DataError("binned_chi: month per time required");
      if (!months.count(time_months[t])) continue;
    }
    rows.push_back(t);
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index j = 0; j < n_sites; ++j) {
    for (Eigen::Index k = j + 1; k < n_sites; ++k) pairs.emplace_back(j, k);
  }
  if (pairs.size() < 2) throw DataError("binned_chi: at least 2 pairs are required");
  std::vector<std::optional<double>> chi(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    std::vector<double> a, b;
    a.reserve(rows.size());
    b.reserve(rows.size());
    for (Eigen::Index t : rows) {
      a.push_back(data(t, pairs[i].first));
      b.push_back(data(t, pairs[i].second));
    }
    try {
      chi[i] = chi_q(a, b, q);
    } catch (const DataError&) {
      chi[i] = std::nullopt;  // too few complete pairs
    }
  });
  struct Item {
    double d, chi;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (chi[i]) items.push_back({distances(pairs[i].first, pairs[i].second), *chi[i]});
  }
  if (items.size() < 2) throw DataError("binned_chi: fewer than 2 pairs have a defined chi_q");
  std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.d < y.d; });

  ChiCurve curve;
  curve.q = q;
  curve.season = std::move(season);
  const std::size_t n = items.size();
  std::size_t merged = 0;
  std::vector<double> pending;
  std::vector<double> pending_d;
  for (int b = 0; b < n_bins; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) / n_bins, hi = n * static_cast<std::size_t>(b + 1) / n_bins;
    for (std::size_t i = lo; i < hi; ++i) {
      pending.push_back(items[i].chi);
      pending_d.push_back(items[i].d);
    }
    if (pending.empty()) {
      ++merged;  // empty bin: its (absent) members join the next one
      continue;
    }
    ChiBin bin;
    bin.n_pairs = pending.size();
    bin.d_min = pending_d.front();
    bin.d_max = pending_d.back();
    bin.distance = std::accumulate(pending_d.begin(), pending_d.end(), 0.0) / static_cast<double>(bin.n_pairs);
    bin.mean = std::accumulate(pending.begin(), pending.end(), 0.0) / static_cast<double>(bin.n_pairs);
    std::sort(pending.begin(), pending.end());
    bin.lower = sample_quantile(pending, 0.025);
    bin.upper = sample_quantile(pending, 0.975);
    curve.bins.push_back(bin);
    pending.clear();
    pending_d.clear();
  }
  if (merged > 0) log::warn("binned_chi: ", merged, " empty distance bins merged into their right neighbours");
  return curve;
}

}  // namespace spex::empirical
