#include "spex/geo/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "spex/common/error.hpp"
#include "spex/common/log.hpp"

namespace spex::geo {
namespace {

double sq(const PlaneXY& a, const PlaneXY& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void relabel(KMeansResult& r) {
  std::vector<int> map(r.centers.size(), -1);
  std::vector<PlaneXY> centers;
  int next = 0;
  for (int& l : r.labels) {
    if (map[l] < 0) {
      map[l] = next++;
      centers.push_back(r.centers[l]);
    }
    l = map[l];
  }
  r.centers = std::move(centers);
}

}  // namespace

KMeansResult kmeans_single(const std::vector<PlaneXY>& pts, int k, std::uint64_t seed, int max_iterations) {
  const std::size_t n = pts.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  KMeansResult r;
  r.centers.push_back(pts[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  while (static_cast<int>(r.centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::numeric_limits<double>::infinity();
      for (const auto& c : r.centers) d2[i] = std::min(d2[i], sq(pts[i], c));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = unif(rng) * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= d2[pick];
        if (target < 0.0 && d2[pick] > 0.0) break;
      }
    }
    r.centers.push_back(pts[pick]);
  }
  r.labels.assign(n, 0);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq(pts[i], r.centers[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (best != r.labels[i]) changed = true;
      r.labels[i] = best;
    }
    std::vector<PlaneXY> sum(k);
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[r.labels[i]].x += pts[i].x;
      sum[r.labels[i]].y += pts[i].y;
      ++count[r.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) {
        r.centers[c] = {sum[c].x / count[c], sum[c].y / count[c]};
      } else {
        // Empty cluster: move it to the point farthest from its centre.
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq(pts[i], r.centers[r.labels[i]]);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        r.centers[c] = pts[far];
        r.labels[far] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) r.inertia += sq(pts[i], r.centers[r.labels[i]]);
  relabel(r);
  return r;
}

std::vector<std::uint64_t> restart_seeds(std::uint64_t seed, int restarts) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::vector<std::uint32_t> raw(2 * static_cast<std::size_t>(restarts));
  seq.generate(raw.begin(), raw.end());
  std::vector<std::uint64_t> seeds(restarts);
  for (int i = 0; i < restarts; ++i) seeds[i] = (static_cast<std::uint64_t>(raw[2 * i]) << 32) | raw[2 * i + 1];
  return seeds;
}

KMeansResult kmeans(const std::vector<PlaneXY>& points, int k, std::uint64_t seed, int restarts, int max_iterations) {
  if (k < 1) throw ConfigError("kmeans: k must be at least 1");
  if (static_cast<std::size_t>(k) > points.size()) throw ConfigError("kmeans: k exceeds the number of sites");
  if (restarts < 1) throw ConfigError("kmeans: at least one restart is required");
  std::vector<PlaneXY> pts = points;
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : pts) distinct.insert({p.x, p.y});
  if (static_cast<int>(distinct.size()) < k) {
    log::warn("kmeans: fewer distinct sites than clusters; jittering duplicates by 1e-6 km");
    std::mt19937_64 jitter(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-1e-6, 1e-6);
    for (auto& p : pts) {
      p.x += u(jitter);
      p.y += u(jitter);
    }
  }
  const std::vector<std::uint64_t> seeds = restart_seeds(seed, restarts);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult cand = kmeans_single(pts, k, seeds[r], max_iterations);
    if (cand.inertia < best.inertia) best = std::move(cand);
  }
  return best;
}

}  // namespace spex::geo
