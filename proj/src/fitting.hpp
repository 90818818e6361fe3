#ifndef GHLAB_FITTING_HPP
#define GHLAB_FITTING_HPP

#include <cmath>
#include <utility>
#include <vector>

namespace ghlab {

struct LogFit {
  bool ok = false;
  double slope = 0, intercept = 0, r2 = 0;
  int n = 0;
};

/// Unweighted least squares y = slope*x + intercept.
inline LogFit log_fit(const std::vector<std::pair<double, double>>& xy) {
  LogFit f;
  f.n = static_cast<int>(xy.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (auto& [x, y] : xy) {
    sx += x;
    sy += y;
  }
  double mx = sx / f.n, my = sy / f.n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (syy <= 0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.ok = true;
  return f;
}

}  // namespace ghlab

#endif
