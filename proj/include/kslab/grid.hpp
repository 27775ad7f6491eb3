#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace kslab {

/// Cell-centered radial mesh on the ball B_R(0) in n dimensions.
/// Faces run from r = 0 to r = R; cell i occupies (faces[i], faces[i+1])
/// with center at the midpoint, volume (omega_n/n)(r_+^n - r_-^n) and face
/// area omega_n r^(n-1). The origin is a face, never a center, so the
/// coordinate singularity stays out of every update. Optional geometric
/// grading clusters cells near r = 0.
struct RadialGrid {
  int n = 2;
  double R = 1.0;
  double stretch = 1.0;  // geometric cell-width ratio, >= 1
  std::vector<double> faces;       // size N+1, faces[0] = 0, faces[N] = R
  std::vector<double> centers;     // size N
  std::vector<double> volumes;     // size N
  std::vector<double> face_areas;  // size N+1
  std::vector<double> center_gaps;  // size N-1, centers[i+1]-centers[i]

  static double sphere_area(int n) {
    // surface area of the unit sphere in R^n
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  }

  double omega_n() const { return sphere_area(n); }
  double ball_volume() const { return sphere_area(n) / n * std::pow(R, n); }
  std::size_t cells() const { return centers.size(); }

  static RadialGrid uniform(int n, double R, std::size_t N) {
    return geometric(n, R, N, 1.0);
  }

  static RadialGrid geometric(int n, double R, std::size_t N, double ratio) {
    if (n < 2) throw std::invalid_argument("RadialGrid: n must be >= 2");
    if (!(R > 0.0)) throw std::invalid_argument("RadialGrid: R must be > 0");
    if (N < 2) throw std::invalid_argument("RadialGrid: need at least 2 cells");
    if (!(ratio >= 1.0)) throw std::invalid_argument("RadialGrid: ratio must be >= 1");
    RadialGrid g;
    g.n = n;
    g.R = R;
    g.stretch = ratio;
    g.faces.resize(N + 1);
    const double h0 = (ratio == 1.0)
                          ? R / N
                          : R * (ratio - 1.0) / (std::pow(ratio, double(N)) - 1.0);
    g.faces[0] = 0.0;
    double h = h0;
    for (std::size_t i = 1; i <= N; ++i) {
      g.faces[i] = g.faces[i - 1] + h;
      h *= ratio;
    }
    g.faces[N] = R;  // absorb roundoff of the geometric sum
    g.finish();
    return g;
  }

  /// Geometric grid whose smallest (innermost) cell resolves a given length
  /// scale: h_min <= scale/overresolve. Falls back to uniform when the
  /// uniform width is already fine enough.
  static RadialGrid graded_for_scale(int n, double R, std::size_t N, double scale,
                                     double overresolve = 8.0) {
    if (!(scale > 0.0))
      throw std::invalid_argument("RadialGrid: resolution scale must be > 0");
    const double target = scale / overresolve;
    if (R / N <= target) return uniform(n, R, N);
    // find ratio with h0(ratio) = target by bisection; h0 decreases in ratio
    double lo = 1.0, hi = 2.0;
    const auto h0_of = [&](double rho) {
      return R * (rho - 1.0) / (std::pow(rho, double(N)) - 1.0);
    };
    while (h0_of(hi) > target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (h0_of(mid) > target ? lo : hi) = mid;
    }
    return geometric(n, R, N, hi);
  }

  double h_min() const { return faces[1] - faces[0]; }

private:
  void finish() {
    const std::size_t N = faces.size() - 1;
    centers.resize(N);
    volumes.resize(N);
    face_areas.resize(N + 1);
    center_gaps.resize(N - 1);
    const double wn = omega_n();
    for (std::size_t i = 0; i < N; ++i) {
      centers[i] = 0.5 * (faces[i] + faces[i + 1]);
      volumes[i] = wn / n * (std::pow(faces[i + 1], n) - std::pow(faces[i], n));
      if (!(volumes[i] > 0.0))
        throw std::invalid_argument("RadialGrid: degenerate cell");
    }
    for (std::size_t i = 0; i + 1 <= N; ++i)
      face_areas[i] = wn * std::pow(faces[i], n - 1);
    face_areas[N] = wn * std::pow(R, n - 1);
    for (std::size_t i = 0; i + 1 < N; ++i)
      center_gaps[i] = centers[i + 1] - centers[i];
  }
};

/// Scalar field of cell averages on a RadialGrid. The grid is referenced,
/// not owned; it must outlive the field.
struct RadialField {
  const RadialGrid* grid = nullptr;
  std::vector<double> values;

  RadialField() = default;
  explicit RadialField(const RadialGrid& g, double fill = 0.0)
      : grid(&g), values(g.cells(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }

  /// Volume integral over the ball.
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      s += grid->volumes[i] * values[i];
    return s;
  }

  double max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    return m;
  }

  double min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, v);
    return m;
  }
};

template <class F>
RadialField sample_field(const RadialGrid& g, const F& f) {
  RadialField out(g);
  for (std::size_t i = 0; i < g.cells(); ++i) out.values[i] = f(g.centers[i]);
  return out;
}

}  // namespace kslab
