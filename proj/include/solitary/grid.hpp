#pragma once

// Uniform periodic Cartesian grids in 1-3 dimensions, complex fields on them,
// and the FFT-based spectral operators used by the PDE solver and the
// decomposition checks.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "solitary/error.hpp"

namespace solitary {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Box [center - L, center + L)^N sampled at n nodes per axis, periodic.
struct GridSpec {
  int dim = 3;
  int n = 64;
  double L = 8.0;
  Vec3 center{0.0, 0.0, 0.0};

  double dx() const { return 2.0 * L / n; }
  double cell_volume() const { return std::pow(dx(), dim); }
  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  double coord(int axis, int j) const { return center[axis] - L + j * dx(); }

  /// Angular wavenumber of FFT index j (Nyquist index carries -n/2).
  double wavenumber(int j) const {
    const double dk = std::numbers::pi / L;
    return (j < n / 2 ? j : j - n) * dk;
  }
  double k_max() const { return std::numbers::pi / dx(); }

  /// Unflattens a row-major index (axis 0 slowest).
  std::array<int, 3> unflatten(std::size_t idx) const {
    std::array<int, 3> j{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      j[a] = static_cast<int>(idx % n);
      idx /= n;
    }
    return j;
  }

  Vec3 point(std::size_t idx) const {
    const auto j = unflatten(idx);
    Vec3 x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) x[a] = coord(a, j[a]);
    return x;
  }

  bool same_as(const GridSpec& o) const {
    if (dim != o.dim || n != o.n || L != o.L) return false;
    for (int a = 0; a < dim; ++a)
      if (center[a] != o.center[a]) return false;
    return true;
  }

  void validate() const {
    require(dim >= 1 && dim <= 3, ErrorKind::InvalidInput, "field grids support 1 to 3 dimensions");
    require(n >= 32 && (n & (n - 1)) == 0, ErrorKind::InvalidInput,
            "grid points per axis must be a power of two >= 32");
    require(L > 0.0, ErrorKind::InvalidInput, "box half-width must be positive");
  }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  require(a.same_as(b), ErrorKind::GridMismatch, "fields live on different grids");
}

/// Visits every node with its flat index and coordinates.
template <class Fn>
void for_each_node(const GridSpec& g, Fn&& fn) {
  const std::size_t total = g.size();
  for (std::size_t idx = 0; idx < total; ++idx) fn(idx, g.point(idx));
}

struct ComplexField {
  GridSpec grid;
  std::vector<cplx> data;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), data(g.size(), cplx(0.0, 0.0)) {}

  std::size_t size() const { return data.size(); }
  cplx& operator[](std::size_t i) { return data[i]; }
  const cplx& operator[](std::size_t i) const { return data[i]; }

  ComplexField& operator+=(const ComplexField& o) {
    require_same_grid(grid, o.grid);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& o) {
    require_same_grid(grid, o.grid);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    return *this;
  }
  ComplexField& operator*=(cplx s) {
    for (auto& v : data) v *= s;
    return *this;
  }
};

inline ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
inline ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
inline ComplexField operator*(cplx s, ComplexField a) { return a *= s; }

struct RealField {
  GridSpec grid;
  std::vector<double> data;

  RealField() = default;
  explicit RealField(const GridSpec& g) : grid(g), data(g.size(), 0.0) {}
  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  const double& operator[](std::size_t i) const { return data[i]; }
};

/// Samples fn(x) at every node.
template <class Fn>
ComplexField sample_complex(const GridSpec& g, Fn&& fn) {
  ComplexField out(g);
  for_each_node(g, [&](std::size_t idx, const Vec3& x) { out.data[idx] = fn(x); });
  return out;
}

template <class Fn>
RealField sample_real(const GridSpec& g, Fn&& fn) {
  RealField out(g);
  for_each_node(g, [&](std::size_t idx, const Vec3& x) { out.data[idx] = fn(x); });
  return out;
}

/// int psi conj(phi) dx by the rectangle rule.
inline cplx inner(const ComplexField& psi, const ComplexField& phi) {
  require_same_grid(psi.grid, phi.grid);
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) acc += psi.data[i] * std::conj(phi.data[i]);
  return acc * psi.grid.cell_volume();
}

inline double l2_norm_squared(const ComplexField& psi) {
  double acc = 0.0;
  for (const auto& v : psi.data) acc += std::norm(v);
  return acc * psi.grid.cell_volume();
}

inline double l2_norm(const ComplexField& psi) { return std::sqrt(l2_norm_squared(psi)); }

inline double l2_norm(const RealField& f) {
  double acc = 0.0;
  for (double v : f.data) acc += v * v;
  return std::sqrt(acc * f.grid.cell_volume());
}

/// Largest |psi| on the grid faces x_a = center_a - L, relative to max |psi|.
inline double boundary_fraction(const ComplexField& psi) {
  const auto& g = psi.grid;
  double peak = 0.0, edge = 0.0;
  for (std::size_t idx = 0; idx < psi.size(); ++idx) {
    const double v = std::norm(psi.data[idx]);
    peak = std::max(peak, v);
    const auto j = g.unflatten(idx);
    for (int a = 0; a < g.dim; ++a)
      if (j[a] == 0) edge = std::max(edge, v);
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

namespace detail {

class FftPlans {
 public:
  struct Pair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  Pair get(int dim, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_pair(dim, n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::array<int, 3> dims{n, n, n};
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
    auto* buf = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Pair p;
    p.forward = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    plans_.emplace(key, p);
    return p;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, Pair> plans_;
};

inline fftw_complex* as_fftw(std::vector<cplx>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

}  // namespace detail

/// In-place unnormalised forward transform.
inline void fft_forward(ComplexField& f) {
  const auto p = detail::FftPlans::instance().get(f.grid.dim, f.grid.n);
  fftw_execute_dft(p.forward, detail::as_fftw(f.data), detail::as_fftw(f.data));
}

/// In-place inverse transform, normalised so that it inverts fft_forward.
inline void fft_inverse(ComplexField& f) {
  const auto p = detail::FftPlans::instance().get(f.grid.dim, f.grid.n);
  fftw_execute_dft(p.backward, detail::as_fftw(f.data), detail::as_fftw(f.data));
  const double s = 1.0 / static_cast<double>(f.size());
  for (auto& v : f.data) v *= s;
}

/// Multiplies the spectrum by m(k) for every wave vector.
template <class Fn>
void apply_fourier_multiplier(ComplexField& f, Fn&& m) {
  fft_forward(f);
  const auto& g = f.grid;
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const auto j = g.unflatten(idx);
    Vec3 k{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) k[a] = g.wavenumber(j[a]);
    f.data[idx] *= m(k, j);
  }
  fft_inverse(f);
}

inline ComplexField spectral_laplacian(ComplexField f) {
  apply_fourier_multiplier(f, [](const Vec3& k, const std::array<int, 3>&) {
    return cplx(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), 0.0);
  });
  return f;
}

/// d/dx_axis with the Nyquist mode zeroed (odd operator).
inline ComplexField spectral_derivative(ComplexField f, int axis) {
  const int n = f.grid.n;
  apply_fourier_multiplier(f, [axis, n](const Vec3& k, const std::array<int, 3>& j) {
    return j[axis] == n / 2 ? cplx(0.0, 0.0) : cplx(0.0, k[axis]);
  });
  return f;
}

/// g(x) = f(x - shift), exact for band-limited periodic f.
inline ComplexField spectral_translate(ComplexField f, const Vec3& shift) {
  const int n = f.grid.n;
  const int dim = f.grid.dim;
  apply_fourier_multiplier(f, [&](const Vec3& k, const std::array<int, 3>& j) {
    double phase = 0.0;
    bool nyquist = false;
    for (int a = 0; a < dim; ++a) {
      phase += k[a] * shift[a];
      nyquist = nyquist || j[a] == n / 2;
    }
    // The Nyquist mode is real-symmetric; translating it by a non-integer
    // number of cells uses the cosine part only.
    if (nyquist) {
      double c = 1.0;
      for (int a = 0; a < dim; ++a) {
        if (j[a] == n / 2) c *= std::cos(k[a] * shift[a]);
      }
      double rest = 0.0;
      for (int a = 0; a < dim; ++a) {
        if (j[a] != n / 2) rest += k[a] * shift[a];
      }
      return c * std::exp(cplx(0.0, -rest));
    }
    return std::exp(cplx(0.0, -phase));
  });
  return f;
}

/// Fraction of the discrete L2 mass carried by wave vectors with some
/// |k_a| > 2/3 k_max.
inline double spectral_tail(const ComplexField& psi) {
  ComplexField f = psi;
  fft_forward(f);
  const auto& g = f.grid;
  const double cut = (2.0 / 3.0) * g.k_max();
  double tail = 0.0, total = 0.0;
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const double m = std::norm(f.data[idx]);
    total += m;
    const auto j = g.unflatten(idx);
    for (int a = 0; a < g.dim; ++a) {
      if (std::abs(g.wavenumber(j[a])) > cut) {
        tail += m;
        break;
      }
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace solitary
