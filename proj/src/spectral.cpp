#include "thinfilm/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "thinfilm/error.hpp"

namespace thinfilm {

namespace {

// FFTW planning is not thread-safe, execution with new-array calls is.
// Plans are cached per (dim, n, direction) and created under a mutex.
class PlanCache {
public:
  static PlanCache &instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[kMaxDim];
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
      dims[a] = n;
      total *= static_cast<std::size_t>(n);
    }
    fftw_complex *in = fftw_alloc_complex(total);
    fftw_complex *out = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(dim, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (p == nullptr) throw NumericalFailure("FFTW plan creation failed");
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto &[key, p] : plans_) fftw_destroy_plan(p);
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute(const PeriodicGrid &g, int sign, const std::vector<Complex> &in, std::vector<Complex> &out) {
  out.resize(in.size());
  fftw_plan p = PlanCache::instance().get(g.dim(), g.points_per_axis(), sign);
  // std::complex<double> is layout-compatible with fftw_complex.
  fftw_execute_dft(p, reinterpret_cast<fftw_complex *>(const_cast<Complex *>(in.data())),
                   reinterpret_cast<fftw_complex *>(out.data()));
}

// (-1)^{k_1 + ... + k_d}: phase of exp(-i xi x_0) with x_0 = -L/2 on every axis.
double corner_phase(const PeriodicGrid &g, std::size_t slot) {
  const auto idx = g.unravel(slot);
  int parity = 0;
  for (int a = 0; a < g.dim(); ++a) parity += idx[a];
  return (parity % 2 == 0) ? 1.0 : -1.0;
}

std::vector<Complex> raw_forward(const PeriodicGrid &g, std::span<const double> f) {
  std::vector<Complex> in(f.begin(), f.end());
  std::vector<Complex> out;
  execute(g, FFTW_FORWARD, in, out);
  return out;
}

GridFunction raw_inverse_real(const PeriodicGrid &g, const std::vector<Complex> &spec) {
  std::vector<Complex> out;
  execute(g, FFTW_BACKWARD, spec, out);
  const double scale = 1.0 / static_cast<double>(g.size());
  GridFunction f(g.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = out[i].real() * scale;
  return f;
}

} // namespace

SpectralField::SpectralField(PeriodicGrid grid, std::vector<Complex> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.size()) throw DimensionError("SpectralField: coefficient count mismatch");
}

Complex SpectralField::at(const std::array<int, kMaxDim> &modes) const {
  std::array<int, kMaxDim> slot{};
  const int n = grid_.points_per_axis();
  for (int a = 0; a < grid_.dim(); ++a) {
    if (modes[a] < -n / 2 || modes[a] >= n / 2) throw RangeError("SpectralField::at: mode out of lattice");
    slot[a] = modes[a] < 0 ? modes[a] + n : modes[a];
  }
  return coeffs_[grid_.ravel(slot)];
}

bool SpectralField::is_conjugate_symmetric(double rel_tol) const {
  double scale = 0.0;
  for (const auto &c : coeffs_) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return true;
  const int n = grid_.points_per_axis();
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    auto idx = grid_.unravel(i);
    bool nyquist = false;
    for (int a = 0; a < grid_.dim(); ++a) {
      nyquist = nyquist || grid_.is_nyquist(idx[a]);
      idx[a] = (n - idx[a]) % n;
    }
    if (nyquist) continue;
    if (std::abs(coeffs_[grid_.ravel(idx)] - std::conj(coeffs_[i])) > rel_tol * scale) return false;
  }
  return true;
}

SpectralField forward_transform(std::span<const double> f, const PeriodicGrid &g) {
  require_size(g, f, "forward_transform");
  auto c = raw_forward(g, f);
  const double w = g.cell_volume();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w * corner_phase(g, i);
  return SpectralField(g, std::move(c));
}

std::vector<Complex> inverse_transform_complex(const SpectralField &field) {
  const auto &g = field.grid();
  std::vector<Complex> in(field.coeffs().begin(), field.coeffs().end());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] *= corner_phase(g, i);
  std::vector<Complex> out;
  execute(g, FFTW_BACKWARD, in, out);
  // f_j = L^{-d} sum_k c_k exp(i xi_k x_j) = (n h)^{-d} * backward((-1)^k c)_j
  const double scale = 1.0 / (static_cast<double>(g.size()) * g.cell_volume());
  for (auto &v : out) v *= scale;
  return out;
}

GridFunction inverse_transform(const SpectralField &field) {
  const auto z = inverse_transform_complex(field);
  double re = 0.0, im = 0.0;
  for (const auto &v : z) {
    re = std::max(re, std::abs(v.real()));
    im = std::max(im, std::abs(v.imag()));
  }
  if (im > 1e-12 * std::max(re, 1e-300) && im > 1e-300)
    throw NumericalFailure("inverse_transform: field does not represent a real function");
  GridFunction f(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) f[i] = z[i].real();
  return f;
}

GridFunction apply_symbol(const PeriodicGrid &g, std::span<const double> f, std::span<const double> symbol) {
  require_size(g, f, "apply_symbol");
  require_size(g, symbol, "apply_symbol");
  auto c = raw_forward(g, f);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= symbol[i];
  return raw_inverse_real(g, c);
}

std::vector<double> fractional_symbol(const PeriodicGrid &g, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("fractional order must be finite and >= 0");
  auto xi2 = g.squared_frequencies();
  if (s == 0.0) {
    std::fill(xi2.begin(), xi2.end(), 1.0);
    return xi2;
  }
  for (double &v : xi2) v = (v == 0.0) ? 0.0 : std::pow(v, s);
  return xi2;
}

GridFunction fractional_laplacian(const PeriodicGrid &g, std::span<const double> f, double s) {
  const auto sym = fractional_symbol(g, s);
  require_size(g, f, "fractional_laplacian");
  if (s == 0.0) return GridFunction(f.begin(), f.end());
  return apply_symbol(g, f, sym);
}

GridFunction fractional_laplacian(const GridDensity &u, double s) {
  return fractional_laplacian(u.grid(), u.values(), s);
}

GridFunction partial_derivative(const PeriodicGrid &g, std::span<const double> f, int axis) {
  require_size(g, f, "partial_derivative");
  if (axis < 0 || axis >= g.dim()) throw DomainError("partial_derivative: axis out of range");
  auto c = raw_forward(g, f);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const int k = g.unravel(i)[axis];
    c[i] = g.is_nyquist(k) ? Complex(0.0, 0.0) : c[i] * Complex(0.0, g.frequency(k));
  }
  return raw_inverse_real(g, c);
}

std::vector<GridFunction> gradient(const PeriodicGrid &g, std::span<const double> f) {
  std::vector<GridFunction> out;
  out.reserve(g.dim());
  for (int a = 0; a < g.dim(); ++a) out.push_back(partial_derivative(g, f, a));
  return out;
}

GridFunction divergence(const PeriodicGrid &g, const std::vector<GridFunction> &components) {
  if (static_cast<int>(components.size()) != g.dim()) throw DimensionError("divergence: need d components");
  GridFunction out(g.size(), 0.0);
  for (int a = 0; a < g.dim(); ++a) {
    const auto da = partial_derivative(g, components[a], a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += da[i];
  }
  return out;
}

double sobolev_norm_sq(const PeriodicGrid &g, std::span<const double> f, double r, bool homogeneous) {
  require_size(g, f, "sobolev_norm_sq");
  if (!std::isfinite(r)) throw DomainError("sobolev_norm_sq: order must be finite");
  const auto c = raw_forward(g, f);
  const auto xi2 = g.squared_frequencies();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a2 = std::norm(c[i]);
    double m;
    if (homogeneous) {
      if (xi2[i] == 0.0) {
        if (r > 0.0) continue;
        if (r < 0.0) {
          if (a2 > 1e-28 * static_cast<double>(g.size()))
            throw DomainError("sobolev_norm_sq: negative homogeneous order needs a vanishing zero mode");
          continue;
        }
        m = 1.0;
      } else {
        m = std::pow(xi2[i], r);
      }
    } else {
      m = std::pow(1.0 + xi2[i], r);
    }
    s += m * a2;
  }
  // L^{-d} sum |c|^2 with c = h^d * raw  ->  h^d / n^d * sum |raw|^2
  return s * g.cell_volume() / static_cast<double>(g.size());
}

double energy(const PeriodicGrid &g, std::span<const double> f, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("energy: order s must be positive");
  return 0.5 * sobolev_norm_sq(g, f, s, true);
}

double energy(const GridDensity &u, double s) { return energy(u.grid(), u.values(), s); }

GridFunction heat_semigroup(const PeriodicGrid &g, std::span<const double> f, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("heat_semigroup: time must be >= 0");
  require_size(g, f, "heat_semigroup");
  if (t == 0.0) return GridFunction(f.begin(), f.end());
  auto sym = g.squared_frequencies();
  for (double &v : sym) v = std::exp(-t * v);
  return apply_symbol(g, f, sym);
}

GridDensity heat_semigroup(const GridDensity &u, double t) {
  constexpr double kFloor = -1e-13;
  auto v = heat_semigroup(u.grid(), u.values(), t);
  for (double &x : v) {
    if (x < kFloor) throw NumericalFailure("heat_semigroup: negative value " + std::to_string(x));
    if (x < 0.0) x = 0.0;
  }
  return GridDensity(u.grid(), std::move(v));
}

InterpolationCheck interpolation_check(const PeriodicGrid &g, std::span<const double> f, double r0,
                                       double r1, double r2) {
  if (!(r0 < r1 && r1 < r2)) throw DomainError("interpolation_check: need r0 < r1 < r2");
  const double theta = (r1 - r0) / (r2 - r0);
  const double n0 = std::sqrt(sobolev_norm_sq(g, f, r0, true));
  const double n1 = std::sqrt(sobolev_norm_sq(g, f, r1, true));
  const double n2 = std::sqrt(sobolev_norm_sq(g, f, r2, true));
  if (n0 == 0.0 || n2 == 0.0) return {n1, 0.0};
  return {n1, std::pow(n0, 1.0 - theta) * std::pow(n2, theta)};
}

} // namespace thinfilm
