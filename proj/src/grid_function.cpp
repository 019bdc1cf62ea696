#include "prequant/grid_function.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "prequant/errors.hpp"

namespace prequant {

namespace {

using Value = std::complex<double>;
constexpr Value kI{0.0, 1.0};

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct Layout {
  std::vector<std::size_t> dims;
  std::vector<std::size_t> strides;
  std::size_t size = 1;

  explicit Layout(const GridSpec& spec) {
    const int m = spec.m();
    for (int j = 0; j < m; ++j) dims.push_back(static_cast<std::size_t>(spec.n_q));
    for (int j = 0; j < m; ++j) dims.push_back(static_cast<std::size_t>(spec.n_v));
    strides.assign(dims.size(), 1);
    for (int ax = static_cast<int>(dims.size()) - 2; ax >= 0; --ax) {
      strides[ax] = strides[ax + 1] * dims[ax + 1];
    }
    for (auto d : dims) size *= d;
  }

  std::size_t coordinate(std::size_t flat, int axis) const {
    return (flat / strides[axis]) % dims[axis];
  }

  // Calls fn(base) for the first node of every line parallel to `axis`.
  template <class Fn>
  void for_each_line(int axis, Fn&& fn) const {
    const std::size_t block = dims[axis] * strides[axis];
    for (std::size_t outer = 0; outer < size; outer += block) {
      for (std::size_t inner = 0; inner < strides[axis]; ++inner) fn(outer + inner);
    }
  }
};

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

class LineFft {
 public:
  explicit LineFft(int n) : n_(n) {
    buffer_ = fftw_alloc_complex(static_cast<std::size_t>(n));
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  LineFft(const LineFft&) = delete;
  LineFft& operator=(const LineFft&) = delete;
  ~LineFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buffer_);
  }

  // Applies the Fourier multiplier symbol(k) to the line, k in the symmetric range.
  template <class Symbol>
  void apply(Value* data, std::size_t stride, Symbol&& symbol) {
    for (int j = 0; j < n_; ++j) {
      const Value x = data[j * stride];
      buffer_[j][0] = x.real();
      buffer_[j][1] = x.imag();
    }
    fftw_execute(forward_);
    for (int j = 0; j < n_; ++j) {
      const int k = j <= n_ / 2 ? j : j - n_;
      Value c(buffer_[j][0], buffer_[j][1]);
      c *= symbol(k, n_ % 2 == 0 && j == n_ / 2);
      buffer_[j][0] = c.real();
      buffer_[j][1] = c.imag();
    }
    fftw_execute(backward_);
    for (int j = 0; j < n_; ++j) {
      data[j * stride] = Value(buffer_[j][0], buffer_[j][1]) / static_cast<double>(n_);
    }
  }

 private:
  int n_;
  fftw_complex* buffer_;
  fftw_plan forward_;
  fftw_plan backward_;
};

void require_compatible(const GridFunction& f, const GridFunction& g) {
  if (!(f.spec() == g.spec())) throw BackendMismatchError("grid functions on different grids");
}

}  // namespace

void GridSpec::validate() const {
  config.validate();
  if (n_q < 8 || !is_power_of_two(n_q)) {
    throw std::invalid_argument("n_q must be a power of two, at least 8");
  }
  if (n_v < 16) throw std::invalid_argument("n_v must be at least 16");
  if (!(v_window > 0.0)) throw std::invalid_argument("v_window must be positive");
  if (!(margin_factor > 1.0)) throw std::invalid_argument("margin_factor must exceed 1");
}

std::size_t GridSpec::size() const { return Layout(*this).size; }

std::vector<double> GridSpec::quadrature_weights() const {
  const Layout layout(*this);
  const int m = config.m;
  const double h = v_spacing();
  double q_weight = 1.0;
  for (int j = 0; j < m; ++j) q_weight *= q_spacing(j);
  std::vector<double> weights(layout.size);
  for (std::size_t flat = 0; flat < layout.size; ++flat) {
    double w = q_weight;
    for (int j = 0; j < m; ++j) {
      const auto l = layout.coordinate(flat, m + j);
      w *= (l == 0 || l + 1 == static_cast<std::size_t>(n_v)) ? 0.5 * h : h;
    }
    weights[flat] = w;
  }
  return weights;
}

double GridSpec::total_volume() const {
  double volume = 1.0;
  for (double period : config.periods) volume *= period * 2.0 * v_window;
  return volume;
}

GridFunction::GridFunction(GridSpec spec, std::vector<Value> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.size()) {
    throw std::invalid_argument("grid function value count does not match its grid");
  }
  for (const auto& x : values_) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
      throw std::invalid_argument("grid function values must be finite");
    }
  }
}

GridFunction GridFunction::sample(const GridSpec& spec, const PointFunction& f) {
  spec.validate();
  const Layout layout(spec);
  const int m = spec.m();
  std::vector<Value> values(layout.size);
  std::vector<double> q(m), v(m);
  for (std::size_t flat = 0; flat < layout.size; ++flat) {
    for (int j = 0; j < m; ++j) {
      q[j] = spec.q_node(j, static_cast<int>(layout.coordinate(flat, j)));
      v[j] = spec.v_node(static_cast<int>(layout.coordinate(flat, m + j)));
    }
    values[flat] = f(q, v);
  }
  return {spec, std::move(values)};
}

GridFunction GridFunction::sample(const GridSpec& spec, const AnalyticFunction& f) {
  if (spec.m() != 1) throw BackendMismatchError("analytic functions live on m = 1 grids");
  if (spec.config.periods[0] != f.period()) {
    throw BackendMismatchError("grid period differs from the analytic function period");
  }
  return sample(spec, [&f](std::span<const double> q, std::span<const double> v) {
    return f(q[0], v[0]);
  });
}

GridFunction GridFunction::zero(const GridSpec& spec) {
  return {spec, std::vector<Value>(spec.size(), Value{})};
}

double GridFunction::support_radius(double rel_tol) const {
  double peak = 0.0;
  for (const auto& x : values_) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return 0.0;
  const Layout layout(spec_);
  const int m = spec_.m();
  double radius = 0.0;
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    if (std::abs(values_[flat]) <= rel_tol * peak) continue;
    for (int j = 0; j < m; ++j) {
      const double v = spec_.v_node(static_cast<int>(layout.coordinate(flat, m + j)));
      radius = std::max(radius, std::abs(v));
    }
  }
  return radius;
}

GridFunction GridFunction::pullback(const AffineElement& sigma) const {
  const double a = sigma.a();
  const double b = sigma.b();
  const double window = spec_.v_window;
  const double radius = support_radius();
  if (radius / b > window * (1.0 + 1e-12)) {
    throw SupportMarginError("pullback support radius " + std::to_string(radius / b) +
                             " exceeds the v-window " + std::to_string(window));
  }

  const Layout layout(spec_);
  const int m = spec_.m();
  std::vector<Value> values = values_;

  if (b != 1.0) {
    const std::size_t n = static_cast<std::size_t>(spec_.n_v);
    const double h = spec_.v_spacing();
    std::vector<double> re(n), im(n);
    for (int j = 0; j < m; ++j) {
      const int axis = m + j;
      const std::size_t stride = layout.strides[axis];
      layout.for_each_line(axis, [&](std::size_t base) {
        for (std::size_t l = 0; l < n; ++l) {
          re[l] = values[base + l * stride].real();
          im[l] = values[base + l * stride].imag();
        }
        boost::math::interpolators::cardinal_cubic_b_spline<double> re_spline(
            re.data(), n, -window, h, 0.0, 0.0);
        boost::math::interpolators::cardinal_cubic_b_spline<double> im_spline(
            im.data(), n, -window, h, 0.0, 0.0);
        for (std::size_t l = 0; l < n; ++l) {
          const double target = b * spec_.v_node(static_cast<int>(l));
          values[base + l * stride] = std::abs(target) > window
                                          ? Value{}
                                          : Value(re_spline(target), im_spline(target));
        }
      });
    }
  }

  if (a != 0.0) {
    LineFft fft(spec_.n_q);
    for (int j = 0; j < m; ++j) {
      const double wavenumber = kTwoPi / spec_.config.periods[j];
      layout.for_each_line(j, [&](std::size_t base) {
        const double v = spec_.v_node(static_cast<int>(layout.coordinate(base, m + j)));
        const double shift = a * v;
        fft.apply(&values[base], layout.strides[j], [&](int k, bool nyquist) {
          const double phase = wavenumber * k * shift;
          return nyquist ? Value(std::cos(phase), 0.0) : std::exp(kI * phase);
        });
      });
    }
  }
  return {spec_, std::move(values)};
}

GridFunction GridFunction::scaled(Value factor) const {
  std::vector<Value> values = values_;
  for (auto& x : values) x *= factor;
  return {spec_, std::move(values)};
}

GridFunction GridFunction::derivative_q(int axis) const {
  if (axis < 0 || axis >= spec_.m()) throw std::out_of_range("q-axis out of range");
  const Layout layout(spec_);
  std::vector<Value> values = values_;
  LineFft fft(spec_.n_q);
  const double wavenumber = kTwoPi / spec_.config.periods[axis];
  layout.for_each_line(axis, [&](std::size_t base) {
    fft.apply(&values[base], layout.strides[axis], [&](int k, bool nyquist) {
      return nyquist ? Value{} : kI * (wavenumber * k);
    });
  });
  return {spec_, std::move(values)};
}

GridFunction GridFunction::derivative_v(int axis) const {
  if (axis < 0 || axis >= spec_.m()) throw std::out_of_range("v-axis out of range");
  const Layout layout(spec_);
  const int full_axis = spec_.m() + axis;
  const std::size_t stride = layout.strides[full_axis];
  const auto n = static_cast<std::ptrdiff_t>(spec_.n_v);
  const double scale = 1.0 / (12.0 * spec_.v_spacing());
  std::vector<Value> values(values_.size());
  layout.for_each_line(full_axis, [&](std::size_t base) {
    auto at = [&](std::ptrdiff_t l) {
      return (l < 0 || l >= n) ? Value{} : values_[base + static_cast<std::size_t>(l) * stride];
    };
    for (std::ptrdiff_t l = 0; l < n; ++l) {
      values[base + static_cast<std::size_t>(l) * stride] =
          (-at(l + 2) + 8.0 * at(l + 1) - 8.0 * at(l - 1) + at(l - 2)) * scale;
    }
  });
  return {spec_, std::move(values)};
}

GridFunction GridFunction::transformed(
    const std::function<Value(std::span<const double>, std::span<const double>, Value)>& map)
    const {
  const Layout layout(spec_);
  const int m = spec_.m();
  std::vector<Value> values(values_.size());
  std::vector<double> q(m), v(m);
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    for (int j = 0; j < m; ++j) {
      q[j] = spec_.q_node(j, static_cast<int>(layout.coordinate(flat, j)));
      v[j] = spec_.v_node(static_cast<int>(layout.coordinate(flat, m + j)));
    }
    values[flat] = map(q, v, values_[flat]);
  }
  return {spec_, std::move(values)};
}

GridFunction operator+(const GridFunction& lhs, const GridFunction& rhs) {
  require_compatible(lhs, rhs);
  std::vector<Value> values = lhs.values_;
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += rhs.values_[i];
  return {lhs.spec_, std::move(values)};
}

GridFunction operator-(const GridFunction& lhs, const GridFunction& rhs) {
  require_compatible(lhs, rhs);
  std::vector<Value> values = lhs.values_;
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= rhs.values_[i];
  return {lhs.spec_, std::move(values)};
}

void GridFunction::write_csv(std::ostream& out) const {
  const Layout layout(spec_);
  const int m = spec_.m();
  for (int j = 1; j <= m; ++j) out << 'q' << j << ',';
  for (int j = 1; j <= m; ++j) out << 'v' << j << ',';
  out << "re,im\n";
  const auto old_precision = out.precision(17);
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    for (int j = 0; j < m; ++j) {
      out << spec_.q_node(j, static_cast<int>(layout.coordinate(flat, j))) << ',';
    }
    for (int j = 0; j < m; ++j) {
      out << spec_.v_node(static_cast<int>(layout.coordinate(flat, m + j))) << ',';
    }
    out << values_[flat].real() << ',' << values_[flat].imag() << '\n';
  }
  out.precision(old_precision);
}

void GridFunction::write_binary(std::ostream& out) const {
  auto put = [&out](const auto& x) { out.write(reinterpret_cast<const char*>(&x), sizeof(x)); };
  out.write("PQGF", 4);
  put(static_cast<std::int32_t>(spec_.m()));
  put(static_cast<std::int32_t>(spec_.n_q));
  put(static_cast<std::int32_t>(spec_.n_v));
  put(spec_.v_window);
  for (double period : spec_.config.periods) put(period);
  for (const auto& x : values_) {
    put(x.real());
    put(x.imag());
  }
}

std::complex<double> inner(const GridFunction& f, const GridFunction& g) {
  require_compatible(f, g);
  const std::vector<double> weights = f.spec().quadrature_weights();
  const auto fv = f.values();
  const auto gv = g.values();
  Value total{};
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * fv[i] * std::conj(gv[i]);
  return total;
}

double norm(const GridFunction& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

}  // namespace prequant
