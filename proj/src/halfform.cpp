#include "prequant/halfform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prequant {

namespace {

int permutation_sign(const std::vector<int>& perm) {
  int inversions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = i + 1; j < perm.size(); ++j) {
      if (perm[i] > perm[j]) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

std::complex<double> i_power(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

}  // namespace

std::complex<double> top_coefficient(std::span<const OneForm> forms) {
  const std::size_t n = forms.size();
  for (const auto& form : forms) {
    if (form.size() != n) throw std::invalid_argument("need n one-forms on an n-space");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::complex<double> total = 0.0;
  do {
    std::complex<double> product = static_cast<double>(permutation_sign(perm));
    for (std::size_t i = 0; i < n; ++i) product *= forms[i][perm[i]];
    total += product;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

OneForm adapted_one_form(const UpperHalfPlanePoint& s, int j, int m) {
  OneForm form(static_cast<std::size_t>(2 * m), 0.0);
  form[2 * j] = 1.0;
  form[2 * j + 1] = s.value();
  return form;
}

std::complex<double> wedge_density_complex(const UpperHalfPlanePoint& s, int m) {
  if (m < 1 || m > kMaxBruteForceDimension) {
    throw std::out_of_range("brute-force wedge evaluation supports 1 <= m <= 3");
  }
  std::vector<OneForm> forms;
  for (int j = 0; j < m; ++j) forms.push_back(adapted_one_form(s, j, m));
  for (int j = 0; j < m; ++j) {
    OneForm conjugate = adapted_one_form(s, j, m);
    for (auto& c : conjugate) c = std::conj(c);
    forms.push_back(std::move(conjugate));
  }
  return i_power(m * m) * top_coefficient(forms);
}

double wedge_density(const UpperHalfPlanePoint& s, int m) {
  return wedge_density_complex(s, m).real();
}

double wedge_density_closed_form(const UpperHalfPlanePoint& s, int m) {
  if (m < 1) throw std::out_of_range("dimension must be at least 1");
  return std::pow(2.0 * s.im(), m);
}

double prop32_residual(const UpperHalfPlanePoint& s, int m) {
  const UpperHalfPlanePoint i_point(0.0, 1.0);
  return std::abs(wedge_density(s, m) - std::pow(s.im(), m) * wedge_density(i_point, m));
}

HalfFormWeight halfform_weight(const UpperHalfPlanePoint& s, int m) {
  return {s, m, std::pow(2.0 * s.im(), 0.5 * m)};
}

}  // namespace prequant
