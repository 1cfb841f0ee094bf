#ifndef DIPOLEKIT_QUADRATURE_HPP
#define DIPOLEKIT_QUADRATURE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace dipolekit::quad {

/// n-point Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
public:
  explicit GaussLegendre(int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// Integral of f over [a, b] with a single application of the rule.
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

  /// Composite rule over `panels` equal panels of [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b, int panels) const {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) sum += integrate(f, a + p * h, a + (p + 1) * h);
    return sum;
  }

private:
  std::vector<double> nodes_, weights_;
};

/// Value at 0 of the interpolating polynomial through (x_i, y_i) (Neville).
double extrapolate_to_zero(std::span<const double> x, std::span<const double> y);

} // namespace dipolekit::quad

#endif // DIPOLEKIT_QUADRATURE_HPP
