#ifndef RAMANMAG_INTERP_HPP
#define RAMANMAG_INTERP_HPP

#include <vector>

namespace ramanmag {

// Shape-preserving piecewise-cubic Hermite interpolant (Fritsch-Carlson knot
// slopes). Reproduces the data exactly at the knots, never overshoots between
// them, and exposes the analytic first derivative.
class MonotoneCubic {
  public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double eval(double x) const;
    double deriv(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

  private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> slope_;  // knot derivatives
};

}  // namespace ramanmag

#endif
