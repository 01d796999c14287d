#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace extrusim {

// Initial filling-ratio profile on the normalized domain [0, 1]. Either the
// three-coefficient family a + b (1 - cos(pi x)) + c sin(pi x) or a table of
// values at uniformly spaced nodes (endpoints included, linear interpolation).
struct Profile {
  enum class Kind { Coeffs, Table };

  Kind kind = Kind::Coeffs;
  double a = 0.0, b = 0.0, c = 0.0;
  std::vector<double> table;

  static Profile coeffs(double a, double b, double c) {
    Profile p;
    p.kind = Kind::Coeffs;
    p.a = a;
    p.b = b;
    p.c = c;
    return p;
  }

  static Profile tabulated(std::vector<double> values) {
    if (values.size() < 2)
      throw std::invalid_argument("Profile: table needs at least 2 values");
    Profile p;
    p.kind = Kind::Table;
    p.table = std::move(values);
    return p;
  }

  double value(double x) const {
    if (kind == Kind::Coeffs) {
      const double pi = std::numbers::pi;
      return a + b * (1.0 - std::cos(pi * x)) + c * std::sin(pi * x);
    }
    const double dx = 1.0 / static_cast<double>(table.size() - 1);
    if (x <= 0.0) return table.front();
    if (x >= 1.0) return table.back();
    const auto i = static_cast<std::size_t>(x / dx);
    const std::size_t j = std::min(i, table.size() - 2);
    const double w = (x - static_cast<double>(j) * dx) / dx;
    return (1.0 - w) * table[j] + w * table[j + 1];
  }

  double derivative(double x) const {
    if (kind == Kind::Coeffs) {
      const double pi = std::numbers::pi;
      return b * pi * std::sin(pi * x) + c * pi * std::cos(pi * x);
    }
    const double dx = 1.0 / static_cast<double>(table.size() - 1);
    const auto i = static_cast<std::size_t>(std::min(std::max(x, 0.0), 1.0) / dx);
    const std::size_t j = std::min(i, table.size() - 2);
    return (table[j + 1] - table[j]) / dx;
  }
};

}  // namespace extrusim
