#include "meshmotion/fem/element.hpp"

namespace meshmotion::fem {

namespace {

constexpr QuadraturePoint kDegree1[] = {{1.0 / 3.0, 1.0 / 3.0, 1.0}};

constexpr QuadraturePoint kDegree2[] = {
    {1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
};

constexpr double a4 = 0.445948490915964886;
constexpr double w4a = 0.223381589678011466;
constexpr double b4 = 0.091576213509770743;
constexpr double w4b = 0.109951743655321868;

constexpr QuadraturePoint kDegree4[] = {
    {a4, a4, w4a}, {1.0 - 2.0 * a4, a4, w4a}, {a4, 1.0 - 2.0 * a4, w4a},
    {b4, b4, w4b}, {1.0 - 2.0 * b4, b4, w4b}, {b4, 1.0 - 2.0 * b4, w4b},
};

}  // namespace

std::span<const QuadraturePoint> quadrature(int degree) {
  if (degree <= 1) return kDegree1;
  if (degree == 2) return kDegree2;
  if (degree <= 4) return kDegree4;
  throw std::invalid_argument("no quadrature rule for degree " + std::to_string(degree));
}

}  // namespace meshmotion::fem
