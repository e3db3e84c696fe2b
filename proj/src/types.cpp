#include "tsr/types.hpp"

#include <cmath>

namespace tsr {

double Contour::perimeter() const {
    if (points.size() < 2) return 0.0;
    double len = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Point& a = points[i];
        const Point& b = points[(i + 1) % points.size()];
        len += std::hypot(b.x - a.x, b.y - a.y);
    }
    return len;
}

} // namespace tsr
