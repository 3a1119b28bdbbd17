#include "minispace/angles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minispace/error.hpp"

namespace minispace {

double wrap_degrees(double deg) {
    if (!std::isfinite(deg)) throw DomainError("angle must be finite");
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    // fmod of a tiny negative value can round up to exactly 360
    if (r >= 360.0) r = 0.0;
    return r;
}

double angular_deviation(double estimate_deg, double truth_deg) {
    if (!std::isfinite(estimate_deg) || !std::isfinite(truth_deg)) {
        throw DomainError("angular_deviation: inputs must be finite");
    }
    const double delta = wrap_degrees(estimate_deg - truth_deg);
    return std::min(delta, 360.0 - delta);
}

double compass_bearing(Point2 from, Point2 to) {
    const double dx = to.x_m - from.x_m;
    const double dy = to.y_m - from.y_m;
    if (dx == 0.0 && dy == 0.0) throw GeometryError("bearing between coincident points");
    return wrap_degrees(std::atan2(dx, dy) * 180.0 / std::numbers::pi);
}

double egocentric_bearing(Point2 stand, Point2 face, Point2 target) {
    return wrap_degrees(compass_bearing(stand, target) - compass_bearing(stand, face));
}

double axis_clearance(double bearing_deg) {
    const double b = wrap_degrees(bearing_deg);
    return std::min({b, 360.0 - b, std::abs(b - 180.0)});
}

}  // namespace minispace
