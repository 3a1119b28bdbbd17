#pragma once

namespace minispace {

struct Point2 {
    double x_m = 0.0;
    double y_m = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Reduce any finite angle to [0, 360).
double wrap_degrees(double deg);

/// Smallest unsigned difference between two directions, in [0, 180].
/// Throws DomainError on non-finite input.
double angular_deviation(double estimate_deg, double truth_deg);

/// Compass bearing from `from` to `to`: 0 = +y, 90 = +x (clockwise).
/// Throws GeometryError when the points coincide.
double compass_bearing(Point2 from, Point2 to);

/// Direction of `target` as seen from `stand` while facing `face`;
/// 0 = straight ahead, 90 = to the right. Result in [0, 360).
double egocentric_bearing(Point2 stand, Point2 face, Point2 target);

/// Distance of an egocentric bearing from the nearest of 0 and 180 degrees.
double axis_clearance(double bearing_deg);

}  // namespace minispace
