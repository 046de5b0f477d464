#include "color.hpp"

#include <cmath>

#include "errors.hpp"

namespace canopy {

namespace {

double srgb_to_linear(double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    constexpr double delta3 = delta * delta * delta;
    return t > delta3 ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Lab rgb_to_lab(double r, double g, double b) {
    if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
        throw DomainError("rgb_to_lab: channel outside [0, 255]");
    double rl = srgb_to_linear(r);
    double gl = srgb_to_linear(g);
    double bl = srgb_to_linear(b);

    // sRGB -> XYZ, D65 white point
    double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

    double fx = lab_f(x / 0.95047);
    double fy = lab_f(y / 1.0);
    double fz = lab_f(z / 1.08883);

    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

}  // namespace canopy
