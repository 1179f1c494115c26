#pragma once

#include <array>

#include "splatgen/math.hpp"
#include "splatgen/splat.hpp"

namespace splatgen {

inline constexpr double kShC0 = 0.28209479177387814;
inline constexpr double kShC1 = 0.4886025119029199;
inline constexpr std::array<double, 5> kShC2 = {1.0925484305920792, -1.0925484305920792,
                                                0.31539156525252005, -1.0925484305920792,
                                                0.5462742152960396};
inline constexpr std::array<double, 7> kShC3 = {-0.5900435899266435, 2.890611442640554,
                                                -0.4570457994644658, 0.3731763325901154,
                                                -0.4570457994644658, 1.445305721320277,
                                                -0.5900435899266435};

/// Real SH basis up to degree 3 in the ordering and sign convention of the usual
/// splatting renderers.
std::array<double, 16> sh_basis(const Vec3& dir);

/// View-dependent colour: sum of basis terms plus 0.5, clamped at 0 from below.
Rgb eval_sh(const ShCoeffs& sh, const Vec3& view_dir);

/// Rotates SH coefficients so that the rotated function g(d) equals f(R^-1 d).
/// Degree 0 is untouched.
class ShRotator {
public:
    explicit ShRotator(const Quat& rotation);

    void apply(ShCoeffs& sh) const;

private:
    Eigen::Matrix3d band1_;
    Eigen::Matrix<double, 5, 5> band2_;
    Eigen::Matrix<double, 7, 7> band3_;
};

} // namespace splatgen
