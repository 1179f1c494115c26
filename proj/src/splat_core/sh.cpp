#include "splatgen/sh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>

namespace splatgen {

std::array<double, 16> sh_basis(const Vec3& d) {
    const double x = d.x();
    const double y = d.y();
    const double z = d.z();
    const double xx = x * x;
    const double yy = y * y;
    const double zz = z * z;
    return {
        kShC0,
        -kShC1 * y,
        kShC1 * z,
        -kShC1 * x,
        kShC2[0] * x * y,
        kShC2[1] * y * z,
        kShC2[2] * (2.0 * zz - xx - yy),
        kShC2[3] * x * z,
        kShC2[4] * (xx - yy),
        kShC3[0] * y * (3.0 * xx - yy),
        kShC3[1] * x * y * z,
        kShC3[2] * y * (4.0 * zz - xx - yy),
        kShC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
        kShC3[4] * x * (4.0 * zz - xx - yy),
        kShC3[5] * z * (xx - yy),
        kShC3[6] * x * (xx - 3.0 * yy),
    };
}

Rgb eval_sh(const ShCoeffs& sh, const Vec3& view_dir) {
    const auto basis = sh_basis(view_dir);
    double out[3];
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = 0; k < kShCoeffsPerChannel; ++k) {
            acc += basis[k] * sh[c * kShCoeffsPerChannel + k];
        }
        out[c] = std::max(acc + 0.5, 0.0);
    }
    return {out[0], out[1], out[2]};
}

namespace {

// Per-band rotation matrices are recovered by least squares on a fixed spread of
// directions: find D with Y(d_i) D = Y(R^-1 d_i). Each band is closed under rotation,
// so the fit is exact up to rounding.
template <int Band>
Eigen::Matrix<double, 2 * Band + 1, 2 * Band + 1> band_matrix(const Quat& rotation) {
    constexpr int kDim = 2 * Band + 1;
    constexpr int kOffset = Band * Band;
    constexpr int kSamples = 48;
    Eigen::Matrix<double, kSamples, kDim> a;
    Eigen::Matrix<double, kSamples, kDim> b;
    const Quat inv = rotation.conjugate();
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kSamples; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / kSamples;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 d(r * std::cos(golden * i), r * std::sin(golden * i), z);
        const auto yd = sh_basis(d);
        const auto yr = sh_basis(inv * d);
        for (int m = 0; m < kDim; ++m) {
            a(i, m) = yd[kOffset + m];
            b(i, m) = yr[kOffset + m];
        }
    }
    return a.colPivHouseholderQr().solve(b);
}

template <int Band, typename M>
void rotate_band(const M& d, ShCoeffs& sh) {
    constexpr int kDim = 2 * Band + 1;
    constexpr int kOffset = Band * Band;
    for (int c = 0; c < 3; ++c) {
        Eigen::Matrix<double, kDim, 1> v;
        for (int m = 0; m < kDim; ++m) {
            v(m) = sh[c * kShCoeffsPerChannel + kOffset + m];
        }
        const Eigen::Matrix<double, kDim, 1> r = d * v;
        for (int m = 0; m < kDim; ++m) {
            sh[c * kShCoeffsPerChannel + kOffset + m] = r(m);
        }
    }
}

} // namespace

ShRotator::ShRotator(const Quat& rotation)
    : band1_(band_matrix<1>(rotation)),
      band2_(band_matrix<2>(rotation)),
      band3_(band_matrix<3>(rotation)) {}

void ShRotator::apply(ShCoeffs& sh) const {
    rotate_band<1>(band1_, sh);
    rotate_band<2>(band2_, sh);
    rotate_band<3>(band3_, sh);
}

} // namespace splatgen
