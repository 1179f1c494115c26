#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "splatgen/random.hpp"
#include "splatgen/sh.hpp"
#include "splatgen/splat_raster.hpp"

using namespace splatgen;

namespace {

PinholeCamera small_cam() {
    PinholeCamera c;
    c.fx = c.fy = 40;
    c.cx = c.cy = 16;
    c.width = c.height = 32;
    return c;
}

// Random scene in front of an identity-pose camera.
SplatCloud random_scene(std::uint64_t seed, int max_count = 5) {
    Rng rng(seed);
    SplatCloud c;
    const int n = static_cast<int>(rng.integer(1, max_count));
    for (int i = 0; i < n; ++i) {
        Gaussian3D g;
        g.mean = Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(1.0, 3.0));
        g.scale = Vec3(rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3), rng.uniform(0.02, 0.3));
        g.rotation = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
        g.opacity = rng.uniform(0.1, 1.0);
        for (double& s : g.sh) {
            s = rng.uniform(-0.6, 0.6);
        }
        c.push_back(g);
    }
    return c;
}

double max_diff(const ImageRgb& a, const ImageRgb& b) {
    double d = 0.0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            d = std::max({d, std::abs(a.at(x, y).r - b.at(x, y).r), std::abs(a.at(x, y).g - b.at(x, y).g),
                          std::abs(a.at(x, y).b - b.at(x, y).b)});
        }
    }
    return d;
}

} // namespace

TEST_CASE("covariance_3d examples") {
    CHECK(covariance_3d(Vec3(1, 1, 1), Quat::Identity()).isApprox(Mat3::Identity()));
    CHECK(covariance_3d(Vec3(2, 1, 1), Quat::Identity()).isApprox(Vec3(4, 1, 1).asDiagonal().toDenseMatrix()));
    const Quat rz(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()));
    const Mat3 r = rz.toRotationMatrix();
    const Mat3 expect = r * Vec3(4, 1, 1).asDiagonal() * r.transpose();
    const Mat3 got = covariance_3d(Vec3(2, 1, 1), rz);
    CHECK((got - expect).norm() < 1e-12);
    CHECK((got - Mat3(Vec3(1, 4, 1).asDiagonal())).norm() < 1e-12);
}

TEST_CASE("project_gaussian: isotropic on axis vs finite-difference Jacobian") {
    const PinholeCamera cam = small_cam();
    Gaussian3D g;
    g.mean = Vec3(0, 0, 2);
    g.scale = Vec3::Constant(0.1);
    const auto s = project_gaussian(cam, Pose{}, g);
    REQUIRE(s);
    // numerical Jacobian of the projection at the mean, step 1e-6
    Eigen::Matrix<double, 2, 3> j;
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
        Vec3 dp = Vec3::Zero();
        dp[k] = h;
        const auto a = project_point(cam, Pose{}, g.mean + dp);
        const auto b = project_point(cam, Pose{}, g.mean - dp);
        j(0, k) = (a->u - b->u) / (2 * h);
        j(1, k) = (a->v - b->v) / (2 * h);
    }
    const Mat2 expect = j * (0.01 * Mat3::Identity()) * j.transpose() + 0.3 * Mat2::Identity();
    CHECK((s->cov - expect).norm() < 1e-6);
    const double closed = std::pow(cam.fx * 0.1 / 2.0, 2) + 0.3;
    CHECK(s->cov(0, 0) == doctest::Approx(closed).epsilon(1e-9));
    CHECK(std::abs(s->cov(0, 1)) < 1e-12);
    CHECK(s->mean.isApprox(Vec2(16, 16)));
    CHECK(s->depth == 2);
}

TEST_CASE("project_gaussian: culling and depth scaling") {
    const PinholeCamera cam = small_cam();
    Gaussian3D behind;
    behind.mean = Vec3(0, 0, -1);
    CHECK_FALSE(project_gaussian(cam, Pose{}, behind));
    Gaussian3D offscreen;
    offscreen.mean = Vec3(50, 0, 1);
    offscreen.scale = Vec3::Constant(0.01);
    CHECK_FALSE(project_gaussian(cam, Pose{}, offscreen));

    Gaussian3D near_g;
    near_g.mean = Vec3(0.05, 0.02, 1.5);
    near_g.scale = Vec3(0.1, 0.05, 0.02);
    near_g.rotation = Quat(Eigen::AngleAxisd(0.4, Vec3(1, 2, 3).normalized()));
    Gaussian3D far_g = near_g;
    far_g.mean = Vec3(0.1, 0.04, 3.0);  // same ray, twice the depth
    const auto a = project_gaussian(cam, Pose{}, near_g, 0.0);
    const auto b = project_gaussian(cam, Pose{}, far_g, 0.0);
    REQUIRE(a);
    REQUIRE(b);
    const Eigen::Vector2d ea = Eigen::SelfAdjointEigenSolver<Mat2>(a->cov).eigenvalues();
    const Eigen::Vector2d eb = Eigen::SelfAdjointEigenSolver<Mat2>(b->cov).eigenvalues();
    CHECK(ea[0] / eb[0] == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(ea[1] / eb[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("projected covariance is symmetric positive definite") {
    const PinholeCamera cam = small_cam();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const SplatCloud c = random_scene(seed);
        for (const Gaussian3D& g : c.gaussians()) {
            if (const auto s = project_gaussian(cam, Pose{}, g)) {
                CHECK(s->cov(0, 1) == s->cov(1, 0));
                CHECK(s->cov.determinant() > 0);
                CHECK(s->cov(0, 0) > 0);
                CHECK(s->depth > cam.near);
            }
        }
    }
}

TEST_CASE("eval_sh examples") {
    ShCoeffs sh{};
    const Rgb grey = eval_sh(sh, Vec3::UnitX());
    CHECK(grey == Rgb{0.5, 0.5, 0.5});

    sh[0] = 0.7;
    sh[16] = -0.3;
    sh[32] = 1.1;
    for (const Vec3& d : {Vec3(1, 0, 0), Vec3(Vec3(1, 2, 3).normalized()), Vec3(0, -1, 0)}) {
        const Rgb c = eval_sh(sh, d);
        CHECK(c.r == doctest::Approx(0.28209479 * 0.7 + 0.5).epsilon(1e-8));
        CHECK(c.g == doctest::Approx(0.28209479 * -0.3 + 0.5).epsilon(1e-8));
        CHECK(c.b == doctest::Approx(0.28209479 * 1.1 + 0.5).epsilon(1e-8));
    }

    // degree-1 terms flip sign under antipodal directions
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        ShCoeffs r{};
        for (int ch = 0; ch < 3; ++ch) {
            for (int b = 1; b < 4; ++b) {
                r[ch * 16 + b] = rng.uniform(-0.2, 0.2);
            }
        }
        const Vec3 d = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        const Rgb p = eval_sh(r, d);
        const Rgb q = eval_sh(r, -d);
        CHECK(p.r - 0.5 == doctest::Approx(-(q.r - 0.5)).epsilon(1e-12));
        // basis oracle: -C1*y, C1*z, -C1*x
        const double expect = 0.5 - kShC1 * d.y() * r[1] + kShC1 * d.z() * r[2] - kShC1 * d.x() * r[3];
        CHECK(p.r == doctest::Approx(expect).epsilon(1e-12));
    }

    ShCoeffs neg{};
    neg[0] = -10;
    CHECK(eval_sh(neg, Vec3::UnitZ()).r == 0.0);
}

TEST_CASE("SH rotation reproduces the rotated function") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        ShCoeffs sh{};
        for (double& c : sh) {
            c = rng.uniform(-0.2, 0.2);
        }
        const Quat q = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
        ShCoeffs rot = sh;
        ShRotator(q).apply(rot);
        for (int k = 0; k < 10; ++k) {
            const Vec3 d = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
            const auto bf = sh_basis(d);
            const auto bg = sh_basis(q * d);
            for (int ch = 0; ch < 3; ++ch) {
                double f = 0;
                double g = 0;
                for (int b = 0; b < 16; ++b) {
                    f += sh[ch * 16 + b] * bf[b];
                    g += rot[ch * 16 + b] * bg[b];
                }
                CHECK(g == doctest::Approx(f).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("render_appearance examples") {
    const PinholeCamera cam = small_cam();
    SUBCASE("zero clouds gives the background") {
        const ImageRgb img = render_appearance({}, cam, Pose{}, Rgb{0.1, 0.2, 0.3});
        for (const Rgb& p : img.pixels()) {
            CHECK(p == Rgb{0.1, 0.2, 0.3});
        }
    }
    SUBCASE("single opaque Gaussian at a pixel centre") {
        Gaussian3D g;
        // project exactly onto pixel centre (16.5, 16.5)
        g.mean = Vec3(0.5 / cam.fx * 2.0, 0.5 / cam.fy * 2.0, 2.0);
        g.scale = Vec3::Constant(0.05);
        g.opacity = 1.0;
        g.set_flat_color(Rgb{0.8, 0.4, 0.2});
        const SplatCloud cloud({g});
        const SplatCloud* clouds[] = {&cloud};
        const ImageRgb img = render_appearance(clouds, cam, Pose{}, Rgb{});
        const Rgb c = eval_sh(g.sh, g.mean.normalized());
        CHECK(img.at(16, 16).r == doctest::Approx(0.99 * c.r).epsilon(1e-12));
        CHECK(img.at(16, 16).g == doctest::Approx(0.99 * c.g).epsilon(1e-12));
        CHECK(img.at(16, 16).b == doctest::Approx(0.99 * c.b).epsilon(1e-12));
    }
    SUBCASE("three overlapping Gaussians match the brute-force loop") {
        SplatCloud c;
        for (int i = 0; i < 3; ++i) {
            Gaussian3D g;
            g.mean = Vec3(0.05 * i - 0.05, 0.03 * i, 1.5 + 0.3 * i);
            g.scale = Vec3(0.15, 0.1, 0.05);
            g.rotation = Quat(Eigen::AngleAxisd(0.5 * i, Vec3::UnitZ()));
            g.opacity = 0.7;
            g.set_flat_color(Rgb{0.2 * i + 0.1, 0.5, 0.9 - 0.3 * i});
            c.push_back(g);
        }
        const ImageRgb expect = oracle::naive_render({c}, cam, Pose{}, Rgb{0.3, 0.3, 0.3});
        const SplatCloud* clouds[] = {&c};
        CHECK(max_diff(render_appearance(clouds, cam, Pose{}, Rgb{0.3, 0.3, 0.3}), expect) <= 1e-5);
    }
}

TEST_CASE("splat_alpha: 3 sigma support and clamp") {
    Splat2D s;
    s.mean = Vec2(10, 10);
    s.cov = Mat2::Identity();
    s.opacity = 1.0;
    CHECK(splat_alpha(s, Vec2(10, 10)) == kMaxAlpha);
    CHECK(splat_alpha(s, Vec2(12.9, 10)) > 0);
    CHECK(splat_alpha(s, Vec2(13.1, 10)) == 0);
    s.opacity = 0.5;
    CHECK(splat_alpha(s, Vec2(11, 10)) == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("tiled render equals the naive oracle on random scenes, with transmittance bookkeeping") {
    const PinholeCamera cam = small_cam();
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const SplatCloud c = random_scene(seed);
        const SplatCloud* clouds[] = {&c};
        const Rgb bg{0.0, 0.0, 0.0};
        const AppearanceRender r = render_appearance_full(clouds, cam, Pose{}, bg);
        CHECK(max_diff(r.color, oracle::naive_render({c}, cam, Pose{}, bg)) <= 1e-5);

        // white splats over black: colour = sum a_i T_i, so colour + T = 1
        SplatCloud white;
        for (Gaussian3D g : c.gaussians()) {
            g.set_flat_color(Rgb{1, 1, 1});
            white.push_back(g);
        }
        const SplatCloud* wc[] = {&white};
        const AppearanceRender w = render_appearance_full(wc, cam, Pose{}, bg);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                CHECK(std::abs(w.color.at(x, y).r + w.transmittance.at(x, y) - 1.0) < 1e-6);
            }
        }
    }
}

TEST_CASE("render is invariant to input permutation and thread count") {
    const auto cam = PinholeCamera::from_fov(96, 64, 60);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        std::vector<Gaussian3D> gs;
        for (int i = 0; i < 40; ++i) {
            Gaussian3D g;
            g.mean = Vec3(rng.uniform(-0.8, 0.8), rng.uniform(-0.5, 0.5), rng.uniform(1.0, 4.0));
            g.scale = Vec3(rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2));
            g.rotation = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
            g.opacity = rng.uniform(0.1, 1.0);
            g.set_flat_color(Rgb{rng.uniform(), rng.uniform(), rng.uniform()});
            gs.push_back(g);
        }
        const SplatCloud a(gs);
        std::vector<Gaussian3D> shuffled = gs;
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
            std::swap(shuffled[i], shuffled[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i)))]);
        }
        const SplatCloud b(std::vector<Gaussian3D>(shuffled.begin(), shuffled.begin() + 17));
        const SplatCloud b2(std::vector<Gaussian3D>(shuffled.begin() + 17, shuffled.end()));
        const SplatCloud* ca[] = {&a};
        const SplatCloud* cb[] = {&b2, &b};
        RasterSettings one;
        RasterSettings many;
        many.threads = 4;
        const ImageRgb ra = render_appearance(ca, cam, Pose{}, Rgb{0.2, 0.2, 0.2}, one);
        CHECK(ra == render_appearance(cb, cam, Pose{}, Rgb{0.2, 0.2, 0.2}, one));
        CHECK(ra == render_appearance(ca, cam, Pose{}, Rgb{0.2, 0.2, 0.2}, many));
    }
}
