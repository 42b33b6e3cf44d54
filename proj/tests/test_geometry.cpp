#include "support.hpp"

#include "vpkit/geometry.hpp"

#include <doctest.h>

using namespace vpkit;
using namespace vpkit::testing;

TEST_CASE("riesz kernel values") {
  const KernelSpec<double> k2{2, 1, 0.0}, k3{3, 1, 0.0};
  const Eigen::VectorXd a = riesz_kernel(Eigen::Vector2d(1, 0), k2);
  CHECK(a[0] == doctest::Approx(1));
  CHECK(a[1] == doctest::Approx(0));
  const Eigen::VectorXd b = riesz_kernel(Eigen::Vector3d(0, 0, 2), k3);
  CHECK(b[0] == 0);
  CHECK(b[1] == 0);
  CHECK(b[2] == doctest::Approx(0.25));
  const Eigen::VectorXd c = riesz_kernel(Eigen::Vector2d(3, 4), k2);
  CHECK(c[0] == doctest::Approx(0.12));
  CHECK(c[1] == doctest::Approx(0.16));
}

TEST_CASE("riesz kernel errors") {
  CHECK_THROWS_AS(riesz_kernel(Eigen::Vector2d(0, 0), KernelSpec<double>{2, 1, 0.0}), std::domain_error);
  CHECK_NOTHROW(riesz_kernel(Eigen::Vector2d(0, 0), KernelSpec<double>{2, 1, 0.1}));
  CHECK_THROWS_AS(riesz_kernel(Eigen::Vector3d(1, 0, 0), KernelSpec<double>{2, 1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(riesz_kernel(Eigen::Vector2d(1, 0), KernelSpec<double>{4, 1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(riesz_kernel(Eigen::Vector2d(1, 0), KernelSpec<double>{2, 2, 0.0}), std::invalid_argument);
}

TEST_CASE("riesz kernel in single precision") {
  const Eigen::VectorXf a = riesz_kernel(Eigen::Vector2f(3, 4), KernelSpec<float>{2, 1, 0.0f});
  CHECK(a[0] == doctest::Approx(0.12f));
}

TEST_CASE("field of point sources") {
  const KernelSpec<double> spec{2, 1, 0.0};
  PointMatrix<double> src(1, 2);
  src << 0, 0;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  PointMatrix<double> tgt(1, 2);
  tgt << 1, 0;
  auto e = field_at<double>(tgt, {src, w}, spec);
  CHECK(e(0, 0) == doctest::Approx(1));
  CHECK(e(0, 1) == doctest::Approx(0));

  // gravitational sign flips the field
  e = field_at<double>(tgt, {src, w}, KernelSpec<double>{2, -1, 0.0});
  CHECK(e(0, 0) == doctest::Approx(-1));

  PointMatrix<double> pair(2, 2);
  pair << 1, 0, -1, 0;
  PointMatrix<double> origin = PointMatrix<double>::Zero(1, 2);
  e = field_at<double>(origin, {pair, Eigen::VectorXd::Ones(2)}, spec);
  CHECK(e.norm() == doctest::Approx(0).epsilon(1e-15));
}

TEST_CASE("field errors") {
  const KernelSpec<double> spec{2, 1, 0.0};
  PointMatrix<double> src = PointMatrix<double>::Zero(1, 2);
  PointMatrix<double> tgt = PointMatrix<double>::Zero(1, 2);
  CHECK_THROWS_AS(field_at<double>(tgt, {src, Eigen::VectorXd::Ones(1)}, spec), std::domain_error);
  CHECK_THROWS_AS(field_at<double>(tgt, {src, -Eigen::VectorXd::Ones(1)}, KernelSpec<double>{2, 1, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(field_at<double>(tgt, {src, Eigen::VectorXd::Ones(2)}, spec), std::invalid_argument);
}

TEST_CASE("uniform disk field follows Gauss law") {
  const auto disk = unit_disk_quadrature(400);
  const KernelSpec<double> spec{2, 1, 0.0};
  PointMatrix<double> tgt(3, 2);
  // off the quadrature nodes
  tgt << 0.3037, 0.0011, -0.2013, 0.4021, 0.0007, -0.7013;
  const auto e = field_at<double>(tgt, {disk.positions, disk.weights}, spec);
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d x = tgt.row(i).transpose();
    const Eigen::Vector2d expected = pi * x;
    CHECK((e.row(i).transpose() - expected).norm() <= 0.02 * expected.norm());
  }
}

TEST_CASE("field sup norm") {
  const KernelSpec<double> spec{2, 1, 0.0};
  PointMatrix<double> src = PointMatrix<double>::Zero(1, 2);
  PointMatrix<double> ring(16, 2);
  for (int i = 0; i < 16; ++i) ring.row(i) << std::cos(2 * pi * i / 16), std::sin(2 * pi * i / 16);
  CHECK(field_sup_norm<double>(ring, {src, Eigen::VectorXd::Ones(1)}, spec) == doctest::Approx(1));

  PointMatrix<double> none(0, 2);
  CHECK(field_sup_norm<double>(ring, {none, Eigen::VectorXd(0)}, spec) == 0);

  // uniform disk: |E| = pi |x| grows to pi at the rim
  const auto disk = unit_disk_quadrature(300);
  PointMatrix<double> rim(64, 2);
  for (int i = 0; i < 64; ++i) {
    const double r = 0.25 + 0.75 * (i % 16) / 15.0, t = 0.37 + 2 * pi * i / 64;
    rim.row(i) << r * std::cos(t), r * std::sin(t);
  }
  const double sup = field_sup_norm<double>(rim, {disk.positions, disk.weights}, spec);
  CHECK(sup == doctest::Approx(pi).epsilon(0.02));
}

TEST_CASE("self field skips self interaction") {
  PointMatrix<double> pos(2, 2);
  pos << 0, 0, 1, 0;
  const auto e = self_field<double>({pos, Eigen::VectorXd::Ones(2)}, KernelSpec<double>{2, 1, 0.0});
  CHECK(e(0, 0) == doctest::Approx(-1));
  CHECK(e(1, 0) == doctest::Approx(1));
  CHECK(e(0, 1) == 0);
}

TEST_CASE("log minus") {
  CHECK(log_minus(1.0) == 0);
  CHECK(log_minus(2.0) == 0);
  CHECK(log_minus(std::exp(-1.0)) == doctest::Approx(1));
}

TEST_CASE("geometric constants") {
  CHECK(GeometricConstants::for_dimension(2).omega_n == doctest::Approx(pi));
  CHECK(GeometricConstants::for_dimension(3).sigma_n == doctest::Approx(4 * pi));
  CHECK_THROWS(GeometricConstants::for_dimension(4));
}
