#include "kpd/product_model.hpp"

#include <array>

#include <nlohmann/json.hpp>

namespace kpd {

const QuadraticSpace& d2_space() {
  static const QuadraticSpace space = QuadraticSpace::standard(1);
  return space;
}

Pair2 normalize_pair(const Pair2& v) {
  double n = v.norm();
  if (n == 0.0) throw PreconditionError("normalize_pair: zero pair");
  Pair2 u = v / n;
  int k = (std::abs(u[1]) > std::abs(u[0]) + 1e-15) ? 1 : 0;
  return u / (u[k] / std::abs(u[k]));
}

bool pairs_equal(const Pair2& u, const Pair2& v, double tol) {
  double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw PreconditionError("pairs_equal: zero pair");
  Complex det = u[0] * v[1] - u[1] * v[0];
  return std::abs(det) < tol * nu * nv;
}

D2Point d2_point(const Pair2& x, const Pair2& y) {
  return D2Point{normalize_pair(x), normalize_pair(y)};
}

bool d2_points_equal(const D2Point& a, const D2Point& b, double tol) {
  return pairs_equal(a.x, b.x, tol) && pairs_equal(a.y, b.y, tol);
}

D2Point D2Point::from_json(const nlohmann::json& j) {
  auto read = [](const nlohmann::json& arr) {
    auto rows = arr.get<std::vector<std::array<double, 2>>>();
    if (rows.size() != 2) throw PreconditionError("D2Point: pair must have 2 entries");
    return Pair2(Complex(rows[0][0], rows[0][1]), Complex(rows[1][0], rows[1][1]));
  };
  return d2_point(read(j.at("x")), read(j.at("y")));
}

nlohmann::json D2Point::to_json() const {
  auto write = [](const Pair2& v) {
    return std::vector<std::array<double, 2>>{{v[0].real(), v[0].imag()},
                                              {v[1].real(), v[1].imag()}};
  };
  return nlohmann::json{{"x", write(x)}, {"y", write(y)}};
}

CVec iota(const Pair2& x, const Pair2& y) {
  if (x.norm() == 0.0 || y.norm() == 0.0) throw PreconditionError("iota: zero pair");
  const Complex i(0, 1);
  CVec out(4);
  out[0] = x[0] * y[0] + x[1] * y[1];
  out[1] = i * (x[1] * y[1] - x[0] * y[0]);
  out[2] = x[1] * y[0] - x[0] * y[1];
  out[3] = x[1] * y[0] + x[0] * y[1];
  return out;
}

CVec iota(const D2Point& p) { return iota(p.x, p.y); }

Mat2 h_matrix(const CVec& x) {
  if (x.size() != 4) throw PreconditionError("h_matrix: expected 4 components");
  const Complex i(0, 1);
  Mat2 h;
  h << i * (x[3] - x[2]), -x[1] + i * x[0],
       x[1] + i * x[0], i * (x[3] + x[2]);
  return h;
}

CVec h_to_vector(const Mat2& h) {
  const Complex i(0, 1);
  CVec x(4);
  x[0] = (h(0, 1) + h(1, 0)) / (2.0 * i);
  x[1] = (h(1, 0) - h(0, 1)) / 2.0;
  x[2] = (h(1, 1) - h(0, 0)) / (2.0 * i);
  x[3] = (h(0, 0) + h(1, 1)) / (2.0 * i);
  return x;
}

D2Point iota_inverse(const CVec& x, double tol) {
  if (x.size() != 4) throw PreconditionError("iota_inverse: expected 4 components");
  double scale = x.squaredNorm();
  if (scale == 0.0) throw PreconditionError("iota_inverse: zero vector");
  Complex q = d2_space().bilinear(x, x);
  if (std::abs(q) > tol * gram_scale(d2_space()) * scale)
    throw PreconditionError("iota_inverse: vector is off the quadric");
  Mat2 h = h_matrix(x);
  // h = 2i (x0, x1)^T (y1, y0); read the larger column and row
  int c = (h.col(1).norm() > h.col(0).norm()) ? 1 : 0;
  int r = (h.row(1).norm() > h.row(0).norm()) ? 1 : 0;
  Pair2 xp(h(0, c), h(1, c));
  Pair2 yp(h(r, 1), h(r, 0));
  return d2_point(xp, yp);
}

D2Point tau(const D2Point& p) {
  Pair2 nx(std::conj(p.y[1]), std::conj(p.y[0]));
  Pair2 ny(std::conj(p.x[1]), std::conj(p.x[0]));
  return d2_point(nx, ny);
}

bool boundary_test(const D2Point& p, double tol) {
  Pair2 target(std::conj(p.x[1]), std::conj(p.x[0]));
  return pairs_equal(p.y, target, tol);
}

Mat2 metric_matrix(Complex x, Complex y, double tol) {
  Complex d = x * std::conj(y) - 1.0;
  double scale = 1.0 + std::abs(x) * std::abs(y);
  if (std::abs(d) <= tol * scale)
    throw PreconditionError("metric_matrix: chart violation x conj(y) = 1");
  Mat2 m;
  m << Complex(0), 1.0 / (d * d), 1.0 / (std::conj(d) * std::conj(d)), Complex(0);
  return m;
}

namespace {

void require_unimodular(const Mat2& a) {
  if (std::abs(a.determinant() - 1.0) >= 1e-10)
    throw PreconditionError("sl2_action: matrix is not unimodular");
}

}  // namespace

D2Point sl2_action(const Mat2& a, const D2Point& p) {
  require_unimodular(a);
  Mat2 at;
  at << std::conj(a(1, 1)), std::conj(a(1, 0)),
        std::conj(a(0, 1)), std::conj(a(0, 0));
  return d2_point(a * p.x, at * p.y);
}

D2Point sl2_action_via_h(const Mat2& a, const D2Point& p) {
  require_unimodular(a);
  Mat2 h = h_matrix(iota(p));
  Mat2 hp = a * h * a.adjoint();
  return iota_inverse(h_to_vector(hp));
}

D2Point swap(const D2Point& p) { return D2Point{p.y, p.x}; }

D2Point D2Curve::eval(Complex s) const {
  return d2_point(Pair2(x0.eval(s), x1.eval(s)), Pair2(y0.eval(s), y1.eval(s)));
}

D2Curve D2Curve::sl2_apply(const Mat2& a) const {
  require_unimodular(a);
  D2Curve out;
  out.x0 = x0 * a(0, 0) + x1 * a(0, 1);
  out.x1 = x0 * a(1, 0) + x1 * a(1, 1);
  out.y0 = y0 * std::conj(a(1, 1)) + y1 * std::conj(a(1, 0));
  out.y1 = y0 * std::conj(a(0, 1)) + y1 * std::conj(a(0, 0));
  return out;
}

D2Curve D2Curve::swap_factors() const { return D2Curve{y0, y1, x0, x1}; }

D2Curve D2Curve::affine_substitute(Complex scale, Complex shift) const {
  return D2Curve{x0.affine_substitute(scale, shift), x1.affine_substitute(scale, shift),
                 y0.affine_substitute(scale, shift), y1.affine_substitute(scale, shift)};
}

PolyCurve D2Curve::push() const {
  const Complex i(0, 1);
  Poly a = x0 * y0 + x1 * y1;
  Poly b = (x1 * y1 - x0 * y0) * i;
  Poly c = x1 * y0 - x0 * y1;
  Poly d = x1 * y0 + x0 * y1;
  return PolyCurve({a, b, c, d});
}

}  // namespace kpd
