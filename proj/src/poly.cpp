#include "kpd/poly.hpp"

#include <nlohmann/json.hpp>

namespace kpd {

Poly::Poly(std::vector<Complex> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.push_back(Complex(0.0));
  trim();
}

void Poly::trim() {
  while (c_.size() > 1 && c_.back() == Complex(0.0)) c_.pop_back();
}

Complex Poly::eval(Complex z) const {
  Complex acc = 0.0;
  for (int i = degree(); i >= 0; --i) acc = acc * z + c_[i];
  return acc;
}

Poly Poly::derivative() const {
  if (degree() == 0) return Poly();
  std::vector<Complex> d(c_.size() - 1);
  for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = double(i) * c_[i];
  return Poly(std::move(d));
}

Poly Poly::operator+(const Poly& o) const {
  std::vector<Complex> r(std::max(c_.size(), o.c_.size()), Complex(0.0));
  for (size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
  for (size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
  return Poly(std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + o * Complex(-1.0); }

Poly Poly::operator*(const Poly& o) const {
  std::vector<Complex> r(c_.size() + o.c_.size() - 1, Complex(0.0));
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  return Poly(std::move(r));
}

Poly Poly::operator*(Complex a) const {
  std::vector<Complex> r = c_;
  for (auto& x : r) x *= a;
  return Poly(std::move(r));
}

Poly Poly::affine_substitute(Complex a, Complex b) const {
  // Horner in the substituted variable keeps this O(d^2)
  Poly acc = Poly::constant(c_.back());
  Poly lin({b, a});
  for (int i = degree() - 1; i >= 0; --i) acc = acc * lin + Poly::constant(c_[i]);
  return acc;
}

Poly Poly::power_substitute(int k) const {
  if (k < 1) throw PreconditionError("power_substitute: k must be >= 1");
  std::vector<Complex> r(static_cast<size_t>(degree()) * k + 1, Complex(0.0));
  for (size_t i = 0; i < c_.size(); ++i) r[i * k] = c_[i];
  return Poly(std::move(r));
}

Poly Poly::deflate(Complex root, int m, double tol) const {
  std::vector<Complex> cur = c_;
  double scale = 0.0;
  for (auto& x : cur) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return Poly();
  for (int pass = 0; pass < m; ++pass) {
    if (cur.size() < 2) throw PreconditionError("deflate: degree too small");
    std::vector<Complex> quo(cur.size() - 1);
    Complex carry = cur.back();
    for (int i = static_cast<int>(cur.size()) - 2; i >= 0; --i) {
      quo[i] = carry;
      carry = cur[i] + carry * root;
    }
    if (std::abs(carry) > tol * std::max(scale, 1.0))
      throw NumericError("deflate: nonzero remainder, not a root of this multiplicity");
    cur = std::move(quo);
  }
  return Poly(std::move(cur));
}

PolyCurve::PolyCurve(std::vector<Poly> components) : comp_(std::move(components)) {
  if (comp_.empty()) throw PreconditionError("PolyCurve: no components");
}

int PolyCurve::degree() const {
  int d = 0;
  for (const auto& p : comp_) d = std::max(d, p.degree());
  return d;
}

CVec PolyCurve::eval(Complex z) const {
  CVec v(ambient_dim());
  for (int i = 0; i < ambient_dim(); ++i) v[i] = comp_[i].eval(z);
  return v;
}

PolyCurve PolyCurve::derivative() const {
  std::vector<Poly> d;
  d.reserve(comp_.size());
  for (const auto& p : comp_) d.push_back(p.derivative());
  return PolyCurve(std::move(d));
}

PolyCurve PolyCurve::affine_substitute(Complex a, Complex b) const {
  std::vector<Poly> d;
  d.reserve(comp_.size());
  for (const auto& p : comp_) d.push_back(p.affine_substitute(a, b));
  return PolyCurve(std::move(d));
}

PolyCurve PolyCurve::power_substitute(int k) const {
  std::vector<Poly> d;
  d.reserve(comp_.size());
  for (const auto& p : comp_) d.push_back(p.power_substitute(k));
  return PolyCurve(std::move(d));
}

PolyCurve PolyCurve::linear_map(const CMat& m) const {
  if (m.cols() != ambient_dim())
    throw PreconditionError("linear_map: dimension mismatch");
  std::vector<Poly> out(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    Poly acc;
    for (int c = 0; c < m.cols(); ++c) acc = acc + comp_[c] * m(r, c);
    out[r] = acc;
  }
  return PolyCurve(std::move(out));
}

PolyCurve PolyCurve::from_json(const nlohmann::json& j) {
  std::vector<Poly> comps;
  for (const auto& jc : j.at("components")) {
    std::vector<Complex> coeffs;
    for (const auto& pair : jc) {
      auto v = pair.get<std::vector<double>>();
      if (v.size() != 2) throw PreconditionError("curve JSON: coefficient must be [re, im]");
      coeffs.emplace_back(v[0], v[1]);
    }
    comps.emplace_back(std::move(coeffs));
  }
  return PolyCurve(std::move(comps));
}

nlohmann::json PolyCurve::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& p : comp_) {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& a : p.coeffs()) jc.push_back({a.real(), a.imag()});
    comps.push_back(jc);
  }
  return nlohmann::json{{"components", comps}};
}

std::vector<Complex> poly_roots(const Poly& p, double coeff_tol) {
  std::vector<Complex> c = p.coeffs();
  double scale = 0.0;
  for (auto& x : c) scale = std::max(scale, std::abs(x));
  int d = static_cast<int>(c.size()) - 1;
  while (d > 0 && std::abs(c[d]) <= coeff_tol * scale) --d;
  if (d < 1) return {};
  CMat companion = CMat::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i] / c[d];
  Eigen::ComplexEigenSolver<CMat> es(companion, false);
  std::vector<Complex> roots(es.eigenvalues().data(),
                             es.eigenvalues().data() + d);
  return roots;
}

}  // namespace kpd
