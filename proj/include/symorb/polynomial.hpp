#pragma once

// Sparse multivariate polynomials with real or complex coefficients.
//
// A MultiPoly stores a map from exponent vectors to coefficients and never
// keeps an exact-zero coefficient, so two polynomials are equal iff their term
// maps are equal.  Evaluation, differentiation and substitution are exact
// polynomial arithmetic up to floating rounding.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace symorb {

using Exponent = std::vector<int>;

namespace detail {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename T>
bool is_exact_zero(const T& c) {
  return c == T(0);
}

template <typename T>
double magnitude(const T& c) {
  return static_cast<double>(std::abs(c));
}

template <typename R>
R ipow(R base, int e) {
  R out(1);
  while (e > 0) {
    if (e & 1) out *= base;
    base *= base;
    e >>= 1;
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
class MultiPoly {
 public:
  using scalar_type = Scalar;
  using TermMap = std::map<Exponent, Scalar>;

  MultiPoly() = default;
  explicit MultiPoly(int nvars) : nvars_(nvars) {
    if (nvars < 0) throw std::invalid_argument("MultiPoly: negative variable count");
  }

  static MultiPoly constant(int nvars, Scalar c) {
    MultiPoly p(nvars);
    p.add_term(Exponent(nvars, 0), c);
    return p;
  }

  static MultiPoly variable(int nvars, int index, Scalar c = Scalar(1)) {
    if (index < 0 || index >= nvars) throw std::out_of_range("MultiPoly::variable: index out of range");
    Exponent e(nvars, 0);
    e[index] = 1;
    MultiPoly p(nvars);
    p.add_term(e, c);
    return p;
  }

  static MultiPoly monomial(const Exponent& e, Scalar c) {
    MultiPoly p(static_cast<int>(e.size()));
    p.add_term(e, c);
    return p;
  }

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add_term(const Exponent& e, Scalar c) {
    if (static_cast<int>(e.size()) != nvars_)
      throw std::invalid_argument("MultiPoly::add_term: exponent length " + std::to_string(e.size()) +
                                  " does not match " + std::to_string(nvars_) + " variables");
    for (int k : e)
      if (k < 0) throw std::invalid_argument("MultiPoly::add_term: negative exponent");
    if (detail::is_exact_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (detail::is_exact_zero(it->second)) terms_.erase(it);
    }
  }

  Scalar coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Scalar(0) : it->second;
  }

  /// Maximum total degree; -1 for the zero polynomial.
  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
  }

  /// Maximum exponent of one variable.
  int degree_in(int var) const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
    return d;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const int d = degree();
    for (const auto& [e, c] : terms_)
      if (std::accumulate(e.begin(), e.end(), 0) != d) return false;
    return true;
  }

  MultiPoly& operator+=(const MultiPoly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  MultiPoly& operator-=(const MultiPoly& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  MultiPoly& operator*=(Scalar s) {
    if (detail::is_exact_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      if (detail::is_exact_zero(it->second))
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }
  MultiPoly& operator*=(const MultiPoly& o) {
    *this = *this * o;
    return *this;
  }

  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
  friend MultiPoly operator-(MultiPoly a) { return a *= Scalar(-1); }
  friend MultiPoly operator*(MultiPoly a, Scalar s) { return a *= s; }
  friend MultiPoly operator*(Scalar s, MultiPoly a) { return a *= s; }
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
    a.check_same(b);
    MultiPoly out(a.nvars_);
    Exponent e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (int i = 0; i < a.nvars_; ++i) e[i] = ea[i] + eb[i];
        out.add_term(e, ca * cb);
      }
    return out;
  }
  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

 private:
  void check_same(const MultiPoly& o) const {
    if (o.nvars_ != nvars_)
      throw std::invalid_argument("MultiPoly: variable count mismatch (" + std::to_string(nvars_) + " vs " +
                                  std::to_string(o.nvars_) + ")");
  }

  int nvars_ = 0;
  TermMap terms_;
};

template <typename Scalar>
MultiPoly<Scalar> pow(const MultiPoly<Scalar>& p, int e) {
  if (e < 0) throw std::invalid_argument("pow: negative exponent");
  MultiPoly<Scalar> out = MultiPoly<Scalar>::constant(p.nvars(), Scalar(1));
  MultiPoly<Scalar> base = p;
  while (e > 0) {
    if (e & 1) out = out * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return out;
}

/// Value of p at x.  x is any indexable vector (Eigen vector, std::vector).
template <typename Scalar, typename Vec>
auto evaluate(const MultiPoly<Scalar>& p, const Vec& x) {
  using XS = std::decay_t<decltype(x[0])>;
  using R = std::common_type_t<Scalar, XS>;
  if (static_cast<int>(x.size()) != p.nvars())
    throw std::invalid_argument("evaluate: point has " + std::to_string(x.size()) + " components, polynomial has " +
                                std::to_string(p.nvars()) + " variables");
  R sum(0);
  for (const auto& [e, c] : p.terms()) {
    R term(c);
    for (int i = 0; i < p.nvars(); ++i)
      if (e[i] != 0) term *= detail::ipow(R(x[i]), e[i]);
    sum += term;
  }
  return sum;
}

template <typename Scalar>
MultiPoly<Scalar> derivative(const MultiPoly<Scalar>& p, int var) {
  if (var < 0 || var >= p.nvars()) throw std::out_of_range("derivative: variable index out of range");
  MultiPoly<Scalar> out(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    out.add_term(d, c * Scalar(e[var]));
  }
  return out;
}

/// p(q_0, ..., q_{n-1}): every variable replaced by a polynomial in a common
/// (possibly different) variable set.
template <typename Scalar>
MultiPoly<Scalar> substitute(const MultiPoly<Scalar>& p, const std::vector<MultiPoly<Scalar>>& q) {
  if (static_cast<int>(q.size()) != p.nvars())
    throw std::invalid_argument("substitute: need one replacement per variable");
  if (q.empty()) return p;
  const int m = q.front().nvars();
  for (const auto& qi : q)
    if (qi.nvars() != m) throw std::invalid_argument("substitute: replacements disagree on variable count");

  std::vector<std::vector<MultiPoly<Scalar>>> powers(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const int dmax = p.degree_in(static_cast<int>(i));
    powers[i].reserve(dmax + 1);
    powers[i].push_back(MultiPoly<Scalar>::constant(m, Scalar(1)));
    for (int k = 1; k <= dmax; ++k) powers[i].push_back(powers[i].back() * q[i]);
  }
  MultiPoly<Scalar> out(m);
  for (const auto& [e, c] : p.terms()) {
    MultiPoly<Scalar> term = MultiPoly<Scalar>::constant(m, c);
    for (std::size_t i = 0; i < q.size(); ++i)
      if (e[i] != 0) term = term * powers[i][e[i]];
    out += term;
  }
  return out;
}

/// Drops coefficients with magnitude <= tol.
template <typename Scalar>
MultiPoly<Scalar> prune(const MultiPoly<Scalar>& p, double tol) {
  MultiPoly<Scalar> out(p.nvars());
  for (const auto& [e, c] : p.terms())
    if (detail::magnitude(c) > tol) out.add_term(e, c);
  return out;
}

template <typename To, typename From>
MultiPoly<To> poly_cast(const MultiPoly<From>& p) {
  MultiPoly<To> out(p.nvars());
  for (const auto& [e, c] : p.terms()) out.add_term(e, To(c));
  return out;
}

/// Real part of a complex polynomial; throws if any imaginary part exceeds tol.
inline MultiPoly<double> real_part(const MultiPoly<std::complex<double>>& p, double tol) {
  MultiPoly<double> out(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    if (std::abs(c.imag()) > tol)
      throw std::domain_error("real_part: coefficient has imaginary part " + std::to_string(c.imag()));
    out.add_term(e, c.real());
  }
  return out;
}

/// Largest coefficient magnitude of a - b.
template <typename Scalar>
double max_coeff_diff(const MultiPoly<Scalar>& a, const MultiPoly<Scalar>& b) {
  double m = 0;
  const MultiPoly<Scalar> d = a - b;
  for (const auto& [e, c] : d.terms()) m = std::max(m, detail::magnitude(c));
  return m;
}

template <typename Scalar>
std::string format(const MultiPoly<Scalar>& p, const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != p.nvars()) throw std::invalid_argument("format: wrong number of names");
  if (p.is_zero()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c << ")";
    for (int i = 0; i < p.nvars(); ++i) {
      if (e[i] == 0) continue;
      os << "*" << names[i];
      if (e[i] > 1) os << "^" << e[i];
    }
  }
  return os.str();
}

/// A list of polynomials over one shared variable list.
template <typename Scalar>
struct PolySystem {
  std::vector<MultiPoly<Scalar>> polys;
  std::vector<std::string> names;

  PolySystem() = default;
  PolySystem(std::vector<MultiPoly<Scalar>> p, std::vector<std::string> n) : polys(std::move(p)), names(std::move(n)) {
    for (const auto& q : polys)
      if (q.nvars() != static_cast<int>(names.size()))
        throw std::invalid_argument("PolySystem: polynomial variable count does not match the name list");
  }

  int nvars() const { return static_cast<int>(names.size()); }
  int size() const { return static_cast<int>(polys.size()); }

  bool is_homogeneous() const {
    return std::all_of(polys.begin(), polys.end(), [](const auto& q) { return q.is_homogeneous(); });
  }

  /// Product of degrees.
  long bezout_number() const {
    long b = 1;
    for (const auto& q : polys) b *= std::max(q.degree(), 0);
    return b;
  }

  int index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("PolySystem: no variable named '" + name + "'");
    return static_cast<int>(it - names.begin());
  }
};

template <typename Scalar>
using PolyMatrix = std::vector<std::vector<MultiPoly<Scalar>>>;

/// Entry (i, j) is d p_i / d x_j.
template <typename Scalar>
PolyMatrix<Scalar> jacobian(const PolySystem<Scalar>& sys) {
  PolyMatrix<Scalar> J(sys.polys.size());
  for (std::size_t i = 0; i < sys.polys.size(); ++i)
    for (int j = 0; j < sys.nvars(); ++j) J[i].push_back(derivative(sys.polys[i], j));
  return J;
}

template <typename Scalar, typename Vec>
auto evaluate(const PolySystem<Scalar>& sys, const Vec& x) {
  using R = decltype(evaluate(sys.polys.front(), x));
  Eigen::Matrix<R, Eigen::Dynamic, 1> out(sys.size());
  for (int i = 0; i < sys.size(); ++i) out[i] = evaluate(sys.polys[i], x);
  return out;
}

template <typename Scalar, typename Vec>
auto evaluate(const PolyMatrix<Scalar>& J, const Vec& x) {
  using R = decltype(evaluate(J.front().front(), x));
  const Eigen::Index rows = static_cast<Eigen::Index>(J.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(J.front().size()) : 0;
  Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = evaluate(J[i][j], x);
  return out;
}

}  // namespace symorb
