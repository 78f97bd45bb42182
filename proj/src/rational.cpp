#include "etrforge/rational.hpp"

#include <ostream>

#include "etrforge/errors.hpp"

namespace etrforge {

Rational Rational::from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      mpz_class n(s);
      return Rational(mpq_class(n));
    }
    mpz_class n(s.substr(0, slash));
    mpz_class d(s.substr(slash + 1));
    if (d == 0) fail(Err::SyntaxError, "zero denominator in rational '" + s + "'");
    mpq_class q(n);
    q /= mpq_class(d);
    return Rational(q);
  } catch (const std::invalid_argument&) {
    fail(Err::SyntaxError, "malformed rational '" + s + "'");
  }
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.v_ == 0) fail(Err::IllFormed, "division by zero");
  v_ /= o.v_;
  return *this;
}

Rational Rational::pow(unsigned long e) const {
  mpq_class r;
  mpz_pow_ui(r.get_num_mpz_t(), v_.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), v_.get_den_mpz_t(), e);
  r.canonicalize();
  return Rational(r);
}

std::string Rational::str() const {
  if (is_integer()) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational pow2(long e) {
  mpq_class r(1);
  if (e >= 0) {
    mpz_ui_pow_ui(r.get_num_mpz_t(), 2, static_cast<unsigned long>(e));
  } else {
    mpz_ui_pow_ui(r.get_den_mpz_t(), 2, static_cast<unsigned long>(-e));
  }
  r.canonicalize();
  return Rational(r);
}

}  // namespace etrforge
