#include "opilab/numeric.hpp"

#include <cstdlib>
#include <optional>
#include <sstream>

#include "opilab/config.hpp"
#include "opilab/errors.hpp"

namespace opilab {

namespace {
unsigned g_digits = kDefaultDigits;
std::optional<std::uint64_t> g_budget_override;

struct DigitsInit {
  DigitsInit() { Real::default_precision(kDefaultDigits); }
} g_digits_init;
}  // namespace

void set_working_digits(unsigned digits) {
  if (digits < 16 || digits > 2000) throw DomainError("precision must be in [16, 2000] digits");
  g_digits = digits;
  Real::default_precision(digits);
}

unsigned working_digits() { return g_digits; }

BigInt binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) return 0;
  BigInt out;
  mpz_bin_uiui(out.backend().data(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

Rational binomial_q(long n, long k) { return Rational(binomial(n, k)); }

BigInt factorial(long n) {
  if (n < 0) throw DomainError("factorial of negative number");
  BigInt out;
  mpz_fac_ui(out.backend().data(), static_cast<unsigned long>(n));
  return out;
}

double to_double(const Rational& q) { return mpq_get_d(q.backend().data()); }
double to_double(const Real& x) { return x.convert_to<double>(); }

Real to_real(const Rational& q) {
  Real num(boost::multiprecision::numerator(q));
  Real den(boost::multiprecision::denominator(q));
  return num / den;
}

Rational pow_q(const Rational& base, long e) {
  if (e < 0) {
    if (base == 0) throw DomainError("zero to a negative power");
    return pow_q(Rational(1) / base, -e);
  }
  Rational out = 1, b = base;
  while (e > 0) {
    if (e & 1) out *= b;
    b *= b;
    e >>= 1;
  }
  return out;
}

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw DomainError("empty number");
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      BigInt num(text.substr(0, slash));
      BigInt den(text.substr(slash + 1));
      if (den == 0) throw DomainError("zero denominator in " + text);
      return Rational(num, den);
    }
    auto dot = text.find_first_of(".eE");
    if (dot == std::string::npos) return Rational(BigInt(text));
    // Decimal literal: read exactly, digit by digit.
    std::string mant = text;
    long exp10 = 0;
    auto epos = mant.find_first_of("eE");
    if (epos != std::string::npos) {
      exp10 = std::stol(mant.substr(epos + 1));
      mant = mant.substr(0, epos);
    }
    auto p = mant.find('.');
    if (p != std::string::npos) {
      exp10 -= static_cast<long>(mant.size() - p - 1);
      mant.erase(p, 1);
    }
    Rational out{BigInt(mant)};
    return out * pow_q(Rational(10), exp10);
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception&) {
    throw DomainError("not a number: " + text);
  }
}

std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

std::uint64_t enumeration_budget() {
  if (g_budget_override) return *g_budget_override;
  if (const char* env = std::getenv("OPILAB_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return kDefaultBudget;
}

void set_budget_override(std::uint64_t budget) { g_budget_override = budget; }
void clear_budget_override() { g_budget_override.reset(); }

void require_budget(std::uint64_t count, const char* what) {
  const auto budget = enumeration_budget();
  if (count > budget) {
    throw BudgetExceeded(std::string(what) + ": " + std::to_string(count) +
                         " elements exceeds budget " + std::to_string(budget));
  }
}

std::uint64_t saturating_pow(std::uint64_t p, unsigned e) {
  std::uint64_t out = 1;
  for (unsigned i = 0; i < e; ++i) {
    if (p != 0 && out > UINT64_MAX / p) return UINT64_MAX;
    out *= p;
  }
  return out;
}

}  // namespace opilab
