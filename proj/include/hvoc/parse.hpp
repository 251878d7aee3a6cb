#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hvoc/fock.hpp"
#include "hvoc/rational.hpp"
#include "hvoc/voa.hpp"

namespace hvoc {

struct parse_error : std::runtime_error {
  size_t position;
  parse_error(const std::string& message, size_t pos)
      : std::runtime_error(message + " (at position " + std::to_string(pos) +
                           ")"),
        position(pos) {}
};

namespace detail {

// Grammar (whitespace-insensitive):
//   vector   := ['+'|'-'] term (('+'|'-') term)*
//   term     := rational '*' monomial | rational | monomial
//   monomial := factor+ | '1' | 'w'
//   factor   := 'a' INDEX '(' '-' INT ')' ['^' INT]
//   rational := INT ['/' INT]
// '1' is the vacuum; 'w' is the conformal vector (1/2) sum_i a_i(-1)^2.
class VectorParser {
 public:
  VectorParser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  FockVector parse() {
    FockVector out(dim_);
    skip_ws();
    bool negative = false;
    if (peek() == '+' || peek() == '-') negative = (take() == '-');
    out += parse_term(negative);
    skip_ws();
    while (pos_ < text_.size()) {
      char c = take();
      if (c != '+' && c != '-')
        throw parse_error("expected '+' or '-' between terms", pos_ - 1);
      out += parse_term(c == '-');
      skip_ws();
    }
    return out;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char take() { return pos_ < text_.size() ? text_[pos_++] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(
                                      text_[pos_])))
      ++pos_;
  }

  std::string parse_digits() {
    skip_ws();
    size_t start = pos_;
    std::string digits;
    while (std::isdigit(static_cast<unsigned char>(peek()))) digits += take();
    if (digits.empty()) throw parse_error("expected an integer", start);
    return digits;
  }

  long long parse_int() {
    size_t start = pos_;
    std::string digits = parse_digits();
    if (digits.size() > 9) throw parse_error("integer too large", start);
    return std::stoll(digits);
  }

  Rational parse_rational() {
    Integer num(parse_digits());
    skip_ws();
    if (peek() == '/') {
      size_t slash = pos_;
      take();
      Integer den(parse_digits());
      if (den == 0) throw parse_error("zero denominator", slash + 1);
      return Rational(num, den);
    }
    return Rational(num);
  }

  Mode parse_factor_mode() {
    size_t start = pos_;
    take();  // 'a'
    long long color = parse_int();
    if (color < 1 || color > dim_)
      throw parse_error("color index out of 1.." + std::to_string(dim_),
                        start + 1);
    skip_ws();
    if (take() != '(') throw parse_error("expected '('", pos_ - 1);
    skip_ws();
    if (peek() != '-')
      throw parse_error("level inside a(...) must be negative", pos_);
    take();
    long long level = parse_int();
    if (level < 1)
      throw parse_error("level inside a(...) must be negative", pos_);
    skip_ws();
    if (take() != ')') throw parse_error("expected ')'", pos_ - 1);
    return Mode(static_cast<int>(color), static_cast<int>(-level));
  }

  // factor+ starting at 'a'
  FockVector parse_product() {
    std::vector<Mode> factors;
    while (true) {
      skip_ws();
      if (peek() != 'a') break;
      Mode m = parse_factor_mode();
      skip_ws();
      long long exp = 1;
      if (peek() == '^') {
        size_t caret = pos_;
        take();
        exp = parse_int();
        if (exp < 1) throw parse_error("exponent must be >= 1", caret + 1);
        if (exp > 64) throw parse_error("exponent too large", caret + 1);
      }
      for (long long t = 0; t < exp; ++t) factors.push_back(m);
    }
    if (factors.empty()) throw parse_error("expected a monomial", pos_);
    return FockVector::unit(dim_, Monomial(std::move(factors)));
  }

  FockVector parse_monomial() {
    skip_ws();
    if (peek() == '1') {
      take();
      return FockVector::vacuum(dim_);
    }
    if (peek() == 'w') {
      take();
      return VoaContext(dim_).omega();
    }
    return parse_product();
  }

  FockVector parse_term(bool negative) {
    skip_ws();
    Rational coeff(1);
    bool have_coeff = false;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      coeff = parse_rational();
      have_coeff = true;
      skip_ws();
      if (peek() == '*') {
        take();
        skip_ws();
        if (negative) coeff = -coeff;
        return coeff * parse_monomial();
      }
    }
    if (negative) coeff = -coeff;
    if (have_coeff) {
      // bare rational: multiple of the vacuum
      return coeff * FockVector::vacuum(dim_);
    }
    return coeff * parse_monomial();
  }

  std::string_view text_;
  int dim_;
  size_t pos_ = 0;
};

}  // namespace detail

inline FockVector parse_vector(std::string_view text, int dim) {
  if (dim < 1) throw rank_error("dimension must be >= 1");
  return detail::VectorParser(text, dim).parse();
}

inline std::string print_rational(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

inline std::string print_monomial(const Monomial& m) {
  if (m.is_vacuum()) return "1";
  std::ostringstream os;
  auto factors = m.factors();
  for (size_t i = 0; i < factors.size();) {
    size_t j = i;
    while (j < factors.size() && factors[j] == factors[i]) ++j;
    os << 'a' << factors[i].color << "(" << factors[i].level << ")";
    if (j - i > 1) os << '^' << (j - i);
    i = j;
  }
  return os.str();
}

// Canonical text form; reparses to an equal vector.
inline std::string print_vector(const FockVector& v) {
  if (v.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : v.terms()) {
    const bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    if (first) {
      if (negative) os << "- ";
      first = false;
    } else {
      os << (negative ? " - " : " + ");
    }
    if (m.is_vacuum()) {
      os << print_rational(mag);
    } else if (mag == 1) {
      os << print_monomial(m);
    } else {
      os << print_rational(mag) << '*' << print_monomial(m);
    }
  }
  return os.str();
}

inline std::string print_tensor(const TensorVector& t) {
  if (t.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [pair, c] : t.terms()) {
    const bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    if (first) {
      if (negative) os << "- ";
      first = false;
    } else {
      os << (negative ? " - " : " + ");
    }
    if (mag != 1) os << print_rational(mag) << '*';
    os << '(' << print_monomial(pair.first) << " (x) "
       << print_monomial(pair.second) << ')';
  }
  return os.str();
}

}  // namespace hvoc
