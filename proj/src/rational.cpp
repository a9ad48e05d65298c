#include "mgw/rational.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "mgw/errors.hpp"

namespace mgw {

namespace {

Rational parse_decimal(std::string_view s) {
    std::string_view body = s;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view ex = body.substr(e + 1);
        if (!ex.empty() && ex.front() == '+') ex.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(ex.data(), ex.data() + ex.size(), exponent);
        if (ec != std::errc() || ptr != ex.data() + ex.size()) throw ValidationError("bad number '" + std::string(s) + "'");
        body = body.substr(0, e);
    }
    std::string digits;
    bool seen_dot = false, seen_digit = false;
    for (char c : body) {
        if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            digits += c;
            seen_digit = true;
            if (seen_dot) --exponent;
        } else {
            throw ValidationError("bad number '" + std::string(s) + "'");
        }
    }
    if (!seen_digit) throw ValidationError("bad number '" + std::string(s) + "'");
    BigInt num(digits);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    Rational q = exponent >= 0 ? Rational(num * scale) : Rational(num, scale);
    return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw ValidationError("empty number");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Rational a = parse_decimal(text.substr(0, slash));
        Rational b = parse_decimal(text.substr(slash + 1));
        if (b == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
        return a / b;
    }
    return parse_decimal(text);
}

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw ValidationError("non-finite number");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return parse_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

std::string format_rational(const Rational& q) {
    std::string out = boost::multiprecision::numerator(q).str();
    if (boost::multiprecision::denominator(q) != 1) out += "/" + boost::multiprecision::denominator(q).str();
    return out;
}

}  // namespace mgw
