// Exact rational scalars (GMP-backed) plus torus-coordinate helpers.
#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace fstruct {

using Rational = mpq_class;

// Canonical representative in [0, 1).
inline Rational mod1(const Rational& q) {
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    Rational r = q - Rational(fl);
    r.canonicalize();
    return r;
}

// Representative in [-1/2, 1/2): the signed circle difference.
inline Rational centered_mod1(const Rational& q) {
    Rational r = mod1(q + Rational(1, 2)) - Rational(1, 2);
    r.canonicalize();
    return r;
}

// Circle distance between two canonical coordinates, in [0, 1/2].
inline Rational circle_dist(const Rational& a, const Rational& b) {
    Rational d = centered_mod1(a - b);
    return d < 0 ? Rational(-d) : d;
}

inline std::string rat_str(const Rational& q) { return q.get_str(); }

// Parses "p", "-p/q" etc.; rejects zero/negative denominators and junk.
inline std::optional<Rational> rat_parse(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto slash = s.find('/');
    std::string num = slash == std::string::npos ? s : s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (num.empty() || den.empty()) return std::nullopt;
    auto digits = [](const std::string& t, bool sign_ok) {
        for (size_t i = 0; i < t.size(); ++i) {
            if (i == 0 && sign_ok && (t[i] == '-' || t[i] == '+') && t.size() > 1) continue;
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        }
        return true;
    };
    if (!digits(num, true) || !digits(den, false)) return std::nullopt;
    Rational d(den);
    if (d == 0) return std::nullopt;
    Rational q = Rational(num) / d;
    q.canonicalize();
    return q;
}

class spec_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fstruct
