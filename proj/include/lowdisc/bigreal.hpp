// Configurable-precision real arithmetic on top of MPFR.
//
// BigReal is a value type carrying its own working precision in decimal
// digits.  Binary operations demand equal precision on both operands and
// throw precision_mismatch otherwise; there is no ambient precision state,
// so values from different precision contexts can never silently mix.
// All MPFR operations round to nearest (ties to even), i.e. within 0.5 ulp
// of the binary precision, which is comfortably inside the 2-ulp contract
// at the declared decimal precision.

#ifndef LOWDISC_BIGREAL_HPP
#define LOWDISC_BIGREAL_HPP

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>

namespace lowdisc {

class precision_mismatch : public std::logic_error {
public:
    precision_mismatch(int a, int b)
        : std::logic_error("BigReal precision contexts differ: " + std::to_string(a) +
                           " vs " + std::to_string(b) + " digits") {}
};

class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

inline mpfr_prec_t bits_for_digits(int digits) {
    // log2(10) = 3.3219...; 16 guard bits keep decimal ulp guarantees honest.
    return static_cast<mpfr_prec_t>(std::ceil(digits * 3.32192809488736235)) + 16;
}

class BigReal {
public:
    // Default-constructed values are empty (digits() == 0) and only exist so
    // containers can hold BigReal; any arithmetic on them throws.
    BigReal() noexcept : digits_(0) {
        mpfr_init2(v_, MPFR_PREC_MIN);
        mpfr_set_nan(v_);
    }

    explicit BigReal(int digits) : digits_(digits) {
        require_digits(digits);
        mpfr_init2(v_, bits_for_digits(digits));
        mpfr_set_nan(v_);
    }

    BigReal(long value, int digits) : digits_(digits) {
        require_digits(digits);
        mpfr_init2(v_, bits_for_digits(digits));
        mpfr_set_si(v_, value, MPFR_RNDN);
    }

    // Parses a decimal string (integer, fixed or scientific notation).
    BigReal(const std::string& decimal, int digits) : digits_(digits) {
        require_digits(digits);
        mpfr_init2(v_, bits_for_digits(digits));
        if (mpfr_set_str(v_, decimal.c_str(), 10, MPFR_RNDN) != 0)
            throw config_error("not a decimal number: '" + decimal + "'");
    }

    static BigReal from_double(double value, int digits) {
        BigReal r(digits);
        mpfr_set_d(r.v_, value, MPFR_RNDN);
        return r;
    }

    BigReal(const BigReal& o) : digits_(o.digits_) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }

    BigReal(BigReal&& o) noexcept : digits_(o.digits_) {
        v_[0] = o.v_[0];
        mpfr_init2(o.v_, MPFR_PREC_MIN);
        mpfr_set_nan(o.v_);
        o.digits_ = 0;
    }

    BigReal& operator=(const BigReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
            digits_ = o.digits_;
        }
        return *this;
    }

    BigReal& operator=(BigReal&& o) noexcept {
        if (this != &o) {
            mpfr_swap(v_, o.v_);
            std::swap(digits_, o.digits_);
        }
        return *this;
    }

    ~BigReal() { mpfr_clear(v_); }

    int digits() const noexcept { return digits_; }

    // Raw handles for performance-critical inner loops.
    mpfr_srcptr raw() const noexcept { return v_; }
    mpfr_ptr raw() noexcept { return v_; }

    // Explicit precision change; never implicit.
    BigReal round_to(int digits) const {
        BigReal r(digits);
        mpfr_set(r.v_, v_, MPFR_RNDN);
        return r;
    }

    bool is_nan() const noexcept { return mpfr_nan_p(v_) != 0; }
    bool is_finite() const noexcept { return mpfr_number_p(v_) != 0; }
    bool is_zero() const noexcept { return mpfr_zero_p(v_) != 0; }
    int sign() const noexcept { return mpfr_zero_p(v_) ? 0 : (mpfr_signbit(v_) ? -1 : 1); }

    double to_double() const noexcept { return mpfr_get_d(v_, MPFR_RNDN); }
    long to_long() const noexcept { return mpfr_get_si(v_, MPFR_RNDN); }

    // Deterministic scientific-notation decimal string, round-half-even,
    // sig_digits significant digits (defaults to the working precision).
    std::string str(int sig_digits = 0) const {
        if (sig_digits <= 0) sig_digits = digits_ > 0 ? digits_ : 17;
        if (mpfr_nan_p(v_)) return "nan";
        if (mpfr_inf_p(v_)) return mpfr_signbit(v_) ? "-inf" : "inf";
        if (mpfr_zero_p(v_)) return "0";
        mpfr_exp_t e;
        char* s = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(sig_digits), v_, MPFR_RNDN);
        std::string mant(s);
        mpfr_free_str(s);
        std::string sgn;
        if (mant[0] == '-') {
            sgn = "-";
            mant.erase(0, 1);
        }
        // strip trailing zeros but keep at least one digit
        size_t last = mant.find_last_not_of('0');
        mant.erase(last + 1);
        std::string out = sgn + mant.substr(0, 1);
        if (mant.size() > 1) out += "." + mant.substr(1);
        long dec_exp = static_cast<long>(e) - 1;  // value = d.ddd * 10^dec_exp
        if (dec_exp != 0) out += "e" + std::to_string(dec_exp);
        return out;
    }

    friend void check_same_precision(const BigReal& a, const BigReal& b) {
        if (a.digits_ != b.digits_ || a.digits_ == 0)
            throw precision_mismatch(a.digits_, b.digits_);
    }

    // --- arithmetic -------------------------------------------------------

    friend BigReal operator+(const BigReal& a, const BigReal& b) { return bin(mpfr_add, a, b); }
    friend BigReal operator-(const BigReal& a, const BigReal& b) { return bin(mpfr_sub, a, b); }
    friend BigReal operator*(const BigReal& a, const BigReal& b) { return bin(mpfr_mul, a, b); }
    friend BigReal operator/(const BigReal& a, const BigReal& b) { return bin(mpfr_div, a, b); }

    friend BigReal operator+(const BigReal& a, long b) { return bin_si(mpfr_add_si, a, b); }
    friend BigReal operator-(const BigReal& a, long b) { return bin_si(mpfr_sub_si, a, b); }
    friend BigReal operator*(const BigReal& a, long b) { return bin_si(mpfr_mul_si, a, b); }
    friend BigReal operator/(const BigReal& a, long b) { return bin_si(mpfr_div_si, a, b); }
    friend BigReal operator+(long a, const BigReal& b) { return b + a; }
    friend BigReal operator*(long a, const BigReal& b) { return b * a; }
    friend BigReal operator-(long a, const BigReal& b) {
        BigReal r(b.digits_);
        mpfr_si_sub(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }
    friend BigReal operator/(long a, const BigReal& b) {
        BigReal r(b.digits_);
        mpfr_si_div(r.v_, a, b.v_, MPFR_RNDN);
        return r;
    }

    BigReal operator-() const {
        BigReal r(*this);
        mpfr_neg(r.v_, r.v_, MPFR_RNDN);
        return r;
    }

    BigReal& operator+=(const BigReal& b) {
        check_same_precision(*this, b);
        mpfr_add(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }
    BigReal& operator-=(const BigReal& b) {
        check_same_precision(*this, b);
        mpfr_sub(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }
    BigReal& operator*=(const BigReal& b) {
        check_same_precision(*this, b);
        mpfr_mul(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }
    BigReal& operator/=(const BigReal& b) {
        check_same_precision(*this, b);
        mpfr_div(v_, v_, b.v_, MPFR_RNDN);
        return *this;
    }

    BigReal& operator+=(long b) {
        mpfr_add_si(v_, v_, b, MPFR_RNDN);
        return *this;
    }
    BigReal& operator-=(long b) {
        mpfr_sub_si(v_, v_, b, MPFR_RNDN);
        return *this;
    }
    BigReal& operator*=(long b) {
        mpfr_mul_si(v_, v_, b, MPFR_RNDN);
        return *this;
    }

    // --- comparisons (NaN compares false, as usual) -----------------------

    friend bool operator<(const BigReal& a, const BigReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator>(const BigReal& a, const BigReal& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const BigReal& a, const BigReal& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const BigReal& a, const BigReal& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator!=(const BigReal& a, const BigReal& b) { return !(a == b); }

    friend bool operator<(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) < 0; }
    friend bool operator>(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) > 0; }
    friend bool operator<=(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) <= 0; }
    friend bool operator>=(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) >= 0; }
    friend bool operator==(const BigReal& a, long b) { return mpfr_cmp_si(a.v_, b) == 0; }

    // --- elementary functions ---------------------------------------------

    friend BigReal abs(const BigReal& a) { return un(mpfr_abs, a); }
    friend BigReal sqrt(const BigReal& a) { return un(mpfr_sqrt, a); }
    friend BigReal exp(const BigReal& a) { return un(mpfr_exp, a); }
    friend BigReal log(const BigReal& a) { return un(mpfr_log, a); }
    friend BigReal cos(const BigReal& a) { return un(mpfr_cos, a); }
    friend BigReal sin(const BigReal& a) { return un(mpfr_sin, a); }
    friend BigReal cosh(const BigReal& a) { return un(mpfr_cosh, a); }
    friend BigReal floor(const BigReal& a) {
        BigReal r(a.digits_);
        mpfr_floor(r.v_, a.v_);
        return r;
    }
    friend BigReal ceil(const BigReal& a) {
        BigReal r(a.digits_);
        mpfr_ceil(r.v_, a.v_);
        return r;
    }

    friend BigReal pow(const BigReal& base, const BigReal& expo) { return bin(mpfr_pow, base, expo); }
    friend BigReal pow(const BigReal& base, long e) {
        BigReal r(base.digits_);
        mpfr_pow_si(r.v_, base.v_, e, MPFR_RNDN);
        return r;
    }
    friend BigReal atan2(const BigReal& y, const BigReal& x) { return bin(mpfr_atan2, y, x); }
    friend void sin_cos(BigReal& s, BigReal& c, const BigReal& a) {
        s = BigReal(a.digits_);
        c = BigReal(a.digits_);
        mpfr_sin_cos(s.v_, c.v_, a.v_, MPFR_RNDN);
    }

    friend BigReal min(const BigReal& a, const BigReal& b) {
        check_same_precision(a, b);
        return a <= b ? a : b;
    }
    friend BigReal max(const BigReal& a, const BigReal& b) {
        check_same_precision(a, b);
        return a >= b ? a : b;
    }

    // --- constants, computed at +10 guard digits then rounded -------------

    static BigReal pi(int digits) {
        BigReal hi(digits + 10);
        mpfr_const_pi(hi.v_, MPFR_RNDN);
        return hi.round_to(digits);
    }

    static BigReal catalan(int digits) {
        BigReal hi(digits + 10);
        mpfr_const_catalan(hi.v_, MPFR_RNDN);
        return hi.round_to(digits);
    }

private:
    static void require_digits(int digits) {
        if (digits < 1) throw config_error("BigReal precision must be >= 1 digit");
    }

    using mpfr_bin_fn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
    using mpfr_bin_si_fn = int (*)(mpfr_ptr, mpfr_srcptr, long, mpfr_rnd_t);
    using mpfr_un_fn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

    static BigReal bin(mpfr_bin_fn f, const BigReal& a, const BigReal& b) {
        check_same_precision(a, b);
        BigReal r(a.digits_);
        f(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    static BigReal bin_si(mpfr_bin_si_fn f, const BigReal& a, long b) {
        BigReal r(a.digits_);
        f(r.v_, a.v_, b, MPFR_RNDN);
        return r;
    }
    static BigReal un(mpfr_un_fn f, const BigReal& a) {
        BigReal r(a.digits_);
        f(r.v_, a.v_, MPFR_RNDN);
        return r;
    }

    mpfr_t v_;
    int digits_;
};

}  // namespace lowdisc

#endif  // LOWDISC_BIGREAL_HPP
