#pragma once

#include <cctype>
#include <sstream>
#include <string>

#include "rescur/exterior_form.hpp"

namespace rescur {

// Canonical text serialization of exact forms, one term per summand:
//
//   coef * z^(e1,...,en) dz{K}
//
// with coef a rational complex like `3/4`, `-2+1/3i`, `i`, `-i`. The printer
// emits exactly this shape; the parser also accepts the short-hand monomial
// syntax `z1^2*z3 dz1^dz3` and bare `z2 dz2` so forms are easy to type on a
// command line. parse(print(f)) == f exactly.

inline std::string to_string(const Rational& q) {
    std::ostringstream os;
    os << q.str();
    return os.str();
}

inline std::string to_string(const ComplexQ& c) {
    if (c.im == 0) return to_string(c.re);
    std::string im = to_string(c.im);
    std::string imtxt = (im == "1" ? "i" : im == "-1" ? "-i" : im + "i");
    if (c.re == 0) return imtxt;
    if (c.im > 0) return to_string(c.re) + "+" + imtxt;
    return to_string(c.re) + imtxt;
}

inline std::string to_string(const FormQ& f) {
    if (f.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [K, p] : f.components()) {
        for (const auto& [e, c] : p.terms()) {
            if (!first) os << " + ";
            first = false;
            os << "(" << to_string(c) << ") * z^(";
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (i) os << ",";
                os << e[i];
            }
            os << ")";
            if (K) {
                os << " dz{";
                bool fi = true;
                for (int i : set_to_indices(K)) {
                    if (!fi) os << ",";
                    fi = false;
                    os << (i + 1); // 1-based in text
                }
                os << "}";
            }
        }
    }
    return os.str();
}

namespace detail {

struct FormParser {
    std::string s;
    std::size_t pos = 0;

    explicit FormParser(std::string text) : s(std::move(text)) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("form parse error at position " + std::to_string(pos) + ": " + msg);
    }
    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool eat_word(const char* w) {
        skip_ws();
        std::size_t l = std::string(w).size();
        if (s.compare(pos, l, w) == 0) { pos += l; return true; }
        return false;
    }

    long parse_uint() {
        skip_ws();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected integer");
        long v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            v = v * 10 + (s[pos++] - '0');
        return v;
    }

    Rational parse_rational_tail(bool neg) {
        long num = parse_uint();
        Rational q(num);
        if (eat('/')) q /= Rational(parse_uint());
        return neg ? -q : q;
    }

    /// coefficient: [(] a[/b] [±c[/d]i] [)] | a[/b]i | i
    ComplexQ parse_coef() {
        const bool paren = eat('(');
        ComplexQ c;
        bool neg = eat('-');
        if (!neg) (void)eat('+');
        skip_ws();
        if (peek() == 'i') {
            ++pos;
            c.im = neg ? -1 : 1;
        } else {
            Rational q = parse_rational_tail(neg);
            if (eat('i')) {
                c.im = q;
            } else {
                c.re = q;
                skip_ws();
                if (peek() == '+' || peek() == '-') {
                    std::size_t save = pos;
                    bool neg2 = eat('-');
                    if (!neg2) (void)eat('+');
                    skip_ws();
                    if (peek() == 'i') {
                        ++pos;
                        c.im = neg2 ? -1 : 1;
                    } else if (std::isdigit(static_cast<unsigned char>(peek()))) {
                        Rational qi = parse_rational_tail(neg2);
                        if (eat('i')) c.im = qi;
                        else pos = save; // was the next additive term, not an imaginary part
                    } else {
                        pos = save;
                    }
                }
            }
        }
        if (paren && !eat(')')) fail("expected ')'");
        return c;
    }

    /// monomial: z^(e1,...,en)  or  z3[^k] ('*'-separated products allowed)
    bool parse_monomial(int n, ExponentVector& e) {
        skip_ws();
        if (peek() != 'z') return false;
        // explicit vector form?
        std::size_t save = pos;
        ++pos;
        if (eat('^') && eat('(')) {
            ExponentVector v;
            v.push_back(static_cast<int>(parse_uint()));
            while (eat(',')) v.push_back(static_cast<int>(parse_uint()));
            if (!eat(')')) fail("expected ')' in exponent vector");
            if (static_cast<int>(v.size()) != n) fail("exponent vector length != dimension");
            e = ev_add(e, v);
            return true;
        }
        pos = save;
        // indexed form z<k>[^p]
        ++pos; // 'z'
        long idx = parse_uint();
        if (idx < 1 || idx > n) fail("variable index out of range");
        long p = 1;
        if (eat('^')) p = parse_uint();
        e[static_cast<std::size_t>(idx - 1)] += static_cast<int>(p);
        return true;
    }

    /// dz part: dz{1,3} or dz1^dz3 or dz2
    bool parse_dz(int n, IndexSet& K) {
        skip_ws();
        if (!eat_word("dz")) return false;
        if (eat('{')) {
            if (peek() != '}') {
                long i = parse_uint();
                if (i < 1 || i > n) fail("dz index out of range");
                K |= 1u << (i - 1);
                while (eat(',')) {
                    long j = parse_uint();
                    if (j < 1 || j > n) fail("dz index out of range");
                    if (set_contains(K, static_cast<int>(j - 1))) fail("repeated dz index");
                    K |= 1u << (j - 1);
                }
            }
            if (!eat('}')) fail("expected '}'");
            return true;
        }
        long i = parse_uint();
        if (i < 1 || i > n) fail("dz index out of range");
        if (set_contains(K, static_cast<int>(i - 1))) fail("repeated dz index");
        K |= 1u << (i - 1);
        while (eat('^')) {
            if (!eat_word("dz")) fail("expected dz after '^'");
            long j = parse_uint();
            if (j < 1 || j > n) fail("dz index out of range");
            if (set_contains(K, static_cast<int>(j - 1))) fail("repeated dz index");
            K |= 1u << (j - 1);
        }
        return true;
    }

    FormQ parse(int n, int expected_degree = -1) {
        std::vector<std::tuple<ComplexQ, ExponentVector, IndexSet>> terms;
        bool first = true;
        int degree = -1;
        while (true) {
            skip_ws();
            if (pos >= s.size()) break;
            ComplexQ sign{1};
            if (eat('-')) sign = ComplexQ(-1);
            else if (eat('+')) sign = ComplexQ(1);
            else if (!first) fail("expected '+' or '-' between terms");
            skip_ws();
            if (pos >= s.size()) fail("dangling sign");

            ComplexQ coef{1};
            bool have_any = false;
            // leading "0"
            if (peek() == '0') {
                std::size_t save = pos;
                ++pos;
                skip_ws();
                if (pos >= s.size() || peek() == '+' || peek() == '-') {
                    first = false;
                    continue;
                }
                pos = save;
            }
            if (peek() == '(' || std::isdigit(static_cast<unsigned char>(peek())) || peek() == 'i') {
                coef = parse_coef();
                have_any = true;
                (void)eat('*');
            }
            ExponentVector e = ev_zero(n);
            while (parse_monomial(n, e)) {
                have_any = true;
                (void)eat('*');
            }
            IndexSet K = 0;
            if (parse_dz(n, K)) have_any = true;
            if (!have_any) fail("expected a term");
            if (degree == -1) degree = set_size(K);
            if (set_size(K) != degree) fail("mixed degrees in one form");
            terms.emplace_back(sign * coef, e, K);
            first = false;
        }
        if (degree == -1) degree = expected_degree >= 0 ? expected_degree : 0;
        if (expected_degree >= 0 && degree != expected_degree && !terms.empty())
            fail("form degree != expected degree");
        FormQ f(n, degree);
        for (auto& [c, e, K] : terms)
            f.add_component(K, SparsePoly<ComplexQ>::monomial(n, e, c));
        return f;
    }
};

} // namespace detail

/// Parse the canonical (or shorthand) text serialization; n is the ambient
/// dimension (the serialization itself only pins it when z^(...) appears).
inline FormQ parse_form(const std::string& text, int n, int expected_degree = -1) {
    detail::FormParser p(text);
    return p.parse(n, expected_degree);
}

/// Parse a plain monomial like "z1^2*z3" or "z^(2,0,1)" into its exponents.
inline ExponentVector parse_monomial_text(const std::string& text, int n) {
    detail::FormParser p(text);
    ExponentVector e = ev_zero(n);
    while (p.parse_monomial(n, e)) (void)p.eat('*');
    p.skip_ws();
    if (p.pos != p.s.size()) p.fail("trailing characters after monomial");
    return e;
}

} // namespace rescur
