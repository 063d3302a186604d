#pragma once

#include <array>
#include <numeric>
#include <string>

#include "errors.hpp"
#include "int128.hpp"

namespace divforms {

struct LinearForm {
    i64 a = 0;
    i64 b = 0;

    i128 operator()(i128 x1, i128 x2) const { return i128(a) * x1 + i128(b) * x2; }
    i64 content() const { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }
    friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

class FormTriple {
public:
    FormTriple() : FormTriple({LinearForm{1, 0}, LinearForm{0, 1}, LinearForm{1, 1}}) {}

    explicit FormTriple(std::array<LinearForm, 3> forms) : forms_(forms) {
        for (int i = 0; i < 3; ++i) {
            if (forms_[i].a == 0 && forms_[i].b == 0) throw DomainError("linear form " + std::to_string(i + 1) + " is zero");
            content_[i] = forms_[i].content();
            primitive_[i] = {forms_[i].a / content_[i], forms_[i].b / content_[i]};
            i64 m = std::max(forms_[i].a < 0 ? -forms_[i].a : forms_[i].a, forms_[i].b < 0 ? -forms_[i].b : forms_[i].b);
            l_inf_ = std::max(l_inf_, m);
        }
        const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        i128 prod = 1;
        for (int k = 0; k < 3; ++k) {
            auto& f = forms_[pairs[k][0]];
            auto& g = forms_[pairs[k][1]];
            i128 r = i128(f.a) * g.b - i128(g.a) * f.b;
            if (r == 0)
                throw DomainError("forms " + std::to_string(pairs[k][0] + 1) + " and " + std::to_string(pairs[k][1] + 1) +
                                  " are linearly dependent");
            resultant_[k] = narrow64(r, "resultant");
            prod = checked_mul(prod, abs128(r), "discriminant");
        }
        delta_ = u64(narrow64(prod, "discriminant"));
        l_star_ = std::lcm(std::lcm(content_[0], content_[1]), content_[2]);
    }

    // (x1 - x2, x1, x1 + x2): the three-term progression triple
    static FormTriple progression() { return FormTriple({LinearForm{1, -1}, LinearForm{1, 0}, LinearForm{1, 1}}); }
    // (x1, x2, x1 + x2)
    static FormTriple sum_triple() { return FormTriple({LinearForm{1, 0}, LinearForm{0, 1}, LinearForm{1, 1}}); }

    const std::array<LinearForm, 3>& forms() const { return forms_; }
    const LinearForm& operator[](int i) const { return forms_[i]; }

    // a_i b_j - a_j b_i, zero-based indices
    i64 resultant(int i, int j) const {
        if (i == j) return 0;
        if (i > j) return -resultant(j, i);
        return resultant_[i == 0 ? (j == 1 ? 0 : 1) : 2];
    }
    u64 delta() const { return delta_; }
    i64 content(int i) const { return content_[i]; }
    const LinearForm& primitive(int i) const { return primitive_[i]; }
    i64 l_star() const { return l_star_; }
    i64 l_inf() const { return l_inf_; }

    // the multiset of forms is unchanged by swapping x1 and x2
    bool swap_symmetric() const {
        std::array<bool, 3> used{};
        for (int i = 0; i < 3; ++i) {
            LinearForm s{forms_[i].b, forms_[i].a};
            bool found = false;
            for (int j = 0; j < 3 && !found; ++j)
                if (!used[j] && forms_[j] == s) used[j] = found = true;
            if (!found) return false;
        }
        return true;
    }

    bool all_nonnegative() const {
        for (auto& f : forms_)
            if (f.a < 0 || f.b < 0) return false;
        return true;
    }

    std::string str() const {
        std::string s = "(";
        for (int i = 0; i < 3; ++i) {
            if (i) s += ", ";
            s += std::to_string(forms_[i].a) + "x1" + (forms_[i].b < 0 ? "" : "+") + std::to_string(forms_[i].b) + "x2";
        }
        return s + ")";
    }

    friend bool operator==(const FormTriple& a, const FormTriple& b) { return a.forms_ == b.forms_; }

private:
    std::array<LinearForm, 3> forms_;
    std::array<LinearForm, 3> primitive_{};
    std::array<i64, 3> content_{};
    std::array<i64, 3> resultant_{};
    u64 delta_ = 0;
    i64 l_star_ = 1;
    i64 l_inf_ = 0;
};

inline unsigned valuation(u64 n, u64 p) {
    if (n == 0) return 0;
    unsigned v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

}  // namespace divforms
