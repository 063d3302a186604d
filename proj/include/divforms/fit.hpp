#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace divforms {

// value ~ X^a sum_{i=0}^{k} beta_i (log X)^(k-i); beta_0 multiplies the top power
struct AsymptoticFit {
    long double a = 0;
    int k = 0;
    std::vector<long double> coefficients;
    std::vector<long double> residuals;  // (model - value) / value per point

    long double leading() const { return coefficients.front(); }
    long double model(long double X) const {
        long double L = std::log(X), s = 0;
        for (long double c : coefficients) s = s * L + c;
        return std::pow(X, a) * s;
    }
};

inline constexpr long double kMaxCondition = 1e15L;

inline AsymptoticFit fit_log_poly(const std::vector<std::pair<long double, long double>>& points, long double a, int k) {
    using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    if (k < 0) throw DomainError("fit_log_poly: degree must be >= 0");
    std::size_t n = points.size();
    if (n < std::size_t(k) + 2)
        throw DomainError("fit_log_poly: need at least " + std::to_string(k + 2) + " points, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points[i].first > 1)) throw DomainError("fit_log_poly: X must exceed 1");
        for (std::size_t j = 0; j < i; ++j)
            if (points[i].first == points[j].first) throw DomainError("fit_log_poly: X values must be distinct");
    }
    Mat A(n, k + 1);
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        long double X = points[i].first, L = std::log(X);
        y(i) = points[i].second / std::pow(X, a);
        for (int j = 0; j <= k; ++j) A(i, j) = std::pow(L, (long double)(k - j));
    }
    // equilibrate columns before factoring
    Vec scale(k + 1);
    for (int j = 0; j <= k; ++j) {
        scale(j) = A.col(j).norm();
        A.col(j) /= scale(j);
    }
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    long double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond < kMaxCondition))
        throw ConditioningError("fit_log_poly: design condition number " + std::to_string(double(cond)) +
                                " is too large; spread the X values further apart");
    Vec beta = svd.solve(y);
    AsymptoticFit f;
    f.a = a;
    f.k = k;
    for (int j = 0; j <= k; ++j) f.coefficients.push_back(beta(j) / scale(j));
    for (std::size_t i = 0; i < n; ++i) {
        long double v = points[i].second;
        f.residuals.push_back(v != 0 ? (f.model(points[i].first) - v) / v : f.model(points[i].first));
    }
    return f;
}

}  // namespace divforms
