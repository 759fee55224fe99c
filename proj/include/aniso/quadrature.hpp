#pragma once

/**
 * @file quadrature.hpp
 * @brief Symmetric Gaussian quadrature on triangles (Dunavant rules of
 *        degree 4 and 8), in barycentric coordinates with weights summing to 1.
 */

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

struct QuadratureRule {
    std::vector<std::array<double, 3>> points;  ///< barycentric coordinates
    std::vector<double> weights;                ///< area-normalized
    int exactness = 0;

    std::size_t size() const { return weights.size(); }
};

namespace detail {

inline void add_s3(QuadratureRule& r, double w) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(w);
}

inline void add_s21(QuadratureRule& r, double a, double w) {
    const double b = 1.0 - 2.0 * a;
    for (const auto& p : {std::array{a, a, b}, std::array{a, b, a}, std::array{b, a, a}}) {
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

inline void add_s111(QuadratureRule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    for (const auto& p : {std::array{a, b, c}, std::array{b, a, c}, std::array{a, c, b},
                          std::array{c, a, b}, std::array{b, c, a}, std::array{c, b, a}}) {
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

} // namespace detail

/// 6-point rule, exact through degree 4.
inline const QuadratureRule& triangle_rule_deg4() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.exactness = 4;
        detail::add_s21(r, 0.4459484909159648863183293, 0.2233815896780114656950070);
        detail::add_s21(r, 0.09157621350977074345957146, 0.1099517436553218676383263);
        return r;
    }();
    return rule;
}

/// 16-point rule, exact through degree 8.
inline const QuadratureRule& triangle_rule_deg8() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.exactness = 8;
        detail::add_s3(r, 0.1443156076777871682510911);
        detail::add_s21(r, 0.4592925882927231560288155, 0.0950916342672846247938961);
        detail::add_s21(r, 0.1705693077517602066222935, 0.1032173705347182502817916);
        detail::add_s21(r, 0.05054722831703097545842355, 0.03245849762319808031092593);
        detail::add_s111(r, 0.008394777409957605337213835, 0.2631128296346381134217858,
                         0.02723031417443499426484469);
        return r;
    }();
    return rule;
}

/// The cheapest available rule exact through `degree`.
inline const QuadratureRule& triangle_rule(int degree) {
    if (degree <= 4) return triangle_rule_deg4();
    if (degree <= 8) return triangle_rule_deg8();
    throw std::invalid_argument("no triangle rule of degree " + std::to_string(degree));
}

} // namespace aniso
