#ifndef KERROMIT_CUBIC_HPP
#define KERROMIT_CUBIC_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <vector>

namespace kerromit
{
template <std::floating_point T>
struct Cubic
{
    T a, b, c, d; // a x^3 + b x^2 + c x + d

    constexpr T operator()(T x) const { return ((a * x + b) * x + c) * x + d; }
    constexpr T derivative(T x) const { return (T(3) * a * x + T(2) * b) * x + c; }

    // |p(x)| scaled by the largest term magnitude at x.
    T relative_residual(T x) const
    {
        T scale = std::max({std::abs(a * x * x * x), std::abs(b * x * x), std::abs(c * x), std::abs(d)});
        return scale > T(0) ? std::abs((*this)(x)) / scale : T(0);
    }
};

namespace detail
{
template <std::floating_point T>
T newton_polish(const Cubic<T> &p, T x)
{
    for (int it = 0; it < 4; ++it) {
        T f = p(x);
        T df = p.derivative(x);
        if (f == T(0) || df == T(0)) break;
        T next = x - f / df;
        if (!std::isfinite(next) || std::abs(p(next)) >= std::abs(f)) break;
        x = next;
    }
    return x;
}
} // namespace detail

// All real roots, ascending, each followed by a Newton polish. Degenerate
// leading coefficients fall through to the quadratic and linear cases.
template <std::floating_point T>
std::vector<T> real_roots(const Cubic<T> &p)
{
    std::vector<T> roots;
    if (p.a == T(0)) {
        if (p.b == T(0)) {
            if (p.c != T(0)) roots.push_back(-p.d / p.c);
            return roots;
        }
        T disc = p.c * p.c - T(4) * p.b * p.d;
        if (disc < T(0)) return roots;
        // q avoids cancellation between -c and sqrt(disc)
        T q = T(-0.5) * (p.c + std::copysign(std::sqrt(disc), p.c));
        if (q != T(0)) roots.push_back(p.d / q);
        roots.push_back(q / p.b);
        std::sort(roots.begin(), roots.end());
        return roots;
    }

    const T B = p.b / p.a;
    const T C = p.c / p.a;
    const T D = p.d / p.a;
    const T shift = B / T(3);
    // depressed cubic t^3 + P t + Q with x = t - B/3
    const T P = C - B * shift;
    const T Q = T(2) * shift * shift * shift - shift * C + D;

    const T disc = -(T(4) * P * P * P + T(27) * Q * Q);
    if (disc > T(0)) {
        const T r = T(2) * std::sqrt(-P / T(3));
        T arg = T(3) * Q / (P * r);
        arg = std::clamp(arg, T(-1), T(1));
        const T phi = std::acos(arg) / T(3);
        for (int k = 0; k < 3; ++k)
            roots.push_back(r * std::cos(phi - T(2) * std::numbers::pi_v<T> * T(k) / T(3)) - shift);
    } else {
        const T s = std::sqrt(Q * Q / T(4) + P * P * P / T(27));
        const T u = std::cbrt(-Q / T(2) + s);
        const T v = std::cbrt(-Q / T(2) - s);
        roots.push_back(u + v - shift);
    }
    for (auto &x : roots) x = detail::newton_polish(p, x);
    std::sort(roots.begin(), roots.end());
    return roots;
}
} // namespace kerromit

#endif
