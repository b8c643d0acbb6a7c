#ifndef KERROMIT_RK4_HPP
#define KERROMIT_RK4_HPP

#include <concepts>

namespace kerromit
{
// Anything closed under addition and scaling by a double.
template <class S>
concept VectorLike = requires(S a, S b, double h) {
    { a + b } -> std::convertible_to<S>;
    { h * a } -> std::convertible_to<S>;
};

// One classical fourth-order Runge-Kutta step of dy/dt = f(t, y).
template <VectorLike State, class Rhs>
    requires std::invocable<const Rhs &, double, const State &>
State rk4_step(const Rhs &f, double t, const State &y, double h)
{
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const State k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const State k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}
} // namespace kerromit

#endif
