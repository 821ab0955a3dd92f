#!/usr/bin/env python3
"""Recompute the closed-form reference values frozen into the test suite.

Everything here is derived directly from the operator definitions with
mpmath (50-digit working precision), independently of the production code:

  * K^a (left) applied to 1    ->  t^a / Gamma(1+a)
  * K^a (left) applied to t^2  ->  2 t^{2+a} / Gamma(3+a)
  * B^a (left) applied to t    ->  t^{1-a} / Gamma(2-a)
  * B^a (left) applied to t^2  ->  2 t^{2-a} / Gamma(3-a)
  * time factor g of the half-order wave composition
    A^{1/2} (right) after B^{1/2} (left) applied to t, on [0, 1]:
    g(t) = (2/pi) * ( ln((1+sqrt(1-t))/sqrt(t)) - 1/sqrt(1-t) )

Each value is verified against brute-force quadrature of the defining
integrals before printing, so a transcription error in a closed form
cannot survive.  Output is the constants as they appear in tests/.
"""

import mpmath as mp

mp.mp.dps = 50


def k_left(f, t, a):
    """Left-sided integral of order a: int_0^t (t-s)^(a-1) f(s) ds / Gamma(a)."""
    return mp.quad(lambda s: (t - s) ** (a - 1) * f(s), [0, t]) / mp.gamma(a)


def b_left(f, t, a):
    """Left-sided derivative of order a applied under the integral:
    K^(1-a) of f' evaluated at t."""
    return k_left(lambda s: mp.diff(f, s), t, a=1 - a)


def k_right(f, t, a):
    """Right-sided integral of order a on [0, 1].

    A right-sided derivative is the forward d/dt of the right (1-a)-integral:
    the same d/dt serves both sides, and sidedness lives entirely in which
    kernel integral it follows."""
    return mp.quad(lambda s: (s - t) ** (a - 1) * f(s), [t, 1]) / mp.gamma(a)


def report(label, closed, quadrature):
    diff = abs(closed - quadrature)
    print(f"{label}\n  closed     = {mp.nstr(closed, 17)}"
          f"\n  quadrature = {mp.nstr(quadrature, 17)}"
          f"\n  |diff|     = {mp.nstr(diff, 3)}")
    assert diff < mp.mpf("1e-20"), label


def main():
    half = mp.mpf(1) / 2

    print("== K^0.5(1)(t) = t^0.5 / Gamma(1.5); coefficient 1/Gamma(1.5)")
    t = mp.mpf("0.7")
    report("  at t=0.7", mp.sqrt(t) / mp.gamma(mp.mpf("1.5")),
           k_left(lambda s: mp.mpf(1), t, half))
    print(f"  1/Gamma(1.5) = {mp.nstr(1 / mp.gamma(mp.mpf('1.5')), 17)}")

    print("== K^0.5(t^2)(t) = 2 t^2.5 / Gamma(3.5); coefficient 2/Gamma(3.5)")
    report("  at t=0.7", 2 * t ** mp.mpf("2.5") / mp.gamma(mp.mpf("3.5")),
           k_left(lambda s: s * s, t, half))
    print(f"  2/Gamma(3.5) = {mp.nstr(2 / mp.gamma(mp.mpf('3.5')), 17)}")

    print("== B^0.5(t)(t) = t^0.5 / Gamma(1.5)")
    report("  at t=0.25", mp.sqrt(mp.mpf("0.25")) / mp.gamma(mp.mpf("1.5")),
           b_left(lambda s: s, mp.mpf("0.25"), half))

    print("== B^0.5(t^2)(t) = 2 t^1.5 / Gamma(2.5)")
    report("  at t=0.7", 2 * t ** mp.mpf("1.5") / mp.gamma(mp.mpf("2.5")),
           b_left(lambda s: s * s, t, half))

    print("== wave time factor g(t): A^0.5 (right) of B^0.5 (left) of t")
    # Differentiating a nested adaptive quadrature is numerically fragile, so
    # the composition is verified in two exact-at-precision stages instead:
    #   1. the inner half-integral of the (already verified) B-image
    #      2 sqrt(s)/sqrt(pi) has the antiderivative
    #      I(t) = (2/pi) [ sqrt(1-t) + t ln((1+sqrt(1-t))/sqrt(t)) ]
    #      (substitute s = t + u^2); checked against direct quadrature;
    #   2. g = dI/dt, differentiated on the closed form only, where mpmath
    #      reaches full working precision.

    def g_closed(t):
        return (2 / mp.pi) * (mp.log((1 + mp.sqrt(1 - t)) / mp.sqrt(t))
                              - 1 / mp.sqrt(1 - t))

    def inner_closed(t):
        return (2 / mp.pi) * (mp.sqrt(1 - t)
                              + t * mp.log((1 + mp.sqrt(1 - t)) / mp.sqrt(t)))

    def b_image(s):
        return 2 * mp.sqrt(s) / mp.sqrt(mp.pi)

    for tv in ("0.1", "0.25", "0.5", "0.75", "0.9"):
        tm = mp.mpf(tv)
        report(f"  half-integral at t={tv}", inner_closed(tm),
               k_right(b_image, tm, half))
        report(f"  derivative at t={tv}", g_closed(tm),
               mp.diff(inner_closed, tm))
        print(f"  g({tv}) = {mp.nstr(g_closed(tm), 17)}")


if __name__ == "__main__":
    main()
