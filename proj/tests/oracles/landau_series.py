#!/usr/bin/env python3
"""Symbolic oracle for the Landau expansion of the mean-field potential.

The stationary amplitude equation of the damped parametric spin-boson model
reduces to h(u) = 0 with u = xbar^2,

    h(u)   = u*(g1 + g2*(up(u) + u))^2 - (1-mu)^2 * up(u)
    up(u)  = u * (-(1+mu) -+ gg^2 * G(u)) / (1-mu)      (spin branch -+ -> +/-)
    G(u)   = (2*gg^2*u + 1)^(-1/2)

The polynomial potential F(x) = sum_n c_{2n} x^{2n} is defined so that
dF/dx = 0 reproduces h(x^2) = 0, i.e. F(x) = Int_0^{x^2} h(u)/u du with G
truncated at series order N.  This script produces:

  * closed forms for c2, c4, c6 (simplified), printed for cross-checking the
    hand-derived expressions used in the C++ library,
  * frozen numeric coefficient tables c2..c_{2(2N+3)} for fixture parameter
    sets, evaluated at 40-digit precision,
  * the tetracritical no-go relation: solving c2=c4=c6=0 on the minus branch
    forces gamma1^2 = (mu-1)*(-5*mu + sqrt(24*mu^2+1)) < 0 for mu > 1.

Run:  python3 landau_series.py
"""

import sympy as sp

u, g1, g2, gg, mu = sp.symbols("u gamma1 gamma2 g mu", real=True)


def h_over_u_series(sign, N):
    """Series of h(u)/u with G expanded to order N in u. sign=+1 -> plus branch."""
    y = 2 * gg**2 * u
    G = sum(sp.binomial(sp.Rational(-1, 2), n) * y**n for n in range(N + 1))
    P = (-(1 + mu) - sign * gg**2 * G) / (1 - mu)
    A = g1 + g2 * u * (1 + P)
    return sp.expand(A**2 - (1 - mu) ** 2 * P)


def coeffs(sign, N):
    """c_{2n} for n=1..2N+3 from term-wise integration of h(u)/u."""
    poly = sp.Poly(h_over_u_series(sign, N), u)
    a = [poly.coeff_monomial(u**k) for k in range(poly.degree() + 1)]
    return [sp.simplify(a[n - 1] / n) for n in range(1, len(a) + 1)]


def main():
    sp.init_printing(use_unicode=False)

    # --- closed forms (N=2 suffices for exact c2, c4, c6) ---
    for sign, tag in ((-1, "minus"), (+1, "plus")):
        c = coeffs(sign, 2)
        print(f"branch {tag}:")
        print("  c2 =", sp.factor(c[0]))
        print("  c4 =", sp.simplify(c[1]))
        print("  c6 =", sp.simplify(c[2]))

    # expected hand-derived forms
    s = sp.Symbol("s")  # +1 plus branch, -1 minus branch
    c2_ref = (1 - mu) * (1 + mu + s * gg**2) + g1**2
    c4_ref = s * (mu - 1) * gg**4 / 2 + g2 * g1 * (2 * mu + s * gg**2) / (mu - 1)
    c6_ref = (
        2 * g2**2 * (2 * mu + s * gg**2) ** 2
        - s * 4 * gg**4 * g2 * g1 * (mu - 1)
        - s * 3 * gg**6 * (mu - 1) ** 3
    ) / (6 * (mu - 1) ** 2)
    for sign, tag in ((-1, "minus"), (+1, "plus")):
        c = coeffs(sign, 2)
        for i, ref in enumerate((c2_ref, c4_ref, c6_ref)):
            diff = sp.simplify(c[i] - ref.subs(s, sign))
            assert diff == 0, (tag, i, diff)
    print("closed forms c2/c4/c6 verified against series for both branches")

    # --- frozen fixtures ---
    fixtures = [
        # (mu, g, gamma1, gamma2, branch_sign, N)
        (sp.Rational(2), sp.sqrt(2), 1, 1, -1, 3),
        (sp.Rational(2), sp.Rational(17, 10), sp.Rational(1, 10), sp.Rational(40), -1, 3),
        (sp.Rational(0), sp.Rational(3, 2), 1, sp.Rational(1, 10), -1, 3),
        (sp.Rational(3), sp.Rational(6, 5), sp.Rational(1, 2), sp.Rational(3), +1, 3),
    ]
    for mu0, g0, g10, g20, sign, N in fixtures:
        c = coeffs(sign, N)
        vals = [
            sp.N(ci.subs({mu: mu0, gg: g0, g1: g10, g2: g20}), 40) for ci in c
        ]
        print(f"fixture mu={mu0} g={sp.N(g0,20)} gamma1={g10} gamma2={g20} "
              f"branch={'+' if sign>0 else '-'} N={N}")
        for n, v in enumerate(vals, start=1):
            print(f"  c{2*n:<2d} = {float(v):+.17e}")

    # --- tetracritical no-go ---
    # c2=0 -> gamma1^2 ; c4=0 -> gamma2 ; substitute into c6=0 -> quadratic in g^2
    G2 = sp.Symbol("G2", positive=True)  # g^2
    gamma1sq = (mu - 1) * (1 + mu - G2)
    gamma1g2 = (mu - 1) ** 2 * G2**2 / (2 * (2 * mu - G2))  # gamma1*gamma2 from c4=0
    c6m = c6_ref.subs(s, -1).subs(gg**2, G2)
    c6m = c6m.subs(gg**6, G2**3).subs(gg**4, G2**2)
    # rewrite c6 in terms of gamma1sq and gamma1g2: c6 has g2^2 and g2*g1 terms
    c6m = sp.expand(c6m)
    c6_sub = c6m.subs(g2**2, (gamma1g2) ** 2 / gamma1sq).subs(g2 * g1, gamma1g2)
    eq = sp.simplify(sp.together(c6_sub) * 2 * (2 * mu - G2) ** 2 * gamma1sq)
    sols = sp.solve(sp.Eq(eq, 0), G2)
    print("g^2 roots of c2=c4=c6=0:", [sp.simplify(r) for r in sols])
    for root in sols:
        expr = sp.simplify(gamma1sq.subs(G2, root))
        print("  required gamma1^2 =", expr, "->",
              sp.N(expr.subs(mu, 2), 20), "at mu=2")


if __name__ == "__main__":
    main()
