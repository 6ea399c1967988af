"""Independent high-precision evaluation of the finite-key scalar functions.

The values printed here are frozen as regression constants in the C++ tests.
Run: python3 tests/oracles/keyrate_oracle.py
"""

import mpmath as mp

mp.mp.dps = 50
TSIRELSON = (2 + mp.sqrt(2)) / 4


def h(x):
    x = mp.mpf(x)
    if x <= 0 or x >= 1:
        return mp.mpf(0)
    return -x * mp.log(x, 2) - (1 - x) * mp.log(1 - x, 2)


def g(p):
    p = mp.mpf(p)
    arg = max(16 * p * (p - 1) + 3, mp.mpf(0))
    return 1 - h(mp.mpf(1) / 2 + mp.sqrt(arg) / 2)


def dg(p):
    return mp.diff(g, mp.mpf(p))


def f_min(p, pt):
    if p < pt:
        return g(p)
    return g(pt) + dg(pt) * (p - pt)


def eta(p, pt, n, gamma, e1, e2):
    corr = 2 / mp.sqrt(n) * (mp.log(13, 2) + dg(pt) / gamma) * mp.sqrt(1 - 2 * mp.log(e1 * e2, 2))
    return f_min(p, pt) - corr


def eta_opt(omega, n, gamma, delta, e1, e2):
    p = (mp.mpf(omega) * gamma - delta) / gamma
    lo, hi = mp.mpf(3) / 4, TSIRELSON
    grid = 4000
    best = None
    for k in range(1, grid):
        pt = lo + (hi - lo) * k / grid
        v = eta(p, pt, n, gamma, e1, e2)
        if best is None or v > best[1]:
            best = (pt, v)
    a = best[0] - (hi - lo) / grid
    b = best[0] + (hi - lo) / grid
    for _ in range(200):
        m1 = a + (b - a) / 3
        m2 = b - (b - a) / 3
        if eta(p, m1, n, gamma, e1, e2) < eta(p, m2, n, gamma, e1, e2):
            a = m1
        else:
            b = m2
    pt = (a + b) / 2
    return pt, eta(p, pt, n, gamma, e1, e2)


def leak_ir(q, omega, n, gamma, eps_ir, eps_ir_p):
    n = mp.mpf(n)
    e = mp.mpf(eps_ir_p)
    return (n * ((1 - gamma) * h(q) + gamma * h(omega))
            + 4 * mp.sqrt(n) * mp.log(2 * mp.sqrt(2) + 1, 2) * mp.sqrt(2 * mp.log(8 / e**2, 2))
            + mp.log(8 / e**2 + 2 / (2 - e), 2) + mp.log(1 / mp.mpf(eps_ir), 2))


def delta_est(n, eps):
    return mp.sqrt(mp.log(1 / mp.mpf(eps)) / (2 * mp.mpf(n)))


if __name__ == "__main__":
    print("g(0.8)             =", mp.nstr(g(mp.mpf("0.8")), 17))
    print("g'(0.8)            =", mp.nstr(dg(mp.mpf("0.8")), 17))
    n, gamma = mp.mpf(10) ** 10, mp.mpf("1e-3")
    d = delta_est(n, mp.mpf("1e-3"))
    print("delta_est(1e10,1e-3)=", mp.nstr(d, 17))
    pt, v = eta_opt(mp.mpf("0.84"), n, gamma, d, mp.mpf("1e-8"), mp.mpf("1e-8"))
    print("eta_opt example    =", mp.nstr(v, 17), " at p_t =", mp.nstr(pt, 12))
    print("leak_ir example    =", mp.nstr(leak_ir(mp.mpf("0.01"), mp.mpf("0.85"), mp.mpf(10) ** 9,
                                                 mp.mpf("0.01"), mp.mpf("1e-10"), mp.mpf("1e-2")), 17))
    print("delta_est(1e7,1e-2)=", mp.nstr(delta_est(mp.mpf(10) ** 7, mp.mpf("1e-2")), 17))
    n2, gamma2 = mp.mpf(10) ** 11, mp.mpf("5e-3")
    d2 = delta_est(n2, mp.mpf("1e-3"))
    pt2, v2 = eta_opt(mp.mpf("0.85"), n2, gamma2, d2, mp.mpf("1e-8"), mp.mpf("1e-8"))
    print("eta_opt interior   =", mp.nstr(v2, 17), " at p_t =", mp.nstr(pt2, 12))
