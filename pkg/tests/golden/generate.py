"""Regenerate the frozen golden CSVs from the brute-force oracle.

The oracle is deliberately independent of the package: 50-digit mpmath
arithmetic, with |Re kappa| and |Im kappa| recovered through the
principal arccos of the dispersion right-hand side (not the quadratic
root / complex-log route the library uses).  Run once; the outputs are
committed and the acceptance suite compares structure against them.

    python3 tests/golden/generate.py
"""

import pathlib

import mpmath as mp

mp.mp.dps = 50

HERE = pathlib.Path(__file__).resolve().parent

CASES = {
    # name: (alpha, beta, gamma, omega_lo, omega_hi, samples)
    "fig3": (mp.mpf(1), 1, mp.mpf(0.5), mp.mpf("0.02"), 5, 250),
    "fig4": (mp.mpf(1), 0, 0, mp.mpf("0.02"), 5, 250),
    "fig5a": (mp.mpc(1, "0.001"), 0, 0, mp.mpf("0.02"), 5, 250),
    "fig5b": (mp.mpc(1, "0.01"), 0, 0, mp.mpf("0.02"), 5, 250),
    "fig5c": (mp.mpc(1, "0.1"), 0, 0, mp.mpf("0.02"), 5, 250),
    "fig5d": (mp.mpc(1, 1), 0, 0, mp.mpf("0.02"), 5, 250),
    "fig_cascade": (mp.mpf(1), 1, 0, mp.mpf("0.9"), mp.mpf("0.9999"), 400),
}


def f_of(alpha, beta, gamma, w):
    eps = 1 + alpha / (1 - beta * w * w - mp.mpc(0, 1) * gamma * w)
    rho = mp.sqrt(eps)
    s0 = w
    return mp.cos(s0) * mp.cos(rho * s0) - (1 + rho * rho) / (2 * rho) * mp.sin(s0) * mp.sin(rho * s0)


def kappa_abs(alpha, beta, gamma, w):
    # kappa = acos(f)/2 on the principal branch; absolute values of the
    # real part (folded representative) and the decay rate
    f = f_of(alpha, beta, gamma, w)
    kappa = mp.acos(f) / 2
    re = abs(mp.re(kappa))
    if re > mp.pi / 2:
        re = mp.pi - re
    return re, abs(mp.im(kappa))


def main():
    for name, (alpha, beta, gamma, lo, hi, n) in CASES.items():
        rows = []
        for i in range(n):
            w = lo + (hi - lo) * i / (n - 1)
            re, im = kappa_abs(alpha, beta, gamma, w)
            rows.append((w, re, im))
        path = HERE / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            fh.write("omega,abs_re_kappa,abs_im_kappa\n")
            for w, re, im in rows:
                fh.write(f"{float(w):.17g},{float(re):.17g},{float(im):.17g}\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
