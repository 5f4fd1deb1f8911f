"""Independent high-precision reference values for the unit tests.

Writes tests/fixtures/golden.json. Uses mpmath only; nothing here shares code
with the C++ library.

    python3 tools/oracles/golden.py
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 40
pi = mp.pi


def sphere_area(m):
    return 2 * pi ** (mp.mpf(m) / 2) / mp.gamma(mp.mpf(m) / 2)


def c_dk(d, k):
    denom = sphere_area(d - k)
    for n in range(k, d):
        denom *= sphere_area(n)
    return sphere_area(k) / ((2 * pi) ** k * denom)


def power_constant(alpha, m):
    alpha = mp.mpf(alpha)
    return mp.gamma((m - alpha) / 2) / (2 ** alpha * pi ** (mp.mpf(m) / 2) * mp.gamma(alpha / 2))


def power_log_constant(mp_, m):
    # Coefficient of |t|^{2m'} log|t| for alpha = m + 2m', from the Laurent
    # expansion of A_{alpha,m} |t|^{alpha-m} around the pole.
    eps = mp.mpf("1e-20")
    a = mp.mpf(m + 2 * mp_) + eps
    return power_constant(a, m) * eps  # residue times d/d(alpha) of |t|^{alpha-m}


def smooth_h(s):
    return mp.e ** (-1 / s) if s > 0 else mp.mpf(0)


def kappa_hat(w, r0=mp.mpf("0.5")):
    if w <= r0:
        return mp.mpf(1)
    if w >= 1:
        return mp.mpf(0)
    s = (1 - w) / (1 - r0)
    return smooth_h(s) / (smooth_h(s) + smooth_h(1 - s))


def filtered_gaussian(t):
    # (1/2pi) int |w| sqrt(2pi) exp(-w^2/2) exp(i w t) dw
    f = lambda w: w * mp.e ** (-w * w / 2) * mp.cos(w * t)
    return mp.sqrt(2 * pi) / pi * mp.quad(f, [0, mp.inf])


def main():
    out = {}
    out["constants"] = {
        "c_2_1": float(c_dk(2, 1)),
        "c_3_2": float(c_dk(3, 2)),
        "c_3_1": float(c_dk(3, 1)),
        "A_2_1": float(power_constant(2, 1)),
        "A_3_2": float(power_constant(3, 2)),
        "A_4_1": float(power_constant(4, 1)),
        "B_1_2": float(power_log_constant(1, 2)),
        "B_1_1": float(power_log_constant(1, 1)),
        "S0_area": float(sphere_area(1)),
        "S1_area": float(sphere_area(2)),
        "S2_area": float(sphere_area(3)),
    }
    # kappa(0) in 1D: (1/pi) int_0^1 kappa_hat.
    out["kappa_1d_origin"] = float(mp.quad(kappa_hat, [0, mp.mpf("0.5"), 1]) / pi)
    # d=2, k=1, alpha=2, A=[1 0], t=0, x=0: g = -<m_0^*, rho> with
    # rho = -|t|/2; evaluated in the frequency domain.
    integral = mp.quad(lambda w: (1 - kappa_hat(w)) / w ** 2, [mp.mpf("0.5"), mp.mpf("0.75"), 1])
    out["kernel_g_d2_k1_a2_origin"] = float((integral + 1) / pi)
    out["gaussian_plane_integral"] = float(mp.sqrt(2 * pi))
    ts = [mp.mpf(i) / 4 for i in range(-16, 17)]
    out["filtered_gaussian"] = {"t": [float(t) for t in ts], "value": [float(filtered_gaussian(t)) for t in ts]}

    path = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "golden.json"
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
