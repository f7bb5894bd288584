"""Independent oracle for the frozen test values.

Recomputes every DERIVED constant in tests/oracle_values.hpp with mpmath at 60 digits,
without touching the C++ library. Run: python3 tests/oracles/oracles.py
"""
import mpmath as mp

mp.mp.dps = 60
L2 = mp.log(2)


def tube_psi(t, r, blend="C2"):
    a = abs(t)
    if a >= L2:
        return r * r * mp.e ** (2 * a)
    s = a / L2
    if blend == "C2":
        g = mp.mpf(3) / 8 + mp.mpf(3) / 4 * s**2 - mp.mpf(1) / 8 * s**4
    else:
        g = (mp.mpf(35) / 128 + mp.mpf(35) / 32 * s**2 - mp.mpf(35) / 64 * s**4
             + mp.mpf(7) / 32 * s**6 - mp.mpf(5) / 128 * s**8)
    return r * r * mp.e ** (2 * L2 * g)


def spectrum_psi(t, beta=1):
    return mp.e ** (-beta / t**2) * mp.sin(1 / t) + 1


def root(k, beta=1):
    # x = 1/t on (k pi, k pi + pi/2): tan x = 1 / (2 beta x)
    f = lambda x: mp.sin(x) * 2 * beta * x - mp.cos(x)
    return 1 / mp.findroot(f, (k * mp.pi, k * mp.pi + mp.pi / 2), solver="anderson")


def fnv1a(s):
    h = 14695981039346656037
    for c in s.encode():
        h ^= c
        h = (h * 1099511628211) % 2**64
    return h


def out(name, value, digits=17):
    print(f"{name} = {mp.nstr(value, digits)}")


r = mp.mpf("0.3")
out("tube_psi0_r03_C2", tube_psi(0, r))
out("tube_psi0_r03_C4", tube_psi(0, r, "C4"))
out("tube_psi_r03_C2_at_0.2", tube_psi(mp.mpf("0.2"), r))
out("tube_dpsi_r03_C2_at_0.2", mp.diff(lambda t: tube_psi(t, r), mp.mpf("0.2")))
out("tube_radius_max", mp.pi / (4 * mp.sqrt(3) + 2))
out("quantum_r03", 4 * mp.pi * tube_psi(0, r))
for k in range(1, 6):
    t = root(k)
    gap = 4 * mp.pi * mp.e ** (-1 / t**2) * abs(mp.sin(1 / t))
    print(f"t_{k} = {mp.nstr(t, 40)}")
    print(f"gap_{k} = {mp.nstr(gap, 20)}  log10 = {mp.nstr(mp.log10(gap), 17)}")
    out(f"tk_kpi_{k}", t * k * mp.pi)
for k in range(1, 4):
    t = root(k, mp.mpf("0.05"))
    gap = 4 * mp.pi * mp.e ** (-mp.mpf("0.05") / t**2) * abs(mp.sin(1 / t))
    out(f"beta005_t_{k}", t)
    out(f"beta005_gap_{k}", gap)
t1 = root(1)
out("identity_energy_spectrum_t1", 4 * mp.pi * spectrum_psi(t1))
out("spectrum_dpsi_at_0.35", mp.diff(spectrum_psi, mp.mpf("0.35")))
out("ball_energy_identity_r03", 2 * mp.pi * (1 - mp.cos(mp.mpf("0.3"))))
for R in (4, 8, 10, 20):
    out(f"bubble_energy_frac_R{R}", mp.mpf(R) ** 2 / (1 + mp.mpf(R) ** 2))
for A in ("0.2", "0.35"):
    A = mp.mpf(A)
    Psi = mp.quad(lambda t: tube_psi(t, r), [0, A])
    out(f"neck_closed_form_w3_A{A}_G1", 4 * mp.pi * 9 * A * Psi)
for text in ("", "command=ledger\nr=0.3\n"):
    print(f"fnv1a({text!r}) = {fnv1a(text):016x}")
for rr in ("0.3",):
    rr = mp.mpf(rr)
    p0 = tube_psi(0, rr)
    out("ledger_r03_quantum", 4 * mp.pi * p0)
    out("ledger_r03_16pir2", 16 * mp.pi * rr**2)
    out("ledger_r03_48pir2", 48 * mp.pi * rr**2)
    out("ledger_r03_monotonicity", mp.pi * (mp.pi - 2 * rr) ** 2)
