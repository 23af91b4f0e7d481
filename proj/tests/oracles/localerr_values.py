"""Reference values for the local error unit tests (mpmath, 40 digits).

Each formula is evaluated by direct substitution in exact arithmetic.
"""
from mpmath import mp, mpf, expm1

mp.dps = 40


def phi(u):
    return mpf(1) if u == 0 else expm1(u) / u


def o1(K, Kp, Lam, h):
    return min(h * Kp * phi(Lam * h), h * (2 * K + Kp))


def o2c(K, Kp, L, Lp, Lam, h):
    return h**2 * ((K + Kp) * Lp / 3 + 2 * Kp * (L + Lp) * phi(Lam * h))


def o2c2(K, Kp, L, Lp, H, Lam, h):
    p = phi(Lam * h)
    num = (h**2 / 3) * (3 * Kp * Lp * p + Lp * (K + Kp))
    num += (h**3 / 4) * Kp * (L * Lp + L**2 + H * (K + Kp)) * p
    num += (11 * h**3 / 24) * (H * Kp + L * Lp) * (K + Kp)
    return num / (1 - h * L / 2)


def o2a(K, Kp, L, Lp, H, Hp, Lam, h):
    p = phi(Lam * h)
    num = (h**2 / 4) * Lp * (11 * K + mpf(69) / 2 * Kp)
    num += (7 * h**3 / 8) * Kp * ((4 * Hp + H) * (K + mpf(5) / 2 * Kp) + L**2 + (mpf(9) / 2 * L + 5 * Lp) * Lp) * p
    num += (7 * h**3 / 48) * (H * Kp + L * Lp) * (K + Kp)
    return num / (1 - h * L / 2 - h * Lp)


def o3a(K, Kp, L, H, Lam, h):
    p = phi(Lam * h)
    num = mpf(7) / 48 * h**3 * Kp * H * (K + Kp) + mpf(7) / 8 * h**3 * Kp * (L**2 + H * (K + 5 * Kp / 2)) * p
    return num / (1 - h * L / 2)


def o3s(K, Kp, L, Lp, H, Hp, Lam, h):
    p = phi(Lam * h)
    num = (7 * h**3 / 8) * Kp * ((H + 10 * Hp) * (K + mpf(5) / 2 * Kp) + L**2 + mpf(25) / 2 * L * Lp + 25 * Lp**2) * p
    num += (h**3 / 48) * (K + Kp) * (7 * (H * Kp + L * Lp) + 28 * (Hp * K + L * Lp) + 29 * (Hp * Kp + Lp**2))
    return num / (1 - h * L / 2 - h * Lp)


one = mpf(1)
vdp = dict(K=mpf(20), L=mpf(31), H=mpf(12), Kp=mpf("0.08"), Lam=mpf(27))
print("o1_vdp_h0.001        ", o1(vdp["K"], vdp["Kp"], vdp["Lam"], mpf("0.001")))
print("o2c_ones_h0.1        ", o2c(one, one, one, one, 0, mpf("0.1")))
print("o2c2_KpL1_h0.1       ", o2c2(one, one, one, 0, 0, 0, mpf("0.1")))
print("o2a_ones_h0.1        ", o2a(one, one, one, one, one, one, 0, mpf("0.1")))
print("o3s_ones_h0.01       ", o3s(one, one, one, one, one, one, 0, mpf("0.01")))
print("o3a_vdp_h0.001       ", o3a(vdp["K"], vdp["Kp"], vdp["L"], vdp["H"], vdp["Lam"], mpf("0.001")))
for h in ["0.25", "0.1", "0.01", "0.001"]:
    h = mpf(h)
    # Harmonic oscillator: L = Lambda = 1, H = 0, K' = 0.1.
    print("harmonic_h%-13s" % h, 7 * h**3 / (4 * (2 - h)) * phi(h) * mpf("0.1"))

# Order slopes over h in {1e-1, 3e-2, 1e-2, 3e-3, 1e-3} for the bound set used
# by LocalErrProperty.OrderSlopes.
from mpmath import log, matrix, expm, quad

hs = [mpf("1e-1"), mpf("3e-2"), mpf("1e-2"), mpf("3e-3"), mpf("1e-3")]


def slope(f):
    xs = [log(h) for h in hs]
    ys = [log(f(h)) for h in hs]
    n = len(hs)
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    return (n * sxy - sx * sy) / (n * sxx - sx * sx)


K, Kp, L, Lp, H, Hp, Lam = mpf(1), mpf("0.1"), mpf("0.5"), mpf(1), mpf("0.5"), mpf("0.1"), mpf("0.5")
print("slope_o1  ", slope(lambda h: o1(K, Kp, Lam, h)))
print("slope_o2c ", slope(lambda h: o2c(K, Kp, L, Lp, Lam, h)))
print("slope_o2c2", slope(lambda h: o2c2(K, Kp, L, Lp, H, Lam, h)))
print("slope_o2a ", slope(lambda h: o2a(K, Kp, L, Lp, H, Hp, Lam, h)))
print("slope_o3a ", slope(lambda h: o3a(K, Kp, L, H, Lam, h)))
print("slope_o3s ", slope(lambda h: o3s(K, Kp, L, Lp, H, Hp, Lam, h)))

# x' = A x + (0, v), A = [[0,1],[-1,0]], v = -V on [0,h/2), +V on [h/2,h],
# constant surrogate w = 0 (the mean). Distance at t = h in the sup norm.
V = mpf("0.1")
A = matrix([[0, 1], [-1, 0]])
for h in [mpf("0.25"), mpf("0.1"), mpf("0.01")]:
    def comp(i):
        return quad(lambda s: (expm(A * (h - s)) * matrix([0, 1]))[i] * (-V if s < h / 2 else V), [0, h / 2, h])
    print("switching_error_h%-6s" % h, max(abs(comp(0)), abs(comp(1))))

# Worked Van der Pol coefficients 11.24 h^3 + 168.17 h^3 Phi(27 h) at h = 1e-3,
# and the Lambda that would reproduce the headline 1.817092608e-7.
h = mpf("0.001")
print("vdp_coefficient_form  ", mpf("11.24") * h**3 + mpf("168.17") * h**3 * phi(27 * h))
from mpmath import findroot  # noqa: E402

lam = findroot(lambda l: mpf("11.24") * h**3 + mpf("168.17") * h**3 * phi(l * h) - mpf("1.817092608e-7"), 27)
print("vdp_lambda_for_headline", lam)
