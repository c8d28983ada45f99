"""Independent reference values frozen into the C++ unit tests.

Written directly from the physical formulas with mpmath at 50 digits; shares
no code with the library. Run: python3 tests/oracles/derived_values.py
"""
from mpmath import mp, mpf, sqrt, cbrt, pi, findroot, matrix, eigsy

mp.dps = 50

HBAR = mpf("1.054571817e-34")
AMU = mpf("1.66053906660e-27")
M = 171 * AMU
LAMBDA = mpf("355e-9")
DK = 2 * (2 * pi / LAMBDA)


def two_ion():
    # Half-spacing u minimizes u^2 + 1/(2u): 2u = 1/(2u^2) -> u^3 = 1/4.
    u2 = cbrt(mpf(1) / 4)
    # Three ions at (-u, 0, u): u = 1/u^2 + 1/(4u^2) -> u^3 = 5/4.
    u3 = cbrt(mpf(5) / 4)
    print("u2 =", mp.nstr(u2, 20), " u3 =", mp.nstr(u3, 20))

    wx = 2 * pi * mpf("5e6")
    wz = 2 * pi * sqrt(mpf(24)) * mpf("1e6")
    w_rock = sqrt(wx**2 - wz**2)
    print("N=2 omega_z/2pi =", mp.nstr(wz / (2 * pi), 20), " rocking/2pi =", mp.nstr(w_rock / (2 * pi), 20))
    b = 1 / sqrt(2)
    eta_com = b * DK * sqrt(HBAR / (2 * M * wx))
    eta_rock = b * DK * sqrt(HBAR / (2 * M * w_rock))
    print("eta (i,m): [[%s, %s], [%s, %s]]" % (
        mp.nstr(eta_com, 17), mp.nstr(eta_rock, 17), mp.nstr(eta_com, 17), mp.nstr(-eta_rock, 17)))
    return wx, w_rock, eta_com, eta_rock


def coupling_two_ion(wx, w_rock, eta_com, eta_rock):
    # Beat-notes: mean gap = wx - w_rock.
    gap = wx - w_rock
    mu = [wx + gap / 10, w_rock + gap / 10]
    w = [wx, w_rock]
    eta = [[eta_com, eta_rock], [eta_com, -eta_rock]]
    omega = [[mpf("0.3"), mpf("-0.7")], [mpf("0.5"), mpf("0.2")]]
    j12 = mpf(0)
    for n in range(2):
        for m in range(2):
            j12 += omega[0][n] * omega[1][n] * eta[0][m] * eta[1][m] * w[m] / (mu[n] ** 2 - w[m] ** 2)
    print("N=2 J_12 for omega=[[0.3,-0.7],[0.5,0.2]] :", mp.nstr(j12, 17))
    # dJ12/dOmega(0,1) = Omega(1,1) * F[1][0][1]
    f1 = sum(eta[0][m] * eta[1][m] * w[m] / (mu[1] ** 2 - w[m] ** 2) for m in range(2))
    print("N=2 dJ12/dOmega(0,1) :", mp.nstr(omega[1][1] * f1, 17))


def tune_closed_form(n):
    # Positions by Newton on the gradient, then kappa_max of the Coulomb matrix:
    # omega_low^2 = omega_x^2 - omega_z^2 kappa_max.
    def grad(*u):
        return [u[i] - sum((1 if u[i] > u[j] else -1) / (u[i] - u[j]) ** 2 for j in range(n) if j != i)
                for i in range(n)]
    guess = [(i - (n - 1) / mpf(2)) * mpf("2.018") / mpf(n) ** mpf("0.559") for i in range(n)]
    u = findroot(grad, guess)
    k = matrix(n, n)
    for i in range(n):
        for j in range(n):
            if i != j:
                c = 1 / abs(u[i] - u[j]) ** 3
                k[i, j] = -c
                k[i, i] += c
    ev = eigsy(k, eigvals_only=True)
    kmax = max(ev)
    wz = sqrt(((2 * pi * mpf("5e6")) ** 2 - (2 * pi * mpf("1e6")) ** 2) / kmax)
    print("N=%d omega_z/2pi (closed form) = %s, kappa_max = %s" % (n, mp.nstr(wz / (2 * pi), 17), mp.nstr(kmax, 17)))


if __name__ == "__main__":
    wx, wr, ec, er = two_ion()
    coupling_two_ion(wx, wr, ec, er)
    for n in (3, 10):
        tune_closed_form(n)
