"""Channel-scenario reference values from the outcome-block formulation.

One PSD block per outcome (X_empty plus diagonal weights for unambiguous
discrimination), written directly in cvxpy with complex variables and SOC
anchors, solved by Clarabel.  Both tail models are evaluated: the symmetric
disk and, for real overlaps, the interval spanned by the tail powers.
"""
import sys

import cvxpy as cp
import numpy as np

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from oracles import comp_ft_family, dps_family, phase_family  # noqa: E402


def channel(k, nbar, nmax=50, ud=False, tail="disk"):
    n = k.shape[0]
    real = np.allclose(k.imag, 0)
    p = cp.Variable(nmax + 1, nonneg=True)
    ns = np.arange(nmax + 1)
    cons = [cp.sum(p) <= 1, p @ (nmax + 1 - ns) >= nmax + 1 - nbar]
    if ud:
        xe = cp.Variable((n, n), hermitian=True)
        x = cp.Variable(n, nonneg=True)
        s = xe + cp.diag(x)
        cons.append(xe >> 0)
        obj = cp.sum(x) / n
    else:
        blocks = [cp.Variable((n, n), hermitian=True) for _ in range(n)]
        cons += [b >> 0 for b in blocks]
        s = sum(blocks)
        obj = sum(cp.real(blocks[j][j, j]) for j in range(n)) / n
    tau = 1 - cp.sum(p)
    for i in range(n):
        cons.append(cp.real(s[i, i]) == 1)
        for j in range(i + 1, n):
            kk = k[i, j]
            powers = np.array([kk ** m for m in range(nmax + 1)])
            if real:
                kr = kk.real
                z = cp.real(s[i, j]) - p @ powers.real
                k1, k2 = kr ** (nmax + 1), kr ** (nmax + 2)
                if tail == "hull":
                    zero = 0.0 if abs(kr) < 1 else k1
                    lo, hi = min(k1, k2, zero), max(k1, k2, zero)
                else:
                    lo, hi = -abs(k1), abs(k1)
                cons += [z <= tau * hi, z >= tau * lo]
            else:
                z = s[i, j] - (p @ powers.real + 1j * (p @ powers.imag))
                cons.append(cp.abs(z) <= tau * abs(kk) ** (nmax + 1))
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.value


def two(k):
    return np.array([[1, k], [np.conj(k), 1]], dtype=complex)


def main():
    cases = [
        ("two-mode 0.5i nbar=0.5", two(0.5j), 0.5),
        ("two-mode 0.6+0.3i nbar=1.3", two(0.6 + 0.3j), 1.3),
        ("two-mode -0.5 nbar=0.7", two(-0.5), 0.7),
        ("phase N=3 nbar=0.3", phase_family(3), 0.3),
        ("phase N=4 nbar=0.5", phase_family(4), 0.5),
        ("compft d=2 nbar=1", comp_ft_family(2), 1.0),
        ("compft d=3 nbar=0.8", comp_ft_family(3), 0.8),
        ("dps l=2 nbar=1.5", dps_family(2), 1.5),
        ("dps l=2 nbar=0.6", dps_family(2), 0.6),
    ]
    for name, k, nbar in cases:
        print("%-28s prob disk %.10f hull %.10f ud disk %.10f hull %.10f" % (
            name, channel(k, nbar), channel(k, nbar, tail="hull"),
            channel(k, nbar, ud=True), channel(k, nbar, ud=True, tail="hull")))


if __name__ == "__main__":
    main()
