"""Independent reference values for the C++ test suites.

Everything here is computed without the C++ code path: explicit full Gram
matrices in cvxpy (Clarabel), brute-force enumeration for the LPs, and
direct evaluation for closed forms.  Values printed here are frozen into
the GoogleTest files.
"""
import itertools
import math

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog


def phase_family(n):
    return np.array([[np.exp(2j * np.pi * (j - l) / n) for l in range(n)] for j in range(n)])


def comp_ft_family(d):
    w = np.exp(2j * np.pi / d)
    k = np.eye(2 * d, dtype=complex)
    for j in range(d):
        for l in range(d):
            k[j, d + l] = np.conj(w) ** (j * l) / np.sqrt(d)
            k[d + l, j] = np.conj(k[j, d + l])
    return k


def dps_family(ell):
    strings = list(itertools.product([0, 1], repeat=ell))
    phases = []
    for x in strings:
        ph = [0.0]
        for bit in x:
            ph.append(ph[-1] + bit * np.pi)
        phases.append(np.array(ph))
    n = len(strings)
    k = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            k[a, b] = np.sum(np.exp(1j * (phases[a] - phases[b]))) / (ell + 1)
    return k


def full_gram_sdp(k, nbar=None, nmax=20, fock_n=None, ud=False):
    """Full N(N+1) (or N(N+2)) Gram matrix SDP with explicit ledger rows."""
    n = k.shape[0]
    ops = n + 2 if ud else n + 1  # 0 = identity, 1..n = M_j, n+1 = M_empty
    dim = ops * n
    g = cp.Variable((dim, dim), hermitian=True)
    idx = lambda o, j: o * n + j
    cons = [g >> 0]
    meas = list(range(1, ops))
    for i in range(n):
        for j in range(n):
            for m in meas:
                cons.append(g[idx(m, i), idx(m, j)] == g[idx(0, i), idx(m, j)])
                for m2 in meas:
                    if m2 != m:
                        cons.append(g[idx(m, i), idx(m2, j)] == 0)
            for o in range(ops):
                cons.append(sum(g[idx(m, i), idx(o, j)] for m in meas) == g[idx(0, i), idx(o, j)])
    if ud:
        for j in range(n):
            for i in range(n):
                if i != j:
                    cons.append(cp.real(g[idx(1 + i, j), idx(1 + i, j)]) == 0)
        obj = 1 - sum(cp.real(g[idx(0, j), idx(n + 1, j)]) for j in range(n)) / n
    else:
        obj = sum(cp.real(g[idx(0, j), idx(1 + j, j)]) for j in range(n)) / n
    if fock_n is not None:
        for i in range(n):
            for j in range(n):
                cons.append(g[idx(0, i), idx(0, j)] == k[i, j] ** fock_n)
    else:
        p = cp.Variable(nmax + 1, nonneg=True)
        ns = np.arange(nmax + 1)
        cons += [cp.sum(p) <= 1, p @ (nmax + 1 - ns) >= nmax + 1 - nbar]
        for i in range(n):
            for j in range(n):
                kk = k[i, j]
                trunc = sum(p[m] * kk ** m for m in range(nmax + 1))
                eps = (1 - cp.sum(p)) * abs(kk) ** (nmax + 1)
                cons.append(cp.abs(g[idx(0, i), idx(0, j)] - trunc) <= eps)
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.value


def lp_exact(a, nbar):
    """max sum p_n a_n, sum p = 1, sum n p = nbar: brute force over two-point supports."""
    best = -np.inf
    n = len(a)
    for u in range(n):
        for v in range(u, n):
            if u == v:
                if abs(u - nbar) < 1e-12:
                    best = max(best, a[u])
                continue
            if u <= nbar <= v:
                w = (v - nbar) / (v - u)
                best = max(best, w * a[u] + (1 - w) * a[v])
    return best


def main():
    np.set_printoptions(precision=17)
    print("compft d=2 eigenvalues", np.linalg.eigvalsh(comp_ft_family(2)))
    k2 = dps_family(2)
    print("dps l=2 k(00,01)", k2[0, 1])
    k3 = dps_family(3)
    print("dps l=3 orthogonal counts", [(np.abs(k3[i]) < 1e-12).sum() for i in range(8)])
    h = np.array([[0, 1j], [-1j, 0]])
    emb = np.block([[h.real, -h.imag], [h.imag, h.real]])
    print("embedding eigenvalues", np.linalg.eigvalsh(emb))
    print("helstrom(0.5)", 0.5 * (1 + math.sqrt(0.75)))
    print("lp a=(0.5,1) nbar=0.5", lp_exact([0.5, 1.0], 0.5))
    # chi for k = 0.5, nbar = 1.5 by linprog over nmax = 10
    ns = np.arange(11)
    res = linprog(0.5 ** ns, A_eq=np.vstack([np.ones(11), ns]), b_eq=[1, 1.5], bounds=(0, None))
    print("chi(0.5,1.5) by LP", res.fun)
    print("coherent t2=1 k=0 nbar=1", 0.5 * (1 + math.sqrt(1 - math.exp(-2))))
    a = [0.5 * (1 + math.sqrt(1 - 0.25 ** n)) for n in range(6)]
    print("two-mode a_n k=0.5", a)
    print("dual at nbar=1.5", lp_exact(a, 1.5), 0.5 * a[1] + 0.5 * a[2])
    # cutoff-relaxed LP for a = (0.5, 1), nmax = 1, nbar = 0.5
    c = -(np.array([0.5, 1.0]) - 1.0)
    res = linprog(c, A_ub=[[1, 1], [0 - 2, 1 - 2]], b_ub=[1, 0.5 - 2], bounds=(0, None))
    print("relaxed lp", 1 - res.fun, res.x)

    print("channel two-mode k=0.5 nbar=1 prob", full_gram_sdp(np.array([[1, .5], [.5, 1]]), 1.0))
    print("channel two-mode k=0.5i nbar=0.5 prob", full_gram_sdp(np.array([[1, .5j], [-.5j, 1]]), 0.5))
    print("channel two-mode k=0.5i nbar=0.5 ud", full_gram_sdp(np.array([[1, .5j], [-.5j, 1]]), 0.5, ud=True))
    print("channel phase N=3 nbar=1 prob", full_gram_sdp(phase_family(3), 1.0))
    print("channel phase N=3 nbar=1 ud", full_gram_sdp(phase_family(3), 1.0, ud=True))
    print("channel phase N=3 nbar=0.3 prob", full_gram_sdp(phase_family(3), 0.3))
    print("channel compft d=2 nbar=1 prob", full_gram_sdp(comp_ft_family(2), 1.0))
    print("channel compft d=2 nbar=1 ud", full_gram_sdp(comp_ft_family(2), 1.0, ud=True))
    print("channel dps l=2 nbar=1.5 ud", full_gram_sdp(k2, 1.5, ud=True))
    for n in range(4):
        print("fock compft d=3 n=%d prob" % n, full_gram_sdp(comp_ft_family(3), fock_n=n))
    for n in range(4):
        print("fock compft d=3 n=%d ud" % n, full_gram_sdp(comp_ft_family(3), fock_n=n, ud=True))
    for n in range(4):
        print("fock phase N=3 n=%d ud" % n, full_gram_sdp(phase_family(3), fock_n=n, ud=True))
    for n in range(4):
        print("fock dps l=2 n=%d prob" % n, full_gram_sdp(k2, fock_n=n))


if __name__ == "__main__":
    main()
