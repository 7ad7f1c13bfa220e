"""One-dimensional FQFT: quantum mechanics on a segment.

Partition functions on segments are Euclidean evolution operators
exp(-length * H); the cutting axiom is the semigroup law.  Constant
endomorphism families are good and give the usual time-ordered correlators,
and the double deformation reproduces second-order perturbation theory,
which we check against a matrix-exponential oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .errors import GeometryError, QuadratureError, ValidationError
from .jets import Jet, JetAlgebra, recombine

EIGEN_GAP_TOL = 1e-8
EIGEN_COND_MAX = 1e8
QUAD_NODES = 32
QUAD_TOL = 1e-9


class QmTheory:
    """Finite-dimensional theory defined by an arbitrary Hamiltonian."""

    def __init__(self, H):
        H = np.atleast_2d(np.asarray(H))
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
            raise ValidationError("Hamiltonian must be a square matrix")
        if not np.all(np.isfinite(H.real)) or not np.all(np.isfinite(H.imag)):
            raise ValidationError("Hamiltonian entries must be finite")
        self.H = H.astype(np.result_type(H.dtype, np.float64))
        self.dim = H.shape[0]
        self._eigen = None
        self._eigen_tried = False

    def eigen(self):
        """(eigenvalues, V, V^{-1}) when H has well-separated eigenvalues
        and a well-conditioned eigenbasis; None otherwise."""
        if not self._eigen_tried:
            self._eigen_tried = True
            lam, V = np.linalg.eig(self.H)
            scale = max(float(np.max(np.abs(lam))), 1.0)
            gap = min(
                (abs(lam[i] - lam[j]) for i in range(self.dim) for j in range(i + 1, self.dim)),
                default=np.inf,
            )
            if gap > EIGEN_GAP_TOL * scale and np.linalg.cond(V) < EIGEN_COND_MAX:
                self._eigen = (lam, V, np.linalg.inv(V))
        return self._eigen


class SegmentPF:
    """Partition function on [alpha, beta]; value is a matrix, or a jet of
    matrices for deformed theories."""

    def __init__(self, theory, alpha, beta, value):
        if not beta >= alpha:
            raise GeometryError("segment endpoints must satisfy beta >= alpha")
        self.theory = theory
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.value = value

    @property
    def length(self):
        return self.beta - self.alpha

    def glue(self, inner: "SegmentPF") -> "SegmentPF":
        """Compose with the earlier segment: self on [gamma, beta], inner on
        [alpha, gamma]."""
        if self.theory is not inner.theory:
            raise GeometryError("segments belong to different theories")
        if self.alpha != inner.beta:
            raise GeometryError("segments do not share an endpoint")
        if isinstance(self.value, Jet):
            value = qm_glue(self.value, inner.value)
        else:
            value = self.value @ inner.value
        return SegmentPF(self.theory, inner.alpha, self.beta, value)


def evolve(theory: QmTheory, alpha, beta) -> SegmentPF:
    """exp(-(beta - alpha) H), the Euclidean evolution operator."""
    if beta < alpha:
        raise GeometryError("segment endpoints must satisfy beta >= alpha")
    if beta == alpha:
        value = np.eye(theory.dim, dtype=theory.H.dtype)
    else:
        value = expm(-(beta - alpha) * theory.H)
    return SegmentPF(theory, alpha, beta, value)


def qm_correlator(theory: QmTheory, insertions, alpha, beta):
    """<O_1(tau_1) ... O_k(tau_k)> with tau_1 > ... > tau_k: the alternating
    product of evolutions and observables.  insertions: [(O, tau), ...]."""
    taus = [tau for _, tau in insertions]
    if any(t2 >= t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValidationError("insertion times must be strictly decreasing")
    if taus and not (alpha < taus[-1] and taus[0] < beta):
        raise ValidationError("insertion times must lie inside the segment")
    out = None
    prev = beta
    for O, tau in insertions:
        seg = evolve(theory, tau, prev).value
        out = seg if out is None else out @ seg
        out = out @ np.asarray(O)
        prev = tau
    seg = evolve(theory, alpha, prev).value
    return seg if out is None else out @ seg


def time_ordered(theory: QmTheory, a, b, alpha, beta):
    """Time-ordered two-point correlator.

    a, b are (matrix, time) pairs.  Returns (matrix, coincident): coincident
    times resolve to the symmetrized product (O_a O_b + O_b O_a)/2, flagged
    in the second component.
    """
    (Oa, tau), (Ob, taut) = a, b
    if tau > taut:
        return qm_correlator(theory, [(Oa, tau), (Ob, taut)], alpha, beta), False
    if tau < taut:
        return qm_correlator(theory, [(Ob, taut), (Oa, tau)], alpha, beta), False
    Oa, Ob = np.asarray(Oa), np.asarray(Ob)
    sym = (Oa @ Ob + Ob @ Oa) / 2
    return qm_correlator(theory, [(sym, tau)], alpha, beta), True


# ------------------------------------------------------ closed-form integrals
#
# In an eigenbasis of H the simplex integrals reduce to divided differences
# of f(lam) = exp(-T lam).  Node coincidences only occur between identical
# eigenvalues (same index), so exact comparisons below are safe.


def _dd1(T, x, y):
    """-(first divided difference): int_0^T e^{-(T-s)x} e^{-s y} ds."""
    if x == y:
        return T * np.exp(-T * x)
    return (np.exp(-T * y) - np.exp(-T * x)) / (x - y)


def _dd2(T, x, k, y):
    """Ordered simplex integral with nodes (x, k, y):
    int_{0<s2<s1<T} e^{-(T-s1)x} e^{-(s1-s2)k} e^{-s2 y} ds2 ds1."""
    if x == y:
        if k == x:
            return T * T * np.exp(-T * x) / 2
        return (_dd1(T, x, k) - _dd1(T, x, x)) / (x - k)
    return (_dd1(T, k, y) - _dd1(T, x, k)) / (x - y)


def _maybe_real(value, *inputs):
    if all(not np.iscomplexobj(m) for m in inputs):
        return value.real
    return value


def first_order_integral(theory: QmTheory, O, alpha, beta):
    """int_alpha^beta e^{-(beta-tau)H} O e^{-(tau-alpha)H} dtau."""
    O = np.asarray(O)
    T = beta - alpha
    eig = theory.eigen()
    if eig is None:
        return _quad_first_order(theory, O, T)
    lam, V, Vinv = eig
    Ot = Vinv @ O @ V
    phi = np.array([[_dd1(T, x, y) for y in lam] for x in lam])
    return _maybe_real(V @ (Ot * phi) @ Vinv, theory.H, O)


def second_order_ordered(theory: QmTheory, X, Y, alpha, beta):
    """int over alpha < tau2 < tau1 < beta of
    e^{-(beta-tau1)H} X e^{-(tau1-tau2)H} Y e^{-(tau2-alpha)H}."""
    X, Y = np.asarray(X), np.asarray(Y)
    T = beta - alpha
    eig = theory.eigen()
    if eig is None:
        return _quad_second_order(theory, X, Y, T)
    lam, V, Vinv = eig
    Xt, Yt = Vinv @ X @ V, Vinv @ Y @ V
    n = theory.dim
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = sum(
                Xt[i, k] * Yt[k, j] * _dd2(T, lam[i], lam[k], lam[j])
                for k in range(n)
            )
    return _maybe_real(V @ out @ Vinv, theory.H, X, Y)


def time_ordered_integral(theory: QmTheory, Oa, Ob, alpha, beta):
    """Double integral of the time-ordered two-point correlator over the
    square [alpha, beta]^2; symmetric in (Oa, Ob)."""
    return second_order_ordered(theory, Oa, Ob, alpha, beta) + second_order_ordered(
        theory, Ob, Oa, alpha, beta
    )


# ----------------------------------------------------- quadrature fallback


def _gauss_nodes(T, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) * (T / 2), w * (T / 2)


def _quad_first_order(theory, O, T, n=QUAD_NODES):
    def run(nodes):
        x, w = _gauss_nodes(T, nodes)
        total = np.zeros((theory.dim, theory.dim), dtype=complex)
        for s, wt in zip(x, w):
            total += wt * (expm(-(T - s) * theory.H) @ O @ expm(-s * theory.H))
        return total

    coarse, fine = run(n), run(2 * n)
    scale = max(float(np.max(np.abs(fine))), 1.0)
    if np.max(np.abs(fine - coarse)) > QUAD_TOL * scale:
        raise QuadratureError("first-order segment integral did not converge")
    return _maybe_real(fine, theory.H, O)


def _quad_second_order(theory, X, Y, T, n=QUAD_NODES):
    def run(nodes):
        x, w = _gauss_nodes(T, nodes)
        total = np.zeros((theory.dim, theory.dim), dtype=complex)
        for s1, w1 in zip(x, w):
            # inner integral over 0 < s2 < s1
            xi, wi = _gauss_nodes(s1, nodes)
            inner = np.zeros_like(total)
            for s2, w2 in zip(xi, wi):
                inner += w2 * (expm(-(s1 - s2) * theory.H) @ Y @ expm(-s2 * theory.H))
            total += w1 * (expm(-(T - s1) * theory.H) @ X @ inner)
        return total

    coarse, fine = run(n), run(2 * n)
    scale = max(float(np.max(np.abs(fine))), 1.0)
    if np.max(np.abs(fine - coarse)) > QUAD_TOL * scale:
        raise QuadratureError("second-order segment integral did not converge")
    return _maybe_real(fine, theory.H, X, Y)


# ------------------------------------------------------------- deformations


def qm_glue(outer: Jet, inner: Jet) -> Jet:
    """Monomial-wise matrix composition of jet-valued partition functions."""
    if outer.algebra != inner.algebra:
        raise ValueError("jets over different algebras")
    alg = outer.algebra
    coeffs = {}
    for ma, ca in outer.coeffs.items():
        for mb, cb in inner.coeffs.items():
            mono = tuple(sorted(ma + mb))
            if not alg.monomial_ok(mono):
                continue
            prod = ca @ cb
            if mono in coeffs:
                coeffs[mono] = coeffs[mono] + prod
            else:
                coeffs[mono] = prod
    return Jet(alg, coeffs)


def qm_deform(theory: QmTheory, obs, alpha, beta) -> SegmentPF:
    """First-order deformation by the constant families in `obs`:
    pf + g^a * int <O_a(tau)> dtau, with first-order nilpotent couplings."""
    labels = sorted(obs)
    alg = JetAlgebra({"g": ([f"g[{l}]" for l in labels], 1)}, truncation=2)
    coeffs = {(): evolve(theory, alpha, beta).value}
    for l in labels:
        coeffs[(f"g[{l}]",)] = first_order_integral(theory, obs[l], alpha, beta)
    return SegmentPF(theory, alpha, beta, Jet(alg, coeffs))


def qm_double_deform(theory: QmTheory, obs, alpha, beta) -> SegmentPF:
    """Deform twice by the same family and rewrite in the combined coupling:
    pf + g_c^a int <O_a> + (1/2) g_c^a g_c^b int int T{<O_a O_b>}."""
    labels = sorted(obs)
    alg = JetAlgebra.double_coupling(labels)
    first = {l: first_order_integral(theory, obs[l], alpha, beta) for l in labels}
    coeffs = {(): evolve(theory, alpha, beta).value}
    for l in labels:
        coeffs[(f"g[{l}]",)] = first[l]
        coeffs[(f"gt[{l}]",)] = first[l]
    for a in labels:
        for b in labels:
            S = time_ordered_integral(theory, obs[a], obs[b], alpha, beta)
            mono = tuple(sorted((f"gt[{a}]", f"g[{b}]")))
            if mono in coeffs:
                coeffs[mono] = coeffs[mono] + S
            else:
                coeffs[mono] = S
    raw = Jet(alg, coeffs)
    return SegmentPF(theory, alpha, beta, recombine(raw, labels))


# ------------------------------------------------------------------- oracle


def _poly_mat_mul(A, B, order):
    """Product of matrix-valued polynomials in g, truncated past g^order."""
    out = [None] * (order + 1)
    for i, a in enumerate(A):
        if a is None:
            continue
        for j, b in enumerate(B):
            if b is None or i + j > order:
                continue
            term = a @ b
            out[i + j] = term if out[i + j] is None else out[i + j] + term
    return out


def taylor_series_oracle(H, O, T, order=2, tol=1e-16, max_terms=200):
    """Taylor coefficients in g of exp(-T (H + g O)), orders 0..order.

    Scaling-and-squaring on matrix-valued polynomials: the series for the
    scaled exponent is summed term by term, then squared back up.  Entirely
    independent of the eigen-decomposition integrals.
    """
    real_inputs = not (np.iscomplexobj(H) or np.iscomplexobj(O))
    H, O = np.asarray(H, dtype=complex), np.asarray(O, dtype=complex)
    n = H.shape[0]
    norm = max(float(np.max(np.abs(T * H))), float(np.max(np.abs(T * O))), 1e-30)
    s = max(0, int(np.ceil(np.log2(norm))) + 1)
    scale = T / 2**s
    M = [-scale * H, -scale * O] + [None] * (order - 1)
    eye = np.eye(n, dtype=complex)
    acc = [eye] + [None] * order
    term = [eye] + [None] * order
    for k in range(1, max_terms):
        term = [t / k if t is not None else None for t in _poly_mat_mul(term, M, order)]
        for i, t in enumerate(term):
            if t is not None:
                acc[i] = t if acc[i] is None else acc[i] + t
        if all(t is None or np.max(np.abs(t)) < tol for t in term):
            break
    else:  # pragma: no cover
        raise QuadratureError("oracle series did not converge")
    acc = [a if a is not None else np.zeros((n, n), dtype=complex) for a in acc]
    for _ in range(s):
        acc = _poly_mat_mul(acc, acc, order)
        acc = [a if a is not None else np.zeros((n, n), dtype=complex) for a in acc]
    if real_inputs:
        acc = [a.real for a in acc]
    return acc
