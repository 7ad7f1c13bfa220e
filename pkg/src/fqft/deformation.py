"""Conformal perturbation theory: deformations, corrections, and the beta
function.

Two backends share the same pipeline.

* The formal backend works over abstract conformal theory data (primaries
  with dimensions, marginal-sector OPE rows, mixing matrix).  Vectors are
  formal combinations of correlator symbols <O_c^{mu,mubar}(0)>_{D_R} and
  integral atoms, with exact rational coefficients carrying symbolic log(R),
  log(lam), and powers of R via sympy.
* The numeric free-boson backend deforms the truncated Fock-space partition
  functions by the marginal observable j jbar, with exact rational entries.

A family at cut radius r is an RExpansion whose (p, q) term means
r^p (log r)^q times a formal vector of families <...>_{D_r}; pairing with
the annulus D_R \\ D_r maps each family symbol to the correlator on D_R and
leaves the scalar (r, log r) prefactors as the expansion grading.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import sympy

from .errors import ValidationError
from .fock import ModeOperator, apply_mode, current_mode
from .jets import Jet, JetAlgebra, recombine
from .observables import scale_by_level
from .rexp import RExpansion

R_SYM = sympy.Symbol("R", positive=True)
LAM_SYM = sympy.Symbol("lam", positive=True)


def _rat(x):
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    return sympy.sympify(x)


# ------------------------------------------------------------ formal vectors


class FormalVector:
    """Formal combination of correlator/integral symbols with sympy scalars.

    Keys:
      ("corr", c, mu, mubar)  the correlator <O_c^{mu,mubar}(0)>_{D_R}
      ("disk",)               the undeformed disk partition function
      ("int", gamma)          int_{D_R} dmu <O_gamma(z)>_{D_R}   (R-independent)
      ("int0", a)             R^{-2} int_{D_R} dmu <O_a(z)>_{D_R} for dim-0 a
      ("reg", a, b)           unresolved regular part of the integrated
                              deformed one-point function (R-independent)
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for key, val in (terms or {}).items():
            val = _rat(val) if not isinstance(val, sympy.Basic) else val
            if sympy.expand(val) != 0:
                self.terms[key] = val

    @classmethod
    def corr(cls, c, mu=(), mubar=(), value=1):
        return cls({("corr", c, tuple(mu), tuple(mubar)): value})

    @classmethod
    def atom(cls, key, value=1):
        return cls({tuple(key): value})

    def __add__(self, other):
        terms = dict(self.terms)
        for key, val in other.terms.items():
            terms[key] = terms.get(key, 0) + val
        return FormalVector(terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        s = _rat(s) if not isinstance(s, sympy.Basic) else s
        return FormalVector({k: s * v for k, v in self.terms.items()})

    def __rmul__(self, s):
        return self.scale(s)

    def map_values(self, f):
        return FormalVector({k: f(v) for k, v in self.terms.items()})

    def coefficient(self, key):
        return self.terms.get(tuple(key), sympy.Integer(0))

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, FormalVector):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        bits = [f"{v}*{k}" for k, v in sorted(self.terms.items(), key=lambda kv: str(kv[0]))]
        return "FormalVector(" + " + ".join(bits or ["0"]) + ")"


# ------------------------------------------------------------- theory data


class Primary:
    __slots__ = ("label", "h", "hbar")

    def __init__(self, label, h, hbar):
        self.label = label
        self.h = Fraction(h)
        self.hbar = Fraction(hbar)

    def __repr__(self):
        return f"Primary({self.label}, h={self.h}, hbar={self.hbar})"


class FormalTheory:
    """Conformal theory data for the formal backend (zero central charge).

    rows: OPE rows of pairs of marginals, (alpha, beta, c, mu, mubar, value).
    mixing: M_a^gamma identifying the (1,1)-descendant of a dimension-0
    primary with a combination of marginal primaries.
    """

    def __init__(self, primaries, rows, mixing=None):
        self.primaries = [
            p if isinstance(p, Primary) else Primary(*p) for p in primaries
        ]
        self.dims = {p.label: (p.h, p.hbar) for p in self.primaries}
        if len(self.dims) != len(self.primaries):
            raise ValidationError("duplicate primary labels")
        for p in self.primaries:
            if p.h < 0 or p.hbar < 0:
                raise ValidationError(
                    f"primary {p.label} has negative dimension components"
                )
            if (p.h, p.hbar) in ((1, 0), (0, 1)):
                raise ValidationError(
                    f"spin-carrying marginal primary {p.label} is unsupported"
                )
        self.marginals = [p.label for p in self.primaries if (p.h, p.hbar) == (1, 1)]
        self.mixing = {}
        for (a, gamma), val in (mixing or {}).items():
            if self.dims.get(a) != (0, 0):
                raise ValidationError(f"mixing source {a} must have dimension (0,0)")
            if gamma not in self.marginals:
                raise ValidationError(f"mixing target {gamma} must be marginal")
            self.mixing[(a, gamma)] = Fraction(val)
        self.rows = {}
        for (alpha, beta, c, mu, mubar, value) in rows:
            value = Fraction(value)
            if value == 0:
                continue
            if alpha not in self.marginals or beta not in self.marginals:
                raise ValidationError("OPE rows must pair marginal observables")
            if c not in self.dims:
                raise ValidationError(f"unknown OPE target {c}")
            mu, mubar = tuple(mu), tuple(mubar)
            s, sbar = self.exponent_pair(c, mu, mubar)
            if s == sbar == 1 and not self._is_marginal_channel(c, mu, mubar):
                raise ValidationError(
                    f"degenerate row ({c}, {mu}, {mubar}) with h+|mu|=1 is "
                    "neither a marginal primary nor a mixing channel"
                )
            self.rows.setdefault((alpha, beta), []).append((c, mu, mubar, value))

    def exponent_pair(self, c, mu, mubar):
        h, hbar = self.dims[c]
        return h + sum(mu), hbar + sum(mubar)

    def _is_marginal_channel(self, c, mu, mubar):
        if c in self.marginals and mu == () and mubar == ():
            return True
        return self.dims[c] == (0, 0) and mu == (1,) and mubar == (1,)

    def rows_for(self, alpha, beta):
        return list(self.rows.get((alpha, beta), []))

    def effective_C(self, alpha, beta):
        """C_{alpha beta}^gamma combining the primary-marginal channel with
        the mixing channel of dimension-0 (1,1)-descendants."""
        out = {}
        for (c, mu, mubar, value) in self.rows_for(alpha, beta):
            if c in self.marginals and mu == () and mubar == ():
                out[c] = out.get(c, Fraction(0)) + value
            elif self.dims[c] == (0, 0) and mu == (1,) and mubar == (1,):
                for (a, gamma), m in self.mixing.items():
                    if a == c:
                        out[gamma] = out.get(gamma, Fraction(0)) + value * m
        return {k: v for k, v in out.items() if v != 0}

    def K(self, alpha, beta):
        """K_{alpha beta}^a: the dimension-0 identity-sector constants."""
        out = {}
        for (c, mu, mubar, value) in self.rows_for(alpha, beta):
            if self.dims[c] == (0, 0) and mu == () and mubar == ():
                out[c] = out.get(c, Fraction(0)) + value
        return out

    def corr_dimension(self, key):
        _, c, mu, mubar = key
        h, hbar = self.dims[c]
        return h + hbar + sum(mu) + sum(mubar)


def theory_to_json(theory) -> str:
    import json

    doc = {
        "primaries": [
            {"label": p.label, "h": _frac_json(p.h), "hbar": _frac_json(p.hbar)}
            for p in theory.primaries
        ],
        "coefficients": [
            {
                "a": a,
                "b": b,
                "c": c,
                "mu": list(mu),
                "mubar": list(mubar),
                "value": _frac_json(val),
            }
            for (a, b), rows in sorted(theory.rows.items())
            for (c, mu, mubar, val) in rows
        ],
        "mixing": [
            {"a": a, "gamma": g, "value": _frac_json(v)}
            for (a, g), v in sorted(theory.mixing.items())
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def theory_from_json(text: str) -> FormalTheory:
    import json

    doc = json.loads(text)
    primaries = [
        (p["label"], _frac_load(p["h"]), _frac_load(p["hbar"]))
        for p in doc["primaries"]
    ]
    rows = [
        (
            c["a"],
            c["b"],
            c["c"],
            tuple(c["mu"]),
            tuple(c["mubar"]),
            _frac_load(c["value"]),
        )
        for c in doc.get("coefficients", [])
    ]
    mixing = {
        (m["a"], m["gamma"]): _frac_load(m["value"]) for m in doc.get("mixing", [])
    }
    return FormalTheory(primaries, rows, mixing)


def _frac_json(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


def _frac_load(x):
    return Fraction(x)


# ------------------------------------------------------ correction (delta v)


class CorrectionTerm:
    """The counterterm delta v_{alpha beta, r} restoring goodness."""

    __slots__ = ("alpha", "beta", "expansion")

    def __init__(self, alpha, beta, expansion):
        self.alpha = alpha
        self.beta = beta
        self.expansion = expansion


def compute_correction(theory: FormalTheory, alpha, beta) -> CorrectionTerm:
    """Minimal-subtraction correction:
    delta v = log(r) * C * <O_gamma>_{D_r}
              + sum_{s = sbar != 1} value * r^{2(s-1)}/(2(s-1)) * <O_c^{..}>_{D_r}.
    The s = 0 term is the -K/(2 r^2) counterterm of the special marginal OPE.
    """
    exp = RExpansion()
    for gamma, val in theory.effective_C(alpha, beta).items():
        exp = exp + RExpansion.term(0, 1, FormalVector.corr(gamma, value=val))
    for (c, mu, mubar, val) in theory.rows_for(alpha, beta):
        s, sbar = theory.exponent_pair(c, mu, mubar)
        if s != sbar or s == 1:
            continue
        coeff = Fraction(val) / (2 * (s - 1))
        exp = exp + RExpansion.term(
            2 * (s - 1), 0, FormalVector.corr(c, mu, mubar, value=coeff)
        )
    return CorrectionTerm(alpha, beta, exp)


def integrated_ope(theory: FormalTheory, alpha, beta) -> RExpansion:
    """int_{D_R \\ D_r} dmu <O_alpha(z) O_beta(0)>_{D_R}, termwise via the
    annulus moments; an RExpansion in r with symbolic R in the scalars."""
    exp = RExpansion()
    for gamma, val in theory.effective_C(alpha, beta).items():
        # log(R/r) * C * <O_gamma>_{D_R}
        exp = exp + RExpansion.term(
            0, 0, FormalVector.corr(gamma, value=_rat(val) * sympy.log(R_SYM))
        )
        exp = exp + RExpansion.term(0, 1, FormalVector.corr(gamma, value=-val))
    for (c, mu, mubar, val) in theory.rows_for(alpha, beta):
        s, sbar = theory.exponent_pair(c, mu, mubar)
        if s != sbar or s == 1:
            continue
        denom = 2 * (s - 1)
        exp = exp + RExpansion.term(
            0,
            0,
            FormalVector.corr(
                c, mu, mubar, value=_rat(Fraction(val)) * R_SYM ** _rat(denom) / _rat(denom)
            ),
        )
        exp = exp + RExpansion.term(
            2 * (s - 1),
            0,
            FormalVector.corr(c, mu, mubar, value=-Fraction(val) / denom),
        )
    return exp


def annulus_moment(a: int, b: int, R, r):
    """int_{D_R \\ D_r} dzbar^dz/(4 pi i) z^a zbar^b, exact.

    Zero unless a = b (phase integral); log(R/r) at a = -1, else the power
    formula.  R and r may be numbers or sympy symbols.
    """
    if a != b:
        return 0
    R, r = sympy.sympify(R), sympy.sympify(r)
    if a == -1:
        return sympy.log(R / r)
    k = 2 * a + 2
    return (R**k - r**k) / k


def marginal_coupling_algebra(theory, tilde=False, truncation=2):
    prefix = "gt" if tilde else "g"
    return JetAlgebra(
        {prefix: ([f"{prefix}[{m}]" for m in theory.marginals], 1)},
        truncation=truncation,
    )


def insert_family_deformed(theory: FormalTheory, beta, correction=True) -> Jet:
    """Insert v_beta + g^alpha delta v_{alpha beta} into the deformed annulus.

    Returns a jet over the couplings g[alpha] whose coefficients are
    RExpansions in r; with the correction included the order-g terms have no
    singular part, and the r -> 0 limit is the deformed one-point correlator.
    """
    alg = marginal_coupling_algebra(theory)
    coeffs = {(): RExpansion.constant(FormalVector.corr(beta))}
    for alpha in theory.marginals:
        term = integrated_ope(theory, alpha, beta)
        if correction:
            term = term + compute_correction(theory, alpha, beta).expansion
        if not term.is_zero():
            coeffs[(f"g[{alpha}]",)] = term
    return Jet(alg, coeffs)


def deformed_one_point(theory: FormalTheory, beta, z=0, R=R_SYM) -> Jet:
    """<O~_beta(z)>^{def}_{D_R} as a jet over the couplings.

    The coefficients are assembled at the origin of the cut disk
    (counterterm plus the annulus integral centered at the insertion point),
    so they carry no explicit z-dependence; z only selects the attachment
    point of the correlator symbols.
    """
    R_expr = sympy.sympify(R)
    if z != 0 and R_expr.is_number and abs(complex(z)) >= float(R_expr):
        raise ValidationError("insertion point must lie inside the disk")
    jet = insert_family_deformed(theory, beta, correction=True)

    def take_limit(e: RExpansion) -> FormalVector:
        sing = e.singular_terms()
        if any(not v.is_zero() for v in sing.values()):
            raise ValidationError("deformed family is not good; correction missing")
        const = e.constant_term()
        return const if const is not None else FormalVector()

    out = jet.map_coeffs(take_limit)
    if R is not R_SYM:
        out = out.map_coeffs(lambda v: substitute_radius(theory, v, R))
    return out


def substitute_radius(theory, vec: FormalVector, value) -> FormalVector:
    value = sympy.sympify(value)
    return vec.map_values(
        lambda expr: sympy.expand_log(expr.subs(R_SYM, value), force=True)
    )


# ------------------------------------------------------------------ dilation


def dilate_family(theory: FormalTheory, expansion: RExpansion, lam=LAM_SYM) -> RExpansion:
    """Dil_lambda on a formal family: evaluate the family at radius lam * r.

    r^p -> lam^p r^p, log(r) -> log(lam) + log(r), and each correlator symbol
    scales by lam^{-dimension}.
    """
    lam = sympy.sympify(lam)
    loglam = sympy.expand_log(sympy.log(lam), force=True)
    out = RExpansion()
    for (p, q), vec in expansion.terms.items():
        scaled = FormalVector(
            {
                key: val * lam ** _rat(-theory.corr_dimension(key))
                for key, val in vec.terms.items()
            }
        )
        lam_p = lam ** _rat(p)
        for j in range(q + 1):
            factor = lam_p * comb(q, j) * loglam ** (q - j)
            out = out + RExpansion.term(p, j, scaled.scale(factor))
    return out


def anomalous_dilation(theory: FormalTheory, beta, lam=LAM_SYM):
    """Check/return the anomalous scaling of the corrected family:
    lam^2 Dil_lam v~_beta = v~_beta + log(lam) g^alpha C_{alpha beta}^gamma v_gamma.

    Returns (lhs, rhs) as jets over the couplings.
    """
    lam = sympy.sympify(lam)
    alg = marginal_coupling_algebra(theory)
    tilde = Jet(alg, {(): RExpansion.constant(FormalVector.corr(beta))})
    for alpha in theory.marginals:
        dv = compute_correction(theory, alpha, beta).expansion
        if not dv.is_zero():
            tilde = tilde + Jet(alg, {(f"g[{alpha}]",): dv})
    lhs = tilde.map_coeffs(
        lambda e: dilate_family(theory, e, lam).scale(lam ** 2)
    )
    rhs = tilde
    for alpha in theory.marginals:
        for gamma, val in theory.effective_C(alpha, beta).items():
            extra = RExpansion.constant(
                FormalVector.corr(gamma, value=_rat(val) * sympy.log(lam))
            )
            rhs = rhs + Jet(alg, {(f"g[{alpha}]",): extra})
    return lhs, rhs


# ------------------------------------------------------- double deformation


def deform_first(theory: FormalTheory, tilde=False) -> Jet:
    """First-order deformed disk partition function as a jet over couplings."""
    alg = marginal_coupling_algebra(theory, tilde=tilde)
    prefix = "gt" if tilde else "g"
    coeffs = {(): FormalVector.atom(("disk",))}
    for m in theory.marginals:
        coeffs[(f"{prefix}[{m}]",)] = FormalVector.atom(("int", m))
    return Jet(alg, coeffs)


def double_deform(theory: FormalTheory) -> Jet:
    """Second-order partition function on D_R in the combined coupling g_c.

    The (g~ g)-bilinear term integrates the deformed one-point correlator:
    its computable parts are log(R) C I_gamma and -K/2 A_a, with the
    remaining R-independent regular part kept as an explicit atom; the
    result is recombined into g_c (raises on an asymmetric bilinear part).
    """
    labels = theory.marginals
    alg = JetAlgebra.double_coupling(labels)
    coeffs = {(): FormalVector.atom(("disk",))}
    for m in labels:
        coeffs[(f"g[{m}]",)] = FormalVector.atom(("int", m))
        coeffs[(f"gt[{m}]",)] = FormalVector.atom(("int", m))
    for alpha in labels:
        for beta in labels:
            vec = FormalVector()
            for gamma, val in theory.effective_C(alpha, beta).items():
                vec = vec + FormalVector.atom(
                    ("int", gamma), _rat(val) * sympy.log(R_SYM)
                )
            for a, val in theory.K(alpha, beta).items():
                vec = vec + FormalVector.atom(("int0", a), -Fraction(val) / 2)
            if theory.rows_for(alpha, beta):
                vec = vec + FormalVector.atom(
                    ("reg",) + tuple(sorted((alpha, beta)))
                )
            if vec.is_zero():
                continue
            mono = tuple(sorted((f"gt[{beta}]", f"g[{alpha}]")))
            coeffs[mono] = vec
    pf = Jet(alg, coeffs)
    return recombine(pf, labels=labels)


def radius_scaled(theory: FormalTheory, pf: Jet, lam=LAM_SYM) -> Jet:
    """The same partition function on D_{lam R}: log(R) -> log(R) + log(lam)."""
    lam = sympy.sympify(lam)
    return pf.map_coeffs(
        lambda vec: vec.map_values(
            lambda expr: sympy.expand_log(expr.subs(R_SYM, lam * R_SYM), force=True)
        )
    )


# ---------------------------------------------------------------- beta


class BetaResult:
    """beta^gamma(g_c) = (1/2) g_c^alpha g_c^beta C_{alpha beta}^gamma."""

    __slots__ = ("algebra", "coefficients", "structure")

    def __init__(self, algebra, coefficients, structure):
        self.algebra = algebra
        self.coefficients = coefficients  # {gamma: Jet in g_c}
        self.structure = structure  # {(alpha, beta, gamma): C}

    def running(self, lam=LAM_SYM):
        """g_c^gamma(lam) = g_c^gamma + log(lam) * beta^gamma."""
        lam = sympy.sympify(lam)
        out = {}
        for gamma, b in self.coefficients.items():
            linear = Jet.symbol(self.algebra, f"gc[{gamma}]", sympy.Integer(1))
            out[gamma] = linear + b.map_coeffs(lambda c: _rat(c) * sympy.log(lam))
        return out

    def is_zero(self):
        return all(b.is_zero() for b in self.coefficients.values())


def beta(theory: FormalTheory) -> BetaResult:
    labels = theory.marginals
    alg = JetAlgebra.combined_coupling(labels)
    structure = {}
    per_gamma = {gamma: Jet(alg, {}) for gamma in labels}
    for alpha in labels:
        for b_ in labels:
            for gamma, val in theory.effective_C(alpha, b_).items():
                structure[(alpha, b_, gamma)] = val
                mono = tuple(sorted((f"gc[{alpha}]", f"gc[{b_}]")))
                per_gamma[gamma] = per_gamma[gamma] + Jet(
                    alg, {mono: Fraction(val) / 2}
                )
    return BetaResult(alg, per_gamma, structure)


# ------------------------------------------------- numeric free-boson route


def fb_theory(space) -> FormalTheory:
    """Formal theory data of the truncated free boson's marginal sector,
    with structure constants taken from the extraction pipeline."""
    from .observables import marginal_observable, ope_extract

    o = marginal_observable(space)
    table = ope_extract(space, o, o)
    rows = []
    for row in table.rows:
        if row["coefficient"] == 0:
            continue
        s = sum(row["mu"])
        sbar = sum(row["mubar"])
        if s != sbar:
            continue  # spin rows integrate to zero; drop from theory data
        rows.append(
            ("jjbar", "jjbar", "1", row["mu"], row["mubar"], row["coefficient"])
        )
    return FormalTheory(
        primaries=[("1", 0, 0), ("jjbar", 1, 1)],
        rows=rows,
        mixing={("1", "jjbar"): 1},
    )


def _transport_entries(space, op: ModeOperator, R, r) -> ModeOperator:
    """rho^{-(L0+L0bar)} sandwich: entry (i, j) scales by R^{-E_i} r^{E_j}."""
    R, r = Fraction(R), Fraction(r)
    entries = {
        (i, j): (R ** -space.levels[i]) * (r ** space.levels[j]) * v
        for (i, j), v in op.entries.items()
    }
    return ModeOperator("transported", None, space, entries, op.dropped_cols)


def fb_annulus_operator(space, R, r) -> ModeOperator:
    """The undeformed annulus (r/R)^{L0+L0bar} as a sparse operator."""
    ratio = Fraction(r) / Fraction(R)
    entries = {(i, i): ratio ** space.levels[i] for i in range(space.dim)}
    return ModeOperator("annulus", None, space, entries)


def fb_deformed_annulus(space, R, r) -> Jet:
    """First-order j jbar deformation of the free-boson annulus.

    Termwise integration of the transported insertion mode sums leaves only
    the diagonal modes, with moment (R^{-2n} - r^{-2n}) / (-2n) per mode n.
    """
    alg = JetAlgebra({"g": (["g[jjbar]"], 1)})
    g_part = None
    for n in range(-space.l_max, space.l_max + 1):
        if n == 0:
            continue
        moment = (Fraction(R) ** (-2 * n) - Fraction(r) ** (-2 * n)) / (-2 * n)
        op = current_mode(space, n).compose(current_mode(space, n, bar=True))
        if not op.entries:
            continue
        term = _transport_entries(space, op, R, r).scale(moment)
        g_part = term if g_part is None else g_part.add(term)
    coeffs = {(): fb_annulus_operator(space, R, r)}
    if g_part is not None and g_part.entries:
        coeffs[("g[jjbar]",)] = g_part
    return Jet(alg, coeffs)


def fb_deformed_disk(space, R=1) -> Jet:
    """First-order deformed disk: vacuum + g sum_k j_{-k} jbar_{-k}|0>/(2k).

    Radius-independent, as marginality requires.
    """
    alg = JetAlgebra({"g": (["g[jjbar]"], 1)})
    w = space.zero()
    for k in range(1, space.l_max // 2 + 1):
        state = apply_mode(
            current_mode(space, -k, bar=True),
            apply_mode(current_mode(space, -k), space.vacuum()),
        )
        w = w + state.scale(Fraction(1, 2 * k))
    coeffs = {(): space.vacuum()}
    if not w.is_zero():
        coeffs[("g[jjbar]",)] = w
    return Jet(alg, coeffs)


def fb_glue(outer: Jet, inner: Jet) -> Jet:
    """Glue jets of operators/states; coefficient product is composition."""
    from .jets import jet_mul

    return jet_mul(outer, inner)
