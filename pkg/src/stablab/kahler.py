"""Writing a real ample class through rational ample classes.

``decompose_omega`` produces rational classes ``L_j`` and positive weights
``sigma_j`` (in Q or Q(sqrt d)) with ``sum sigma_j L_j = omega`` and
``sum sigma_j L_j^2 = omega^2``.  With such a decomposition the Hilbert
polynomial with respect to ``omega`` and the multi-Hilbert polynomial for
``(L, sigma)`` induce the same stability order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .chambers import InfeasibleError
from .cones import IntersectionTensor, _key, eval_classes, is_ample_declared
from .exact import QuadNumber, ceil_scalar, floor_scalar, format_scalar, parse_scalar, sign, simplify, sqrt_bounds
from .lp import max_margin
from .poly import Ordering, Poly, poly_compare
from .sheaf import SheafClass

# ----------------------------------------------------------------------
# the two-term split


@dataclass(frozen=True)
class Split:
    lam: Fraction
    sigma: object
    sigma_prime: object

    def residuals(self, tau, theta) -> tuple:
        return (
            simplify(self.sigma + self.sigma_prime * self.lam - tau),
            simplify(self.sigma + self.sigma_prime * self.lam * self.lam - theta),
        )

    def verify(self, tau, theta) -> bool:
        r1, r2 = self.residuals(tau, theta)
        return sign(r1) == 0 and sign(r2) == 0 and sign(self.sigma) > 0 and sign(self.sigma_prime) > 0

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "sigma": format_scalar(self.sigma), "sigma_prime": format_scalar(self.sigma_prime)}


def default_lambda(tau, theta) -> Fraction:
    """Deterministic rational ``lambda``.

    ``theta > tau``: the smallest integer ``>= 2 theta / tau``.
    ``theta < tau``: the first positive dyadic ``floor(2^k r/2)/2^k`` with ``r = theta/tau``.
    """
    r = simplify(theta / tau)
    s = sign(r - 1)
    if s == 0:
        return Fraction(1)
    if s > 0:
        return Fraction(max(2, ceil_scalar(2 * r)))
    k = 0
    while True:
        den = 1 << k
        num = floor_scalar(r * den / 2)
        if num > 0:
            return Fraction(num, den)
        k += 1


def split_pair(tau, theta, lam=None) -> Split:
    """Positive ``sigma, sigma'`` and rational ``lambda`` with
    ``sigma + sigma' lambda = tau`` and ``sigma + sigma' lambda^2 = theta``."""
    tau, theta = simplify(tau), simplify(theta)
    if sign(tau) <= 0 or sign(theta) <= 0:
        raise ValueError("tau and theta must be positive")
    if lam is None:
        lam = default_lambda(tau, theta)
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if sign(tau - theta) == 0:
        if lam != 1:
            raise ValueError("tau == theta needs lambda = 1")
        half = simplify(tau / 2)
        return Split(lam, half, half)
    if lam == 1:
        raise ValueError("lambda = 1 is only possible when tau == theta")
    sp = simplify((theta - tau) / (lam * lam - lam))
    s = simplify((tau * lam - theta) / (lam - 1))
    out = Split(lam, s, sp)
    if sign(s) <= 0 or sign(sp) <= 0:
        raise ValueError(f"lambda = {lam} does not give positive weights for tau={tau}, theta={theta}")
    if not out.verify(tau, theta):
        raise AssertionError("split identities failed")
    return out


# ----------------------------------------------------------------------
# squares of divisor classes


def _monomials(tensor: IntersectionTensor) -> list[tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(range(tensor.rho), tensor.n - 2))


def _basis_vec(rho: int, i: int) -> list[Fraction]:
    return [Fraction(int(i == k)) for k in range(rho)]


def square(tensor: IntersectionTensor, L: Sequence) -> list:
    """``L^2`` as its pairings with the degree ``n-2`` basis monomials."""
    if tensor.n < 2:
        raise ValueError("squares need n >= 2")
    out = []
    for mono in _monomials(tensor):
        out.append(eval_classes(tensor, [list(L), list(L)] + [_basis_vec(tensor.rho, i) for i in mono]))
    return out


def square_space_dim(tensor: IntersectionTensor) -> int:
    """Dimension of the span of all squares (the curve-class side of the rank certificate)."""
    rows = []
    for a in range(tensor.rho):
        for b in range(a, tensor.rho):
            Da, Db = _basis_vec(tensor.rho, a), _basis_vec(tensor.rho, b)
            rows.append(
                [eval_classes(tensor, [Da, Db] + [_basis_vec(tensor.rho, i) for i in mono]) for mono in _monomials(tensor)]
            )
    return linalg.rank(rows)


# ----------------------------------------------------------------------
# LP over Q(sqrt d): unknowns are split into rational and sqrt(d) parts


def _parts(x) -> tuple[Fraction, Fraction]:
    if isinstance(x, QuadNumber):
        return x.a, x.b
    return Fraction(x), Fraction(0)


def _qd(values) -> int | None:
    ds = {v.d for v in values if isinstance(v, QuadNumber) and v.b != 0}
    if len(ds) > 1:
        raise ValueError("mixed quadratic fields")
    return ds.pop() if ds else None


class _QuadLP:
    """Linear constraints on unknowns ``x = a + b sqrt(d)`` (``b`` omitted over Q).

    Positivity of ``a + b sqrt(d)`` is imposed at both ends of a rational
    bracket of ``sqrt(d)``, which is sufficient by linearity.
    """

    def __init__(self, nvars: int, d: int | None):
        self.n = nvars
        self.d = d
        self.width = nvars * (2 if d else 1)
        self.rows: list = []
        self.bracket = sqrt_bounds(d, 16) if d else None

    def _vec(self):
        return [Fraction(0)] * self.width

    def equal(self, coeffs: Sequence[Fraction], rhs) -> None:
        """``sum coeffs_k x_k = rhs`` with rational ``coeffs``."""
        ra, rb = _parts(rhs)
        a = self._vec()
        for k, c in enumerate(coeffs):
            a[k] = Fraction(c)
        self.rows.append((a, "=", ra))
        if self.d:
            b = self._vec()
            for k, c in enumerate(coeffs):
                b[self.n + k] = Fraction(c)
            self.rows.append((b, "=", rb))
        elif rb != 0:
            raise InfeasibleError("irrational right-hand side without a quadratic unknown")

    def equal_scaled(self, coeffs: Sequence[Fraction], target, k_scale: int) -> None:
        """``sum coeffs_k x_k = x_{k_scale} * target`` with ``target`` in Q(sqrt d)."""
        ta, tb = _parts(target)
        a = self._vec()
        for k, c in enumerate(coeffs):
            a[k] += Fraction(c)
        a[k_scale] -= ta
        if self.d:
            a[self.n + k_scale] -= self.d * tb
            b = self._vec()
            for k, c in enumerate(coeffs):
                b[self.n + k] += Fraction(c)
            b[k_scale] -= tb
            b[self.n + k_scale] -= ta
            self.rows.append((b, "=", 0))
        elif tb != 0:
            raise InfeasibleError("irrational target without a quadratic unknown")
        self.rows.append((a, "=", 0))

    def tie(self, k1: int, k2: int) -> None:
        for off in ((0, self.n) if self.d else (0,)):
            a = self._vec()
            a[off + k1] += 1
            a[off + k2] -= 1
            self.rows.append((a, "=", 0))

    def positive(self, k: int) -> None:
        if not self.d:
            a = self._vec()
            a[k] = Fraction(1)
            self.rows.append((a, ">", 0))
            return
        for s in self.bracket:
            a = self._vec()
            a[k] = Fraction(1)
            a[self.n + k] = s
            self.rows.append((a, ">", 0))

    def solve(self) -> list:
        res = max_margin(self.rows, self.width)
        if res is None:
            return None
        x = res[0]
        if not self.d:
            return [simplify(v) for v in x[: self.n]]
        return [simplify(QuadNumber(x[k], x[self.n + k], self.d)) for k in range(self.n)]


# ----------------------------------------------------------------------
# the decomposition


@dataclass(frozen=True)
class OmegaDecomposition:
    classes: tuple  # rational coordinate tuples
    weights: tuple  # positive exact scalars
    omega: tuple
    tau: tuple
    theta: tuple
    lambdas: tuple
    rank: int
    rank_target: int
    reduced: bool = False
    scale_square: object = Fraction(1)  # b with sum sigma L^2 = b * omega^2
    notes: tuple = ()

    @property
    def j0(self) -> int:
        return len(self.classes)

    @property
    def rank_ok(self) -> bool:
        return self.rank == self.rank_target

    def to_json(self) -> dict:
        return {
            "j0": self.j0,
            "reduced": self.reduced,
            "omega": [format_scalar(x) for x in self.omega],
            "classes": [[str(x) for x in L] for L in self.classes],
            "weights": [format_scalar(x) for x in self.weights],
            "lambdas": [str(x) for x in self.lambdas],
            "tau": [format_scalar(x) for x in self.tau],
            "theta": [format_scalar(x) for x in self.theta],
            "square_scale": format_scalar(self.scale_square),
            "rank": self.rank,
            "rank_target": self.rank_target,
            "rank_ok": self.rank_ok,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class DecompositionCheck:
    linear: bool
    quadratic: bool
    positive: bool
    rank_ok: bool

    @property
    def ok(self) -> bool:
        return self.linear and self.quadratic and self.positive

    def to_json(self) -> dict:
        return {
            "sum_sigma_L_equals_omega": self.linear,
            "sum_sigma_L2_equals_omega2": self.quadratic,
            "weights_positive": self.positive,
            "rank_maximal": self.rank_ok,
        }


def _combo(weights, classes) -> list:
    rho = len(classes[0])
    return [simplify(sum((w * L[i] for w, L in zip(weights, classes)), Fraction(0))) for i in range(rho)]


def verify_decomposition(tensor: IntersectionTensor, dec: OmegaDecomposition) -> DecompositionCheck:
    lin = _combo(dec.weights, dec.classes)
    sq_target = [simplify(dec.scale_square * x) for x in square(tensor, dec.omega)]
    sqs = [square(tensor, L) for L in dec.classes]
    quad = [simplify(sum((w * s[k] for w, s in zip(dec.weights, sqs)), Fraction(0))) for k in range(len(sq_target))]
    return DecompositionCheck(
        all(sign(a - b) == 0 for a, b in zip(lin, dec.omega)),
        all(sign(a - b) == 0 for a, b in zip(quad, sq_target)),
        all(sign(w) > 0 for w in dec.weights) and sign(dec.scale_square) > 0,
        dec.rank_ok,
    )


def rational_near(x, den: int) -> Fraction:
    """``floor(x * den) / den``."""
    return Fraction(floor_scalar(simplify(x * den)), den)


def nearby_candidates(tensor: IntersectionTensor, omega: Sequence, delta=Fraction(1, 8), den: int = 64) -> list[tuple]:
    """Rational classes ``w`` and ``w +- delta e_i`` around a rational approximation ``w`` of ``omega``.

    Classes that are not declared ample are dropped.
    """
    base = tuple(rational_near(x, den) for x in omega)
    out = [base]
    for i in range(tensor.rho):
        for s in (1, -1):
            out.append(tuple(b + s * delta * (k == i) for k, b in enumerate(base)))
    return [L for L in out if is_ample_declared(tensor, L)]


def _pad(cands: list, target: int) -> list:
    """Append midpoints of consecutive candidates until ``target`` classes exist."""
    out = list(cands)
    k = 0
    while len(out) < target:
        a, b = out[k % len(cands)], out[(k + 1) % len(cands)]
        mid = tuple((x + y) / 2 for x, y in zip(a, b))
        if mid not in out:
            out.append(mid)
        else:
            out.append(tuple(x * Fraction(k + 2, k + 1) for x in a))
        k += 1
    return out


def _rank_certificate(tensor: IntersectionTensor, classes) -> int:
    cols = [list(L) + square(tensor, L) for L in classes]
    return linalg.rank(cols)


def _solve_coefficients(tensor, cands, omega, om2, d, reduced):
    """Positive ``tau``, ``theta`` (and the square scale) or None."""
    K, rho, m = len(cands), tensor.rho, len(om2)
    sqs = [square(tensor, L) for L in cands]
    # unknowns: tau_1..tau_K, theta_1..theta_K, and (reduced) the square scale b
    nvar = 2 * K + (1 if reduced else 0)
    lp = _QuadLP(nvar, d)
    for i in range(rho):
        lp.equal([L[i] for L in cands] + [0] * (nvar - K), omega[i])
    for k in range(m):
        row = [0] * K + [s[k] for s in sqs] + ([0] if reduced else [])
        if reduced:
            lp.equal_scaled(row, om2[k], 2 * K)
        else:
            lp.equal(row, om2[k])
    if reduced:
        lp.tie(0, K)
        lp.positive(2 * K)
    for k in range(2 * K):
        lp.positive(k)
    return lp.solve()


def decompose_omega(
    tensor: IntersectionTensor,
    omega: Sequence,
    candidates: Sequence[Sequence],
    reduced: bool = False,
    max_perturb: int = 40,
) -> OmegaDecomposition:
    """Decompose ``omega`` with ``j0 = 4(rho+1)`` rational classes (or ``1 + 4(rho-1)``
    up to positive proportionality constants when ``reduced``).

    Candidates must be declared ample and contain ``omega`` in their open
    convex cone; they are padded with midpoints to the required count.
    """
    rho = tensor.rho
    if tensor.n < 2:
        raise ValueError("decomposition needs n >= 2")
    omega = tuple(simplify(parse_scalar(x) if isinstance(x, str) else x) for x in omega)
    if len(omega) != rho:
        raise ValueError(f"omega has {len(omega)} coordinates, expected {rho}")
    cands = []
    for L in candidates:
        L = tuple(Fraction(parse_scalar(x) if isinstance(x, str) else x) for x in L)
        if len(L) != rho:
            raise ValueError(f"candidate {L} has the wrong length")
        if not is_ample_declared(tensor, L):
            raise ValueError(f"candidate {tuple(map(str, L))} is not declared ample")
        if L not in cands:
            cands.append(L)
    if len(cands) < rho + 1 or linalg.rank([list(L) for L in cands]) < rho:
        raise InfeasibleError("need at least rho+1 candidates spanning N^1; add more candidates")
    target = 2 * rho - 1 if reduced else 2 * (rho + 1)
    d = _qd(omega)
    om2 = square(tensor, omega)
    sol = None
    if len(cands) > target:
        # prefer exactly the target count of classes when some subset works
        for k_try, sub in enumerate(itertools.combinations(cands, target)):
            if k_try >= 64:
                break
            if linalg.rank([list(L) for L in sub]) < rho:
                continue
            sol = _solve_coefficients(tensor, list(sub), omega, om2, d, reduced)
            if sol is not None:
                cands = list(sub)
                break
    else:
        cands = _pad(cands, target)
    if sol is None:
        sol = _solve_coefficients(tensor, cands, omega, om2, d, reduced)
    if sol is None:
        raise InfeasibleError(
            "omega and omega^2 are not positive combinations of the candidates (and their squares); add candidates closer to omega"
        )
    K = len(cands)
    tau, theta = list(sol[:K]), list(sol[K: 2 * K])
    b = sol[2 * K] if reduced else Fraction(1)
    notes = []
    tau, theta, moved = _separate(tensor, cands, tau, theta, reduced, max_perturb)
    if moved:
        notes.append(f"perturbed {moved} coefficient pair(s) to separate tau from theta")

    classes, weights, lambdas = [], [], []
    firsts, seconds, second_w = [], [], []
    for k in range(K):
        if reduced and k == 0:
            firsts.append(cands[0])
            weights.append(tau[0])
            lambdas.append(Fraction(1))
            continue
        sp = split_pair(tau[k], theta[k])
        lambdas.append(sp.lam)
        firsts.append(cands[k])
        weights.append(sp.sigma)
        seconds.append(tuple(sp.lam * x for x in cands[k]))
        second_w.append(sp.sigma_prime)
    classes = firsts + seconds
    weights = weights + second_w
    rank = _rank_certificate(tensor, classes)
    rank_target = rho + square_space_dim(tensor)
    dec = OmegaDecomposition(
        tuple(tuple(L) for L in classes), tuple(weights), omega, tuple(tau), tuple(theta), tuple(lambdas),
        rank, rank_target, reduced, b, tuple(notes),
    )
    chk = verify_decomposition(tensor, dec)
    if not chk.ok:
        raise AssertionError(f"decomposition failed re-verification: {chk}")
    return dec


def _separate(tensor, cands, tau, theta, reduced, max_perturb):
    """Move ``tau`` (within the solution space) so that ``tau_k != theta_k`` where needed."""
    K = len(cands)
    bad = [k for k in range(K) if sign(tau[k] - theta[k]) == 0 and not (reduced and k == 0)]
    if not bad:
        return tau, theta, 0
    fixed = [0] if reduced else []
    rows = [[L[i] for L in cands] for i in range(tensor.rho)]
    for k in fixed:
        rows.append([Fraction(int(j == k)) for j in range(K)])
    null = linalg.nullspace(rows, K)
    for v in null:
        if all(v[k] != 0 for k in bad):
            direction = v
            break
    else:
        if not null:
            return tau, theta, 0
        direction = [sum((c * x for c, x in zip(range(1, len(null) + 1), col)), Fraction(0)) for col in zip(*null)]
    step = Fraction(1)
    for _ in range(max_perturb):
        t2 = [simplify(t + step * x) for t, x in zip(tau, direction)]
        if all(sign(t) > 0 for t in t2) and all(
            sign(t2[k] - theta[k]) != 0 for k in range(K) if not (reduced and k == 0)
        ):
            return t2, theta, len(bad)
        step /= 2
    return tau, theta, 0


# ----------------------------------------------------------------------
# Hilbert polynomials with respect to a class


@dataclass(frozen=True)
class ChTdData:
    """``ch(E) Todd(X)`` by codimension.

    ``parts[c]`` (``c = 1..n``) maps degree ``n-c`` basis monomials (sorted,
    0-based index tuples) to the intersection number of the codimension ``c``
    component with that monomial.  The codimension 0 part is ``rank``.
    """

    n: int
    rank: Fraction
    parts: Mapping[int, Mapping[tuple[int, ...], Fraction]] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rank", simplify(Fraction(self.rank)))
        if self.rank <= 0:
            raise ValueError("rank must be positive")
        parts = {}
        for c, mp in self.parts.items():
            c = int(c)
            if not 1 <= c <= self.n:
                raise ValueError(f"codimension {c} out of range 1..{self.n}")
            clean = {}
            for k, v in mp.items():
                k = _key(k)
                if len(k) != self.n - c:
                    raise ValueError(f"codimension {c} pairs with degree {self.n - c} monomials, got {k}")
                clean[k] = simplify(Fraction(v) if isinstance(v, int) else v)
            parts[c] = clean
        object.__setattr__(self, "parts", parts)

    def pairing(self, tensor: IntersectionTensor, c: int, L: Sequence):
        """``(ch Td)_c . L^(n-c)``."""
        if c == 0:
            return simplify(self.rank * eval_classes(tensor, [list(L)] * tensor.n))
        if c not in self.parts:
            raise KeyError(f"missing codimension {c} pairing data")
        mp = self.parts[c]
        total = Fraction(0)
        for combo in itertools.product(range(tensor.rho), repeat=tensor.n - c):
            v = mp.get(_key(combo), 0)
            if v == 0:
                continue
            term = v
            for i in combo:
                term = term * L[i]
            total = total + term
        return simplify(total)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "rank": format_scalar(self.rank),
            "parts": {
                str(c): [{"idx": [i + 1 for i in k], "val": format_scalar(v)} for k, v in sorted(mp.items())]
                for c, mp in sorted(self.parts.items())
            },
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> ChTdData:
        parts = {
            int(c): {_key(i - 1 for i in e["idx"]): parse_scalar(str(e["val"])) for e in entries}
            for c, entries in obj.get("parts", {}).items()
        }
        return cls(int(obj["n"]), parse_scalar(str(obj["rank"])), parts, str(obj.get("label", "")))


def hilbert_poly_omega(tensor: IntersectionTensor, data: ChTdData, omega: Sequence) -> Poly:
    """``P(m) = sum_k m^k/k! (ch Td)_{n-k} . omega^k``."""
    if data.n != tensor.n:
        raise ValueError("dimension mismatch between data and tensor")
    coeffs = [simplify(data.pairing(tensor, tensor.n - k, omega) / math.factorial(k)) for k in range(tensor.n + 1)]
    return Poly(coeffs)


def sheaf_class_for(tensor: IntersectionTensor, data: ChTdData, classes: Sequence[Sequence], label: str = "") -> SheafClass:
    """Surrogate whose ``alpha[j][k] = (ch Td)_{n-k} . L_j^k``."""
    alpha = [[data.pairing(tensor, tensor.n - k, L) for k in range(tensor.n + 1)] for L in classes]
    return SheafClass(tensor.n, data.rank, alpha, label or data.label)


def reduced_poly(P: Poly) -> Poly:
    lead = P.coeffs[-1]
    return Poly([simplify(c / lead) for c in P.coeffs])


def order_transfer(tensor: IntersectionTensor, dec: OmegaDecomposition, E: ChTdData, F: ChTdData) -> tuple[Ordering, Ordering]:
    """(order of ``F`` against ``E`` for ``P^omega``, order for the multi-Hilbert polynomial)."""
    from .sheaf import compare_pair

    pF = reduced_poly(hilbert_poly_omega(tensor, F, dec.omega))
    pE = reduced_poly(hilbert_poly_omega(tensor, E, dec.omega))
    # one side may simplify to rational coefficients; compare over the common field
    pw = poly_compare(pF.lift(pE.field), pE.lift(pF.field))
    SE = sheaf_class_for(tensor, E, dec.classes, "E")
    SF = sheaf_class_for(tensor, F, dec.classes, "F")
    pm = compare_pair(SE, SF, dec.weights)
    return pw, pm
