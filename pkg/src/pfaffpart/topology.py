"""Certified root isolation along curves and for small planar systems.

Everything here is branch-and-bound over interval enclosures. A region is
discarded only when an enclosure excludes zero; a root is reported only
with a certificate of existence and uniqueness. Whatever cannot be decided
within the configured resolution is returned as a suspect region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .interval import CompiledPoly, IArray, PRECISION, frac_down, frac_up, hiprec, iv, mp_eval_poly
from .pfaffian import ParametricCurve, PfaffianFunction, pf_compose_curve, pf_derive
from .poly import MultiPoly

SIGN_CHANGE = "sign_change"
NEWTON = "interval_newton_contraction"
TANGENTIAL = "derivative_sign_change"

# off-center split ratios; avoiding the exact midpoint keeps rational roots
# with small denominators away from box endpoints
_SPLIT_RATIOS = (0.5 + 1 / 61, 0.5 - 1 / 37, 0.5 + 1 / 7)
# boxes at most this wide (relative) whose midpoint sign is unresolvable in
# double precision go straight to the high-precision stage
_ESCALATE_WIDTH = 1e-4


class IdenticallyZeroError(ValueError):
    """The function to solve vanishes identically."""


class CurveInZeroSetError(IdenticallyZeroError):
    """The restriction of P to the curve vanishes identically."""


class EndpointError(ValueError):
    """An endpoint value could not be certified nonzero."""


@dataclass(frozen=True)
class SolveConfig:
    min_width: float = 1e-12
    max_depth: int = 60
    eps_cascade: tuple | None = None
    budget: int = 400_000
    eps1: float = 1e-3

    def __post_init__(self):
        if not self.min_width > 0:
            raise ValueError("min_width must be positive")
        if self.eps_cascade is not None:
            e = [float(x) for x in self.eps_cascade]
            if any(x <= 0 for x in e) or any(a <= b for a, b in zip(e, e[1:])):
                raise ValueError("eps cascade must be positive and strictly decreasing")

    def cascade(self, n: int) -> tuple[Fraction, ...]:
        """eps_l = eps_1 * 10^(-3(l-1)) unless an explicit cascade is set."""
        if self.eps_cascade is not None:
            if len(self.eps_cascade) < n:
                raise ValueError(f"eps cascade needs {n} entries")
            return tuple(Fraction(str(x)) if isinstance(x, float) else Fraction(x) for x in self.eps_cascade[:n])
        e1 = Fraction(str(self.eps1))
        return tuple(e1 * Fraction(1, 1000) ** l for l in range(n))


@dataclass(frozen=True)
class IsolatingInterval:
    """Open interval (lo, hi) holding exactly one root of the function."""

    lo: Fraction
    hi: Fraction
    certificate: str

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("isolating interval needs lo < hi")

    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    def to_json(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi), "certificate": self.certificate}


@dataclass
class IsolationResult:
    intervals: list
    suspects: list = field(default_factory=list)  # (lo, hi) Fractions
    complete: bool = True
    nodes: int = 0

    @property
    def count(self) -> int:
        return len(self.intervals)

    @property
    def certified(self) -> bool:
        return self.complete and not self.suspects

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "intervals": [iv_.to_json() for iv_ in self.intervals],
            "suspects": [[str(a), str(b)] for a, b in self.suspects],
            "complete": self.complete,
        }


# -- 1-D evaluation helpers -----------------------------------------------------

class _Univariate:
    """f and its derivatives compiled against one chain, evaluated together."""

    TAYLOR_ORDER = 6

    def __init__(self, f: PfaffianFunction, orders: int = TAYLOR_ORDER):
        self.f = f
        self.chain = f.chain
        self.funcs = [f]
        for _ in range(orders):
            self.funcs.append(pf_derive(self.funcs[-1], 1))
        self.compiled = [CompiledPoly(g.Q) for g in self.funcs]

    def interval(self, lo, hi, orders=(0, 1)):
        x = IArray(lo, hi)
        lifted = self.chain.lift_interval([x])
        return [self.compiled[k].eval_interval(lifted) for k in orders]

    def enclose(self, lo, hi, orders=(0, 1)):
        """Naive enclosures intersected with Taylor forms about the midpoint.

        Expanded Pfaffian polynomials can cancel heavily, so the naive
        enclosure overestimates by the size of the individual terms; the
        Taylor form f^(k)(m) + ... + f^(K)(X) h^(K-k) / (K-k)! shrinks like
        width^(K-k) and takes over on small boxes.
        """
        K = len(self.funcs) - 1
        naive = self.interval(lo, hi, orders)
        if K < 1:
            return naive
        mid = 0.5 * lo + 0.5 * hi
        need = sorted(set(range(min(orders), K)))
        at_mid = dict(zip(need, self.interval(mid, mid, need)))
        (top,) = self.interval(lo, hi, (K,))
        h = IArray(lo, hi) - IArray(mid, mid)
        out = []
        for k, nv in zip(orders, naive):
            if k >= K:
                out.append(nv)
                continue
            acc = at_mid[k]
            hp = None
            for j in range(k + 1, K + 1):
                hp = h if hp is None else hp * h
                coef = top if j == K else at_mid[j]
                acc = acc + coef * hp * Fraction(1, math.factorial(j - k))
            out.append(nv.intersect(acc))
        return out

    def point_sign(self, x: np.ndarray) -> np.ndarray:
        """Certified sign of f at float points; 0 where undecided."""
        (v,) = self.interval(x, x, orders=(0,))
        return np.where(v.lo > 0, 1, np.where(v.hi < 0, -1, 0))

    def mp(self, lo: Fraction, hi: Fraction, k: int = 0):
        xs = [_mp_iv(lo, hi)]
        return mp_eval_poly(self.funcs[k].Q, xs + self.chain.eval_mp(xs))

    def mp_sign(self, x: Fraction, k: int = 0) -> tuple[int, bool]:
        """(sign, exact_zero) at a rational point in high precision."""
        if self.funcs[k].Q.partial({0: x}).is_zero():
            return 0, True
        exact = self.chain.eval_exact([x])
        if exact is not None:
            v = self.funcs[k].Q.evaluate([x] + exact)
            return (v > 0) - (v < 0), v == 0
        with hiprec():
            v = self.mp(x, x, k)
        if v.a > 0:
            return 1, False
        if v.b < 0:
            return -1, False
        return 0, (v.a == 0 and v.b == 0)


def _mp_iv(lo: Fraction, hi: Fraction):
    a = iv.mpf(lo.numerator) / lo.denominator
    if hi == lo:
        return a
    b = iv.mpf(hi.numerator) / hi.denominator
    return iv.mpf([a.a, b.b])


def simplest_rational(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational with the smallest denominator in the closed interval [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    # lo and hi share the integer part: recurse on reciprocals of the fractional parts
    return fl + 1 / simplest_rational(1 / (hi - fl), 1 / (lo - fl))


# -- 1-D isolation ----------------------------------------------------------------

def _check_univariate(f: PfaffianFunction) -> None:
    if f.n != 1:
        raise ValueError("expected a function of one variable")
    if f.Q.is_zero():
        raise IdenticallyZeroError("function is identically zero")


def _domain_floats(f: PfaffianFunction, domain) -> tuple[Fraction, Fraction, float, float]:
    a, b = domain
    if isinstance(a, float) and math.isinf(a) or isinstance(b, float) and math.isinf(b):
        raise ValueError("isolation needs a bounded domain")
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ValueError("domain needs a < b")
    af, bf = frac_up(a), frac_down(b)
    if not af < bf:
        raise ValueError("domain is too narrow for double precision")
    if not f.chain.domain.contains_box([frac_down(a)], [frac_up(b)]):
        raise ValueError("domain leaves the chain domain")
    return a, b, af, bf


def isolate_roots_1d(f: PfaffianFunction, domain, cfg: SolveConfig | None = None) -> IsolationResult:
    """Certified isolating intervals for the roots of f in the open domain (a, b).

    Boxes where the enclosure of f excludes zero are discarded. A box is
    certified when f is strictly monotone on it and either its endpoint signs
    differ or an interval Newton step contracts into its interior. Regions that
    stay undecided at ``min_width`` are retried in high precision, then tested
    for a tangential (even multiplicity) root, and otherwise reported as
    suspects.
    """
    cfg = cfg or SolveConfig()
    _check_univariate(f)
    a, b, af, bf = _domain_floats(f, domain)
    u = _Univariate(f)
    res = IsolationResult([])

    # slivers between the exact endpoints and their float roundings
    for lo_, hi_ in ((a, Fraction(af)), (Fraction(bf), b)):
        if lo_ < hi_:
            (v,) = u.interval(frac_down(lo_), frac_up(hi_), orders=(0,))
            if v.contains_zero():
                res.suspects.append((lo_, hi_))

    s_a, s_b = u.point_sign(np.array([af, bf]))
    lo = np.array([af])
    hi = np.array([bf])
    slo = np.array([s_a])
    shi = np.array([s_b])
    depth = np.array([0])
    found: list[tuple[float, float, str]] = []
    stuck: list[tuple[float, float, int, int]] = []

    while lo.size:
        if res.nodes + lo.size > cfg.budget:
            res.complete = False
            for l, h in zip(lo, hi):
                res.suspects.append((Fraction(l), Fraction(h)))
            break
        res.nodes += lo.size
        F, Dv = u.enclose(lo, hi)
        live = F.contains_zero()
        mid = 0.5 * lo + 0.5 * hi
        (Fm,) = u.interval(mid, mid, orders=(0,))
        # mean-value form: f(X) in f(m) + f'(X)(X - m)
        mv = Fm + Dv * (IArray(lo, hi) - IArray(mid, mid))
        live &= mv.contains_zero()
        mono = ~Dv.contains_zero()

        cert_sc = live & mono & (slo * shi == -1)
        none_mono = live & mono & (slo * shi == 1)
        undecided_mono = live & mono & (slo * shi == 0)
        # Newton test: N = m - f(m) / f'(X) strictly inside X certifies one root
        newton_ok = np.zeros_like(live)
        if undecided_mono.any():
            N = IArray(mid, mid) - Fm * Dv.recip()
            newton_ok = undecided_mono & N.interior_of(IArray(lo, hi))
            empty = undecided_mono & ((N.hi < lo) | (N.lo > hi))
            live &= ~empty
        for i in np.flatnonzero(cert_sc):
            found.append((lo[i], hi[i], SIGN_CHANGE))
        for i in np.flatnonzero(newton_ok):
            found.append((lo[i], hi[i], NEWTON))
        split = live & ~cert_sc & ~none_mono & ~newton_ok
        small = (hi - lo <= cfg.min_width) | (depth >= cfg.max_depth)
        # near a multiple root the float sign of f is unresolvable on a whole
        # neighbourhood; bisecting it further only multiplies boxes
        small |= ~mono & Fm.contains_zero() & (hi - lo <= _ESCALATE_WIDTH * np.maximum(1.0, np.abs(mid)))
        for i in np.flatnonzero(split & small):
            stuck.append((lo[i], hi[i], int(slo[i]), int(shi[i])))
        split &= ~small
        if not split.any():
            break
        lo, hi, slo, shi, depth = lo[split], hi[split], slo[split], shi[split], depth[split]
        cut, scut = _choose_cuts(u, lo, hi)
        lo = np.concatenate([lo, cut])
        hi = np.concatenate([cut, hi])
        slo, shi = np.concatenate([slo, scut]), np.concatenate([scut, shi])
        depth = np.concatenate([depth + 1, depth + 1])

    for l, h, cert in found:
        res.intervals.append(IsolatingInterval(Fraction(l), Fraction(h), cert))
    for region in _merge_adjacent(stuck):
        roots, left = _resolve_stuck(u, region, cfg)
        res.intervals.extend(roots)
        res.suspects.extend(left)
    res.intervals.sort(key=lambda r: r.lo)
    res.suspects.sort()
    return res


def _choose_cuts(u: _Univariate, lo: np.ndarray, hi: np.ndarray):
    """Split points with certified nonzero sign where possible."""
    cut = lo + _SPLIT_RATIOS[0] * (hi - lo)
    sign = u.point_sign(cut)
    for ratio in _SPLIT_RATIOS[1:]:
        bad = sign == 0
        if not bad.any():
            break
        alt = lo[bad] + ratio * (hi[bad] - lo[bad])
        s_alt = u.point_sign(alt)
        ok = s_alt != 0
        idx = np.flatnonzero(bad)[ok]
        cut[idx] = alt[ok]
        sign[idx] = s_alt[ok]
    # keep cuts strictly inside
    cut = np.clip(cut, np.nextafter(lo, np.inf), np.nextafter(hi, -np.inf))
    return cut, sign


def _merge_adjacent(boxes):
    """Glue touching stuck boxes into regions (lo, hi, sign_lo, sign_hi)."""
    out = []
    for l, h, sl, sh in sorted(boxes):
        if out and out[-1][1] >= l:
            pl, ph, psl, _ = out[-1]
            out[-1] = (pl, max(ph, h), psl, sh)
        else:
            out.append((l, h, sl, sh))
    return out


def _resolve_stuck(u: _Univariate, region, cfg: SolveConfig):
    """Tangential-root test, then high-precision bisection, on one region."""
    lo, hi = Fraction(region[0]), Fraction(region[1])
    t = _tangential_root(u, lo, hi)
    if t is not None:
        return [t], []
    roots, left = _mp_isolate(u, lo, hi, cfg)
    still = []
    for a, b in left:
        t = _tangential_root(u, a, b)
        if t is not None:
            roots.append(t)
        else:
            still.append((a, b))
    return roots, _merge_fraction_regions(still)


def _merge_fraction_regions(regions):
    out = []
    for a, b in sorted(regions):
        if out and out[-1][1] >= a:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def _mp_isolate(u: _Univariate, lo: Fraction, hi: Fraction, cfg: SolveConfig, node_limit: int = 4000):
    """Scalar bisection in mpmath interval arithmetic on [lo, hi]."""
    bits = PRECISION.escalation_bits
    min_w = max(Fraction(2) ** (-(bits - 24)) * max(1, abs(lo), abs(hi)), Fraction(1, 10**40))
    roots, left = [], []
    with hiprec(bits):
        s_lo = u.mp_sign(lo)[0]
        s_hi = u.mp_sign(hi)[0]
        stack = [(lo, hi, s_lo, s_hi)]
        nodes = 0
        while stack:
            a, b, sa, sb = stack.pop()
            nodes += 1
            if nodes > node_limit:
                left.append((a, b))
                left.extend((x[0], x[1]) for x in stack)
                break
            F = u.mp(a, b, 0)
            if F.a > 0 or F.b < 0:
                continue
            Dv = u.mp(a, b, 1)
            mono = Dv.a > 0 or Dv.b < 0
            if mono and sa * sb == -1:
                roots.append(IsolatingInterval(a, b, SIGN_CHANGE))
                continue
            if mono and sa * sb == 1:
                continue
            if b - a <= min_w:
                left.append((a, b))
                continue
            m = simplest_rational(a + (b - a) * Fraction(31, 64), a + (b - a) * Fraction(33, 64))
            sm = u.mp_sign(m)[0]
            if sm == 0:
                m = a + (b - a) * Fraction(_SPLIT_RATIOS[0])
                sm = u.mp_sign(m)[0]
            stack.append((m, b, sm, sb))
            stack.append((a, m, sa, sm))
    return roots, left


def _tangential_root(u: _Univariate, a: Fraction, b: Fraction):
    """Certify a rational root of multiplicity k >= 1 inside [a, b].

    If f, f', ..., f^(k-1) vanish exactly at the simplest rational c of the
    region and f^(k) keeps one sign on a widened region, Rolle's theorem leaves
    room for at most k roots counted with multiplicity there, all taken by c.
    Even k gives no sign change and is reported as a tangential root.
    """
    w = b - a
    a2, b2 = a - w, b + w
    if not u.chain.domain.contains_box([float(a2)], [float(b2)]):
        return None
    c = simplest_rational(a, b)
    with hiprec():
        k = 0
        while k < len(u.funcs) and u.mp_sign(c, k)[1]:
            k += 1
        if k == 0 or k == len(u.funcs):
            return None
        Fk = u.mp(a2, b2, k)
        if not (Fk.a > 0 or Fk.b < 0):
            return None
        # f has constant sign on both sides away from c
        sa, _ = u.mp_sign(a2, 0)
        sb, _ = u.mp_sign(b2, 0)
        if sa == 0 or sb == 0 or (sa == sb) != (k % 2 == 0):
            return None
    cert = TANGENTIAL if k % 2 == 0 else SIGN_CHANGE
    return IsolatingInterval(simplest_rational(a2, a), simplest_rational(b, b2), cert)


# -- curves ------------------------------------------------------------------------

@dataclass
class ComponentResult:
    count: int
    roots: IsolationResult

    @property
    def certified(self) -> bool:
        return self.roots.certified

    def to_json(self) -> dict:
        return {"count": self.count, "certified": self.certified, **{"roots": self.roots.to_json()}}


def _curve_domain(gamma: ParametricCurve):
    a, b = gamma.domain
    if isinstance(a, float) or isinstance(b, float):
        raise ValueError("component counting needs a bounded curve domain")
    return a, b


def components_along_curve(P: MultiPoly, gamma: ParametricCurve, cfg: SolveConfig | None = None) -> ComponentResult:
    """Connected components of gamma minus Z(P): certified root count + 1."""
    f = pf_compose_curve(P, gamma)
    if f.Q.is_zero():
        raise CurveInZeroSetError("curve contained in Z(P)")
    a, b = _curve_domain(gamma)
    u = _Univariate(f, orders=0)
    for x in (a, b):
        s, _ = u.mp_sign(x)
        if s == 0:
            raise EndpointError(f"cannot certify P(gamma(t)) != 0 at t = {x}; shrink the domain")
    roots = isolate_roots_1d(f, (a, b), cfg)
    return ComponentResult(roots.count + 1, roots)


def critical_values_on_curve(P: MultiPoly, gamma: ParametricCurve, cfg: SolveConfig | None = None) -> IsolationResult:
    """Isolating intervals for the critical parameters of t -> P(gamma(t))."""
    f = pf_compose_curve(P, gamma)
    df = pf_derive(f, 1)
    if df.Q.is_zero():
        raise IdenticallyZeroError("P restricted to the curve is constant")
    return isolate_roots_1d(df, _curve_domain(gamma), cfg)


# -- planar systems --------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionBox:
    """Closed box [x_lo, x_hi] x [y_lo, y_hi] holding exactly one solution."""

    x: tuple
    y: tuple
    certificate: str = NEWTON

    def mid(self) -> tuple[float, float]:
        return (float(self.x[0] + self.x[1]) / 2, float(self.y[0] + self.y[1]) / 2)

    def to_json(self) -> dict:
        return {"x": [str(v) for v in self.x], "y": [str(v) for v in self.y], "certificate": self.certificate}


@dataclass
class SystemResult:
    boxes: list
    unresolved: list = field(default_factory=list)
    degenerate: bool = False
    complete: bool = True
    nodes: int = 0
    perturbed_count: int | None = None
    eps: tuple | None = None

    @property
    def count(self) -> int:
        return len(self.boxes)

    def to_json(self) -> dict:
        out = {
            "count": self.count,
            "boxes": [b.to_json() for b in self.boxes],
            "unresolved": [[[str(v) for v in bx], [str(v) for v in by]] for bx, by in self.unresolved],
            "degenerate": self.degenerate,
            "complete": self.complete,
        }
        if self.perturbed_count is not None:
            out["perturbed_count"] = self.perturbed_count
            out["eps"] = [str(e) for e in self.eps]
        return out


class _Planar:
    def __init__(self, f1: PfaffianFunction, f2: PfaffianFunction):
        if f1.chain != f2.chain:
            raise ValueError("system functions must share a chain")
        if f1.n != 2:
            raise ValueError("expected functions of two variables")
        self.chain = f1.chain
        polys = [f1.Q, f2.Q]
        for f in (f1, f2):
            polys += [pf_derive(f, 1).Q, pf_derive(f, 2).Q]
        self.compiled = [CompiledPoly(p) for p in polys]

    def eval(self, xlo, xhi, ylo, yhi, which=range(6)):
        lifted = self.chain.lift_interval([IArray(xlo, xhi), IArray(ylo, yhi)])
        return [self.compiled[k].eval_interval(lifted) for k in which]

    def eval_point(self, x, y):
        return self.eval(x, x, y, y, which=(0, 1))


def _krawczyk(sys_: _Planar, xlo, xhi, ylo, yhi, J=None):
    """Krawczyk image of each box; returns (Kx, Ky, valid) with valid=False where
    the midpoint Jacobian is singular."""
    if J is None:
        J = sys_.eval(xlo, xhi, ylo, yhi, which=(2, 3, 4, 5))
    a, b, c, d = J
    mx, my = 0.5 * xlo + 0.5 * xhi, 0.5 * ylo + 0.5 * yhi
    f1m, f2m = sys_.eval_point(mx, my)
    # preconditioner: inverse of the midpoint Jacobian (float, any approximation works)
    am, bm, cm, dm = a.mid(), b.mid(), c.mid(), d.mid()
    det = am * dm - bm * cm
    valid = np.isfinite(det) & (np.abs(det) > 1e-300)
    det = np.where(valid, det, 1.0)
    y11, y12, y21, y22 = dm / det, -bm / det, -cm / det, am / det
    # Y f(m)
    yf1 = f1m * y11 + f2m * y12
    yf2 = f1m * y21 + f2m * y22
    # I - Y J
    m11 = 1.0 - (a * y11 + c * y12)
    m12 = -(b * y11 + d * y12)
    m21 = -(a * y21 + c * y22)
    m22 = 1.0 - (b * y21 + d * y22)
    dx = IArray(xlo, xhi) - IArray(mx, mx)
    dy = IArray(ylo, yhi) - IArray(my, my)
    Kx = IArray(mx, mx) - yf1 + m11 * dx + m12 * dy
    Ky = IArray(my, my) - yf2 + m21 * dx + m22 * dy
    return Kx, Ky, valid


def solve_system_2d(f1: PfaffianFunction, f2: PfaffianFunction, box, cfg: SolveConfig | None = None) -> SystemResult:
    """Certified solutions of f1 = f2 = 0 in a closed box [(x0, x1), (y0, y1)].

    Each returned box passed the Krawczyk test (image strictly inside the
    box), which proves exactly one solution in it. Boxes that remain
    undecided at ``min_width`` or ``max_depth`` are returned as unresolved
    and mark the result degenerate. With ``eps_cascade`` set, the system
    f1^2 = eps_1, f2^2 = eps_2 is solved as well and its count reported.
    """
    cfg = cfg or SolveConfig()
    res = _solve_planar(_Planar(f1, f2), box, cfg)
    if cfg.eps_cascade is not None:
        eps = cfg.cascade(2)
        g1 = PfaffianFunction(f1.chain, f1.Q * f1.Q - eps[0])
        g2 = PfaffianFunction(f2.chain, f2.Q * f2.Q - eps[1])
        pert = _solve_planar(_Planar(g1, g2), box, cfg)
        res.perturbed_count = pert.count
        res.eps = eps
    return res


def _solve_planar(sys_: _Planar, box, cfg: SolveConfig) -> SystemResult:
    (x0, x1), (y0, y1) = box
    x0, x1, y0, y1 = (Fraction(v) for v in (x0, x1, y0, y1))
    if not sys_.chain.domain.contains_box([frac_down(x0), frac_down(y0)], [frac_up(x1), frac_up(y1)]):
        raise ValueError("box leaves the chain domain")
    xlo, xhi = np.array([frac_down(x0)]), np.array([frac_up(x1)])
    ylo, yhi = np.array([frac_down(y0)]), np.array([frac_up(y1)])
    depth = np.array([0])
    res = SystemResult([])
    certified = []
    while xlo.size:
        if res.nodes + xlo.size > cfg.budget:
            res.complete = False
            res.unresolved += [((Fraction(a), Fraction(b)), (Fraction(c), Fraction(d))) for a, b, c, d in zip(xlo, xhi, ylo, yhi)]
            break
        res.nodes += xlo.size
        vals = sys_.eval(xlo, xhi, ylo, yhi)
        live = vals[0].contains_zero() & vals[1].contains_zero()
        Kx, Ky, valid = _krawczyk(sys_, xlo, xhi, ylo, yhi, J=vals[2:])
        X, Y = IArray(xlo, xhi), IArray(ylo, yhi)
        inside = valid & Kx.interior_of(X) & Ky.interior_of(Y)
        disjoint = valid & ((Kx.hi < xlo) | (Kx.lo > xhi) | (Ky.hi < ylo) | (Ky.lo > yhi))
        ok = live & inside
        for i in np.flatnonzero(ok):
            certified.append((xlo[i], xhi[i], ylo[i], yhi[i]))
        live &= ~inside & ~disjoint
        small = (np.maximum(xhi - xlo, yhi - ylo) <= cfg.min_width) | (depth >= cfg.max_depth)
        for i in np.flatnonzero(live & small):
            res.unresolved.append(((Fraction(xlo[i]), Fraction(xhi[i])), (Fraction(ylo[i]), Fraction(yhi[i]))))
        live &= ~small
        if not live.any():
            break
        xlo, xhi, ylo, yhi, depth = xlo[live], xhi[live], ylo[live], yhi[live], depth[live]
        # shrink to X & K where K is valid, then bisect the wider side off-center
        Kx, Ky, valid = Kx[live], Ky[live], valid[live]
        xlo = np.where(valid, np.maximum(xlo, Kx.lo), xlo)
        xhi = np.where(valid, np.minimum(xhi, Kx.hi), xhi)
        ylo = np.where(valid, np.maximum(ylo, Ky.lo), ylo)
        yhi = np.where(valid, np.minimum(yhi, Ky.hi), yhi)
        wide_x = (xhi - xlo) >= (yhi - ylo)
        r = _SPLIT_RATIOS[0]
        cx = np.clip(xlo + r * (xhi - xlo), xlo, xhi)
        cy = np.clip(ylo + r * (yhi - ylo), ylo, yhi)
        xlo, xhi, ylo, yhi = (
            np.concatenate([xlo, np.where(wide_x, cx, xlo)]),
            np.concatenate([np.where(wide_x, cx, xhi), xhi]),
            np.concatenate([ylo, np.where(wide_x, ylo, cy)]),
            np.concatenate([np.where(wide_x, yhi, cy), yhi]),
        )
        depth = np.concatenate([depth + 1, depth + 1])
    res.boxes = [
        SolutionBox((Fraction(a), Fraction(b)), (Fraction(c), Fraction(d)))
        for a, b, c, d in _dedupe(sys_, certified)
    ]
    res.boxes.sort(key=lambda bx: (bx.x[0], bx.y[0]))
    res.degenerate = bool(res.unresolved)
    return res


def _dedupe(sys_: _Planar, boxes):
    """Tighten certified boxes by Krawczyk iteration and merge overlaps.

    Disjoint-interior boxes cannot share a solution, but the contraction step
    can make neighbours overlap; tightened boxes around one solution overlap
    each other, boxes around different solutions do not.
    """
    tight = []
    for xl, xh, yl, yh in boxes:
        a = np.array([xl]), np.array([xh]), np.array([yl]), np.array([yh])
        for _ in range(200):
            Kx, Ky, valid = _krawczyk(sys_, *a)
            if not valid[0]:
                break
            nxl, nxh = max(a[0][0], Kx.lo[0]), min(a[1][0], Kx.hi[0])
            nyl, nyh = max(a[2][0], Ky.lo[0]), min(a[3][0], Ky.hi[0])
            if (nxl, nxh, nyl, nyh) == (a[0][0], a[1][0], a[2][0], a[3][0]):
                break
            a = np.array([nxl]), np.array([nxh]), np.array([nyl]), np.array([nyh])
        tight.append((xl, xh, yl, yh, a[0][0], a[1][0], a[2][0], a[3][0]))
    kept = []
    for t in tight:
        if any(t[4] <= k[5] and k[4] <= t[5] and t[6] <= k[7] and k[6] <= t[7] for k in kept):
            continue
        kept.append(t)
    return [k[4:] for k in kept]
