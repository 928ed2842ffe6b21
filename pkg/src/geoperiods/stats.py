"""Distribution and counting statistics of periods at desk scale.

Empirical central-limit reports for vertical periods over cusp cosets,
graph-weighted distribution of geodesic periods through the measure
transfer, a census of small periods, degree-versus-sojourn tables, and
equidistribution mass ratios against the volume prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bqf, forms
from .enumeration import EdgeList, class_from_key, enumerate_edges
from .graphs import BipartiteGraph, g_transform
from .periods import (
    PeriodError,
    _axis_frame_of,
    _gl_rule,
    _segment_frames,
    geodesic_period,
    vertical_period_profile,
)
from .psl2 import geodesic_length_of_trace, strip_intersection_length

ZERO_THRESHOLD = 1e-7  # period tolerance 1e-9 with a 100x safety margin
MODULAR_COVOLUME = math.pi / 3.0


class StatsError(Exception):
    pass


def _ks_statistic(samples: np.ndarray, cdf, weights=None) -> float:
    order = np.argsort(samples)
    x = samples[order]
    if weights is None:
        w = np.full(len(x), 1.0 / len(x))
    else:
        w = np.asarray(weights, dtype=float)[order]
        w = w / w.sum()
    cum = np.cumsum(w)
    ref = cdf(x)
    return float(max(np.max(np.abs(cum - ref)),
                     np.max(np.abs(cum - w - ref))))


def _norm_cdf(x):
    from scipy.stats import norm

    return norm.cdf(x)


@dataclass
class DistributionReport:
    sample_count: int
    mean: complex
    variance: float
    histogram_density: np.ndarray
    histogram_edges: np.ndarray
    ks_real: float
    ks_imag: float
    ks_abs2: float
    c_hat: float
    delta_f: float
    degenerate: bool
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.degenerate:
            width = np.diff(self.histogram_edges)
            total = float(np.sum(self.histogram_density * width))
            if abs(total - 1.0) > 1e-9:
                raise StatsError("histogram density does not integrate to 1")
            for ks in (self.ks_real, self.ks_imag, self.ks_abs2):
                if not 0.0 <= ks <= 1.0:
                    raise StatsError("KS distance outside [0, 1]")


def _distribution_report(values: np.ndarray, scale_norm: float,
                         weights=None, delta_f: float = 0.0,
                         extra=None) -> DistributionReport:
    values = np.asarray(values, dtype=complex)
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        mean = complex(np.sum(weights * values))
        var = float(np.sum(weights * np.abs(values - mean) ** 2))
    else:
        mean = complex(values.mean())
        var = float(np.mean(np.abs(values - mean) ** 2))
    re = values.real
    w_std = (float(np.sqrt(np.sum(weights * re ** 2))) if weights is not None
             else float(np.std(re)))
    degenerate = w_std < 1e-300
    if degenerate:
        return DistributionReport(
            sample_count=len(values), mean=mean, variance=var,
            histogram_density=np.array([]), histogram_edges=np.array([0.0]),
            ks_real=0.0, ks_imag=0.0, ks_abs2=0.0, c_hat=0.0,
            delta_f=delta_f, degenerate=True, extra=extra or {})
    c_hat = w_std / scale_norm
    z = values / (c_hat * scale_norm)
    ks_real = _ks_statistic(z.real, _norm_cdf, weights)
    im = z.imag
    im_std = (float(np.sqrt(np.sum(weights * im ** 2))) if weights is not None
              else float(np.std(im)))
    if im_std > 1e-300:
        ks_imag = _ks_statistic(im / im_std, _norm_cdf, weights)
        r2 = z.real ** 2 + (im / im_std) ** 2
        from scipy.stats import chi2

        ks_abs2 = _ks_statistic(r2, lambda x: chi2.cdf(x, 2), weights)
    else:
        ks_imag = 0.0
        from scipy.stats import chi2

        ks_abs2 = _ks_statistic(z.real ** 2, lambda x: chi2.cdf(x, 1), weights)
    dens, edges = np.histogram(z.real, bins=40, density=True,
                               weights=weights)
    return DistributionReport(
        sample_count=len(values), mean=mean, variance=var,
        histogram_density=dens, histogram_edges=edges, ks_real=ks_real,
        ks_imag=ks_imag, ks_abs2=ks_abs2, c_hat=c_hat, delta_f=delta_f,
        degenerate=False, extra=extra or {})


# ---------------------------------------------------------------------------
# vertical-period CLT


def vertical_period_samples(f, N: int, tol: float = 1e-9):
    """(c, a, L) arrays over all of X_N, bulk-computed per denominator."""
    if N < 1:
        raise StatsError("N must be positive")
    zero_form = getattr(f, "kind", None) == "constant"
    if zero_form and f.value != 0:
        raise StatsError("vertical periods of a nonzero constant diverge")
    cs, As, Ls = [], [], []
    for c in range(1, N + 1):
        if zero_form:
            residues = np.array(
                [a for a in range(c) if math.gcd(a, c) == 1 and (a or c == 1)],
                dtype=np.int64)
            vals = np.zeros(len(residues), dtype=complex)
        else:
            residues, vals = vertical_period_profile(f, c, tol)
        cs.append(np.full(len(residues), c, dtype=np.int64))
        As.append(residues)
        Ls.append(np.asarray(vals, dtype=complex))
    return np.concatenate(cs), np.concatenate(As), np.concatenate(Ls)


def vertical_clt_report(f, N: int, samples: int | None = None,
                        tol: float = 1e-9, seed: int = 0) -> DistributionReport:
    """Distribution of L_f / (C_hat sqrt(log N)) over X_N vs the Gaussian."""
    if N > 5000:
        raise StatsError("N above desk scale")
    cs, As, Ls = vertical_period_samples(f, N, tol)
    if samples is not None and samples < len(Ls):
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(Ls), size=samples, replace=False)
        Ls = Ls[idx]
    return _distribution_report(Ls, math.sqrt(math.log(max(N, 3))))


# ---------------------------------------------------------------------------
# bulk geodesic periods


def geodesic_periods_bulk(f, reps, tol: float = 1e-8,
                          panel_length: float = 0.55,
                          chunk_points: int = 250_000) -> np.ndarray:
    """Periods for many classes with fixed-length Gauss-Legendre panels.

    Panel length 0.55 leaves the 32-point rule far inside spectral accuracy
    for these integrands; bulk callers cross-check a subsample against the
    adaptive route.
    """
    nodes, weights = _gl_rule()
    point_tol = max(1e-14, min(1e-6, tol / 40.0))
    out = np.empty(len(reps), dtype=complex)
    batch_frames = []
    batch_meta = []  # (result index, number of panels, half-lengths)
    batch_count = 0

    def flush():
        nonlocal batch_frames, batch_meta, batch_count
        if not batch_meta:
            return
        allf = np.concatenate(batch_frames, axis=0)
        vals = forms.eval_lift_batch(f, allf, point_tol)
        pos = 0
        for idx, npan, halves in batch_meta:
            v = vals[pos:pos + npan * 32].reshape(npan, 32)
            out[idx] = complex(np.sum((v @ weights) * halves))
            pos += npan * 32
        batch_frames, batch_meta, batch_count = [], [], 0

    for i, gamma in enumerate(reps):
        length = geodesic_length_of_trace(gamma.trace)
        npan = max(2, int(math.ceil(length / panel_length)))
        edges = np.linspace(0.0, length, npan + 1)
        a, b = edges[:-1], edges[1:]
        half = 0.5 * (b - a)
        ts = 0.5 * (a + b)[:, None] + half[:, None] * nodes[None, :]
        frame = _axis_frame_of(gamma)
        batch_frames.append(_segment_frames(frame, ts).reshape(-1, 2, 2))
        batch_meta.append((i, npan, half))
        batch_count += npan * 32
        if batch_count >= chunk_points:
            flush()
    flush()
    return out


# ---------------------------------------------------------------------------
# graph-lifted distribution


def restricted_graph(N: int, tol: float = 1e-8):
    """Edge list of the graph restricted to N/2 <= |trace| <= N."""
    return enumerate_edges(N, min_abs_trace=max(3, (N + 1) // 2))


def lifted_distribution_report(f, N: int, tol: float = 1e-8,
                               spot_check: int = 12,
                               seed: int = 0) -> DistributionReport:
    """mu'_N-weighted law of geodesic periods, mu'_N = G(uniform on X_N)."""
    el = restricted_graph(N)
    nx = len(el.cosets)
    ny = len(el.class_keys)
    G = BipartiteGraph(nx, ny, el.edges[:, :2])
    connected = G.deg_x > 0
    if not connected.any():
        raise StatsError("restricted graph has no edges")
    mu = np.where(connected, 1.0, 0.0)
    mu = mu / mu.sum()
    weights = g_transform(G, mu)

    reps = [class_from_key(k).canonical_rep for k in el.class_keys]
    periods = geodesic_periods_bulk(f, reps, tol)

    rng = np.random.default_rng(seed)
    for idx in rng.choice(len(reps), size=min(spot_check, len(reps)),
                          replace=False):
        ref = complex(geodesic_period(f, reps[idx], tol))
        if abs(ref - periods[idx]) > 50 * tol:
            raise StatsError("bulk quadrature failed its spot check")

    positive = weights > 0
    rep = _distribution_report(periods[positive],
                               math.sqrt(math.log(max(N, 3))),
                               weights=weights[positive])
    uniform = _distribution_report(periods, math.sqrt(math.log(max(N, 3))))
    rep.extra["uniform_ks_real"] = uniform.ks_real
    rep.extra["uniform_c_hat"] = uniform.c_hat
    rep.extra["classes"] = len(reps)
    return rep


# ---------------------------------------------------------------------------
# small-period census


@dataclass
class NonvanishingReport:
    thresholds: list
    counts_below: list
    noise_floor: float
    indistinguishable_from_zero: list
    ladder: list
    ladder_counts: list
    fitted_exponent: float | None

    def __post_init__(self):
        pairs = sorted(zip(self.thresholds, self.counts_below))
        if [c for _, c in pairs] != sorted(c for _, c in pairs):
            raise StatsError("census counts must be monotone in threshold")


def small_period_census(f, N: int, delta: float,
                        ladder=None, tol: float = 1e-9) -> NonvanishingReport:
    """Count primitive classes up to each ladder point with small |P_f|.

    Small means |P| <= (log N')^{1/2 - delta} at ladder point N'; values
    under the noise floor are reported separately as indistinguishable
    from zero.
    """
    if ladder is None:
        ladder = [n for n in (250, 500, 1000, 2000) if n <= N] or [N]
    ladder = sorted(set(int(n) for n in ladder))
    if ladder[-1] > N:
        raise StatsError("ladder exceeds N")
    el = enumerate_edges(ladder[-1])
    traces = np.array([k[0] for k in el.class_keys])
    reps = [class_from_key(k).canonical_rep for k in el.class_keys]
    periods = np.abs(geodesic_periods_bulk(f, reps, tol))

    ladder_counts = []
    zero_counts = []
    for n in ladder:
        mask = traces <= n
        thr = math.log(max(n, 3)) ** (0.5 - delta)
        ladder_counts.append(int(np.sum(mask & (periods <= thr))))
        zero_counts.append(int(np.sum(mask & (periods <= ZERO_THRESHOLD))))

    fitted = None
    if len(ladder) >= 2 and all(c > 0 for c in ladder_counts):
        lx = np.log(np.array(ladder, dtype=float))
        ly = np.log(np.array(ladder_counts, dtype=float))
        A = np.column_stack([lx, np.ones(len(lx))])
        coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
        fitted = float(coef[0])

    n_final = ladder[-1]
    base_thr = math.log(max(n_final, 3)) ** (0.5 - delta)
    thresholds = [base_thr * s for s in (0.25, 0.5, 1.0, 2.0)]
    counts = [int(np.sum(periods <= t)) for t in thresholds]
    return NonvanishingReport(
        thresholds=thresholds, counts_below=counts,
        noise_floor=ZERO_THRESHOLD,
        indistinguishable_from_zero=zero_counts,
        ladder=ladder, ladder_counts=ladder_counts, fitted_exponent=fitted)


# ---------------------------------------------------------------------------
# degree versus strip sojourn


def strip_length_of_class(key, T: float = 1.0) -> float:
    """Closed-form length of the class geodesic inside the strip T <= y <= 2T.

    Each reduction-cycle form is one cusp excursion of the closed geodesic;
    its axis is a semicircle of radius sqrt(D)/(2|A|), and the excursion
    contributes that circle's arc length with height in [T, 2T].
    """
    t, m, form = key
    D0 = bqf.discriminant(form)
    sq = math.sqrt(D0)
    total = 0.0
    for (A, B, C) in bqf.cycle(form):
        r = sq / (2.0 * abs(A))
        if r > T:
            total += strip_intersection_length(r, T)
    # a power class traverses the primitive circuit multiple times; the
    # winding number is the exact length ratio against the primitive unit
    t0, u0 = bqf.pell4(D0)
    prim_len = 2.0 * math.log((t0 + u0 * sq) / 2.0)
    winding = round(geodesic_length_of_trace(t) / prim_len)
    return winding * total


@dataclass
class DegreeStripRow:
    key: tuple
    trace: int
    degree: int
    strip_length: float

    @property
    def ratio(self) -> float | None:
        return self.degree / self.strip_length if self.strip_length > 0 else None


@dataclass
class DegreeStripReport:
    rows: list
    min_ratio: float
    T: float


def degree_vs_strip_report(N: int, T: float = 1.0,
                           edge_list: EdgeList | None = None) -> DegreeStripReport:
    el = edge_list if edge_list is not None else enumerate_edges(N)
    rows = []
    for i, key in enumerate(el.class_keys):
        rows.append(DegreeStripRow(key=key, trace=key[0],
                                   degree=int(el.deg_y[i]),
                                   strip_length=strip_length_of_class(key, T)))
    ratios = [r.ratio for r in rows if r.ratio is not None]
    if not ratios:
        raise StatsError("no class meets the strip")
    return DegreeStripReport(rows=rows, min_ratio=min(ratios), T=T)


# ---------------------------------------------------------------------------
# equidistribution mass


@dataclass
class MassReport:
    strip_mass: float
    total_length: float
    ratio: float
    target: float
    relative_deviation: float


def equidistribution_mass_report(keys, T: float = 1.0) -> MassReport:
    """Length-weighted strip mass ratio against vol(B)/vol(X)."""
    keys = list(keys)
    if not keys:
        raise StatsError("empty class subset")
    strip = 0.0
    total = 0.0
    for key in keys:
        strip += strip_length_of_class(key, T)
        total += geodesic_length_of_trace(key[0])
    target = (1.0 / (2.0 * T)) / MODULAR_COVOLUME
    ratio = strip / total
    return MassReport(strip_mass=strip, total_length=total, ratio=ratio,
                      target=target,
                      relative_deviation=abs(ratio - target) / target)
