"""Estimation: polarizations, the mirror-ratio fidelity estimator, bootstrap
uncertainties, classical fidelities, effective error rates, and volumetric
summaries.

The estimator pipeline is: per-proxy effective polarization S from the
Hamming-distance profile of its shots, kind averages S1/S2/S3, the ratio
gamma = S1 / sqrt(S2 * S3), and F = gamma + (1 - gamma) / 4^n. Uncertainty
comes from a non-parametric bootstrap that resamples circuits within each
kind and shots within each circuit.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from mirrorbench.circuits import ContractError
from mirrorbench.sim import OutcomeDistribution, ShotTable, derive_seed

__all__ = [
    "PolarizationEstimate",
    "FidelityRecord",
    "EffectiveErrorRate",
    "IllConditionedError",
    "effective_polarization",
    "mcfe_estimate",
    "bootstrap_sigma",
    "classical_fidelity",
    "normalized_classical_fidelity",
    "effective_error_rate",
    "predict_full_fidelity",
    "volumetric_summary",
    "render_volumetric_svg",
]

RATIO_FLOOR = 1e-4
NCF_FLOOR = 1e-6
F_CLAMP_FLOOR = 1e-6


class IllConditionedError(ContractError):
    """Raised when a normalization denominator is too close to zero."""


@dataclass(frozen=True)
class PolarizationEstimate:
    """Effective polarization of one proxy circuit's shot table."""

    circuit_id: str
    S: float
    shots: int


@dataclass(frozen=True)
class FidelityRecord:
    """Estimated process fidelity of one benchmark circuit."""

    benchmark_id: str
    F_hat: float  # NaN when the ratio denominator is floored
    F_clamped: float
    sigma_boot: float
    S1: float
    S2: float
    S3: float
    width: int
    depth: int
    shape: tuple[int, int] | None = None
    kind: str = "benchmark"
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.sigma_boot < 0:
            raise ContractError("sigma_boot must be >= 0")


@dataclass(frozen=True)
class EffectiveErrorRate:
    """Per-shape effective error rate from K subcircuit fidelities."""

    shape: tuple[int, int]
    epsilon: float
    K: int

    def __post_init__(self):
        if self.epsilon > 1:
            raise ContractError("epsilon must be <= 1")


# --- polarization and the ratio estimator -------------------------------------------


def _hamming_profile(t: ShotTable, target: str) -> np.ndarray:
    """h_k = fraction of shots at Hamming distance k from the target."""
    n = len(target)
    h = np.zeros(n + 1)
    total = 0
    tgt = np.frombuffer(target.encode(), dtype=np.uint8)
    for bits, cnt in t.counts.items():
        arr = np.frombuffer(bits.encode(), dtype=np.uint8)
        k = int(np.count_nonzero(arr != tgt))
        h[k] += cnt
        total += cnt
    return h / total


def effective_polarization(t: ShotTable, target: str) -> PolarizationEstimate:
    """S = (4^n sum_k (-1/2)^k h_k - 1) / (4^n - 1), overflow-safe for any n."""
    if not t.counts:
        raise ContractError("empty shot table")
    n = len(target)
    if t.width != n:
        raise ContractError(f"target length {n} != shot width {t.width}")
    h = _hamming_profile(t, target)
    a = float(h @ (-0.5) ** np.arange(n + 1))
    # S = (4^n a - 1)/(4^n - 1) computed as (a - 4^-n)/(1 - 4^-n); the
    # 4.0**-n factor underflows to 0 for huge n instead of overflowing.
    q = 4.0 ** -n
    s = (a - q) / (1.0 - q)
    return PolarizationEstimate(t.circuit_id, s, sum(t.counts.values()))


def mcfe_estimate(s1: float, s2: float, s3: float, n: int,
                  floor: float = RATIO_FLOOR) -> tuple[float, float, tuple[str, ...]]:
    """(F_hat, F_clamped, flags) from the kind-averaged polarizations.

    gamma = s1 / sqrt(s2 * s3); F = gamma + (1 - gamma) / 4^n. When
    s2 * s3 <= floor the estimate is undefined: F_hat is NaN and the
    'estimate-undefined' flag is set (F_clamped falls back to 0).
    """
    if s2 * s3 <= floor:
        return float("nan"), 0.0, ("estimate-undefined",)
    gamma = s1 / math.sqrt(s2 * s3)
    q = 4.0 ** -n
    f = gamma + (1.0 - gamma) * q
    flags = ()
    clamped = min(1.0, max(0.0, f))
    if clamped != f:
        flags = ("clamped",)
    return f, clamped, flags


def _kind_means(pols: dict[str, list[float]]) -> tuple[float, float, float]:
    for kind in ("M1", "M2", "M3"):
        if not pols.get(kind):
            raise ContractError(f"no polarizations for kind {kind}")
    return (float(np.mean(pols["M1"])), float(np.mean(pols["M2"])),
            float(np.mean(pols["M3"])))


def estimate_benchmark(benchmark_id: str, n: int, depth: int,
                       tables: dict[str, list[tuple[ShotTable, str]]],
                       *, bootstrap: int = 200, seed: int = 0,
                       shape: tuple[int, int] | None = None) -> FidelityRecord:
    """Full estimate for one benchmark: F_hat, clamped value, bootstrap sigma.

    ``tables`` maps kind (M1/M2/M3) to (shot table, target) pairs.
    """
    pols = {k: [effective_polarization(t, tgt).S for t, tgt in v]
            for k, v in tables.items()}
    s1, s2, s3 = _kind_means(pols)
    f, fc, flags = mcfe_estimate(s1, s2, s3, n)
    sigma = bootstrap_sigma(tables, n, B=bootstrap, seed=seed)
    return FidelityRecord(benchmark_id, f, fc, sigma, s1, s2, s3,
                          n, depth, shape, flags=flags)


def bootstrap_sigma(tables: dict[str, list[tuple[ShotTable, str]]], n: int,
                    B: int = 200, seed: int = 0) -> float:
    """Non-parametric bootstrap standard deviation of F_hat.

    Each replica resamples circuits with replacement within each kind, then
    resamples every chosen circuit's shots multinomially. Deterministic for a
    given seed.
    """
    rng = derive_seed(seed, "bootstrap")
    # Precompute per-circuit Hamming profiles once; a multinomial over the
    # profile is equivalent to a multinomial over raw shots.
    prof: dict[str, list[tuple[np.ndarray, int]]] = {}
    for kind, pairs in tables.items():
        rows = []
        for t, tgt in pairs:
            h = _hamming_profile(t, tgt)
            rows.append((h, sum(t.counts.values())))
        prof[kind] = rows
    q = 4.0 ** -n
    weights = (-0.5) ** np.arange(n + 1)
    fs = []
    for _ in range(B):
        means = {}
        for kind, rows in prof.items():
            idx = rng.integers(0, len(rows), size=len(rows))
            ss = []
            for i in idx:
                h, shots = rows[i]
                hb = rng.multinomial(shots, h) / shots
                a = float(hb @ weights)
                ss.append((a - q) / (1.0 - q))
            means[kind] = float(np.mean(ss))
        f, _, flags = mcfe_estimate(means["M1"], means["M2"], means["M3"], n)
        if "estimate-undefined" not in flags:
            fs.append(f)
    if len(fs) < 2:
        return 0.0
    return float(np.std(fs))


# --- classical fidelities -----------------------------------------------------------


def _as_probs(p) -> np.ndarray:
    if isinstance(p, OutcomeDistribution):
        p = p.probs
    if isinstance(p, dict):
        n = len(next(iter(p)))
        arr = np.zeros(1 << n)
        for bs, v in p.items():
            arr[int(bs, 2)] = v
        p = arr
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or abs(arr.sum() - 1.0) > 1e-6 or (arr < -1e-12).any():
        raise ContractError("not a probability distribution")
    return np.clip(arr, 0.0, None)


def classical_fidelity(p, p_tilde) -> float:
    """F_c = (sum_x sqrt(p(x) p~(x)))^2 (the Bhattacharyya overlap squared)."""
    a, b = _as_probs(p), _as_probs(p_tilde)
    if a.shape != b.shape:
        raise ContractError("distribution sizes differ")
    return float(np.sum(np.sqrt(a * b)) ** 2)


def normalized_classical_fidelity(p, p_tilde, n: int,
                                  floor: float = NCF_FLOOR) -> float:
    """F_c rescaled so a uniform p~ scores 0:
    (F_c - u) / (1 - u) with u = F_c(uniform, p) = 2^{-n} (sum_x sqrt(p(x)))^2.

    Ill-conditioned (raises) when p is too close to uniform, where the
    denominator 1 - u vanishes.
    """
    a, b = _as_probs(p), _as_probs(p_tilde)
    if a.size != 1 << n:
        raise ContractError("distribution size != 2^n")
    u = float(np.sum(np.sqrt(a))) ** 2 / 2 ** n
    denom = 1.0 - u
    if denom <= floor:
        raise IllConditionedError(
            f"normalized classical fidelity is ill-conditioned: 1 - "
            f"2^-n sum sqrt(p) = {denom:.3g} <= {floor}")
    return (classical_fidelity(a, b) - u) / denom


# --- effective error rates -----------------------------------------------------------


def effective_error_rate(f_list, w: int, d: int) -> EffectiveErrorRate:
    """epsilon = 1 - (prod F_i)^(1/(w*d*K)) over K subcircuit fidelities.

    Nonpositive fidelities are clamped to 1e-6 with a warning.
    """
    fs = list(f_list)
    if not fs:
        raise ContractError("empty fidelity list")
    if w < 1 or d < 1:
        raise ContractError("shape must be positive")
    clean = []
    for f in fs:
        if f <= 0 or math.isnan(f):
            warnings.warn(f"nonpositive fidelity {f} clamped to {F_CLAMP_FLOOR}")
            f = F_CLAMP_FLOOR
        clean.append(min(f, 1.0))
    k = len(clean)
    log_mean = float(np.mean(np.log(clean)))
    eps = 1.0 - math.exp(log_mean / (w * d))
    return EffectiveErrorRate((w, d), eps, k)


def predict_full_fidelity(eer: EffectiveErrorRate, w_c: int, d_c: int) -> float:
    """Predicted full-circuit fidelity (1 - epsilon)^(w_c * d_c)."""
    if w_c < 1 or d_c < 1:
        raise ContractError("full-circuit shape must be positive")
    return (1.0 - eer.epsilon) ** (w_c * d_c)


# --- volumetric summaries ------------------------------------------------------------


def volumetric_summary(records: list[FidelityRecord]) -> str:
    """CSV with one row per (width, depth) shape: count, mean, min, max F."""
    cells: dict[tuple[int, int], list[float]] = {}
    for r in records:
        shape = r.shape or (r.width, r.depth)
        cells.setdefault(shape, []).append(r.F_clamped)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["shape_w", "shape_d", "count", "mean_F", "min_F", "max_F"])
    for (sw, sd) in sorted(cells):
        fs = cells[(sw, sd)]
        w.writerow([sw, sd, len(fs), f"{np.mean(fs):.6f}",
                    f"{min(fs):.6f}", f"{max(fs):.6f}"])
    return buf.getvalue()


def _color(f: float) -> str:
    f = min(1.0, max(0.0, f))
    r = int(round(255 * (1.0 - f)))
    g = int(round(200 * f))
    return f"#{r:02x}{g:02x}50"


def render_volumetric_svg(records: list[FidelityRecord]) -> str:
    """Hand-rolled SVG grid: width x depth axes, cell color = mean F."""
    cells: dict[tuple[int, int], list[float]] = {}
    for r in records:
        shape = r.shape or (r.width, r.depth)
        cells.setdefault(shape, []).append(r.F_clamped)
    widths = sorted({s[0] for s in cells})
    depths = sorted({s[1] for s in cells})
    cs, pad = 64, 60
    svg_w = pad + cs * max(1, len(depths)) + 20
    svg_h = pad + cs * max(1, len(widths)) + 20
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{svg_w}" '
           f'height="{svg_h}" font-family="sans-serif" font-size="11">']
    out.append(f'<text x="{pad}" y="16">mean estimated fidelity by shape '
               f'(columns: depth, rows: width)</text>')
    for j, d in enumerate(depths):
        out.append(f'<text x="{pad + j * cs + cs // 3}" y="{pad - 8}">d={d}</text>')
    for i, wdt in enumerate(widths):
        out.append(f'<text x="8" y="{pad + i * cs + cs // 2}">w={wdt}</text>')
    for (sw, sd), fs in sorted(cells.items()):
        i, j = widths.index(sw), depths.index(sd)
        mean = float(np.mean(fs))
        x, y = pad + j * cs, pad + i * cs
        out.append(f'<rect x="{x}" y="{y}" width="{cs - 2}" height="{cs - 2}" '
                   f'fill="{_color(mean)}" class="cell"/>')
        out.append(f'<text x="{x + 6}" y="{y + cs // 2}" fill="#000">'
                   f'{mean:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out)
