"""Randomized checks of the inequalities and oracles the schemes rely on.

Every suite draws its samples from one ``numpy.random.Generator`` and returns
a :class:`PropertyResult`. ``worst`` is the largest observed ratio
``lhs / rhs`` (so a value above 1 beyond roundoff is a violation), and
``witness`` holds the inputs of the worst violation, or ``None`` when the
property held everywhere.

Roundoff slack: an inequality ``lhs <= rhs`` is counted as violated only if
``lhs > rhs + SLACK * scale`` where ``scale`` bounds the magnitude of the
terms that were combined to form ``lhs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import GridSpec, _forward_difference, _inner, _norm, _second_difference, _zero_boundary
from .nonlinearity import f_log, f_log_eps
from .sine_spectral import dense_laplacian, dst_forward, dst_inverse, solve_interior

EPS = np.finfo(float).eps
SLACK = 64 * EPS

INJECTIONS = ("imag-sign",)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    samples: int
    worst: float
    witness: Optional[dict] = None
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        """One machine-readable report line: ``name status key=value ...``."""
        parts = [self.name, "PASS" if self.passed else "FAIL", f"samples={self.samples}", f"worst={self.worst:.6e}"]
        for k, v in self.detail.items():
            parts.append(f"{k}={_fmt(v)}")
        if self.witness:
            parts.append("witness=" + ";".join(f"{k}:{_fmt(v)}" for k, v in self.witness.items()))
        return "\t".join(parts)


def _fmt(v) -> str:
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def _scalar(x):
    x = x.item() if isinstance(x, np.generic) else x
    return complex(x) if isinstance(x, complex) else float(x) if isinstance(x, (float, int)) else x


def _judge(name, lhs, rhs, scale, witness_arrays: dict, extra: Optional[dict] = None) -> PropertyResult:
    """Compare ``lhs <= rhs`` elementwise with roundoff slack ``SLACK * scale``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    excess = lhs - rhs - SLACK * np.asarray(scale, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
    bad = excess > 0
    witness = None
    if np.any(bad):
        i = int(np.argmax(np.where(bad, excess, -np.inf)))
        witness = {k: _scalar(v[i]) for k, v in witness_arrays.items()}
        witness.update(lhs=float(lhs[i]), rhs=float(rhs[i]))
    return PropertyResult(name, not bool(np.any(bad)), lhs.size, float(np.max(ratio)) if lhs.size else 0.0, witness, extra or {})


# --- scalar samplers -------------------------------------------------------------


def _moduli(rng: np.random.Generator, n: int, lo: float, hi: float, zero_frac: float = 0.01) -> np.ndarray:
    """Log-uniform magnitudes in ``[10^lo, 10^hi]`` with a few exact zeros."""
    r = 10.0 ** rng.uniform(lo, hi, n)
    r[rng.random(n) < zero_frac] = 0.0
    return r


def _complex(rng: np.random.Generator, r: np.ndarray) -> np.ndarray:
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, r.shape))


def _pairs(rng: np.random.Generator, n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Pairs mixing independent draws, near-coincident points and equal moduli."""
    u = _complex(rng, _moduli(rng, n, lo, hi))
    v = _complex(rng, _moduli(rng, n, lo, hi))
    kind = rng.integers(0, 3, n)
    near = kind == 1
    v[near] = u[near] * (1 + 10.0 ** rng.uniform(-8, -1, near.sum()) * np.exp(1j * rng.uniform(0, 2 * np.pi, near.sum())))
    same = kind == 2
    v[same] = np.abs(u[same]) * np.exp(1j * rng.uniform(0, 2 * np.pi, same.sum()))
    return u, v


def _f_for(inject: Optional[str]) -> Callable[[np.ndarray], np.ndarray]:
    if inject is None:
        return f_log
    if inject == "imag-sign":
        # deliberately wrong nonlinearity used to check that the suite can fail
        return lambda z: np.conj(f_log(z))
    raise ValueError(f"unknown injection {inject!r}; expected one of {INJECTIONS}")


# --- nonlinearity suites ------------------------------------------------------------


def check_log_lipschitz(rng, n: int, f=f_log) -> PropertyResult:
    """``|f(u) - f(v)| <= (|ln y| + 1)|u - v|`` with ``y = max(|u|, |v|)``."""
    u, v = _pairs(rng, n, -12, 6)
    y = np.maximum(np.abs(u), np.abs(v))
    with np.errstate(divide="ignore"):
        logy = np.where(y > 0, np.abs(np.log(y)), 0.0)
    lhs = np.abs(f(u) - f(v))
    rhs = (logy + 1) * np.abs(u - v)
    scale = np.abs(f(u)) + np.abs(f(v)) + rhs
    return _judge("log_lipschitz", lhs, rhs, scale, {"u": u, "v": v})


def check_holder(rng, n: int, f=f_log, alpha: float = 0.5) -> PropertyResult:
    """``|f(u) - f(v)| <= (2e)^(1-alpha) (|ln e| + 1) |u - v|^alpha`` for ``|u|, |v| <= e``,
    with ``e = exp(alpha / (alpha - 1))``."""
    eps_hat = math.exp(alpha / (alpha - 1))
    half = n // 2
    # half uniform in the disc of radius eps_hat, half log-uniform down to 1e-14
    r = np.concatenate([eps_hat * np.sqrt(rng.random(2 * half)), eps_hat * 10.0 ** rng.uniform(-14, 0, 2 * (n - half))])
    r = rng.permutation(r)
    u = _complex(rng, r[:n])
    v = _complex(rng, r[n:])
    close = rng.random(n) < 0.3
    v[close] = u[close] + 10.0 ** rng.uniform(-12, -3, close.sum()) * np.exp(1j * rng.uniform(0, 2 * np.pi, close.sum()))
    v[close] *= np.minimum(1.0, eps_hat / np.maximum(np.abs(v[close]), 1e-300))
    H = (2 * eps_hat) ** (1 - alpha) * (abs(math.log(eps_hat)) + 1)
    lhs = np.abs(f(u) - f(v))
    rhs = H * np.abs(u - v) ** alpha
    scale = np.abs(f(u)) + np.abs(f(v))
    return _judge("holder", lhs, rhs, scale, {"u": u, "v": v}, {"alpha": alpha, "eps_hat": eps_hat})


def check_imag_part(rng, n: int, f=f_log) -> PropertyResult:
    """``|Im[(f(u) - f(v)) conj(u - v)]| <= |u - v|^2``."""
    u, v = _pairs(rng, n, -12, 6)
    d = u - v
    lhs = np.abs(np.imag((f(u) - f(v)) * np.conj(d)))
    rhs = np.abs(d) ** 2
    scale = (np.abs(f(u)) + np.abs(f(v))) * np.abs(d) + rhs
    return _judge("imag_part", lhs, rhs, scale, {"u": u, "v": v})


def check_regularization_gap(rng, n: int, eps: float) -> PropertyResult:
    """``|f(z) - f_eps(z)| <= eps`` pointwise."""
    z = _complex(rng, _moduli(rng, n, -14, 4))
    lhs = np.abs(f_log(z) - f_log_eps(z, eps))
    rhs = np.full(n, eps)
    az = np.abs(z)
    with np.errstate(divide="ignore"):
        scale = np.where(az > 0, az * (np.abs(np.log(np.maximum(az, 1e-300))) + 1), 0.0)
    return _judge(f"regularization_gap[eps={eps:g}]", lhs, rhs, scale, {"z": z}, {"eps": eps})


def check_regularized_lipschitz(rng, n: int, c: float = 10.0) -> PropertyResult:
    """``|f_eps(z) - f_eps(w)| <= 2|ln eps| |z - w|`` for ``|z|, |w| <= c``, ``eps < 1/(2c)``."""
    eps = 10.0 ** rng.uniform(-10, math.log10(0.5 / c), n)
    eps = np.minimum(eps, np.nextafter(0.5 / c, 0))
    r = c * np.concatenate([np.sqrt(rng.random(n)), 10.0 ** rng.uniform(-12, 0, n)])
    r = rng.permutation(r)
    z = _complex(rng, r[:n])
    w = _complex(rng, r[n:])
    close = rng.random(n) < 0.3
    w[close] = z[close] * (1 + 1e-6 * np.exp(1j * rng.uniform(0, 2 * np.pi, close.sum())))
    w[close] *= np.minimum(1.0, c / np.abs(w[close]).clip(1e-300))
    fz = z * np.log(eps + np.abs(z))
    fw = w * np.log(eps + np.abs(w))
    lhs = np.abs(fz - fw)
    rhs = 2 * np.abs(np.log(eps)) * np.abs(z - w)
    scale = np.abs(fz) + np.abs(fw)
    return _judge("regularized_lipschitz", lhs, rhs, scale, {"z": z, "w": w, "eps": eps}, {"c": c})


# --- grid-function samplers ---------------------------------------------------------

_SUITE_GRIDS_2D = (
    GridSpec(((0.0, 1.0), (0.0, 1.0)), (8, 8)),
    GridSpec(((-5.0, 5.0), (-2.0, 3.0)), (6, 10)),
    GridSpec(((-1.0, 2.0), (0.0, 0.5)), (16, 4)),
    GridSpec(((-8.0, 8.0), (-8.0, 8.0)), (16, 16)),
)
_SUITE_GRIDS_1D = (
    GridSpec(((0.0, 1.0),), (20,)),
    GridSpec(((-5.0, 5.0),), (64,)),
)


def random_fields(rng: np.random.Generator, spec: GridSpec, n: int) -> np.ndarray:
    """``n`` random members of ``X_h^0`` (batch axis first).

    Mixes i.i.d. noise, single spikes, sparse noise and low sine modes, each
    scaled by a log-uniform amplitude.
    """
    shape = (n,) + spec.shape
    out = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    family = rng.integers(0, 4, n)
    spikes = np.nonzero(family == 1)[0]
    if len(spikes):
        out[spikes] = 0
        idx = tuple(rng.integers(1, J, len(spikes)) for J in spec.counts)
        out[(spikes,) + idx] = rng.standard_normal(len(spikes)) + 1j * rng.standard_normal(len(spikes))
    sparse = family == 2
    out[sparse] *= rng.random((int(sparse.sum()),) + spec.shape) < 0.1
    modes = np.nonzero(family == 3)[0]
    if len(modes):
        prof = np.ones((len(modes),) + spec.shape, dtype=complex)
        for axis, J in enumerate(spec.counts):
            k = rng.integers(1, min(J, 4), len(modes))
            j = np.arange(J + 1)
            line = np.sin(np.pi * np.outer(k, j) / J)
            shape_l = [len(modes)] + [1] * spec.dim
            shape_l[1 + axis] = J + 1
            prof = prof * line.reshape(shape_l)
        amp = rng.standard_normal(len(modes)) + 1j * rng.standard_normal(len(modes))
        out[modes] = prof * amp.reshape((-1,) + (1,) * spec.dim)
    out *= (10.0 ** rng.uniform(-3, 3, n)).reshape((-1,) + (1,) * spec.dim)
    _zero_boundary(out, spec.dim)
    return out


def _chunks(total: int, parts: int, size: int = 5000):
    base, extra = divmod(total, parts)
    for p in range(parts):
        left = base + (p < extra)
        while left > 0:
            m = min(size, left)
            yield p, m
            left -= m


def _merge(name: str, results: list[PropertyResult], extra: Optional[dict] = None) -> PropertyResult:
    worst = max(r.worst for r in results)
    witness = next((r.witness for r in results if r.witness), None)
    return PropertyResult(name, all(r.passed for r in results), sum(r.samples for r in results), worst, witness, extra or {})


def check_embedding(rng, n: int, alpha: float) -> PropertyResult:
    """``||u||_{2 alpha} <= |Omega|^{1/(2 alpha) - 1/2} ||u||`` on 1D and 2D grids."""
    grids = _SUITE_GRIDS_1D + _SUITE_GRIDS_2D
    parts = []
    for gi, m in _chunks(n, len(grids)):
        spec = grids[gi]
        u = random_fields(rng, spec, m)
        sl = (slice(None),) + spec.interior
        axes = tuple(range(1, spec.dim + 1))
        q = 2 * alpha
        lq = (spec.cell_volume * np.sum(np.abs(u[sl]) ** q, axis=axes)) ** (1 / q)
        l2 = _norm(u, spec.spacings, "l2")
        rhs = spec.volume ** (1 / q - 0.5) * l2
        parts.append(_judge("", lq, rhs, lq, {"grid": np.array([gi] * m)}))
    return _merge(f"embedding[alpha={alpha:g}]", parts, {"alpha": alpha})


def check_sobolev_l4(rng, n: int) -> PropertyResult:
    """``||u||_4 <= ||u||^{1/2} |u|_1^{1/2}`` on 2D grids."""
    parts = []
    for gi, m in _chunks(n, len(_SUITE_GRIDS_2D)):
        spec = _SUITE_GRIDS_2D[gi]
        u = random_fields(rng, spec, m)
        l4 = _norm(u, spec.spacings, "lr", 4)
        rhs = np.sqrt(_norm(u, spec.spacings, "l2") * _norm(u, spec.spacings, "seminorm_h1"))
        parts.append(_judge("", l4, rhs, l4, {"grid": np.array([gi] * m)}))
    return _merge("sobolev_l4", parts)


def sobolev_linf_ratios(rng, n_per_level: int, cells=(8, 16, 32, 64), box=(-1.0, 1.0)) -> list[float]:
    """Largest ``||u||_inf / (||u||^{1/2} (|u|_2 + ||u||)^{1/2})`` per refinement level.

    Alongside the random fields each level includes a fixed smooth bump and a
    unit spike, whose ratios approach finite limits as ``h -> 0``.
    """
    out = []
    for J in cells:
        spec = GridSpec.uniform(2, box[0], box[1], J)
        X, Y = spec.mesh()
        bump = np.exp(-8 * (X**2 + Y**2)).astype(complex)
        spike = np.zeros(spec.shape, dtype=complex)
        spike[J // 2, J // 2] = 1.0
        fixed = np.stack([bump, spike])
        _zero_boundary(fixed, 2)
        batches = [fixed] + [random_fields(rng, spec, m) for _, m in _chunks(n_per_level, 1, 2000)]
        worst = 0.0
        for u in batches:
            linf = _norm(u, spec.spacings, "linf")
            l2 = _norm(u, spec.spacings, "l2")
            h2 = _norm(u, spec.spacings, "seminorm_h2")
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(l2 > 0, linf / np.sqrt(l2 * (h2 + l2)), 0.0)
            worst = max(worst, float(np.max(ratio)))
        out.append(worst)
    return out


def check_sobolev_linf(rng, n: int, growth: float = 1.5) -> PropertyResult:
    """The ``L^inf`` ratio stays bounded: finest-level maximum at most ``growth`` x coarsest."""
    levels = (8, 16, 32, 64)
    ratios = sobolev_linf_ratios(rng, max(1, n // len(levels)), levels)
    ok = all(np.isfinite(ratios)) and ratios[-1] <= growth * ratios[0]
    witness = None if ok else {"ratios": ratios}
    return PropertyResult("sobolev_linf_ratio", ok, n, ratios[-1] / ratios[0], witness, {"cells": list(levels), "ratios": ratios})


def check_summation_by_parts(rng, pairs: int = 100) -> PropertyResult:
    """``(d2_x u, v)_h = -<d+_x u, d+_x v>_h`` per axis, dims 1 and 2, ``pairs`` pairs each."""
    parts = []
    for spec in (_SUITE_GRIDS_1D[0], _SUITE_GRIDS_2D[1]):
        for axis in range(spec.dim):
            u = random_fields(rng, spec, pairs)
            v = random_fields(rng, spec, pairs)
            h = spec.spacings[axis]
            d2 = _second_difference(u, axis, h, spec.dim)
            left = _inner(d2, v, spec.spacings)
            du = _forward_difference(u, axis, h, spec.dim)
            dv = _forward_difference(v, axis, h, spec.dim)
            axes = tuple(range(1, spec.dim + 1))
            right = spec.cell_volume * np.sum(du * np.conj(dv), axis=axes)
            lhs = np.abs(left + right)
            scale = _norm(d2, spec.spacings, "l2") * _norm(v, spec.spacings, "l2") + spec.cell_volume * np.sum(
                np.abs(du) * np.abs(dv), axis=axes
            )
            # lhs <= 1e-12 * scale
            parts.append(_judge("", lhs, 1e-12 * scale, np.zeros_like(lhs), {"axis": np.full(pairs, axis)}))
    return _merge("summation_by_parts", parts)


# --- solver oracles -----------------------------------------------------------------


def random_small_grid(rng: np.random.Generator, max_interior: int = 512) -> GridSpec:
    """A random 1D, 2D or 3D box grid with at most ``max_interior`` interior nodes."""
    while True:
        dim = int(rng.integers(1, 4))
        hi = {1: max_interior + 1, 2: 34, 3: 10}[dim]
        counts = tuple(int(c) for c in rng.integers(2, hi + 1, dim))
        if int(np.prod([c - 1 for c in counts])) <= max_interior:
            break
    lo = rng.uniform(-6, 0, dim)
    width = rng.uniform(0.5, 12, dim)
    return GridSpec(tuple(zip(lo, lo + width)), counts)


def dense_solver_errors(rng, cases: int = 100, max_interior: int = 512) -> tuple[np.ndarray, np.ndarray, list]:
    """Relative spectral-vs-dense differences and scheme residuals over random cases."""
    diffs, residuals, meta = [], [], []
    for _ in range(cases):
        spec = random_small_grid(rng, max_interior)
        sigma = complex(rng.uniform(-1e3, 1e3), 10.0 ** rng.uniform(0, 4) * rng.choice([-1, 1]))
        b = rng.standard_normal(spec.interior_shape) + 1j * rng.standard_normal(spec.interior_shape)
        method = str(rng.choice(["auto", "fft", "direct"]))
        w = solve_interior(sigma, b, spec, method=method)
        A = dense_laplacian(spec) + sigma * np.eye(spec.n_interior)
        w_dense = np.linalg.solve(A, b.ravel())
        diffs.append(np.linalg.norm(w.ravel() - w_dense) / np.linalg.norm(w_dense))
        vol = math.sqrt(spec.cell_volume)
        rn = vol * np.linalg.norm(A @ w.ravel() - b.ravel())
        residuals.append(rn / max(1.0, vol * np.linalg.norm(b)))
        meta.append((spec.counts, sigma, method))
    return np.array(diffs), np.array(residuals), meta


def check_dense_solver(rng, cases: int = 100, max_interior: int = 512, tol: float = 1e-10) -> PropertyResult:
    """Spectral solve of ``(sigma + d2) w = b`` agrees with a dense direct solve."""
    diffs, res, meta = dense_solver_errors(rng, cases, max_interior)
    worst = int(np.argmax(diffs))
    ok = bool(np.all(diffs <= tol) and np.all(res <= tol))
    witness = None if ok else {"counts": list(meta[worst][0]), "sigma": meta[worst][1], "method": meta[worst][2]}
    return PropertyResult(
        "dense_solver_oracle", ok, cases, float(diffs.max() / tol), witness,
        {"max_rel_diff": float(diffs.max()), "max_rel_residual": float(res.max())},
    )


def check_dst_roundtrip(rng, cases: int = 200, tol: float = 1e-13) -> PropertyResult:
    """``dst_inverse(dst_forward(x)) == x`` and FFT path equals direct summation."""
    worst_rt, worst_oracle = 0.0, 0.0
    for _ in range(cases):
        J = int(rng.integers(2, 200))
        x = rng.standard_normal(J - 1) + 1j * rng.standard_normal(J - 1)
        scale = np.max(np.abs(x))
        rt = dst_inverse(dst_forward(x, method="fft"), method="fft")
        worst_rt = max(worst_rt, float(np.max(np.abs(rt - x)) / scale))
        a = dst_forward(x, method="fft")
        b = dst_forward(x, method="direct")
        worst_oracle = max(worst_oracle, float(np.max(np.abs(a - b)) / (scale * J)))
    ok = worst_rt <= tol and worst_oracle <= tol
    return PropertyResult("dst_roundtrip", ok, cases, max(worst_rt, worst_oracle) / tol, None,
                          {"max_roundtrip": worst_rt, "max_fft_vs_direct": worst_oracle})


# --- driver -------------------------------------------------------------------------


def run_all(seed: int = 0, samples: int = 100_000, inject: Optional[str] = None) -> list[PropertyResult]:
    """Run every suite with ``samples`` random draws each (``10 * samples`` for the
    regularization gap). ``inject`` swaps in a faulty nonlinearity (see ``INJECTIONS``)."""
    f = _f_for(inject)
    rng = np.random.default_rng(seed)
    results = [
        check_log_lipschitz(rng, samples, f),
        check_holder(rng, samples, f),
        check_imag_part(rng, samples, f),
        check_regularization_gap(rng, 10 * samples, 1e-2),
        check_regularization_gap(rng, 10 * samples, 1e-4),
        check_regularized_lipschitz(rng, samples),
    ]
    results += [check_embedding(rng, samples, a) for a in (0.3, 0.5, 0.9)]
    results += [
        check_sobolev_l4(rng, samples),
        check_sobolev_linf(rng, samples),
        check_summation_by_parts(rng),
        check_dense_solver(rng, 100, 17 * 17),
        check_dst_roundtrip(rng),
    ]
    return results
