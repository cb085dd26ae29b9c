"""Deterministic point sampling with acceptance filtering.

Draws use numpy's Philox counter-based generator (philox4x64-10), seeded
directly with the configured integer, so the stream is reproducible from the
algorithm name + seed alone.  Per candidate point the draw order is: the n
real parts of z, the n imaginary parts of z, then the same for v, each block
uniform over its box.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import build_catalog_metric
from .errors import AcceptanceStarvationError, ConfigError, ExpressionError
from .expressions import MetricExpr, metric_from_dict
from .jets import eval_jet_batch
from .points import Point

RNG_NAME = "philox4x64-10"

EULER_TOL = 1e-10
EIGEN_RATIO = 1e-10


@dataclass(frozen=True)
class SampleConfig:
    count: int = 50
    seed: int = 0
    z_box: tuple = (-0.6, 0.6)
    v_box: tuple = (0.25, 1.25)
    normalize_v: bool = False
    clearance: float = 0.05
    min_accept_ratio: float = 0.1
    max_attempts_factor: int = 50

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("sample count must be >= 1")
        for name, box in (("z_box", self.z_box), ("v_box", self.v_box)):
            if len(box) != 2 or not float(box[0]) < float(box[1]):
                raise ConfigError(f"{name} must be a nondegenerate [lo, hi]")

    @classmethod
    def from_dict(cls, d: dict) -> "SampleConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(d) - known
        if bad:
            raise ConfigError(f"unknown sample option(s) {sorted(bad)}")
        d = dict(d)
        for key in ("z_box", "v_box"):
            if key in d:
                d[key] = tuple(float(x) for x in d[key])
        return cls(**d)

    def to_json_dict(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "z_box": list(self.z_box),
            "v_box": list(self.v_box),
            "normalize_v": self.normalize_v,
            "clearance": self.clearance,
            "min_accept_ratio": self.min_accept_ratio,
            "max_attempts_factor": self.max_attempts_factor,
        }


@dataclass
class SampleReport:
    accepted: int = 0
    attempted: int = 0
    rejections: dict = field(default_factory=dict)

    def reject(self, reason: str):
        self.rejections[reason] = self.rejections.get(reason, 0) + 1

    def to_json_dict(self) -> dict:
        return {
            "rng": RNG_NAME,
            "accepted": self.accepted,
            "attempted": self.attempted,
            "rejections": dict(sorted(self.rejections.items())),
        }


def _draw(rng, lo, hi, n):
    return rng.uniform(lo, hi, 2 * n)


def sample_points(metric: MetricExpr, config: SampleConfig):
    """Accepted points plus a rejection report.

    Acceptance requires singular-locus clearance, a positive definite Levi
    matrix (smallest eigenvalue above EIGEN_RATIO times the largest), and the
    homogeneity residuals below EULER_TOL.  Raises AcceptanceStarvationError
    when the acceptance ratio stays under the configured minimum.
    """
    n = metric.n
    rng = np.random.default_rng(np.random.Philox(config.seed))
    report = SampleReport()
    accepted = []
    max_attempts = max(config.count * config.max_attempts_factor, 200)
    batch = max(8, config.count)
    zlo, zhi = (float(x) for x in config.z_box)
    vlo, vhi = (float(x) for x in config.v_box)

    while len(accepted) < config.count and report.attempted < max_attempts:
        candidates = []
        while len(candidates) < batch and report.attempted < max_attempts:
            report.attempted += 1
            zr = _draw(rng, zlo, zhi, n)
            vr = _draw(rng, vlo, vhi, n)
            z = zr[:n] + 1j * zr[n:]
            v = vr[:n] + 1j * vr[n:]
            if not np.any(np.abs(v) > 0):
                report.reject("zero_fiber")
                continue
            p = Point(z, v)
            if metric.singular_clearance(p) < config.clearance:
                report.reject("singular_locus")
                continue
            candidates.append(p)
        if not candidates:
            break
        jts = eval_jet_batch(metric, candidates)
        for p, jt in zip(candidates, jts):
            g = jt.value()
            if not (g.real > 0 and abs(g.imag) <= 1e-12 * (1 + abs(g))):
                report.reject("nonpositive_value")
                continue
            M = jt.array(v_order=1, vbar_order=1)
            herm = float(np.max(np.abs(M - M.conj().T))) / (1 + float(np.max(np.abs(M))))
            if herm > 1e-10:
                report.reject("non_hermitian")
                continue
            eig = np.linalg.eigvalsh(0.5 * (M + M.conj().T)).real
            if eig.min() <= EIGEN_RATIO * max(eig.max(), 1e-300):
                report.reject("levi_not_positive")
                continue
            if _euler_residual(jt, p) > EULER_TOL:
                report.reject("euler_residual")
                continue
            if config.normalize_v:
                p = Point(p.z, p.v / np.sqrt(g.real))
            accepted.append(p)
            if len(accepted) >= config.count:
                break

    report.accepted = len(accepted)
    ratio = report.accepted / max(report.attempted, 1)
    if len(accepted) < config.count and ratio < config.min_accept_ratio:
        raise AcceptanceStarvationError(
            f"accepted {report.accepted}/{report.attempted} candidate points "
            f"(ratio {ratio:.3f} < {config.min_accept_ratio})",
            report.rejections,
        )
    if len(accepted) < config.count:
        raise AcceptanceStarvationError(
            f"attempt budget exhausted at {report.accepted}/{config.count} points",
            report.rejections,
        )
    return accepted, report


def _euler_residual(jt, p: Point) -> float:
    g = jt.value()
    v = p.v
    vb = np.conj(v)
    Gv = jt.array(v_order=1)
    Gvb = jt.array(vbar_order=1)
    M = jt.array(v_order=1, vbar_order=1)
    scale = 1.0 + abs(g)
    return max(
        abs(np.einsum("a,a->", Gv, v) - g) / scale,
        float(np.max(np.abs(np.einsum("ab,a->b", M, v) - Gvb)))
        / (1.0 + float(np.max(np.abs(Gvb)))),
        abs(np.einsum("ab,a,b->", M, v, vb) - g) / scale,
    )


def metric_from_config(spec: dict) -> MetricExpr:
    """Resolve the config's metric block: catalog reference or inline JSON."""
    if not isinstance(spec, dict):
        raise ConfigError("metric block must be an object")
    if "catalog" in spec:
        params = spec.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("metric params must be an object")
        try:
            return build_catalog_metric(spec["catalog"], **params)
        except (TypeError, ExpressionError) as e:
            raise ConfigError(f"bad catalog metric: {e}") from None
    if "inline" in spec:
        try:
            return metric_from_dict(spec["inline"])
        except (ExpressionError, KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad inline metric: {e}") from None
    raise ConfigError("metric block needs either 'catalog' or 'inline'")
