"""Seeded, serializable experiment drivers.

Every driver returns an :class:`ExperimentReport`.  Reports hold only
deterministic content apart from a ``timing`` block (creation time and wall
clock per cell), so two runs with the same configuration and seed produce
identical JSON once ``timing`` is dropped.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .dist import DistributionOnN, empirical_distribution, polya_aeppli, total_variation
from .errors import CapacityError, ParameterError, ProbabilityUnderflow
from .models import model_from_config
from .models.base import ShiftModel, ratio
from .models.group import GroupConvolutionModel
from .models.successor import SuccessorModel, ones_closed_form
from .returns import beta, cluster_stats, mean_envelope, simulate_counts
from .symbolic import ReturnSetup, as_word

__all__ = [
    "CellRecord",
    "ExperimentReport",
    "TightnessResult",
    "convergence_experiment",
    "beta_curve",
    "oscillation_report",
    "poisson_limit_report",
    "tightness_diagnostic",
    "write_report",
]

BOOTSTRAP_RESAMPLES = 200
CSV_COLUMNS = ("n", "P_A", "N", "beta", "rho", "rho_pred", "tv", "tv_se", "M")
# stream key reserved for bootstrap resampling, distinct from every n
_BOOTSTRAP_STREAM = 1 << 30


@dataclass
class CellRecord:
    """Results for one cylinder length ``n``."""

    n: int
    prob: float | None = None
    N: int | None = None
    beta: float | None = None
    rho: float | None = None
    rho_pred: float | None = None
    pa_params: tuple[float, float] | None = None
    counts: list[int] | None = None
    tv: float | None = None
    tv_se: float | None = None
    M: int = 0
    error: str | None = None
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def empirical(self) -> DistributionOnN | None:
        if not self.counts:
            return None
        return empirical_distribution(np.repeat(np.arange(len(self.counts)), self.counts))

    @property
    def mean(self) -> float | None:
        if not self.counts:
            return None
        c = np.asarray(self.counts, dtype=float)
        return float(np.arange(c.size) @ c / c.sum())

    @property
    def mean_se(self) -> float | None:
        if not self.counts:
            return None
        c = np.asarray(self.counts, dtype=float)
        k = np.arange(c.size)
        m = k @ c / c.sum()
        var = (k - m) ** 2 @ c / c.sum()
        return float(math.sqrt(var / c.sum()))

    def tail(self, b: int) -> float:
        c = np.asarray(self.counts, dtype=float)
        return float(c[b:].sum() / c.sum())

    def to_dict(self):
        out = asdict(self)
        out["pa_params"] = None if self.pa_params is None else list(self.pa_params)
        out["empirical_pmf"] = None if not self.counts else [c / self.M for c in self.counts]
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data.pop("empirical_pmf", None)
        if data.get("pa_params") is not None:
            data["pa_params"] = tuple(data["pa_params"])
        return cls(**data)


@dataclass
class ExperimentReport:
    kind: str
    model: dict[str, Any]
    block: list[int] | None
    setup: dict[str, Any] | None
    seed: int | None
    params: dict[str, Any] = field(default_factory=dict)
    records: list[CellRecord] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict[str, Any]:
        out = {
            "kind": self.kind,
            "model": self.model,
            "block": self.block,
            "setup": self.setup,
            "seed": self.seed,
            "params": self.params,
            "config_hash": self.config_hash(),
            "records": [r.to_dict() for r in self.records],
            "extras": self.extras,
        }
        if include_timing:
            out["timing"] = self.timing
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return cls(
            kind=data["kind"],
            model=data["model"],
            block=data["block"],
            setup=data["setup"],
            seed=data["seed"],
            params=data.get("params", {}),
            records=[CellRecord.from_dict(r) for r in data.get("records", [])],
            extras=data.get("extras", {}),
            timing=data.get("timing", {}),
        )

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    def config_hash(self) -> str:
        """Short digest of everything that determines the report's content."""
        config = {
            "kind": self.kind,
            "model": self.model,
            "block": self.block,
            "setup": self.setup,
            "seed": self.seed,
            "params": self.params,
        }
        blob = json.dumps(config, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @property
    def file_stem(self) -> str:
        return f"{self.kind}-{self.config_hash()}-seed{self.seed}"

    @property
    def failed(self) -> bool:
        return any(r.error for r in self.records)

    def csv_rows(self) -> tuple[list[str], list[list[Any]]]:
        if "conditionals" in self.extras:
            table = self.extras["conditionals"]
            header = list(table[0].keys()) if table else ["n"]
            return header, [[row[h] for h in header] for row in table]
        rows = [[r.n, r.prob, r.N, r.beta, r.rho, r.rho_pred, r.tv, r.tv_se, r.M] for r in self.records]
        header = list(CSV_COLUMNS)
        if self.kind == "poisson-limit":
            header.append("beta_bound")
            for row, r in zip(rows, self.records):
                row.append(2.0 ** (-(r.n + 1)))
        return header, rows

    def to_csv(self) -> str:
        header, rows = self.csv_rows()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
        return buf.getvalue()


def write_report(report: ExperimentReport, outdir: str | Path, formats: Sequence[str] = ("json", "csv")) -> list[Path]:
    """Write the report as ``<kind>-<hash>-seed<seed>.{json,csv}``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = outdir / f"{report.file_stem}.{fmt}"
        if fmt == "json":
            path.write_text(report.to_json() + "\n")
        elif fmt == "csv":
            path.write_text(report.to_csv())
        else:
            raise ParameterError(f"unknown output format {fmt!r}")
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# convergence


def _bootstrap_tv_se(counts: np.ndarray, target: DistributionOnN, seed: int, n: int, resamples: int) -> float:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_BOOTSTRAP_STREAM, n)))
    M = int(counts.sum())
    pvals = counts / M
    K = max(target.kmax, counts.size - 1)
    q = target.padded(K)
    tvs = np.empty(resamples)
    for i in range(resamples):
        resampled = np.zeros(K + 1)
        resampled[: counts.size] = rng.multinomial(M, pvals) / M
        tvs[i] = 0.5 * np.abs(resampled - q).sum() + 0.5 * target.tail_mass
    return float(tvs.std(ddof=1))


def default_burn_in(model: ShiftModel) -> int:
    return 20 if model.name == "gauss" else 1


def convergence_experiment(
    model,
    block: Sequence[int],
    setup: ReturnSetup,
    n_list: Sequence[int],
    M: int,
    seed: int,
    rho_override: float | None = None,
    workers: int = 1,
    bootstrap: int = BOOTSTRAP_RESAMPLES,
    kind: str = "converge",
) -> ExperimentReport:
    """Empirical law of the count at each ``n`` against ``PA(t(1 - rho), rho)``.

    ``rho`` is the model's closed-form limit unless ``rho_override`` is
    given.  Capacity failures at one ``n`` are recorded on that cell and
    the remaining lengths still run.
    """
    model = model_from_config(model)
    block = as_word(block)
    if M < 1:
        raise ParameterError("M must be >= 1")
    report = ExperimentReport(
        kind=kind,
        model=model.describe(),
        block=list(block),
        setup=setup.to_dict(),
        seed=int(seed),
        params={"n_list": [int(n) for n in n_list], "M": int(M), "rho_override": rho_override, "bootstrap": bootstrap},
    )
    envelope = mean_envelope(model, setup)
    report.extras["mean_envelope"] = envelope
    report.extras["burn_in"] = default_burn_in(model)
    report.timing["created"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    report.timing["cells"] = {}
    for n in n_list:
        t0 = time.perf_counter()
        rec = CellRecord(n=int(n), M=int(M))
        try:
            stats = cluster_stats(model, block, int(n), setup)
            rec.prob, rec.N, rec.beta, rec.rho = stats.prob, stats.trials_N, stats.beta, stats.rho
            rho_w = rho_override if rho_override is not None else stats.predicted_rho
            rec.rho_pred = rho_w
            counts = simulate_counts(model, stats.word, setup, M, seed, stream=(int(n),), workers=workers, N=stats.trials_N)
            hist = np.bincount(counts)
            rec.counts = [int(c) for c in hist]
            if rho_w is not None:
                rec.pa_params = (setup.t * (1.0 - rho_w), rho_w)
                target = polya_aeppli(*rec.pa_params)
                rec.tv = total_variation(rec.empirical, target)
                if bootstrap:
                    rec.tv_se = _bootstrap_tv_se(hist, target, int(seed), int(n), bootstrap)
        except (CapacityError, ProbabilityUnderflow) as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
        report.records.append(rec)
        report.timing["cells"][str(n)] = time.perf_counter() - t0
    return report


def beta_curve(model, block: Sequence[int], n_range: Sequence[int]) -> dict[str, Any]:
    """Exact ``beta_n`` along ``block^inf`` plus the closed-form limit where one exists."""
    model = model_from_config(model)
    block = as_word(block)
    points = [(int(n), beta(model, block, int(n))) for n in n_range]
    try:
        limit = model.jacobian_product(block)
    except NotImplementedError:
        limit = None
    return {"block": list(block), "points": points, "limit": limit}


# ---------------------------------------------------------------------------
# group-model oscillation


def oscillation_report(
    model,
    n_max: int,
    strict: bool = False,
    n_list: Sequence[int] = (),
    t: float = 1.0,
    M: int = 0,
    seed: int = 0,
    workers: int = 1,
) -> ExperimentReport:
    """Exact ``P[s^{n+1}] / P[s^n]`` for ``n = 1..n_max`` against the two partial limits.

    When ``p_h`` is not strictly dominant the two limits coincide; the
    report sets ``degenerate`` and, with ``strict=True``, this is a
    parameter error instead.

    With ``M > 0`` the count law is also simulated at each ``n`` in
    ``n_list`` and compared with both candidate Polya-Aeppli laws.  Those
    comparisons are annotations only: the limit laws along the residue
    classes are not claimed.
    """
    model = model_from_config(model)
    if not isinstance(model, GroupConvolutionModel):
        raise ParameterError("oscillation_report needs a group model")
    if strict and not model.dominant:
        raise ParameterError("no strictly dominant element: the partial limits coincide")
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    limits = model.conditional_limits()
    s = model.s
    rows = []
    for n in range(1, n_max + 1):
        cond = ratio(model, (s,) * (n + 1), (s,) * n)
        cls = model.limit_class(n)
        lim = None if cls is None else limits[cls]
        rows.append(
            {
                "n": n,
                "conditional": cond,
                "class": "" if cls is None else ("b=0" if cls == 0 else "b=N-1"),
                "limit": lim,
                "deviation": None if lim is None else abs(cond - lim),
            }
        )
    report = ExperimentReport(
        kind="oscillate",
        model=model.describe(),
        block=[s],
        setup=None,
        seed=int(seed) if M else None,
        params={"n_max": int(n_max), "n_list": [int(n) for n in n_list], "t": t, "M": int(M)},
    )
    report.extras.update(
        conditionals=rows,
        limits=list(limits),
        degenerate=not model.dominant,
        oscillates=model.dominant,
    )
    if M and n_list:
        setup = ReturnSetup(t)
        sims = convergence_experiment(model, (s,), setup, n_list, M, seed, workers=workers, kind="oscillate")
        candidates = [polya_aeppli(t * (1.0 - b), b) for b in limits]
        for rec in sims.records:
            if rec.counts:
                emp = rec.empirical
                rec.notes["residue"] = (rec.n + model.window - 1) % model.window
                rec.notes["tv_candidates"] = [total_variation(emp, c) for c in candidates]
        report.setup = setup.to_dict()
        report.records = sims.records
        report.extras["mean_envelope"] = sims.extras["mean_envelope"]
        report.timing = sims.timing
    return report


# ---------------------------------------------------------------------------
# successor-model Poisson limit


def poisson_limit_report(
    model,
    n_list: Sequence[int],
    t: float,
    M: int,
    seed: int,
    beta_n_max: int = 20,
    workers: int = 1,
) -> ExperimentReport:
    """Count laws around ``1^inf`` against ``Pois(t)`` plus the exact ``beta_n`` table."""
    model = model_from_config(model)
    if not isinstance(model, SuccessorModel):
        raise ParameterError("poisson_limit_report needs a successor model")
    report = convergence_experiment(
        model, (1,), ReturnSetup(t), n_list, M, seed, rho_override=0.0, workers=workers, kind="poisson-limit"
    )
    table = []
    for n in range(1, beta_n_max + 1):
        b = beta(model, (1,), n)
        exact = model.cylinder_prob((1,) * n)
        closed = ones_closed_form(n)
        table.append(
            {
                "n": n,
                "beta": b,
                "bound": 2.0 ** (-(n + 1)),
                "within_bound": b <= 2.0 ** (-(n + 1)),
                "prob": exact,
                "closed_form_rel_err": abs(exact / closed - 1.0),
            }
        )
    report.params["beta_n_max"] = int(beta_n_max)
    report.extras["beta_table"] = table
    return report


# ---------------------------------------------------------------------------
# tightness


@dataclass
class TightnessResult:
    passed: bool
    mean_checks: list[dict[str, Any]]
    tail_checks: list[dict[str, Any]]
    tail_b: int | None
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def tightness_diagnostic(report: ExperimentReport, eps: float = 0.01, sigmas: float = 5.0) -> TightnessResult:
    """Mean-envelope and tail checks on the simulated count laws of a report.

    Means must stay below ``1 + (1 + psi0)^ell t`` up to ``sigmas`` standard
    errors.  For the ``b`` where the tail at the largest ``n`` first drops
    to ``eps``, every ``mu_n[b, inf)`` must stay below
    ``max(eps, bound / b)`` (Markov's inequality on the mean bound) up to
    ``sigmas`` standard errors.  When ``psi0`` is unknown the mean check is
    skipped and the largest observed mean stands in for the bound.
    """
    recs = [r for r in report.records if r.counts]
    notes = []
    envelope = report.extras.get("mean_envelope")
    mean_checks = []
    for r in recs:
        if envelope is None:
            continue
        margin = envelope + sigmas * r.mean_se - r.mean
        mean_checks.append({"n": r.n, "mean": r.mean, "se": r.mean_se, "envelope": envelope, "margin": margin, "ok": margin >= 0})
    if envelope is None:
        notes.append("psi0 unknown for this model; mean envelope check skipped")
    tail_checks = []
    b = None
    if len(recs) <= 1:
        notes.append("fewer than two simulated lengths; tail check is trivial")
    else:
        last = max(recs, key=lambda r: r.n)
        b = 1
        while last.tail(b) > eps:
            b += 1
        bound = envelope if envelope is not None else max(r.mean + sigmas * r.mean_se for r in recs)
        limit = max(eps, bound / b)
        for r in recs:
            q = r.tail(b)
            se = math.sqrt(max(q * (1 - q), 1.0 / r.M) / r.M)
            tail_checks.append({"n": r.n, "tail": q, "limit": limit, "se": se, "ok": q <= limit + sigmas * se})
    passed = all(c["ok"] for c in mean_checks) and all(c["ok"] for c in tail_checks)
    return TightnessResult(passed, mean_checks, tail_checks, b, notes)
