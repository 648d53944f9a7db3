"""N-way factorial ANOVA with main effects and two-way interactions.

Factors are effect coded (sum-to-zero), the model is fitted by least
squares and every term's sum of squares is the increase in residual SS
when that term alone is dropped (Type III). Terms left out of the model,
such as a three-way interaction, are pooled into the residual.

Because every column is categorical the fit runs on per-cell sufficient
statistics (count, mean, within-cell SS); this is exact and keeps the
least-squares problem at (occupied cells x parameters) whatever the
number of raw samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from ..errors import (
    EmptyInput,
    InsufficientResidualDf,
    InvalidData,
    InvalidModel,
    RankDeficientDesign,
    ZeroResidualVariance,
)
from .fdist import f_sf

Term = tuple[str, ...]

# SSE at or below this fraction of the data's squared magnitude counts as zero.
_ZERO_SSE_RTOL = 1e-26


@dataclass(frozen=True)
class Observation:
    value: float
    levels: Mapping[str, str]


@dataclass(frozen=True)
class ModelSpec:
    factors: tuple[str, ...]
    terms: tuple[Term, ...]
    # Optional declared levels per factor; a declared level nobody observed
    # makes the design inestimable instead of being silently dropped.
    levels: Mapping[str, Sequence[str]] | None = None

    def __post_init__(self):
        factors = tuple(self.factors)
        if len(set(factors)) != len(factors) or not factors:
            raise InvalidModel(f"factor names must be unique and non-empty: {factors}")
        order = {f: i for i, f in enumerate(factors)}
        terms = []
        for term in self.terms:
            term = (term,) if isinstance(term, str) else tuple(term)
            if not 1 <= len(term) <= 2:
                raise InvalidModel(f"only main effects and two-way interactions: {term}")
            if any(f not in order for f in term) or len(set(term)) != len(term):
                raise InvalidModel(f"term {term} uses unknown or repeated factors")
            terms.append(tuple(sorted(term, key=order.__getitem__)))
        if len(set(terms)) != len(terms):
            raise InvalidModel(f"duplicate terms in {terms}")
        mains = {t[0] for t in terms if len(t) == 1}
        for t in terms:
            if len(t) == 2 and not set(t) <= mains:
                raise InvalidModel(f"interaction {t} needs both main effects in the model")
        if not terms:
            raise InvalidModel("model has no terms")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def pairwise(cls, factors: Sequence[str], levels=None) -> ModelSpec:
        """All main effects plus every two-way interaction."""
        factors = tuple(factors)
        terms = [(f,) for f in factors] + list(combinations(factors, 2))
        return cls(factors, tuple(terms), levels)


def term_name(term: Term) -> str:
    return ":".join(term)


@dataclass(frozen=True)
class AnovaRow:
    term: str
    df: int
    ss: float
    ms: float
    f: float
    p: float


@dataclass(frozen=True)
class ResidualRow:
    df: int
    ss: float
    ms: float


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple[AnovaRow, ...]
    residual: ResidualRow
    n_obs: int
    ss_total: float

    def row(self, term: str | Term) -> AnovaRow:
        name = term if isinstance(term, str) else term_name(term)
        for r in self.rows:
            if r.term == name:
                return r
        raise KeyError(name)

    @property
    def dfs(self) -> tuple[int, ...]:
        return tuple(r.df for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "n_obs": self.n_obs,
            "rows": [
                {"term": r.term, "df": r.df, "ss": r.ss, "ms": r.ms, "f": r.f, "p": r.p}
                for r in self.rows
            ],
            "residual": {"df": self.residual.df, "ss": self.residual.ss, "ms": self.residual.ms},
            "ss_total": self.ss_total,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def format_text(self) -> str:
        head = ("Source of Variation", "df", "SS", "MS", "F", "P")
        body = [
            (r.term, str(r.df), f"{r.ss:.4f}", f"{r.ms:.4f}", f"{r.f:.2f}", _format_p(r.p))
            for r in self.rows
        ]
        body.append(("Residual", str(self.residual.df), f"{self.residual.ss:.4f}",
                     f"{self.residual.ms:.4f}", "", ""))
        widths = [max(len(row[i]) for row in [head, *body]) for i in range(len(head))]
        lines = []
        for row in [head, *body]:
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
        return "\n".join(lines) + "\n"


def _format_p(p: float) -> str:
    return "<0.001" if p < 0.001 else f"{p:.4f}"


def _effect_block(codes: np.ndarray, n_levels: int) -> np.ndarray:
    """Sum-to-zero coding: the last level is -1 in every column."""
    block = np.zeros((codes.size, n_levels - 1))
    for j in range(n_levels - 1):
        block[codes == j, j] = 1.0
    block[codes == n_levels - 1, :] = -1.0
    return block


def _term_block(term: Term, blocks: Mapping[str, np.ndarray]) -> np.ndarray:
    if len(term) == 1:
        return blocks[term[0]]
    a, b = (blocks[f] for f in term)
    return (a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)


def _fitted(xw: np.ndarray, yw: np.ndarray) -> tuple[np.ndarray, int]:
    beta, _, rank, _ = np.linalg.lstsq(xw, yw, rcond=None)
    return xw @ beta, int(rank)


def fit_anova_columns(
    values: Sequence[float],
    factors: Mapping[str, Sequence],
    spec: ModelSpec,
) -> AnovaTable:
    """Fit ``spec`` to a response vector with one label column per factor."""
    y = np.asarray(values, dtype=float)
    n = y.size
    if n == 0:
        raise EmptyInput("ANOVA needs at least one observation")
    if not np.all(np.isfinite(y)):
        raise InvalidData("observations must be finite")

    codes = []
    n_levels = {}
    for name in spec.factors:
        if name not in factors:
            raise InvalidModel(f"no column for factor {name!r}")
        labels = np.asarray([str(v) for v in factors[name]])
        if labels.size != n:
            raise InvalidModel(f"factor {name!r} has {labels.size} labels for {n} values")
        observed = sorted(set(labels.tolist()))
        declared = [str(v) for v in spec.levels[name]] if spec.levels and name in spec.levels else observed
        unknown = set(observed) - set(declared)
        if unknown:
            raise InvalidData(f"factor {name!r} has undeclared levels {sorted(unknown)}")
        missing = [lv for lv in declared if lv not in observed]
        if missing:
            raise RankDeficientDesign(f"factor {name!r} level(s) {missing} have no observations")
        if len(declared) < 2:
            raise RankDeficientDesign(f"factor {name!r} needs at least two levels, has {declared}")
        index = {lv: i for i, lv in enumerate(declared)}
        codes.append(np.fromiter((index[v] for v in labels.tolist()), dtype=np.int64, count=n))
        n_levels[name] = len(declared)

    # Collapse to occupied cells.
    cells, inverse = np.unique(np.stack(codes, axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    counts = np.bincount(inverse).astype(float)
    center = math.fsum(y.tolist()) / n
    yc = y - center
    cell_mean = np.bincount(inverse, weights=yc) / counts
    ss_within = float(np.sum((yc - cell_mean[inverse]) ** 2))
    ss_total = float(np.sum(yc ** 2))

    blocks = {name: _effect_block(cells[:, i], n_levels[name]) for i, name in enumerate(spec.factors)}
    term_blocks = [_term_block(t, blocks) for t in spec.terms]
    weights = np.sqrt(counts)
    x_full = np.hstack([np.ones((cells.shape[0], 1))] + term_blocks) * weights[:, None]
    yw = cell_mean * weights
    p = x_full.shape[1]

    fit_full, rank = _fitted(x_full, yw)
    if rank < p:
        raise RankDeficientDesign(
            f"design has rank {rank} < {p} parameters; some term is not estimable "
            f"from the {cells.shape[0]} occupied cells"
        )
    df_resid = n - p
    if df_resid < 1:
        raise InsufficientResidualDf(f"{n} observations leave no residual df for {p} parameters")
    sse = ss_within + float(np.sum((yw - fit_full) ** 2))
    scale = float(np.sum(y ** 2))
    if sse <= _ZERO_SSE_RTOL * scale:
        raise ZeroResidualVariance("residual sum of squares is zero; F is undefined")
    ms_resid = sse / df_resid

    rows = []
    offsets = np.cumsum([1] + [b.shape[1] for b in term_blocks])
    for k, term in enumerate(spec.terms):
        keep = np.ones(p, dtype=bool)
        keep[offsets[k]:offsets[k + 1]] = False
        fit_reduced, _ = _fitted(x_full[:, keep], yw)
        # ||fit_full - fit_reduced||^2 equals SSE(reduced) - SSE(full) without the cancellation.
        ss = float(np.sum((fit_full - fit_reduced) ** 2))
        df = int(offsets[k + 1] - offsets[k])
        ms = ss / df
        f = ms / ms_resid
        rows.append(AnovaRow(term_name(term), df, ss, ms, f, f_sf(f, df, df_resid)))
    return AnovaTable(tuple(rows), ResidualRow(df_resid, sse, ms_resid), n, ss_total)


def fit_factorial_anova(observations: Sequence[Observation], spec: ModelSpec) -> AnovaTable:
    if not observations:
        raise EmptyInput("ANOVA needs at least one observation")
    names = set(observations[0].levels)
    for obs in observations:
        if set(obs.levels) != names:
            raise InvalidModel("every observation must carry the same factor names")
    columns = {f: [obs.levels[f] for obs in observations] for f in spec.factors if f in names}
    return fit_anova_columns([obs.value for obs in observations], columns, spec)
