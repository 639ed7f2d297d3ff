"""Frequency estimation that uses rows with missing cells, not just intact ones.

Two estimators over all-discrete tables:

- Method of moments, assuming missingness completely at random with per-cell
  probability q: the chance of observing pattern t' with c missing cells is
  (1-q)^(p-c) q^c times the total probability of the intact patterns it could
  have come from. Equating those to observed-pattern proportions gives a
  linear system in the intact-pattern probabilities, solved least-squares
  under a sum-to-one constraint, then clipped to nonnegative and renormalized.

- An update method, assuming missingness at random (it may depend on observed
  cells only): starting from intact-case counts, each row with one missing
  cell distributes unit mass over the possible values v of its missing column
  in proportion to P(missing | observed) * P(observed, v) / P(missing, observed),
  estimated from the data; leftover probability goes uniformly to levels with
  no support in the frequency table so the conditional sums to one.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .counting import ESTIMATED, FrequencyTable, Pattern, _aggregate, _codes_matrix
from .table import NA_CODE, Table

ObservedPattern = tuple[int, ...]  # level codes, NA_CODE marking missing cells

_CANDIDATE_CAP = 200_000


class UnderdeterminedSystemError(ValueError):
    """Fewer independent moment equations than unknown pattern probabilities."""


@dataclass(frozen=True)
class MoMSystem:
    """The linear system relating observed-pattern proportions to unknowns.

    One equation per distinct observed pattern: coefficients[i, j] multiplies
    the probability of candidate pattern j, and proportions[i] is the
    empirical share of observed pattern i. The sum-to-one constraint is
    applied at solve time, not stored as a row.
    """

    observed: tuple[ObservedPattern, ...]
    candidates: tuple[Pattern, ...]
    coefficients: np.ndarray
    proportions: np.ndarray

    def matches(self, observed: ObservedPattern) -> list[Pattern]:
        """Candidates agreeing with `observed` on all its non-missing cells."""
        obs = np.asarray(observed)
        cand = np.asarray(self.candidates)
        ok = ((obs == NA_CODE) | (cand == obs)).all(axis=1)
        return [self.candidates[j] for j in np.flatnonzero(ok)]


def _observed_proportions(codes: np.ndarray) -> tuple[list[ObservedPattern], np.ndarray]:
    uniq, counts = _aggregate(codes, np.ones(codes.shape[0]))
    pairs = sorted(
        (tuple(int(v) for v in row), float(c)) for row, c in zip(uniq, counts)
    )
    patterns = [t for t, _ in pairs]
    props = np.array([c for _, c in pairs]) / codes.shape[0]
    return patterns, props


def _candidate_patterns(
    observed: list[ObservedPattern], level_counts: list[int], full_space: bool
) -> list[Pattern]:
    if full_space:
        total = 1
        for lc in level_counts:
            total *= lc
        if total > _CANDIDATE_CAP:
            raise ValueError(
                f"full pattern space has {total} tuples, over the cap of {_CANDIDATE_CAP}"
            )
        return list(itertools.product(*(range(lc) for lc in level_counts)))
    out: set[Pattern] = set()
    for t in observed:
        missing = [j for j, v in enumerate(t) if v == NA_CODE]
        count = 1
        for j in missing:
            count *= level_counts[j]
        if len(out) + count > _CANDIDATE_CAP:
            raise ValueError(
                f"candidate pattern set exceeds the cap of {_CANDIDATE_CAP}; "
                "pass an explicit candidate set"
            )
        for combo in itertools.product(*(range(level_counts[j]) for j in missing)):
            filled = list(t)
            for j, v in zip(missing, combo):
                filled[j] = v
            out.add(tuple(filled))
    return sorted(out)


def build_mom_system(
    table: Table,
    q: float,
    candidates: list[Pattern] | None = None,
    full_space: bool = False,
) -> MoMSystem:
    """Assemble the moment equations for an all-discrete table.

    Candidates default to every pattern reachable by completing an observed
    row; `full_space` switches to the full cross product of level sets
    (practical only for small tables).
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie strictly between 0 and 1, got {q}")
    codes = _codes_matrix(table).astype(np.int64)
    p = table.p
    observed, props = _observed_proportions(codes)
    level_counts = [len(c.levels) for c in table.columns]
    if candidates is None:
        cand = _candidate_patterns(observed, level_counts, full_space)
    else:
        cand = sorted(set(candidates))
    cand_arr = np.asarray(cand, dtype=np.int64).reshape(len(cand), p)
    coeff = np.zeros((len(observed), len(cand)))
    for i, t in enumerate(observed):
        obs = np.asarray(t)
        c = int((obs == NA_CODE).sum())
        member = ((obs == NA_CODE) | (cand_arr == obs)).all(axis=1)
        coeff[i, member] = (1.0 - q) ** (p - c) * q**c
    return MoMSystem(tuple(observed), tuple(cand), coeff, props)


def solve_mom_system(system: MoMSystem) -> dict[Pattern, float]:
    """Least-squares solve under the sum-to-one constraint.

    Negative estimates are clipped to zero and the vector renormalized, so
    the result is a probability vector over the candidate patterns.
    """
    a = system.coefficients
    b = system.proportions
    m = len(system.candidates)
    rank = np.linalg.matrix_rank(np.vstack([a, np.ones(m)]))
    if rank < m:
        raise UnderdeterminedSystemError(
            f"system rank {rank} is below the {m} unknowns (deficiency {m - rank}); "
            "more observed patterns or a smaller candidate set needed"
        )
    # Eliminate the constraint: x = x0 + N z with 1'x0 = 1 and N spanning
    # the sum-zero subspace, then solve the unconstrained problem in z.
    x0 = np.full(m, 1.0 / m)
    nullspace = scipy.linalg.null_space(np.ones((1, m)))
    z, *_ = np.linalg.lstsq(a @ nullspace, b - a @ x0, rcond=None)
    x = x0 + nullspace @ z
    x = np.clip(x, 0.0, None)
    total = x.sum()
    if total <= 0:
        raise ValueError("estimation collapsed to the zero vector")
    x /= total
    return {t: float(v) for t, v in zip(system.candidates, x)}


def mom_estimate(
    table: Table,
    q: float,
    candidates: list[Pattern] | None = None,
    full_space: bool = False,
) -> dict[Pattern, float]:
    """Estimate intact-pattern probabilities from all rows, assuming MCAR."""
    return solve_mom_system(build_mom_system(table, q, candidates, full_space))


def mar_update(table: Table, refresh: str = "per_row") -> FrequencyTable:
    """Frequency table that spreads each incomplete row's mass over completions.

    Starts from intact-case counts, then processes rows with exactly one
    missing cell in row order; each adds total mass 1. With refresh="per_row"
    the growing table feeds later rows' estimates; with refresh="never" every
    row sees only the intact-case table, making the result independent of row
    order. Rows with two or more missing cells are not supported.
    """
    if refresh not in ("per_row", "never"):
        raise ValueError(f"unknown refresh policy {refresh!r}")
    codes = _codes_matrix(table).astype(np.int64)
    n, p = codes.shape
    na_counts = (codes == NA_CODE).sum(axis=1)
    if int(na_counts.max(initial=0)) > 1:
        bad = int(np.flatnonzero(na_counts > 1)[0])
        raise ValueError(
            f"row {bad} has {int(na_counts[bad])} missing cells; "
            "the update method handles at most one per row"
        )

    intact = codes[na_counts == 0]
    uniq, counts = _aggregate(intact, np.ones(intact.shape[0]))
    working: dict[Pattern, float] = {
        tuple(int(v) for v in row): float(c) for row, c in zip(uniq, counts)
    }
    total = float(intact.shape[0])
    baseline = dict(working)
    baseline_total = total

    deferred: list[tuple[Pattern, float]] = []
    for r in np.flatnonzero(na_counts == 1):
        row = codes[r]
        v_col = int(np.flatnonzero(row == NA_CODE)[0])
        u_cols = [j for j in range(p) if j != v_col]
        match_u = (codes[:, u_cols] == row[u_cols]).all(axis=1)
        u_count = int(match_u.sum())
        missing_count = int((match_u & (codes[:, v_col] == NA_CODE)).sum())
        if missing_count == 0:
            raise RuntimeError(
                f"row {r} counts as incomplete but no matching missing row found"
            )
        p_m_given_u = missing_count / u_count
        p_m_and_u = missing_count / n

        ref = working if refresh == "per_row" else baseline
        ref_total = total if refresh == "per_row" else baseline_total
        n_levels = len(table.columns[v_col].levels)
        masses = np.zeros(n_levels)
        for v in range(n_levels):
            pattern = tuple(int(x) for x in row)
            pattern = pattern[:v_col] + (v,) + pattern[v_col + 1:]
            joint = ref.get(pattern, 0.0)
            if ref_total > 0 and joint > 0:
                masses[v] = p_m_given_u * (joint / ref_total) / p_m_and_u
        supported = masses > 0
        span = float(masses.sum())
        if span == 0.0:
            warnings.warn(
                f"no frequency-table support for row {r}'s observed cells; "
                "spreading its mass uniformly"
            )
            masses[:] = 1.0 / n_levels
        elif (~supported).any() and span < 1.0:
            masses[~supported] = (1.0 - span) / int((~supported).sum())
        else:
            masses /= span

        for v in range(n_levels):
            if masses[v] == 0.0:
                continue
            pattern = tuple(int(x) for x in row)
            pattern = pattern[:v_col] + (v,) + pattern[v_col + 1:]
            if refresh == "per_row":
                working[pattern] = working.get(pattern, 0.0) + float(masses[v])
            else:
                deferred.append((pattern, float(masses[v])))
        total += 1.0

    for pattern, mass in deferred:
        working[pattern] = working.get(pattern, 0.0) + mass

    patterns = sorted(working)
    out_codes = np.asarray(patterns, dtype=np.int64).reshape(len(patterns), p)
    out_weights = np.asarray([working[t] for t in patterns])
    return FrequencyTable(
        table.names,
        tuple(c.levels for c in table.columns),
        out_codes,
        out_weights,
        ESTIMATED,
    )


@dataclass(frozen=True)
class McarDiagnostic:
    """Predicted vs. empirical complete-row rate; a large gap flags clumping."""

    q: float
    predicted_complete_rate: float
    empirical_complete_rate: float

    @property
    def gap(self) -> float:
        return abs(self.predicted_complete_rate - self.empirical_complete_rate)


def mcar_diagnostic(table: Table) -> McarDiagnostic:
    """Compare the MCAR-implied complete-row rate (1-q)^p with the actual rate."""
    mask = table.na_mask()
    q = float(mask.mean())
    predicted = (1.0 - q) ** table.p
    empirical = float((~mask.any(axis=1)).mean())
    return McarDiagnostic(q, predicted, empirical)
