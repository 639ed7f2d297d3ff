"""Tests for the method-of-moments and update estimators and the MCAR check."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from tfpc.counting import count_tuples
from tfpc.missing import (
    UnderdeterminedSystemError,
    build_mom_system,
    mar_update,
    mcar_diagnostic,
    mom_estimate,
    solve_mom_system,
)
from tfpc.table import CATEGORICAL, NA_CODE, Column, Table, load_csv, make_factor

SIX_ROW_CSV = "U,V\n1,2\n3,2\n3,NA\n3,2\n3,1\n2,2\n"


def codes_table(codes: np.ndarray, n_levels: int) -> Table:
    codes = np.asarray(codes)
    levels = tuple(str(i + 1) for i in range(n_levels))
    return Table(tuple(
        Column(f"c{j}", CATEGORICAL, codes[:, j], levels)
        for j in range(codes.shape[1])
    ))


def forward_observed_distribution(
    truth: dict[tuple[int, ...], Fraction], n_levels: int, q: Fraction
) -> dict[tuple[int, ...], Fraction]:
    """Exact distribution over observed patterns implied by MCAR masking.

    Enumerates every observed pattern (NA_CODE marking a masked cell) and
    sums (1-q)^(p-c) q^c times the probabilities of its completions.
    """
    p = len(next(iter(truth)))
    out: dict[tuple[int, ...], Fraction] = {}
    for observed in itertools.product(*([list(range(n_levels)) + [NA_CODE]] * p)):
        c = sum(1 for v in observed if v == NA_CODE)
        mass = sum(
            (prob for t, prob in truth.items()
             if all(o == NA_CODE or o == v for o, v in zip(observed, t))),
            Fraction(0),
        )
        out[observed] = (1 - q) ** (p - c) * q**c * mass
    return out


def test_mom_symmetric_two_levels():
    # observed proportions a: 0.4, b: 0.4, NA: 0.2 force equal estimates
    codes = np.array([[0]] * 4 + [[1]] * 4 + [[NA_CODE]] * 2)
    est = mom_estimate(codes_table(codes, 2), q=0.2)
    assert est[(0,)] == pytest.approx(0.5, abs=1e-12)
    assert est[(1,)] == pytest.approx(0.5, abs=1e-12)


def test_mom_direct_one_column():
    # (1-q) p_a = 0.6 with q = 0.2 gives p_a = 0.75
    codes = np.array([[0]] * 6 + [[1]] * 2 + [[NA_CODE]] * 2)
    est = mom_estimate(codes_table(codes, 2), q=0.2)
    assert est[(0,)] == pytest.approx(0.75, abs=1e-12)
    assert est[(1,)] == pytest.approx(0.25, abs=1e-12)


def test_mom_recovers_truth_from_exact_proportions():
    truth = {
        (0, 0): Fraction(4, 10),
        (0, 1): Fraction(3, 10),
        (1, 0): Fraction(2, 10),
        (1, 1): Fraction(1, 10),
    }
    q = Fraction(1, 10)
    observed = forward_observed_distribution(truth, 2, q)
    assert sum(observed.values()) == 1
    # every probability is a multiple of 1/1000, so 1000 rows realize it exactly
    rows = []
    for pattern, prob in sorted(observed.items()):
        count = prob * 1000
        assert count.denominator == 1
        rows.extend([list(pattern)] * int(count))
    table = codes_table(np.asarray(rows), 2)
    assert table.n == 1000
    system = build_mom_system(table, q=0.1)
    est = solve_mom_system(system)
    for t, prob in truth.items():
        assert est[t] == pytest.approx(float(prob), abs=1e-9)
    # forward consistency: the fitted vector reproduces the proportions
    x = np.array([est[t] for t in system.candidates])
    assert np.linalg.norm(system.coefficients @ x - system.proportions) < 1e-9


def test_mom_probability_vector_properties():
    rng = np.random.default_rng(21)
    codes = rng.integers(0, 2, size=(500, 2))
    mask = rng.random(codes.shape) < 0.15
    codes[mask] = NA_CODE
    est = mom_estimate(codes_table(codes, 2), q=0.15)
    vals = np.array(list(est.values()))
    assert (vals >= 0).all()
    assert vals.sum() == pytest.approx(1.0, abs=1e-9)


def test_mom_underdetermined_error_names_deficiency():
    codes = np.array([[NA_CODE]] * 4)  # nothing observed: cannot split a from b
    with pytest.raises(UnderdeterminedSystemError, match="deficiency 1"):
        mom_estimate(codes_table(codes, 2), q=0.5)


def test_mom_rejects_bad_q():
    t = codes_table(np.array([[0], [1]]), 2)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError, match="q must"):
            mom_estimate(t, q=bad)


def test_mom_full_space_candidates():
    codes = np.array([[0, 0], [0, 1], [1, 0], [NA_CODE, 0]])
    est = mom_estimate(codes_table(codes, 2), q=0.125, full_space=True)
    assert set(est) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def paper_six_row_table() -> Table:
    t = load_csv(SIX_ROW_CSV)
    return make_factor(t, ["U", "V"], levels={"V": ["1", "2", "3"]})


def test_mar_update_worked_example():
    ft = mar_update(paper_six_row_table())
    expected = {
        ("1", "2"): 1.0,
        ("3", "2"): 2.6,
        ("3", "1"): 1.3,
        ("2", "2"): 1.0,
        ("3", "3"): 0.1,
    }
    got = ft.label_weights()
    assert set(got) == set(expected)
    for k, w in expected.items():
        assert got[k] == pytest.approx(w, abs=1e-9)
    assert ft.total_weight == pytest.approx(6.0, abs=1e-9)
    assert ft.provenance == "estimated"


def test_mar_update_no_incomplete_rows_is_plain_counts():
    t = codes_table(np.array([[0, 1], [0, 1], [1, 0]]), 2)
    assert mar_update(t).as_dict() == count_tuples(t).as_dict()


def test_mar_update_conserves_mass():
    rng = np.random.default_rng(30)
    for _ in range(10):
        n = int(rng.integers(5, 60))
        codes = rng.integers(0, 3, size=(n, 3))
        for i in rng.choice(n, size=n // 4, replace=False):
            codes[i, rng.integers(0, 3)] = NA_CODE
        ft = mar_update(codes_table(codes, 3))
        assert ft.total_weight == pytest.approx(n, abs=1e-9)


def test_mar_update_never_refresh_is_order_independent():
    rng = np.random.default_rng(31)
    codes = rng.integers(0, 2, size=(30, 2))
    for i in range(0, 30, 4):
        codes[i, i % 2] = NA_CODE
    base = mar_update(codes_table(codes, 2), refresh="never").label_weights()
    for seed in (1, 2, 3):
        perm = np.random.default_rng(seed).permutation(30)
        shuffled = mar_update(codes_table(codes[perm], 2), refresh="never").label_weights()
        assert set(shuffled) == set(base)
        for k, w in base.items():
            assert shuffled[k] == pytest.approx(w, abs=1e-9)


def test_mar_update_refresh_policies_differ_when_rows_interact():
    # the first update shifts mass onto (0,0), which the second row's
    # conditional sees only under the per-row refresh policy
    codes = np.array([[0, 0], [1, 0], [0, NA_CODE], [NA_CODE, 0]])
    per_row = mar_update(codes_table(codes, 2), refresh="per_row").as_dict()
    never = mar_update(codes_table(codes, 2), refresh="never").as_dict()
    assert per_row[(0, 0)] == pytest.approx(8 / 3)
    assert per_row[(1, 0)] == pytest.approx(4 / 3)
    assert never[(0, 0)] == pytest.approx(2.5)
    assert never[(1, 0)] == pytest.approx(1.5)
    assert sum(per_row.values()) == pytest.approx(4.0)
    assert sum(never.values()) == pytest.approx(4.0)


def test_mar_update_unsupported_observed_part_spreads_uniformly():
    # no complete case has U=2, so the incomplete row cannot be conditioned
    codes = np.array([[0, 1], [1, NA_CODE]])
    with pytest.warns(UserWarning, match="uniformly"):
        ft = mar_update(codes_table(codes, 2))
    got = ft.as_dict()
    assert got[(1, 0)] == pytest.approx(0.5)
    assert got[(1, 1)] == pytest.approx(0.5)


def test_mar_update_rejects_multi_na_rows():
    codes = np.array([[0, 1, 1], [NA_CODE, NA_CODE, 1]])
    with pytest.raises(ValueError, match="at most one"):
        mar_update(codes_table(codes, 2))


def test_mar_update_rejects_unknown_policy():
    t = codes_table(np.array([[0, 1]]), 2)
    with pytest.raises(ValueError, match="refresh"):
        mar_update(t, refresh="sometimes")


def test_mcar_diagnostic_vocabulary_numbers():
    # q = 0.135 over 13 columns predicts a 15.2% complete-row rate
    assert (1 - 0.135) ** 13 == pytest.approx(0.152, abs=1e-3)


def test_mcar_diagnostic_na_free_table():
    d = mcar_diagnostic(load_csv("a,b\n1,2\n3,4\n"))
    assert d.q == 0.0
    assert d.predicted_complete_rate == 1.0
    assert d.empirical_complete_rate == 1.0


def test_mcar_diagnostic_matches_simulation_under_mcar():
    rng = np.random.default_rng(40)
    n, p, q = 50_000, 5, 0.2
    codes = rng.integers(0, 3, size=(n, p))
    codes[rng.random((n, p)) < q] = NA_CODE
    d = mcar_diagnostic(codes_table(codes, 3))
    assert d.q == pytest.approx(q, abs=0.01)
    assert d.gap < 0.01


def test_mcar_diagnostic_flags_clumped_missingness():
    # all NAs packed into complete wipe-out rows: far from independence
    codes = np.zeros((100, 4), dtype=int)
    codes[:20] = NA_CODE
    d = mcar_diagnostic(codes_table(codes, 1))
    assert d.empirical_complete_rate == pytest.approx(0.8)
    assert d.predicted_complete_rate == pytest.approx(0.8**4)
    assert d.gap > 0.3
