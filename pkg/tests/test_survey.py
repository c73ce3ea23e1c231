import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ptmoment.errors import ScaleError, ValidationError
from ptmoment.linalg import BipartiteState, partial_transpose_matrix
from ptmoment.report import analyze_state
from ptmoment.states import IsingParams, hs_batch
from ptmoment.survey import (
    CRITERIA,
    BudgetQuery,
    budget_value,
    criteria_batch,
    gap_scan,
    ising_sweep,
    relative_gap,
    run_survey,
    sample_complexity,
    survey_row_header,
    write_csv,
    write_json,
)


def test_survey_is_deterministic_and_schedule_free():
    a = run_survey(2, 600, root_seed=5)
    b = run_survey(2, 600, root_seed=5, workers=2)
    assert a.counts == b.counts
    assert a.mean_purity == pytest.approx(b.mean_purity, rel=1e-14)
    c = run_survey(2, 600, root_seed=6)
    assert c.counts != a.counts or c.mean_purity != a.mean_purity


def test_survey_statistics():
    r = run_survey(2, 1000, root_seed=1)
    for k in CRITERIA:
        f = r.fractions[k]
        assert r.stderr[k] == pytest.approx(math.sqrt(f * (1 - f) / 1000))
    # accumulating optimal criteria never detect fewer states than NPT3 or ONPT3
    assert r.counts["npt3"] <= r.counts["onpt3"] <= r.counts["onpt4"] <= r.counts["onpt5"] <= r.counts["npt"]
    assert not any(r.diagnostics.values())


def test_survey_subset_and_validation():
    r = run_survey(3, 100, criteria={"npt", "onpt3"})
    assert set(r.counts) == {"npt", "onpt3"}
    with pytest.raises(ValidationError):
        run_survey(3, 10, criteria={"bogus"})
    with pytest.raises(ValidationError):
        run_survey(1, 10)


def test_batch_criteria_match_per_state_reports():
    D = 3
    rho = hs_batch(D * D, 9, 0, 40)
    x = np.linalg.eigvalsh(partial_transpose_matrix(rho, D, D))
    res = criteria_batch(x)
    for i in range(len(rho)):
        rep = analyze_state(BipartiteState(D, D, rho[i]))
        assert res["negativity"][i] == pytest.approx(rep.negativity, abs=1e-12)
        assert res["n3"][i] == pytest.approx(rep.n3, abs=1e-12)
        assert res["n5"][i] == pytest.approx(rep.n5, abs=1e-12)
        assert res["o3"][i] == pytest.approx(rep.o3, abs=1e-12)
        for key in ("o4", "o5"):
            want = getattr(rep, key)
            if want is None:
                assert np.isnan(res[key][i])
            else:
                assert res[key][i] == pytest.approx(want, abs=1e-11)
        assert {k: bool(v[i]) for k, v in res["detected"].items()} == rep.detected()


def test_rows_and_csv(tmp_path):
    rows = []
    run_survey(2, 30, root_seed=2, rows_out=rows)
    assert [r[0] for r in rows] == list(range(30))
    path = tmp_path / "s.csv"
    write_csv(path, survey_row_header(), rows)
    with open(path) as fh:
        got = list(csv.reader(fh))
    assert got[0] == survey_row_header()
    assert float(got[1][2]) == rows[0][2]  # 17 significant digits round-trip exactly


def test_json_summary(tmp_path):
    r = run_survey(2, 50)
    write_json(tmp_path / "s.json", r.to_dict())
    d = json.loads((tmp_path / "s.json").read_text())
    assert d["counts"] == r.counts and "Philox" in d["prng"]


# --- Ising sweep -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def sweep():
    return ising_sweep(IsingParams(6), np.linspace(0, 8, 9))


def test_sweep_infinite_temperature_row(sweep):
    r = sweep[0]
    for v in (r.n3, r.n5, r.o3, r.negativity):
        assert abs(v) <= 1e-9
    assert r.o4 is not None and abs(r.o4) <= 1e-9


def test_sweep_dominance(sweep):
    for r in sweep:
        if r.n3 > 1e-8:
            assert r.o3 > 0 and r.n5 > 1e-12
        if r.negativity <= 1e-9:
            assert r.n3 <= 1e-9 and r.o3 <= 1e-9
    assert sweep[-1].negativity > 0


def test_sweep_rejects_large_chains():
    with pytest.raises(ScaleError):
        ising_sweep(IsingParams(13), [1.0])
    with pytest.raises(ValidationError):
        ising_sweep(IsingParams(4), [-1.0])


# --- gap between the optimal p3 bound and p2^2 ----------------------------------------


def test_gap_closed_form_points():
    g = relative_gap(np.array([2 / 3, 0.5, 1.0]))
    np.testing.assert_allclose(g, [0.125, 0.0, 0.0], atol=1e-12)


def test_gap_scan_maximum():
    g = gap_scan(10_000)
    assert g.max_gap == pytest.approx(0.125, abs=1e-4)
    assert g.p2_star == pytest.approx(2 / 3, abs=1e-4)
    assert np.all(g.gap >= -1e-12)
    with pytest.raises(ValidationError):
        gap_scan(10)


# --- measurement budget -----------------------------------------------------------------


def test_budget_example():
    assert sample_complexity(BudgetQuery(4, 3, 1.0, 0.1, 0.1)) == 144000


@given(
    st.integers(1, 10),
    st.integers(2, 6),
    st.sampled_from([1.0, 0.5, 0.25, 0.125]),
    st.sampled_from([0.5, 0.25, 0.1, 0.05]),
    st.sampled_from([0.5, 0.1, 0.01]),
)
def test_budget_scaling(N, n, p2, eps, delta):
    q = BudgetQuery(N, n, p2, eps, delta)
    M = budget_value(q)
    assert budget_value(BudgetQuery(N, n, p2, eps / 2, delta)) == 4 * M
    # halving p2 divides the budget by 2^(n-1): by 4 at n = 3, by 2 only at n = 2
    assert budget_value(BudgetQuery(N, n, p2 / 2, eps, delta)) * 2 ** (n - 1) == M
    assert budget_value(BudgetQuery(N + 1, n, p2, eps, delta)) == 2 * M
    assert sample_complexity(q) == math.ceil(M)


@pytest.mark.parametrize("bad", [(4, 3, 1.0, 0.0, 0.1), (4, 3, 1.0, 0.1, 1.0), (4, 3, 1.5, 0.1, 0.1), (0, 3, 1.0, 0.1, 0.1)])
def test_budget_validation(bad):
    with pytest.raises(ValidationError):
        BudgetQuery(*bad)
