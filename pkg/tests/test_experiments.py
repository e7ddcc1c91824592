import json
import math

import numpy as np
import pytest

from radon_gap.experiments import (
    CSV_HEADER,
    GapExperimentConfig,
    GapExperimentRow,
    build_machine,
    emit_csv,
    preset,
    run_gap_experiment,
)
from radon_gap.kernel import SpecError
from radon_gap.radon import rtv2_single_center


@pytest.fixture(scope="module")
def d1_rows():
    return run_gap_experiment(preset("d1"))


def test_default_config():
    c = GapExperimentConfig()
    assert (c.d, c.eps, c.sigma, c.inner_tol) == (1, 0.5, 1.0, 1e-8)
    assert c.eta == c.eta0 == pytest.approx(math.sqrt(3) / 2)
    assert c.n_list == [1, 2, 4, 8, 16, 32, 64]
    assert preset("d3").d == 3
    with pytest.raises(SpecError):
        preset("d9")


@pytest.mark.parametrize(
    "doc",
    [{"n_list": []}, {"n_list": [2, 1]}, {"eps": 0.7}, {"eta": 0.5}, {"normalization": "x"}, {"bogus": 1}, {"coeffs": [1.0]}],
)
def test_config_rejects(doc):
    with pytest.raises(SpecError):
        GapExperimentConfig.from_dict(doc)


def test_config_even_dimension_is_domain_error():
    with pytest.raises(ValueError, match="odd dimension") as info:
        GapExperimentConfig(d=2)
    assert not isinstance(info.value, SpecError)


def test_config_json_roundtrip(tmp_path):
    c = GapExperimentConfig(d=3, n_list=[1, 3], resolution=4, seed=5)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(c.to_dict()))
    assert GapExperimentConfig.from_json(p).to_dict() == c.to_dict()
    p.write_text("{\n  \"d\": 3,\n}")
    with pytest.raises(SpecError, match="line 3"):
        GapExperimentConfig.from_json(p)


def test_build_machine_centers():
    machine, seq, cert = build_machine(GapExperimentConfig(n_list=[1, 5]))
    assert len(machine) == 5 and seq.rule == "harmonic"
    np.testing.assert_allclose(np.diff(machine.centers[:, 0]), cert.delta, rtol=1e-14)


def test_gap_rows_d1(d1_rows):
    rows = d1_rows
    assert [r.n for r in rows] == [1, 2, 4, 8, 16, 32, 64]
    v = [r.rtv2_value for r in rows]
    assert all(b > a for a, b in zip(v, v[1:]))
    k = [r.rkhs_norm_sq for r in rows]
    assert all(b > a for a, b in zip(k, k[1:]))
    assert all(r.rkhs_norm_sq <= r.rkhs_upper_bound for r in rows)
    assert all(r.rtv2_value + 3 * r.rtv2_error >= r.rtv2_lower_bound for r in rows)
    assert rows[-1].rtv2_value / rows[0].rtv2_value >= 2
    assert rows[-1].l1_norm > 4


def test_first_row_matches_single_center(d1_rows):
    r = d1_rows[0]
    machine, _, _ = build_machine(preset("d1"))
    assert r.rtv2_value == pytest.approx(rtv2_single_center(machine.metric), abs=3 * r.rtv2_error)


def test_unit_amplitude_scales_value_and_bound():
    base = run_gap_experiment(GapExperimentConfig(n_list=[1, 4]))
    unit = run_gap_experiment(GapExperimentConfig(n_list=[1, 4], normalization="unit-amplitude"))
    for a, b in zip(base, unit):
        assert b.rtv2_value / a.rtv2_value == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
        assert b.rtv2_lower_bound / a.rtv2_lower_bound == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)


def test_explicit_coefficients_have_no_rkhs_bound():
    rows = run_gap_experiment(GapExperimentConfig(n_list=[1, 2], coeffs=[1.0, -1.0]))
    assert math.isnan(rows[0].rkhs_upper_bound)
    assert rows[1].l1_norm == 2.0


def test_emit_csv_shapes(tmp_path):
    p = tmp_path / "empty.csv"
    emit_csv([], p)
    assert p.read_text() == ",".join(CSV_HEADER) + "\n"
    rows = [GapExperimentRow(i, 0.1 * i, 1 / 3, 1.0, 2.0, 1e-9, 0.5) for i in range(1, 4)]
    emit_csv(rows, p)
    text = p.read_text()
    assert text.endswith("\n") and len(text.splitlines()) == 4
    assert text.splitlines()[1].split(",")[2] == repr(1 / 3)
    with pytest.raises(OSError, match="cannot write"):
        emit_csv(rows, tmp_path / "no" / "such" / "dir.csv")


def test_csv_deterministic(tmp_path):
    c = GapExperimentConfig(n_list=[1, 2, 8])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(run_gap_experiment(c), a)
    emit_csv(run_gap_experiment(c), b)
    assert a.read_bytes() == b.read_bytes()


def test_small_d3_run():
    rows = run_gap_experiment(GapExperimentConfig(d=3, n_list=[1, 2], resolution=6))
    assert rows[1].rtv2_value > rows[0].rtv2_value
    assert all(r.rtv2_value + 3 * r.rtv2_error >= r.rtv2_lower_bound for r in rows)
