import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gripforce.errors import (
    EmptyInput,
    InsufficientResidualDf,
    InvalidData,
    InvalidModel,
    RankDeficientDesign,
    ZeroResidualVariance,
)
from gripforce.stats import (
    ModelSpec,
    Observation,
    f_sf,
    fit_anova_columns,
    fit_factorial_anova,
)

from .oracles import balanced_columns, definitional_anova


def test_one_way_example():
    values = [1, 2, 3, 4, 5, 6]
    table = fit_anova_columns(values, {"g": ["a", "a", "a", "b", "b", "b"]}, ModelSpec(("g",), (("g",),)))
    row = table.row("g")
    # group means 2 and 5, grand mean 3.5: SSb = 6 * 1.5^2 = 13.5, SSw = 2 + 2
    assert row.df == 1 and table.residual.df == 4
    assert row.ss == pytest.approx(13.5, rel=1e-12)
    assert table.residual.ss == pytest.approx(4.0, rel=1e-12)
    assert row.f == pytest.approx(13.5, rel=1e-12)
    assert row.p == pytest.approx(f_sf(13.5, 1, 4), rel=1e-12)


def test_additive_two_by_two_has_no_interaction():
    rng = np.random.default_rng(0)
    noise = rng.normal(0, 1, (2, 2, 5))
    y = 10 + np.array([0, 3])[:, None, None] + np.array([0, -2])[None, :, None] + noise
    # remove interaction from the noise so the cell means are exactly additive
    cell = noise.mean(axis=2, keepdims=True)
    inter = cell - cell.mean(axis=0, keepdims=True) - cell.mean(axis=1, keepdims=True) + cell.mean()
    y = y - inter
    values, cols = balanced_columns(y, ["a", "b"])
    table = fit_anova_columns(values, cols, ModelSpec.pairwise(["a", "b"]))
    assert table.row("a:b").ss == pytest.approx(0.0, abs=1e-9)
    assert table.row("a:b").f == pytest.approx(0.0, abs=1e-9)


def test_time_model_shape():
    rng = np.random.default_rng(1)
    y = rng.normal(100, 20, (3, 2, 10))
    values, cols = balanced_columns(y, ["user", "handedness"])
    table = fit_anova_columns(values, cols, ModelSpec.pairwise(["user", "handedness"]))
    assert table.dfs == (2, 1, 2)
    assert table.residual.df == 54


def test_force_model_shape():
    rng = np.random.default_rng(2)
    y = rng.normal(500, 50, (3, 2, 12, 4))
    values, cols = balanced_columns(y, ["user", "handedness", "sensor"])
    table = fit_anova_columns(values, cols, ModelSpec.pairwise(["user", "handedness", "sensor"]))
    assert table.dfs == (2, 1, 11, 2, 22, 11)
    assert [r.term for r in table.rows] == [
        "user", "handedness", "sensor", "user:handedness", "user:sensor", "handedness:sensor"]
    # the three-way interaction (22 df) sits in the residual
    assert table.residual.df == y.size - 1 - sum(table.dfs)


def test_constant_response():
    values, cols = balanced_columns(np.full((2, 2, 3), 7.0), ["a", "b"])
    with pytest.raises(ZeroResidualVariance):
        fit_anova_columns(values, cols, ModelSpec.pairwise(["a", "b"]))


def test_missing_cell_is_rank_deficient():
    values, cols = balanced_columns(np.arange(12.0).reshape(2, 2, 3), ["a", "b"])
    keep = [i for i in range(12) if not (cols["a"][i] == "a1" and cols["b"][i] == "b1")]
    values = [values[i] for i in keep]
    cols = {k: [v[i] for i in keep] for k, v in cols.items()}
    with pytest.raises(RankDeficientDesign):
        fit_anova_columns(values, cols, ModelSpec.pairwise(["a", "b"]))
    # without the interaction the same data are fine
    fit_anova_columns(values, cols, ModelSpec(("a", "b"), (("a",), ("b",))))


def test_declared_level_without_data():
    spec = ModelSpec(("g",), (("g",),), levels={"g": ["x", "y", "z"]})
    with pytest.raises(RankDeficientDesign):
        fit_anova_columns([1, 2, 3, 4], {"g": ["x", "x", "y", "y"]}, spec)
    with pytest.raises(InvalidData):
        fit_anova_columns([1, 2], {"g": ["x", "w"]}, spec)


def test_single_level_factor():
    with pytest.raises(RankDeficientDesign):
        fit_anova_columns([1, 2, 3], {"g": ["x"] * 3}, ModelSpec(("g",), (("g",),)))


def test_no_residual_df():
    values, cols = balanced_columns(np.arange(4.0).reshape(2, 2, 1), ["a", "b"])
    with pytest.raises(InsufficientResidualDf):
        fit_anova_columns(values, cols, ModelSpec.pairwise(["a", "b"]))


def test_model_validation():
    with pytest.raises(InvalidModel):
        ModelSpec(("a", "b"), (("a", "b"),))
    with pytest.raises(InvalidModel):
        ModelSpec(("a", "b", "c"), (("a",), ("b",), ("c",), ("a", "b", "c")))
    with pytest.raises(InvalidModel):
        ModelSpec(("a",), (("z",),))
    with pytest.raises(InvalidModel):
        fit_anova_columns([1, 2, 3], {"a": ["x", "y"]}, ModelSpec(("a",), (("a",),)))
    with pytest.raises(EmptyInput):
        fit_anova_columns([], {"a": []}, ModelSpec(("a",), (("a",),)))


def test_observation_interface_matches_columns():
    rng = np.random.default_rng(3)
    y = rng.normal(0, 1, (2, 3, 4))
    values, cols = balanced_columns(y, ["a", "b"])
    obs = [Observation(v, {"a": cols["a"][i], "b": cols["b"][i]}) for i, v in enumerate(values)]
    spec = ModelSpec.pairwise(["a", "b"])
    assert fit_factorial_anova(obs, spec) == fit_anova_columns(values, cols, spec)


def test_unbalanced_main_effects_are_type3():
    # hand-checked 2x2 with unequal cell sizes; Type III SS for "a" equals the
    # SS of the contrast of unweighted marginal means.
    cells = {("a0", "b0"): [1, 2], ("a0", "b1"): [4, 5, 6], ("a1", "b0"): [7], ("a1", "b1"): [9, 11, 13, 15]}
    values, ca, cb = [], [], []
    for (a, b), vs in cells.items():
        values += vs
        ca += [a] * len(vs)
        cb += [b] * len(vs)
    table = fit_anova_columns(values, {"a": ca, "b": cb}, ModelSpec.pairwise(["a", "b"]))
    means = {k: np.mean(v) for k, v in cells.items()}
    n = {k: len(v) for k, v in cells.items()}
    contrast = (means["a0", "b0"] + means["a0", "b1"] - means["a1", "b0"] - means["a1", "b1"]) / 2
    var_factor = sum(0.25 / n[k] for k in n)
    assert table.row("a").ss == pytest.approx(contrast ** 2 / var_factor, rel=1e-10)


def test_text_and_json():
    values, cols = balanced_columns(np.arange(24.0).reshape(2, 3, 4) ** 1.5, ["a", "b"])
    table = fit_anova_columns(values, cols, ModelSpec.pairwise(["a", "b"]))
    text = table.format_text()
    assert text.splitlines()[0].startswith("Source of Variation")
    assert "Residual" in text
    data = json.loads(table.to_json())
    assert [r["df"] for r in data["rows"]] == [1, 2, 2]


balanced_shape = st.tuples(st.integers(2, 4), st.integers(2, 3), st.integers(2, 3), st.integers(2, 4))


@settings(max_examples=40, deadline=None)
@given(balanced_shape, st.integers(0, 2**32 - 1))
def test_matches_definitional_oracle(shape, seed):
    y = np.random.default_rng(seed).normal(0, 3, shape)
    names = ["a", "b", "c"]
    values, cols = balanced_columns(y, names)
    table = fit_anova_columns(values, cols, ModelSpec.pairwise(names))
    ref, (df_res, ss_res), ss_total = definitional_anova(y)
    for axes, (df, ss, f) in ref.items():
        row = table.row(tuple(names[a] for a in axes))
        assert row.df == df
        assert row.ss == pytest.approx(ss, rel=1e-9, abs=1e-12)
        assert row.f == pytest.approx(f, rel=1e-9, abs=1e-12)
    assert table.residual.df == df_res
    assert table.residual.ss == pytest.approx(ss_res, rel=1e-9)
    # balanced: terms plus residual partition the total
    assert sum(r.ss for r in table.rows) + table.residual.ss == pytest.approx(ss_total, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1e4, 1e4), st.floats(1e-3, 1e3))
def test_shift_and_scale_invariance(seed, shift, scale):
    y = np.random.default_rng(seed).normal(5, 2, (3, 2, 4))
    values, cols = balanced_columns(y, ["a", "b"])
    spec = ModelSpec.pairwise(["a", "b"])
    base = fit_anova_columns(values, cols, spec)
    moved = fit_anova_columns([scale * v + shift for v in values], cols, spec)
    for r0, r1 in zip(base.rows, moved.rows):
        assert r1.f == pytest.approx(r0.f, rel=1e-6)
        assert r1.p == pytest.approx(r0.p, rel=1e-6, abs=1e-12)
        assert r1.ss == pytest.approx(scale ** 2 * r0.ss, rel=1e-6)


def test_p_decreases_with_f():
    rng = np.random.default_rng(7)
    noise = rng.normal(0, 1, (2, 10))
    rows = []
    for effect in (0.0, 0.5, 1.0, 2.0, 4.0):
        y = noise + np.array([0.0, effect])[:, None]
        values, cols = balanced_columns(y, ["g"])
        rows.append(fit_anova_columns(values, cols, ModelSpec(("g",), (("g",),))).row("g"))
    rows.sort(key=lambda r: r.f)
    assert all(a.p > b.p for a, b in zip(rows, rows[1:]))
