import math

import numpy as np
import pytest

from geoops.errors import GeoOpsError
from geoops.featureset import GoConfig
from geoops.sensitivity import (GO_QOIS, SCALAR, VECTOR, SobolReport, compare_index_vectors,
                                comparison_table, go_sensitivity_study, index_mse, saltelli_design,
                                select_features, sobol_indices_scalar, sobol_indices_vector)
from geoops.shapes import AirfoilParams, generate_airfoil


def ishigami(x, a=7.0, b=0.1):
    x = -math.pi + 2.0 * math.pi * x
    return np.sin(x[..., 0]) + a * np.sin(x[..., 1]) ** 2 + b * x[..., 2] ** 4 * np.sin(x[..., 0])


def evaluate(design, func):
    return design.split(func(design.evaluation_rows()))


def freeze_fifth(row):
    row = np.array(row, dtype=float)
    row[4] = 0.5
    return generate_airfoil(AirfoilParams(tuple(row)), 64)


# =========================
# Sampling
# =========================
def test_design_shape():
    design = saltelli_design(3, 128, seed=0)
    assert design.evaluation_rows().shape == (640, 3)
    A, B, AB = design.split(design.evaluation_rows())
    np.testing.assert_array_equal(A, design.A)
    np.testing.assert_array_equal(AB[1][:, 1], design.B[:, 1])
    np.testing.assert_array_equal(AB[1][:, 0], design.A[:, 0])


def test_design_is_seeded():
    a, b = saltelli_design(4, 64, 5), saltelli_design(4, 64, 5)
    np.testing.assert_array_equal(a.evaluation_rows(), b.evaluation_rows())
    assert not np.array_equal(a.A, saltelli_design(4, 64, 6).A)


def test_design_needs_enough_rows():
    with pytest.raises(GeoOpsError):
        saltelli_design(3, 32, 0)


# =========================
# Estimators
# =========================
def test_ishigami_indices():
    fA, fB, fAB = evaluate(saltelli_design(3, 2 ** 14, seed=1), ishigami)
    rep = sobol_indices_scalar(fA, fB, fAB)
    assert rep.qoi_kind == SCALAR
    np.testing.assert_allclose(rep.first_order, [0.3139, 0.4424, 0.0], atol=0.02)
    assert rep.total_order[2] == pytest.approx(0.2437, abs=0.02)


def test_additive_function():
    fA, fB, fAB = evaluate(saltelli_design(2, 4096, seed=2), lambda x: x[:, 0] + 2.0 * x[:, 1])
    rep = sobol_indices_scalar(fA, fB, fAB)
    np.testing.assert_allclose(rep.first_order, [0.2, 0.8], atol=0.02)
    np.testing.assert_allclose(rep.total_order, rep.first_order, atol=0.02)


def test_constant_output_has_no_variance():
    design = saltelli_design(2, 64, 0)
    with pytest.raises(GeoOpsError) as e:
        sobol_indices_scalar(*evaluate(design, lambda x: np.full(len(x), 3.0)))
    assert e.value.code == "ZERO_VARIANCE"


def test_single_column_vector_equals_scalar():
    fA, fB, fAB = evaluate(saltelli_design(3, 1024, seed=3), ishigami)
    scalar = sobol_indices_scalar(fA, fB, fAB)
    vector = sobol_indices_vector(fA[:, None], fB[:, None], fAB[:, :, None])
    np.testing.assert_allclose(vector.first_order_raw, scalar.first_order_raw, atol=1e-12)
    np.testing.assert_allclose(vector.total_order_raw, scalar.total_order_raw, atol=1e-12)


def test_duplicated_column_gives_same_indices():
    fA, fB, fAB = evaluate(saltelli_design(3, 1024, seed=3), ishigami)
    single = sobol_indices_vector(fA[:, None], fB[:, None], fAB[:, :, None])
    double = sobol_indices_vector(np.column_stack([fA, fA]), np.column_stack([fB, fB]),
                                  np.stack([fAB, fAB], axis=-1))
    assert double.qoi_kind == VECTOR
    np.testing.assert_allclose(double.first_order_raw, single.first_order_raw, atol=1e-12)


def test_stacked_inputs_split_evenly():
    fA, fB, fAB = evaluate(saltelli_design(2, 4096, seed=4), lambda x: x)
    rep = sobol_indices_vector(fA, fB, fAB)
    np.testing.assert_allclose(rep.first_order, [0.5, 0.5], atol=0.02)


def test_mismatched_shapes():
    with pytest.raises(GeoOpsError) as e:
        sobol_indices_vector(np.zeros((4, 2)), np.zeros((4, 3)), np.zeros((1, 4, 2)))
    assert e.value.code == "DIMENSION_MISMATCH"


def test_report_frame_and_json():
    rep = SobolReport(np.array([0.31, 0.44, -0.2]), np.array([0.5, 0.44, 0.02]), names=("a", "b", "c"))
    frame = rep.to_frame()
    assert list(frame["parameter"]) == ["a", "b", "c"]
    assert frame["S"].iloc[2] == pytest.approx(-0.05)
    assert frame["S_raw"].iloc[2] == pytest.approx(-0.2)
    assert rep.to_json_dict()["selected"] == [1, 1, 0]


# =========================
# Selection and comparison
# =========================
def test_select_features():
    rep = SobolReport(np.array([0.31, 0.44, 0.0]), np.zeros(3))
    np.testing.assert_array_equal(select_features(rep, 0.05, use_total=False), [True, True, False])
    assert select_features(rep, 0.0, use_total=False).all()
    assert not select_features(rep, 0.5, use_total=False).any()


def test_compare_index_vectors():
    assert compare_index_vectors([1, 1, 0], [1, 1, 0]) == (pytest.approx(1.0), 0.0)
    cos, _ = compare_index_vectors([1, 1, 0, 0], [1, 0, 1, 0])
    assert cos == pytest.approx(0.5)
    a = np.array([0.3139, 0.4424, 0.0])
    assert index_mse(a, a + 0.01) == pytest.approx(1e-4, abs=1e-12)


def test_cosine_of_zero_vector():
    with pytest.raises(GeoOpsError) as e:
        compare_index_vectors([0, 0], [1, 0])
    assert e.value.code == "ZERO_VECTOR"


# =========================
# GO study
# =========================
@pytest.fixture(scope="module")
def frozen_study():
    cfg = GoConfig(moment_order=2, fd_points=64)
    return go_sensitivity_study(freeze_fifth, cfg, d=11, n=64, seed=0)


def test_study_reports_every_qoi(frozen_study):
    assert tuple(frozen_study) == GO_QOIS
    for rep in frozen_study.values():
        assert len(rep.first_order) == 11
        assert len(rep.total_order) == 11


def test_ignored_parameter_has_no_influence(frozen_study):
    for rep in frozen_study.values():
        assert abs(rep.first_order[4]) < 0.02
        assert abs(rep.total_order[4]) < 0.02


def test_area_only_differs_from_full_moments(frozen_study):
    assert frozen_study["M"].qoi_kind == VECTOR
    assert frozen_study["K"].qoi_kind == SCALAR
    assert not np.allclose(frozen_study["M"].total_order, frozen_study["FT"].total_order)


def test_comparison_table_has_unit_diagonal(frozen_study):
    table = comparison_table(frozen_study)
    assert len(table) == 49
    diag = table[table["qoi_a"] == table["qoi_b"]]
    np.testing.assert_allclose(diag["cosine"].astype(float), 1.0, atol=1e-12)
    np.testing.assert_allclose(diag["mse"], 0.0)


@pytest.mark.slow
def test_aerofoil_study_is_deterministic():
    cfg = GoConfig(moment_order=2, fd_points=64)
    a = go_sensitivity_study(freeze_fifth, cfg, d=11, n=1024, seed=3)
    b = go_sensitivity_study(freeze_fifth, cfg, d=11, n=1024, seed=3)
    for qoi in GO_QOIS:
        np.testing.assert_array_equal(a[qoi].total_order_raw, b[qoi].total_order_raw)
