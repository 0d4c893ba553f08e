import json

import numpy as np
import pytest

from toeplitz.capacitance import (
    FILE, CapacitanceSource, eigenfrequencies, load, regularize, save, skin_report, synth_gauge,
    toeplitz_distance, toeplitz_distance_series,
)
from config import settings
from toeplitz.exceptions import DomainError, MatrixParseError
from toeplitz.matrices import DefectSpec, DenseMatrix


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_csv(tmp_path):
    M = load(_write(tmp_path, "C.csv", "# exported\n1, 2\n3,4\n\n"))
    assert M.entries.tolist() == [[1.0, 2.0], [3.0, 4.0]]
    assert M.provenance[0].startswith("file:")


@pytest.mark.parametrize("text,row,col", [
    ("1,2\n3\n", 2, None),
    ("1,x\n3,4\n", 1, 2),
    ("1,2\n3,nan\n", 2, 2),
])
def test_load_reports_location(tmp_path, text, row, col):
    with pytest.raises(MatrixParseError) as info:
        load(_write(tmp_path, "bad.csv", text))
    assert (info.value.row, info.value.col) == (row, col)


def test_load_rejects_non_square(tmp_path):
    with pytest.raises(MatrixParseError):
        load(_write(tmp_path, "wide.csv", "1,2,3\n4,5,6\n"))
    with pytest.raises(MatrixParseError):
        load(_write(tmp_path, "empty.csv", "# nothing\n"))
    with pytest.raises(MatrixParseError):
        load(tmp_path / "missing.csv")


def test_load_json(tmp_path):
    flat = load(_write(tmp_path, "flat.json", json.dumps({"n": 2, "entries": [1, 2, 3, 4]})))
    nested = load(_write(tmp_path, "nested.json", json.dumps([[1, 2], [3, 4]])))
    assert flat.entries.tolist() == nested.entries.tolist() == [[1.0, 2.0], [3.0, 4.0]]
    with pytest.raises(MatrixParseError):
        load(_write(tmp_path, "three.json", json.dumps({"entries": [1, 2, 3]})))
    with pytest.raises(MatrixParseError):
        load(_write(tmp_path, "broken.json", "{"))


def test_save_then_load(tmp_path):
    M = synth_gauge(6, 0.7, 1.6, noise=0.1, rng=np.random.default_rng(1))
    assert np.array_equal(load(save(M, tmp_path / "M.csv")).entries, M.entries)


def test_synth_gauge_is_toeplitz():
    M = synth_gauge(20, 1.0, 1.4)
    A = M.entries
    assert A[0, 1] == pytest.approx(-np.exp(0.5))
    assert A[1, 0] == pytest.approx(-np.exp(-0.5))
    assert A[0, 3] == pytest.approx(-np.exp(0.5) * 3 ** -1.4)
    assert toeplitz_distance(M, 20) == pytest.approx(0.0, abs=1e-14)
    T = regularize(M, 10)
    assert T.n == 10
    assert T.diagonal(2) == pytest.approx(A[2, 0])


def test_synth_gauge_gamma_sets_the_asymmetry():
    A = synth_gauge(40, 1.0, 2.0).entries
    # gamma > 0 weights the entries above the diagonal
    assert A[1, 0] / A[0, 1] == pytest.approx(np.exp(-1.0))
    assert A[5, 2] / A[2, 5] == pytest.approx(np.exp(-1.0))


@pytest.mark.parametrize("gamma", [0.4, 1.0, 2.5])
def test_synth_gauge_opposite_gamma_is_the_transpose(gamma):
    forward = synth_gauge(30, gamma, 1.6, edge=0.3).entries
    backward = synth_gauge(30, -gamma, 1.6, edge=0.3).entries
    assert np.allclose(backward, forward.T, rtol=1e-14, atol=0.0)


def test_regularize_is_idempotent():
    T = regularize(synth_gauge(50, 0.8, 1.5, edge=0.4, noise=0.05, rng=np.random.default_rng(2)), 30)
    again = regularize(DenseMatrix.from_array(T.dense()), 30)
    assert again.n == 30
    assert np.allclose(again.dense(), T.dense(), rtol=1e-13, atol=1e-15)
    assert toeplitz_distance(DenseMatrix.from_array(T.dense()), 30) <= 1e-14


def test_synth_gauge_edge_and_noise():
    clean = synth_gauge(20, 0.0, 2.0)
    edged = synth_gauge(20, 0.0, 2.0, edge=0.5)
    assert edged.entries[0, 0] == pytest.approx(1.5 * clean.entries[0, 0])
    assert edged.entries[-1, -1] == pytest.approx(1.5 * clean.entries[-1, -1])
    noisy = synth_gauge(20, 0.0, 2.0, noise=0.1, rng=np.random.default_rng(3))
    assert toeplitz_distance(noisy, 20) > 1e-3
    with pytest.raises(DomainError):
        synth_gauge(3, 0.0, 2.0)
    with pytest.raises(DomainError):
        synth_gauge(20, 0.0, 1.0)


def test_eigenfrequencies():
    assert eigenfrequencies([4.0, -1.0]) == pytest.approx([2.0, 1j])


def test_eigenfrequencies_keep_order_of_positive_eigenvalues(rng):
    eigvals = rng.uniform(0.1, 50.0, size=40)
    omega = eigenfrequencies(eigvals)
    assert np.all(omega.imag == 0.0)
    assert np.all(omega.real > 0)
    assert omega.real == pytest.approx(np.sqrt(eigvals))
    ascending = np.sort(eigvals)
    assert np.all(np.diff(eigenfrequencies(ascending).real) > 0)


def test_capacitance_source():
    with pytest.raises(DomainError):
        CapacitanceSource(origin="grid")
    with pytest.raises(DomainError):
        CapacitanceSource(origin=FILE)
    with pytest.raises(DomainError):
        CapacitanceSource(p_syn=1.0)
    assert CapacitanceSource(n=30).materialize().n == 30


@pytest.mark.parametrize("gamma", [1.0, -1.0, 0.0])
def test_skin_report_sign_follows_gamma(gamma):
    report = skin_report(CapacitanceSource(gamma=gamma, n=80), [8], scan=40, threads=1)
    assert report.toeplitz.n == 60
    assert report.fit.p == pytest.approx(1.4, abs=1e-6)
    assert report.fit.q == pytest.approx(1.4, abs=1e-6)
    assert not report.partial
    (band,) = report.bandwidths
    assert band.eigenvalues.size == 60
    if gamma > 0:
        assert band.mean_beta > 0
        assert np.all(band.limit_betas > 0)
    elif gamma < 0:
        assert band.mean_beta < 0
    else:
        assert abs(band.mean_beta) <= 1e-6


def test_skin_report_with_defect():
    report = skin_report(CapacitanceSource(gamma=1.0, n=80), [8, 20], defect=DefectSpec(30, 1.0), scan=40)
    assert not report.partial
    assert [b.bandwidth for b in report.bandwidths] == [8, 20]
    assert any(b.profile is not None for b in report.bandwidths)
    summary = report.summary()
    assert summary["n_block"] == 60
    assert summary["bandwidths"][1]["bandwidth"] == 20


def test_skin_report_validation():
    source = CapacitanceSource(n=80)
    with pytest.raises(DomainError):
        skin_report(source, [60])
    with pytest.raises(DomainError):
        skin_report(source, [8], defect=DefectSpec(61, 1.0))


def test_distance_to_toeplitz_falls_with_outer_size():
    source = CapacitanceSource(gamma=1.0, p_syn=1.4, edge=0.5)
    series = toeplitz_distance_series(source, [60, 80, 100, 140, 200], n_block=60, threads=2)
    assert series.sizes == (60, 80, 100, 140, 200)
    distances = np.array(series.distances)
    assert distances[0] > 1e-3
    assert np.all(np.diff(distances) < 0)
    assert distances[-1] < 1e-3 * distances[0]


def test_distance_series_validation(tmp_path):
    source = CapacitanceSource(edge=0.5)
    with pytest.raises(DomainError):
        toeplitz_distance_series(source, [100, 80], n_block=60)
    with pytest.raises(DomainError):
        toeplitz_distance_series(source, [40, 80], n_block=60)
    with pytest.raises(DomainError):
        toeplitz_distance_series(source, [], n_block=60)
    path = save(synth_gauge(80, 1.0, 1.4), tmp_path / "C.csv")
    with pytest.raises(DomainError):
        toeplitz_distance_series(CapacitanceSource(origin=FILE, path=str(path)), [80, 100], n_block=60)


def test_source_defaults_to_configured_outer_size():
    assert CapacitanceSource().n == settings.DEFAULT_OUTER_SIZE


@pytest.mark.slow
def test_skin_pipeline_flips_with_gamma():
    reports = {gamma: skin_report(CapacitanceSource(gamma=gamma, n=200), [8, 20], scan=200)
               for gamma in (1.0, -1.0)}
    for gamma, report in reports.items():
        assert not report.partial
        assert report.fit.p == pytest.approx(1.4, abs=1e-6)
        assert report.fit.q == pytest.approx(1.4, abs=1e-6)
        for band in report.bandwidths:
            if gamma > 0:
                assert band.mean_beta > 0
                assert np.all(band.limit_betas > 0)
            else:
                assert band.mean_beta < 0
