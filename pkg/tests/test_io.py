import numpy as np
import pytest

from gffnet.errors import ParameterError
from gffnet.estimator import SymmetricMatrixEstimate, estimate_Leta
from gffnet.gff import GFFModel, sample_field
from gffnet.graph import WeightedGraph, cycle_graph
from gffnet.io import read_edgelist, read_matrix, read_sampleset, write_edgelist, write_matrix, write_sampleset


def test_edgelist_roundtrip(tmp_path):
    g = WeightedGraph(5, ((0, 1, 1.0), (1, 4, 0.25), (2, 3, 1e-3)))
    write_edgelist(g, tmp_path / "g.txt", comments=["note"])
    text = (tmp_path / "g.txt").read_text().splitlines()
    assert text[0] == "d=5" and text[1] == "# note" and text[2] == "0 1 1.0"
    assert read_edgelist(tmp_path / "g.txt") == g


def test_edgelist_requires_header(tmp_path):
    (tmp_path / "g.txt").write_text("0 1 1.0\n")
    with pytest.raises(ParameterError):
        read_edgelist(tmp_path / "g.txt")


def test_plain_matrix_roundtrip(tmp_path, rng):
    M = rng.normal(size=(3, 3))
    write_matrix(M, tmp_path / "m.csv")
    assert np.array_equal(read_matrix(tmp_path / "m.csv"), M)


def test_estimate_roundtrip(tmp_path):
    s = sample_field(GFFModel.from_graph(cycle_graph(4), 0.5), 200, 1.0, 9)
    est = estimate_Leta(s)
    write_matrix(est, tmp_path / "l.csv")
    assert (tmp_path / "l.csv").read_text().startswith("# kind=Leta, eta=1.0, n=200, seed=9\n")
    back = read_matrix(tmp_path / "l.csv")
    assert np.array_equal(back.entries, est.entries)
    assert (back.kind, back.eta, back.n, back.seed) == ("Leta", 1.0, 200, 9)


def test_covariance_header(tmp_path):
    write_matrix(SymmetricMatrixEstimate(np.eye(2), "Covariance", U=0.5, n=10), tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().startswith("# kind=Covariance, U=0.5, n=10, seed=NA\n")
    assert read_matrix(tmp_path / "c.csv").U == 0.5


def test_sampleset_roundtrip(tmp_path):
    s = sample_field(GFFModel.from_graph(cycle_graph(3), 1.0), 7, 0.3, 42)
    write_sampleset(s, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "n,d,eta,seed" and lines[1] == "7,3,0.3,42"
    back = read_sampleset(tmp_path / "s.csv")
    assert np.array_equal(back.X, s.X) and np.array_equal(back.Y, s.Y)
    assert (back.eta, back.seed) == (0.3, 42)
