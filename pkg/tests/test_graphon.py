"""Core graphon, motif density and rate-function tests."""

import math

import numpy as np
import pytest

from graphentropy import errors
from graphentropy.graphon import (
    DensityPair,
    Graphon,
    Motif,
    bipodal_graphon,
    constant_graphon,
    edge_density,
    embed_graph,
    graphon_distance,
    graphon_text,
    motif_density,
    motif_gradient,
    rate_derivative,
    rate_function,
    rate_second_derivative,
    rate_value,
    read_graphon,
    read_motif,
    resample,
    validate,
    write_graphon,
    write_motif,
)
from graphentropy.graphon import _motif_density_einsum, _motif_gradient_einsum


def _random_graphon(rng, m):
    r = rng.uniform(0.05, 0.95, size=(m, m))
    return Graphon(values=0.5 * (r + r.T))


# ---------------------------------------------------------------------------
# Motif construction


def test_motif_shorthands():
    assert Motif.parse("triangle") == Motif.triangle()
    assert Motif.parse("star:4") == Motif.star(4)
    assert Motif.parse("edge") == Motif.edge()
    assert Motif.triangle().k == 3
    assert Motif.star(4).k == 4
    assert Motif.star(4).name == "star:4"


def test_motif_validation():
    with pytest.raises(errors.LoopEdge):
        Motif.from_edges(2, [(1, 1)])
    with pytest.raises(errors.DuplicateEdge):
        Motif.from_edges(2, [(1, 2), (2, 1)])
    with pytest.raises(errors.DisconnectedMotif):
        Motif.from_edges(4, [(1, 2), (3, 4)])


def test_density_pair_range():
    with pytest.raises(errors.ValueOutOfRange):
        DensityPair(e=1.2, t=0.0)


# ---------------------------------------------------------------------------
# Densities


def test_constant_graphon_densities():
    for p in (0.2, 0.5, 0.8):
        g = constant_graphon(p, 6)
        assert edge_density(g) == pytest.approx(p, abs=1e-15)
        assert motif_density(g, Motif.triangle()) == pytest.approx(p ** 3, abs=1e-14)
        assert motif_density(g, Motif.star(4)) == pytest.approx(p ** 4, abs=1e-14)


def test_complete_graph_triangle_density():
    # K_4 as a 0-1 graphon: t = P(all three pairs distinct blocks and adjacent)
    g = embed_graph(4, [(i, j) for i in range(1, 5) for j in range(i + 1, 5)])
    a = g.values
    m = 4
    t = float(np.einsum("ab,ac,bc->", a, a, a)) / m ** 3
    assert motif_density(g, Motif.triangle()) == pytest.approx(t, abs=1e-15)


def test_fast_paths_match_einsum():
    rng = np.random.default_rng(7)
    square = Motif.from_edges(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
    for m in (3, 5, 8):
        g = _random_graphon(rng, m)
        for motif in (Motif.triangle(), Motif.star(3), Motif.star(4), square):
            fast = motif_density(g, motif)
            ref = _motif_density_einsum(g.values, m, motif)
            assert fast == pytest.approx(ref, rel=1e-12)
            gf = motif_gradient(g, motif)
            gr = _motif_gradient_einsum(g.values, m, motif)
            assert np.allclose(gf, gr, atol=1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    h = 1e-6
    for motif in (Motif.triangle(), Motif.star(4)):
        g = _random_graphon(rng, 6)
        a = g.values
        d = motif_gradient(g, motif)
        m = 6
        for _ in range(5):
            i, j = rng.integers(m), rng.integers(m)
            ap = np.array(a)
            am = np.array(a)
            scale = 1.0 if i == j else 2.0
            ap[i, j] += h
            am[i, j] -= h
            if i != j:
                ap[j, i] += h
                am[j, i] -= h
            fd = (motif_density(Graphon(values=ap), motif)
                  - motif_density(Graphon(values=am), motif)) / (2 * h)
            assert fd == pytest.approx(scale * d[i, j] / m ** 2, rel=1e-6)


def test_star_density_is_degree_moment():
    rng = np.random.default_rng(3)
    g = _random_graphon(rng, 7)
    r = np.mean(g.values, axis=1)
    for k in (2, 3, 4):
        assert motif_density(g, Motif.star(k)) == pytest.approx(
            float(np.mean(r ** k)), rel=1e-13
        )


# ---------------------------------------------------------------------------
# Rate function


def test_rate_values():
    assert rate_value(0.5) == pytest.approx(-0.5 * math.log(2.0), abs=1e-15)
    assert rate_value(0.0) == 0.0
    assert rate_value(1.0) == 0.0
    assert rate_derivative(0.5) == 0.0
    assert rate_second_derivative(0.5) == pytest.approx(2.0, abs=1e-15)
    # symmetric about 1/2
    for u in (0.1, 0.3, 0.45):
        assert rate_value(u) == pytest.approx(rate_value(1.0 - u), abs=1e-15)


def test_rate_function_block_average():
    g = bipodal_graphon(0.5, 0.6, 0.4, 0.6, 8)
    expect = 0.5 * (rate_value(0.6) + rate_value(0.4))
    assert rate_function(g) == pytest.approx(expect, abs=1e-14)


# ---------------------------------------------------------------------------
# Validation, resampling, distance


def test_validate_rejects_bad_matrices():
    with pytest.raises(errors.AsymmetricMatrix):
        validate([[0.1, 0.2], [0.3, 0.1]])
    with pytest.raises(errors.ValueOutOfRange):
        validate([[1.5]])
    with pytest.raises(errors.EmptyMatrix):
        validate(np.zeros((0, 0)))


def test_resample_preserves_densities():
    rng = np.random.default_rng(5)
    g = _random_graphon(rng, 4)
    fine = resample(g, 12)  # exact refinement
    assert edge_density(fine) == pytest.approx(edge_density(g), abs=1e-15)
    assert motif_density(fine, Motif.triangle()) == pytest.approx(
        motif_density(g, Motif.triangle()), rel=1e-12
    )
    coarse = resample(g, 7)  # averaging path keeps the edge density
    assert edge_density(coarse) == pytest.approx(edge_density(g), abs=1e-12)


def test_graphon_distance():
    g1 = constant_graphon(0.5, 4)
    g2 = constant_graphon(0.5, 9)
    motifs = [Motif.edge(), Motif.triangle()]
    assert graphon_distance(g1, g2, motifs) == pytest.approx(0.0, abs=1e-15)
    g3 = constant_graphon(0.6, 4)
    assert graphon_distance(g1, g3, [Motif.edge()]) == pytest.approx(0.05, abs=1e-15)


# ---------------------------------------------------------------------------
# File formats


def test_graphon_file_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    g = _random_graphon(rng, 5)
    path = tmp_path / "g.txt"
    write_graphon(g, path)
    back = read_graphon(path)
    assert np.array_equal(back.values, g.values)


def test_graphon_file_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("nonsense\n")
    with pytest.raises(errors.FormatError):
        read_graphon(path)
    path.write_text("graphon v1 m=2\n0.1 0.9\n0.2 0.1\n")
    with pytest.raises(errors.AsymmetricMatrix):
        read_graphon(path)


def test_motif_file_roundtrip(tmp_path):
    path = tmp_path / "m.txt"
    write_motif(Motif.star(3), path)
    assert read_motif(path) == Motif.star(3)


def test_graphon_text_full_precision():
    g = constant_graphon(1.0 / 3.0, 2)
    assert repr(1.0 / 3.0) in graphon_text(g)
