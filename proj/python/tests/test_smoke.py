import math
from pathlib import Path

import numpy as np
import pytest

import ewire

ROOT = Path(__file__).resolve().parents[2]


def program(name):
    return (ROOT / "programs" / name).read_text()


def test_check_reports_types():
    types = dict(ewire.check(program("flip.ew")))
    assert types["flip"] == "Circ(I, bit)"
    assert types["coin"] == "T(bit)"


def test_type_error_is_raised():
    with pytest.raises(ewire.TypeError):
        ewire.check("circuit c : qubit = a <- gate init0 (); output (a, a)")
    with pytest.raises(ewire.ParseError):
        ewire.check("circuit c : qubit = output")


def test_run_flip():
    d = ewire.run(program("flip.ew"))
    assert d["outcomes"] == {"0": 0.5, "1": 0.5}
    assert d["diverge_mass"] == 0.0
    s1 = ewire.run(program("flip.ew"), shots=500, seed=3)
    s2 = ewire.run(program("flip.ew"), shots=500, seed=3)
    assert s1["counts"] == s2["counts"]
    assert sum(s1["counts"].values()) == 500


def test_divergence_in_cpsu():
    d = ewire.run(program("hs.ew"), "stuck", mode="cpsu")
    assert d["diverge_mass"] == 1.0
    with pytest.raises(ewire.EvalError):
        ewire.run(program("hs.ew"), "stuck")


def test_denote_hadamard():
    f = ewire.denote(program("comp.ew"), "h")
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert f.source_blocks == [2]
    assert np.allclose(f.matrix, np.kron(h.conj().T, h.T))
    assert f.is_cp() and f.is_unital()


def test_qft_against_dft():
    n = 3
    f = ewire.denote(program("qft.ew"), "fourier", mode="cpsu", qlist_size=n)
    N = 2**n
    w = np.exp(2j * np.pi / N)
    dft = np.array([[w ** (j * k) for k in range(N)] for j in range(N)]) / math.sqrt(N)
    rev = np.zeros((N, N))
    for x in range(N):
        rev[int(format(x, f"0{n}b")[::-1], 2), x] = 1
    u = dft @ rev
    assert np.allclose(f.matrix, np.kron(u.conj().T, u.T), atol=1e-9)


def test_normalize_and_equiv():
    text, trace, limited = ewire.normalize(program("comp.ew"), "hxh")
    assert "unbox" not in text
    assert "UnboxBox" in trace
    assert not limited
    assert ewire.equiv(program("comp.ew"), "hxh", "z")[0]
    ok, dist = ewire.equiv(program("comp.ew"), "h", "x")
    assert not ok and dist > 0.1


def test_resource_limit():
    saved = ewire.max_dim()
    ewire.set_max_dim(4)
    try:
        with pytest.raises(ewire.ResourceError):
            ewire.denote(program("qft.ew"), "fourier", mode="cpsu", qlist_size=3)
    finally:
        ewire.set_max_dim(saved)
