from __future__ import annotations

import hashlib

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from henon_brody.henon import DEFAULT_MAP
from henon_brody.mapspec import MapSpecError, parse_complex, parse_map, parse_polynomial
from henon_brody.output import Emitter, atomic_write, csv_bytes, fmt, pgm_bytes


def test_parse_default_map():
    f = parse_map("p=z^2-6; a=0.5")
    assert f == DEFAULT_MAP
    assert f.d == 2
    assert parse_map(str(DEFAULT_MAP)) == DEFAULT_MAP


def test_parse_variants():
    f = parse_map("p = z**3 + (1+2i) z - 0.25; a = -0.3 + 0.1j")
    assert f.p.coefficients == (-0.25, 1 + 2j, 0, 1)
    assert f.a == -0.3 + 0.1j
    assert parse_polynomial("(z - 1)(z + 1)").coefficients == (-1, 0, 1)
    assert parse_complex("2i") == 2j


@pytest.mark.parametrize("text, message", [
    ("p = z^2 - 6; a = 0", "non-zero"),
    ("p = 2 z^2; a = 1", "monic"),
    ("p = z + 1; a = 1", "degree"),
    ("p = z^2 + y; a = 1", "symbols"),
    ("p = z^2 + 1/z; a = 1", "polynomial"),
    ("p = z^2", "missing"),
    ("q = z^2; a = 1", "unknown"),
    ("p = z^2; a = z", "constant"),
    ("p = z^^2; a = 1", "parse"),
])
def test_parse_errors(text, message):
    with pytest.raises(MapSpecError, match=message):
        parse_map(text)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_fmt_types():
    assert fmt(None) == ""
    assert fmt(True) == "1" and fmt(np.bool_(False)) == "0"
    assert fmt(np.int64(7)) == "7"
    assert fmt(0.1) == "1.0000000000000001e-01"
    assert fmt(float("nan")) == "nan" and fmt(-np.inf) == "-inf"
    tiny = mpmath.ldexp(mpmath.mpf(1), -5000)
    assert mpmath.mpf(fmt(tiny)) == pytest.approx(tiny, rel=1e-15)


def test_csv_and_pgm_bytes():
    data = csv_bytes(["a", "b"], [(1, 0.5), ("x", None)])
    assert data == b"a,b\n1,5.0000000000000000e-01\nx,\n"
    img = np.arange(6, dtype=np.uint8).reshape(2, 3)
    assert pgm_bytes(img) == b"P5\n3 2\n255\n" + bytes(range(6))
    with pytest.raises(ValueError):
        pgm_bytes(np.zeros(3))


def test_atomic_write_and_emitter(tmp_path, capsys):
    digest = atomic_write(tmp_path / "sub" / "x.bin", b"abc")
    assert digest == hashlib.sha256(b"abc").hexdigest()
    assert (tmp_path / "sub" / "x.bin").read_bytes() == b"abc"
    import sys

    em = Emitter(tmp_path, stream=sys.stdout)
    path = em.csv("t.csv", ["k"], [(1,)])
    out = capsys.readouterr().out
    assert f"wrote {path} sha256={hashlib.sha256(path.read_bytes()).hexdigest()}" in out
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".")] == []
