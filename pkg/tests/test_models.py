import json

import numpy as np
import pytest

from sichain import models
from sichain.spectra import set_distance
from sichain.errors import BadParams, FileError, SchemaError, ZeroA1


def test_gallery_builds_and_is_normalized():
    g = models.gallery()
    assert len(g) == 6
    for s in g.values():
        assert abs(s.phi(0.0) - 1) < 1e-12


def test_platoon_pair_spectrum():
    s = models.platoon_pair(2.0, 1.0, 0.5)
    assert set_distance(np.linalg.eigvals(s.A0), [-2 - 1j, -2 + 1j, -0.5]) < 1e-12


def test_literal_sign_variant_is_unstable():
    s = models.platoon_from_zeros(1, 2, 3, literal_sign=True)
    assert np.max(np.linalg.eigvals(s.A0).real) > 0
    assert np.all(np.linalg.eigvals(models.platoon_from_zeros(1, 2, 3).A0).real < 0)


def test_cascade_phi():
    s = models.cascade(1.0, 2.0, 5.0)
    lam = np.array([0.0, 1j, 3.0])
    assert np.allclose(s.phi(lam), 10.0 / ((lam + 1) * (lam + 2) * (lam + 5)))


@pytest.mark.parametrize(
    "spec",
    [
        models.ModelSpecifier("nope"),
        models.ModelSpecifier("platoon", (1.0, 2.0)),
        models.ModelSpecifier("cascade", (1.0, -1.0)),
        models.ModelSpecifier("custom"),
    ],
)
def test_bad_model_specifiers(spec):
    with pytest.raises(BadParams):
        models.build(spec)


def test_json_roundtrip(tmp_path):
    for s in models.gallery().values():
        path = tmp_path / "s.json"
        models.save(s, path)
        back = models.load(path)
        assert np.array_equal(back.A0, s.A0) and np.array_equal(back.A1, s.A1)
        assert back.label == s.label


def test_complex_entries_roundtrip(tmp_path):
    s = models.platoon(1 + 0.5j, 3.0, 3.0)
    path = tmp_path / "c.json"
    models.save(s, path)
    assert np.array_equal(models.load(path).A0, s.A0)


def test_schema_errors(tmp_path):
    good = models.to_json(models.robot())
    for bad in ({**good, "schema": 9}, {k: v for k, v in good.items() if k != "A1"}, {**good, "A0": [[1]]}):
        with pytest.raises(SchemaError):
            models.from_json(bad)
    with pytest.raises(ZeroA1):
        models.from_json({**good, "A1": [[[0.0, 0.0]]]})
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        models.load(p)
    with pytest.raises(FileError):
        models.load(tmp_path / "missing.json")
    assert json.loads(json.dumps(good)) == good


@pytest.mark.parametrize("zs", [(1, 2, 3), (0.5, 1.5, 4.0)])
def test_platoon_from_zeros_spectrum(zs):
    s = models.platoon_from_zeros(*zs)
    assert set_distance(np.linalg.eigvals(s.A0), [-z for z in zs]) < 1e-8


def test_cascade_coefficients():
    s = models.cascade(1.0, 2.0, 3.0)
    num = s.phi.num.coeffs / s.phi.den.lead
    den = s.phi.den.coeffs / s.phi.den.lead
    assert np.allclose(num, [6.0], atol=1e-10)
    assert np.allclose(den, [6.0, 11.0, 6.0, 1.0], atol=1e-10)
