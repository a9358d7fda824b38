import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semlat.errors import ConfigError, DomainError, InfeasibleQualityError
from semlat.quality import (
    CLIP_REFERENCE_BLIP,
    DEFAULT_CLIP,
    DEFAULT_MSSSIM,
    PRESET_TARGETS,
    QualityCurve,
    QualityRequirement,
    curve_to_dict,
    curves_from_list,
    load_curves,
    load_targets,
    target_ber,
    validate,
)

ber_st = st.floats(1e-12, 0.19)


def test_anchor_values():
    assert DEFAULT_CLIP.evaluate(1e-6) == 0.999
    assert DEFAULT_CLIP.evaluate(1e-5) == 0.997
    assert DEFAULT_CLIP.evaluate(1e-4) == 0.978
    assert DEFAULT_MSSSIM.evaluate(1e-5) == 0.982
    assert DEFAULT_CLIP.reference_value == 0.918
    assert CLIP_REFERENCE_BLIP == 0.896


def test_eval_interpolates_in_log_ber():
    mid = math.sqrt(1e-5 * 1e-4)
    assert math.isclose(DEFAULT_CLIP.evaluate(mid), (0.997 + 0.978) / 2, rel_tol=1e-12)


def test_flat_tails():
    assert DEFAULT_CLIP.evaluate(1e-15) == DEFAULT_CLIP.evaluate(1e-8)
    assert DEFAULT_CLIP.evaluate(0.1) == 0.978


def test_eval_domain():
    with pytest.raises(DomainError):
        DEFAULT_CLIP.evaluate(0.0)
    arr = DEFAULT_CLIP.evaluate(np.array([1e-6, 1e-4]))
    assert arr.tolist() == [0.999, 0.978]


def test_inverse_examples():
    assert DEFAULT_CLIP.inverse(0.978) == 1e-4
    assert DEFAULT_CLIP.inverse(0.997) == 1e-5
    # flat segment resolves to the largest BER
    assert DEFAULT_CLIP.inverse(0.999) == 1e-6
    assert DEFAULT_CLIP.inverse(0.5) == 1e-4
    with pytest.raises(InfeasibleQualityError):
        DEFAULT_CLIP.inverse(0.9995)


@given(st.floats(-6.0, -4.0))
def test_roundtrip_on_decreasing_part(logb):
    b = 10 ** logb
    back = DEFAULT_CLIP.inverse(DEFAULT_CLIP.evaluate(b))
    assert abs(math.log10(back) - logb) <= 1e-9


@given(ber_st, ber_st)
def test_eval_non_increasing(b1, b2):
    lo, hi = sorted((b1, b2))
    assert DEFAULT_CLIP.evaluate(lo) >= DEFAULT_CLIP.evaluate(hi)
    assert DEFAULT_MSSSIM.evaluate(lo) >= DEFAULT_MSSSIM.evaluate(hi)


@given(st.floats(0.5, 0.999), st.floats(0.5, 0.999))
def test_inverse_non_increasing(e1, e2):
    lo, hi = sorted((e1, e2))
    assert DEFAULT_CLIP.inverse(lo) >= DEFAULT_CLIP.inverse(hi)


def test_target_ber():
    r = [QualityRequirement(DEFAULT_CLIP, 0.997), QualityRequirement(DEFAULT_MSSSIM, 0.918)]
    assert target_ber(r) == 1e-5
    assert target_ber(r[:1]) == DEFAULT_CLIP.inverse(0.997)
    assert target_ber(r + r) == target_ber(r)


@given(st.lists(st.tuples(st.booleans(), st.floats(0.5, 0.99)), min_size=1, max_size=5), st.floats(0.5, 0.99))
def test_more_requirements_never_loosen(items, extra):
    r = [QualityRequirement(DEFAULT_CLIP if c else DEFAULT_MSSSIM, e) for c, e in items]
    assert target_ber(r + [QualityRequirement(DEFAULT_CLIP, extra)]) <= target_ber(r)


def test_preset_targets(curves):
    bers = {k: target_ber(t.requirements(curves)) for k, t in PRESET_TARGETS.items()}
    assert bers == {"t0999": 1e-6, "t0997": 1e-5, "t0978": 1e-4}


def test_validate():
    assert validate(DEFAULT_CLIP).ok and validate(DEFAULT_MSSSIM).ok
    bad = validate(QualityCurve("x", ((1e-6, 0.9), (1e-5, 0.95))))
    assert not bad.ok and bad.pair == (0, 1)
    assert validate(QualityCurve("one", ((1e-5, 0.9),))).ok
    assert validate(QualityCurve("dup", ((1e-5, 0.9), (1e-5, 0.8)))).pair == (0, 1)


def test_curve_construction_rejected():
    with pytest.raises(ConfigError):
        QualityCurve("x", ())
    with pytest.raises(ConfigError):
        QualityCurve("x", ((0.0, 0.9),))
    with pytest.raises(ConfigError):
        QualityCurve("x", ((1e-5, 1.2),))


def test_requirement_threshold():
    with pytest.raises(ConfigError):
        QualityRequirement(DEFAULT_CLIP, 0.0)


def test_curve_file_roundtrip(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps([curve_to_dict(DEFAULT_CLIP), curve_to_dict(DEFAULT_MSSSIM)]))
    got = load_curves(p)
    assert got["clip"] == DEFAULT_CLIP and got["ms-ssim"] == DEFAULT_MSSSIM


def test_curve_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_curves(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        curves_from_list({"name": "x"})
    with pytest.raises(ConfigError):
        curves_from_list([{"name": "a", "anchors": [[1e-5, 0.9]]}] * 2)
    with pytest.raises(ConfigError):
        curves_from_list([{"anchors": [[1e-5, 0.9]]}])


def test_target_file(tmp_path, curves):
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"label": "mine", "requirements": [{"metric": "clip", "threshold": 0.99}]}))
    t = load_targets(p)
    assert t.label == "mine"
    assert target_ber(t.requirements(curves)) == DEFAULT_CLIP.inverse(0.99)
    p.write_text(json.dumps({"requirements": [{"metric": "lpips", "threshold": 0.9}]}))
    with pytest.raises(ConfigError):
        load_targets(p).requirements(curves)
    p.write_text(json.dumps({"requirements": []}))
    with pytest.raises(ConfigError):
        load_targets(p)
