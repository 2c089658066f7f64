import json

import pytest

from tpx.document import ParseError, ValidationError, from_mapping, parse_scenario
from tpx.model import Exemption, LimitedCredit

MINIMAL = {
    "home": {"tax_rate": 0.25},
    "host": {"tax_rate": 0.35, "enforcement": 0.5, "unit_penalty": 1.2},
    "range": {"p_min": 90, "p_bar": 100, "p_max": 110},
    "trade": {"volume": 10},
    "regime": {"kind": "exemption"},
}


def _with(section, **fields):
    data = json.loads(json.dumps(MINIMAL))
    data[section].update(fields)
    return data


def test_minimal_defaults_filled():
    doc = parse_scenario(json.dumps(MINIMAL).encode())
    assert doc.regime == Exemption()
    assert doc.scenario.tariff == 0.0
    assert doc.scenario.penalty.slope == 2.0
    assert doc.settings.grid_points == 4096
    assert doc.normalized["penalty"] == {"slope": 2.0}
    assert doc.normalized["trade"]["tariff"] == 0.0
    assert doc.normalized["settings"]["refine_tolerance"] == 1e-9


def test_normalized_reparses_identically():
    doc = parse_scenario(json.dumps(MINIMAL))
    again = from_mapping(doc.normalized)
    assert again.scenario == doc.scenario and again.normalized == doc.normalized


def test_malformed_json_has_position():
    with pytest.raises(ParseError) as exc:
        parse_scenario(b'{\n  "home": {"tax_rate": 0.25,}\n}')
    assert exc.value.line == 2
    assert exc.value.column > 0


def test_non_utf8():
    with pytest.raises(ParseError):
        parse_scenario(b"\xff\xfe{}")


def test_p_min_above_p_bar():
    with pytest.raises(ValidationError) as exc:
        from_mapping(_with("range", p_min=100))
    assert exc.value.path == "range.p_min"


def test_credit_rate_above_one():
    data = _with("regime", kind="limited_credit", repatriation=0.5, credit_rate=1.2)
    with pytest.raises(ValidationError) as exc:
        from_mapping(data)
    assert exc.value.path == "regime.credit_rate"


def test_limited_credit_parsed():
    doc = from_mapping(_with("regime", kind="limited_credit", repatriation=0.75, credit_rate=0.5))
    assert doc.regime == LimitedCredit(0.75, 0.5)


@pytest.mark.parametrize(
    "section,fields,path",
    [
        ("home", {"taxrate": 0.2}, "home.taxrate"),
        ("home", {"tax_rate": "0.2"}, "home.tax_rate"),
        ("regime", {"kind": "credit"}, "regime.kind"),
        ("regime", {"kind": "proportional_credit"}, "regime.repatriation"),
        ("trade", {"volume": 0}, "trade.volume"),
    ],
)
def test_field_paths(section, fields, path):
    with pytest.raises(ValidationError) as exc:
        from_mapping(_with(section, **fields))
    assert exc.value.path == path


def test_unknown_top_level_key():
    data = dict(MINIMAL, extra={})
    with pytest.raises(ValidationError) as exc:
        from_mapping(data)
    assert exc.value.path == "extra"


def test_settings_domain():
    data = dict(MINIMAL, settings={"domain": [95, 105]})
    assert from_mapping(data).settings.domain == (95.0, 105.0)
    with pytest.raises(ValidationError) as exc:
        from_mapping(dict(MINIMAL, settings={"domain": [80, 105]}))
    assert exc.value.path == "settings.domain"
    assert from_mapping(dict(MINIMAL, settings={"domain": [80, 105], "widen": True})).settings.widen
