import json

import numpy as np
import pytest

from measure_lab.domain.exceptions import ConfigError, ExpressionError
from measure_lab.domain.value_objects.grid import Grid, GridFunction
from measure_lab.infrastructure.io import (
    build_ladder,
    build_measure_factory,
    build_nonlinearity,
    load_config,
    load_measure_spec,
    measure_factory_for,
    parse_config,
)
from measure_lab.infrastructure.io.persistence import write_grid_function
from measure_lab.shared.models import MeasureSpec, NonlinearitySpec


def base_config(**overrides):
    data = {
        "nonlinearity": {"family": "power", "p": 3},
        "measure": {"atoms": [{"x": 0.5, "y": 0.5, "mass": 1.0}]},
        "grids": [15, 31, 63],
    }
    data.update(overrides)
    return data


def test_valid_config_gets_defaults():
    config = parse_config(base_config())
    assert config.scheme == "truncation"
    assert config.max_truncation_level == 40
    assert config.tolerances.cauchy == 0.02
    assert config.mollification.profile == "bump"
    assert config.output_dir == "mplab_out"


@pytest.mark.parametrize(
    "data, key",
    [
        ({"nonlinearity": {"family": "power"}, "measure": {}}, "grids"),
        (base_config(grids=[31, 15]), "grids"),
        (base_config(grids=[2]), "grids"),
        (base_config(measure_file="m.json"), "<root>"),
        (base_config(bogus=1), "bogus"),
        (base_config(nonlinearity={"family": "cubic"}), "nonlinearity.family"),
        (base_config(nonlinearity={"family": "expression"}), "nonlinearity"),
        (base_config(q=2.0), "q"),
        (base_config(mollification={"levels": [8, 8]}), "mollification.levels"),
    ],
)
def test_invalid_config_names_the_key(data, key):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(data)
    assert excinfo.value.key == key


def test_load_config_reports_missing_and_malformed_files(tmp_path, write_config):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        load_config(broken)
    assert "invalid JSON" in str(excinfo.value)
    assert load_config(write_config(base_config())).grids == [15, 31, 63]


def test_missing_measure_file_is_reported(write_config):
    data = base_config()
    del data["measure"]
    data["measure_file"] = "nowhere.json"
    with pytest.raises(ConfigError) as excinfo:
        load_config(write_config(data))
    assert excinfo.value.key == "measure_file"


def test_measure_file_resolves_relative_to_config(tmp_path, write_config):
    (tmp_path / "dirac.json").write_text(
        json.dumps({"atoms": [{"x": 0.5, "y": 0.5, "mass": 2.0}]}), encoding="utf-8"
    )
    data = base_config()
    del data["measure"]
    data["measure_file"] = "dirac.json"
    config = load_config(write_config(data))
    m = measure_factory_for(config, tmp_path)(Grid.unit_square(15))
    assert m.atom_masses() == [2.0]
    assert load_measure_spec(tmp_path / "dirac.json").atoms[0].mass == 2.0


@pytest.mark.parametrize(
    "family, kwargs, flag_b",
    [("zero", {}, True), ("linear", {"c": 2.0}, False), ("power", {"p": 2.0}, True)],
)
def test_build_named_nonlinearities(family, kwargs, flag_b):
    f = build_nonlinearity(NonlinearitySpec(family=family, **kwargs))
    assert f.flag_b is flag_b


def test_expression_nonlinearity_detects_condition_b():
    vanishing = build_nonlinearity(NonlinearitySpec(family="expression", expr="-(abs(u) + u)^3"))
    assert vanishing.flag_b
    assert vanishing(0.5, 0.5, np.array([1.0]))[0] == pytest.approx(-8.0)
    assert vanishing.du(0.5, 0.5, np.array([1.0]))[0] == pytest.approx(-24.0)
    plain = build_nonlinearity(NonlinearitySpec(family="expression", expr="-u - x"))
    assert not plain.flag_b


def test_shift_is_added():
    f = build_nonlinearity(NonlinearitySpec(family="power", shift="x"))
    assert not f.flag_b
    assert f(np.array([0.25]), np.array([0.5]), np.array([0.0]))[0] == pytest.approx(0.25)


def test_bad_expressions_name_their_key():
    with pytest.raises(ExpressionError) as excinfo:
        build_nonlinearity(NonlinearitySpec(family="expression", expr="-u^^2"))
    assert excinfo.value.key == "nonlinearity.expr"
    with pytest.raises(ExpressionError) as excinfo:
        build_nonlinearity(NonlinearitySpec(family="zero", shift="import os"))
    assert excinfo.value.key == "nonlinearity.shift"
    spec = MeasureSpec.model_validate({"density": {"kind": "expression", "expr": "q"}})
    with pytest.raises(ExpressionError) as excinfo:
        build_measure_factory(spec)
    assert excinfo.value.key == "measure.density.expr"


def test_measure_factory_realizes_on_any_grid():
    spec = MeasureSpec.model_validate(
        {
            "density": {"kind": "expression", "expr": "x*y"},
            "atoms": [{"x": 0.5, "y": 0.5, "mass": 1.0}, {"x": 0.5, "y": 0.5, "mass": 0.5}],
        }
    )
    factory = build_measure_factory(spec)
    for n in (7, 15):
        m = factory(Grid.unit_square(n))
        assert m.grid.n == n
        assert m.atom_masses() == [1.5]
    coarse = factory(Grid.unit_square(7))
    assert coarse.density.values[3, 3] == pytest.approx(0.25)


def test_atom_outside_domain_is_a_config_error():
    spec = MeasureSpec.model_validate({"atoms": [{"x": 1.5, "y": 0.5, "mass": 1.0}]})
    with pytest.raises(ConfigError) as excinfo:
        build_measure_factory(spec)(Grid.unit_square(7))
    assert excinfo.value.key == "atoms"


def test_file_density_is_resampled(tmp_path):
    coarse = Grid.unit_square(7)
    u = GridFunction.from_callable(coarse, lambda X, Y: X + Y)
    write_grid_function(tmp_path / "density.csv", u)
    spec = MeasureSpec.model_validate({"density": {"kind": "file", "path": "density.csv"}})
    factory = build_measure_factory(spec, tmp_path)
    assert np.array_equal(factory(coarse).density.values, u.values)
    fine = factory(Grid.unit_square(15)).density.values
    # coarse node k sits on fine node 2k+1
    assert np.allclose(fine[1::2, 1::2], u.values, atol=1e-12)


def test_missing_density_file_is_reported(write_config):
    data = base_config(measure={"density": {"kind": "file", "path": "absent.csv"}})
    with pytest.raises(ConfigError) as excinfo:
        load_config(write_config(data))
    assert excinfo.value.key == "measure.density.path"


def test_build_ladder_over_domain():
    domain = {"x_min": -1.0, "x_max": 1.0, "y_min": 0.0, "y_max": 2.0}
    config = parse_config(base_config(domain=domain))
    grids = build_ladder(config)
    assert [g.n for g in grids] == [15, 31, 63]
    assert grids[0].h == pytest.approx(2.0 / 16)
    assert [g.n for g in build_ladder(config, [7])] == [7]


def test_non_square_domain_is_rejected():
    config = parse_config(base_config(domain={"x_max": 2.0}))
    with pytest.raises(ConfigError) as excinfo:
        build_ladder(config)
    assert excinfo.value.key == "domain"
