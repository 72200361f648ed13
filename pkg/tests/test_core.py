import math

import numpy as np
import pytest

from truckdrone.core import (ConfigurationError, Instance, ParseError, Point,
                             SchemaError, build_matrices, euclidean_distance,
                             generate_uniform_instance, read_instance,
                             write_instance)


def test_distance_345():
    assert euclidean_distance(Point(0, 0), Point(3, 4)) == 5.0


def test_distance_identity():
    for p in (0.0, 0.37, -2.5):
        assert euclidean_distance(Point(p, p), Point(p, p)) == 0.0


def test_distance_hand_value():
    assert euclidean_distance(Point(0, 0), Point(0.3, 0.4)) == pytest.approx(0.5)


def test_distance_symmetric():
    a, b = Point(0.12, 0.9), Point(0.77, 0.05)
    assert euclidean_distance(a, b) == euclidean_distance(b, a)


def test_build_matrices_substitution():
    inst = Instance(nodes=(Point(0, 0), Point(1.0, 0)), v_T=1.0, v_D=2.0)
    mats = build_matrices(inst)
    assert mats.tT[0][1] == pytest.approx(1.0)
    assert mats.tD[0][1] == pytest.approx(0.5)


def test_build_matrices_diagonal_and_symmetry():
    inst = generate_uniform_instance(6, seed=11)
    mats = build_matrices(inst)
    assert np.allclose(np.diag(mats.d), 0.0)
    assert np.allclose(mats.d, mats.d.T)
    assert np.allclose(mats.tT, 2 * mats.tD)  # v_D = 2 v_T default


def test_triangle_inequality():
    mats = build_matrices(generate_uniform_instance(7, seed=5))
    d = mats.d
    n = d.shape[0]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert d[i][j] <= d[i][k] + d[k][j] + 1e-12


def test_nonpositive_speed_rejected():
    with pytest.raises(ConfigurationError):
        Instance(nodes=(Point(0, 0), Point(1, 1)), v_T=0.0)


def test_handling_exceeding_endurance_rejected():
    with pytest.raises(ConfigurationError):
        Instance(nodes=(Point(0, 0), Point(1, 1)), E=0.05, ell=0.03, r=0.03)


def test_generation_deterministic():
    a = generate_uniform_instance(50, seed=1)
    b = generate_uniform_instance(50, seed=1)
    assert a == b


def test_generation_unit_square_depot_origin():
    inst = generate_uniform_instance(50, seed=2)
    assert inst.nodes[0] == Point(0.0, 0.0)
    assert inst.n == 50
    assert all(0 <= p.x <= 1 and 0 <= p.y <= 1 for p in inst.nodes[1:])


def test_generation_seed_sensitivity():
    a = generate_uniform_instance(50, seed=1)
    b = generate_uniform_instance(50, seed=2)
    assert a.nodes != b.nodes


def test_generation_n_zero_rejected():
    with pytest.raises(ConfigurationError):
        generate_uniform_instance(0, seed=1)


def test_instance_roundtrip(tmp_path):
    inst = generate_uniform_instance(50, seed=9, E=0.8, R=0.05)
    path = tmp_path / "inst.json"
    write_instance(inst, path)
    back = read_instance(path)
    assert back == inst


def test_missing_field_schema_error(tmp_path):
    inst = generate_uniform_instance(3, seed=1)
    path = tmp_path / "inst.json"
    write_instance(inst, path)
    import json
    doc = json.loads(path.read_text())
    del doc["E"]
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="'E'"):
        read_instance(path)


def test_malformed_file_parse_error_has_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "n": 3,\n oops\n}')
    with pytest.raises(ParseError, match="line 3"):
        read_instance(path)


def test_handwritten_three_customer_file(tmp_path):
    path = tmp_path / "small.json"
    path.write_text("""{
      "n": 3, "depot": [0, 0],
      "customers": [[0.1, 0.2], [0.5, 0.5], [0.9, 0.1]],
      "v_T": 1.0, "v_D": 2.0, "E": 0.7, "R": 0.1,
      "ell": 0.01, "r": 0.01, "seed": -1
    }""")
    inst = read_instance(path)
    assert inst.n == 3
    assert inst.nodes[2] == Point(0.5, 0.5)
