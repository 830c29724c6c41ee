import math

import pytest

import ri_interlace as ri

WATSON = 1.516386059151978


def test_green_and_capacity():
    assert ri.green([0, 0, 0]) == pytest.approx(WATSON, rel=1e-9)
    assert ri.capacity([[0, 0, 0]]) == pytest.approx(1 / WATSON, rel=1e-9)
    assert ri.box_capacity(3, 1) == pytest.approx(ri.capacity([[x, y, z] for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (-1, 0, 1)]))
    assert ri.vacancy_probability([[0, 0, 0]], 2.0) == pytest.approx(math.exp(-2 / WATSON))


def test_sample_is_reproducible():
    a = ri.sample(d=3, window=2, u=1.0, seed=5)
    b = ri.sample(d=3, window=2, u=1.0, seed=5)
    assert a["first_label"] == b["first_label"]
    assert len(a["sites"]) == 125
    assert all(l1 <= l2 for l1, l2 in zip(a["labels"], a["labels"][1:]))


def test_events_and_sweep():
    ev = ri.events(window=12, u=1.0, v=0.8, r=6, M=2, seed=3)
    assert set(ev) == {"exist", "unique", "uc"}
    ev = ri.events(window=12, u=1.0, v=0.8, r=2, M=2, seed=3)
    assert set(ev) == {"exist", "unique", "uc", "disconnect"}
    rows = ri.sweep({"events": ["vacant_ball"], "r": [1], "u": [0.5], "trials": 20, "seed": 2})
    assert len(rows) == 1 and rows[0]["n_trials"] == "20"
    with pytest.raises(ValueError):
        ri.sweep({"colour": 1})


def test_bridges_and_dense():
    b = ri.faces_bridge(L=64, N=64, s=64, xi=0.6)
    assert b["ok"] and b["J"] <= b["J_bound"]
    with pytest.raises(RuntimeError):
        ri.faces_bridge(L=64, s=8, xi=0.6)
    assert ri.bridge_corpus({"instances": 5, "L_max": 256})["failures"] == 0
    assert ri.dense_subfamily([1, 3, 5, 9], 10, 0.4, 2) == [1]
    assert ri.m_of_r(math.e ** 2, 2.0) == math.floor(math.e ** 4)


def test_interface_path_half_space():
    U, V = [], []
    rng = range(-5, 6)
    for x in rng:
        for y in rng:
            for z in rng:
                if max(abs(x), abs(y), abs(z)) < 2:
                    continue
                (U if x >= 0 else V).append([x, y, z])
    out = ri.interface_path(U, V, 2, 5)
    assert out["ok"]
