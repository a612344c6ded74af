"""Smoke test for the sbts Python extension.

Build and install first, e.g.:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/sbts-*.whl
    python python/smoke_test.py
"""

import math

import sbts


def check_matrix():
    m = sbts.KnowledgeMatrix()
    assert m.total_mass() == 1.0
    assert m.get(0, 0) == 1.0
    assert m.expected_level() == 1.0
    assert math.isclose(m.user_skill(), 0.1)

    rows = [[0.0] * 10 for _ in range(8)]
    rows[3][4] = 0.4
    rows[1][9] = 0.6
    m = sbts.KnowledgeMatrix.from_rows(rows)
    m.apply_update(3, 4, True, lam=1.0)
    assert m.get(3, 4) == 0.2
    assert m.get(3, 5) == 0.1 and m.get(4, 4) == 0.1
    assert abs(m.total_mass() - 1.0) < 1e-12

    try:
        sbts.KnowledgeMatrix.from_rows([[0.0] * 10 for _ in range(8)])
    except ValueError:
        pass
    else:
        raise AssertionError("zero matrix accepted")


def check_functions():
    assert sbts.cell_skill(0, 0) == 0.1
    assert sbts.cell_skill(7, 9) == 8.0
    assert sbts.beta(1.5, 0.5) == 1.5
    assert sbts.update_targets(3, 4, True) == [(3, 5), (4, 4)]
    assert sbts.update_targets(0, 0, False) == []

    tasks = sbts.KnowledgeMatrix().generate_taskset(seed=1)
    assert tasks == [(0, 0)] * 10


def check_students():
    s = sbts.Student.dynamic_epsilon()
    assert s.epsilon_at(0) == 0.7
    assert s.epsilon_at(100) == 0.0
    assert s.knowledge() == [0.0] * 8
    s.attempt(0, 0, 0)
    assert sbts.Student.static_model(0.7).knowledge() is None


def check_cohort():
    kwargs = dict(students=20, tasksets=10, iterations=2, seed=3)
    a = sbts.run_cohort("static", p=0.7, **kwargs)
    b = sbts.run_cohort("static", p=0.7, **kwargs)
    assert a.expected_level_mean == b.expected_level_mean
    assert a.curves() == b.curves()
    assert a.attempts == 20 * 2 * 10 * 10
    assert sorted(a.curves()) == list(range(1, 11))
    assert a.onsets()[0][0] == 1

    good = sbts.run_cohort("static", p=0.9, **kwargs)
    bad = sbts.run_cohort("static", p=0.1, **kwargs)
    assert good.expected_level_mean > bad.expected_level_mean

    try:
        sbts.run_cohort("static", lam=1.5, p=0.5)
    except ValueError as err:
        assert "--lambda" in str(err)
    else:
        raise AssertionError("lambda 1.5 accepted")


if __name__ == "__main__":
    check_matrix()
    check_functions()
    check_students()
    check_cohort()
    print("sbts python smoke test passed")
