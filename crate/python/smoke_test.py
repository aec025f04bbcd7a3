"""Smoke test for the pygoalcover extension module.

Build and install first:

    pip install maturin
    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

import math
import os
import tempfile

import pygoalcover as gc


def check_path(domain, path, start, goal):
    assert path[0] == start and path[-1] == goal
    for a, b in zip(path, path[1:]):
        step = [y - x for x, y in zip(a, b)]
        assert max(abs(d) for d in step) == 1, (a, b)
        assert domain.is_valid(b)


def main():
    grid = gc.Domain.scene("wall_split")
    art = grid.preprocess(seed=1)
    print(grid, art)
    assert art.is_complete and len(art) >= 1

    before = grid.validity_checks
    path, stats = art.query(grid, [15, 18])
    assert grid.validity_checks == before
    assert stats["collision_checks"] == 0
    check_path(grid, path, art.start, [15, 18])
    cost = sum(math.dist(a, b) for a, b in zip(path, path[1:]))
    assert abs(cost - stats["cost"]) < 1e-9

    prof = art.profile(grid)
    assert prof["holds"] and prof["max_collision_checks"] == 0, prof
    assert art.audit(grid)["holds"]

    try:
        art.query(grid, [0, 0])
    except gc.NotCoveredError as e:
        print("not covered:", e)
    else:
        raise AssertionError("goal outside the region was answered")

    with tempfile.TemporaryDirectory() as d:
        f = os.path.join(d, "a.gcva")
        art.save(f)
        back = gc.Artifact.load(f, grid)
        assert back.to_bytes() == art.to_bytes()
        try:
            gc.Artifact.load(f, gc.Domain.scene("empty_box"))
        except gc.GoalcoverError as e:
            assert "FingerprintMismatch" in str(e)
        else:
            raise AssertionError("artifact loaded against the wrong domain")

    assert gc.Domain.scene("two_box").check_assumptions()["goal_convexity"] > 0
    assert gc.Domain.scene("empty_box").check_assumptions() == {
        "weak_monotonicity": 0,
        "goal_convexity": 0,
    }

    arm = gc.Domain.scene("arm", seed=0)
    arm_art = arm.preprocess()
    goal = [-3, 2, -5]
    if arm.is_valid(goal):
        path, stats = arm_art.query(arm, goal)
        assert path[-1] == goal and stats["collision_checks"] == 0
    print("arm:", arm_art, "subregions", arm_art.subregions[:2])
    print("smoke test passed")


if __name__ == "__main__":
    main()
