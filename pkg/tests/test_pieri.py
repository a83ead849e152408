"""The master-set recursion: embeddings, counts and verification.

The pinned G(2,4) instance has closed-form solutions (bilinear
elimination), so the recursion's output is checked against an exact
independent computation, not just against its own residuals.
"""

import numpy as np
import pytest

import oracles
from schubert_galois.pieri import (
    CountMismatchError,
    MasterSet,
    canonical_order,
    child_embedding,
    embed_child,
    solve_master,
    verify_master,
)
from schubert_galois.schubert import SimpleSchubertProblem, chart, random_instance


class TestEmbedding:
    def test_each_growth_pins_the_rightmost_variable(self):
        parent = chart(SimpleSchubertProblem(2, 4, (1,), (1,)))
        grow_first = child_embedding(parent, (2, 0))
        assert grow_first.grown_row == 0
        assert grow_first.parent_var_index == 0
        grow_second = child_embedding(parent, (1, 1))
        assert grow_second.grown_row == 1
        assert grow_second.parent_var_index == 1

    def test_embed_inserts_a_zero(self):
        parent = chart(SimpleSchubertProblem(2, 4, (1,), (1,)))
        emb = child_embedding(parent, (2, 0))
        assert np.array_equal(embed_child([5j], emb), [0.0, 5j])
        emb = child_embedding(parent, (1, 1))
        assert np.array_equal(embed_child([5j], emb), [5j, 0.0])

    def test_embedding_matches_child_chart_cells(self):
        # the child chart's variable cells are the parent's minus the
        # pinned one, in the same row-major order
        parent_problem = SimpleSchubertProblem(3, 7, (1,), (1, 1))
        parent = chart(parent_problem)
        for child in [(2, 1, 0), (1, 1, 1)]:
            emb = child_embedding(parent, child)
            child_cells = chart(parent_problem.with_mu(child)).var_cells
            expected = [c for i, c in enumerate(parent.var_cells)
                        if i != emb.parent_var_index]
            assert list(child_cells) == expected

    def test_rejects_non_covers(self):
        parent = chart(SimpleSchubertProblem(2, 4, (1,), (1,)))
        with pytest.raises(ValueError):
            child_embedding(parent, (2, 1))
        with pytest.raises(ValueError):
            child_embedding(parent, (1, 0))


class TestCanonicalOrder:
    def test_sorts_by_interleaved_parts(self):
        a = np.array([1.0 + 2j, 0.0])
        b = np.array([1.0 - 1j, 5.0])
        c = np.array([0.5 + 0j, 9.0])
        ordered = canonical_order([a, b, c])
        assert np.array_equal(ordered[0], c)
        assert np.array_equal(ordered[1], b)
        assert np.array_equal(ordered[2], a)

    def test_order_is_input_independent(self):
        pts = [np.array([complex(i % 3, -i)]) for i in range(6)]
        fwd = canonical_order(pts)
        rev = canonical_order(pts[::-1])
        assert all(np.array_equal(x, y) for x, y in zip(fwd, rev))


class TestSolveMaster:
    def test_pinned_two_plane_problem(self, pinned_instance, pinned_master):
        exact = oracles.g24_two_plane_roots(*pinned_instance.planes)
        assert len(pinned_master.solutions) == 2
        assert pinned_master.residual_max < 1e-8
        assert oracles.same_point_sets(pinned_master.solutions, exact, 1e-8)

    def test_solutions_come_canonically_ordered(self, pinned_master):
        reordered = canonical_order(pinned_master.solutions)
        assert all(
            np.array_equal(a, b) for a, b in zip(pinned_master.solutions, reordered)
        )

    def test_repeat_solve_is_identical(self, pinned_instance, pinned_master):
        again = solve_master(pinned_instance)
        assert len(again.solutions) == len(pinned_master.solutions)
        for a, b in zip(again.solutions, pinned_master.solutions):
            assert np.array_equal(a, b)

    def test_path_counts_are_conserved(self):
        # at every recursion node the tracked paths arrive from the
        # children's full solution sets and all of them must make it
        problem = SimpleSchubertProblem(2, 5, (), ())
        instance = random_instance(problem, 3)
        stats = {}
        master = solve_master(instance, stats=stats)
        assert len(master.solutions) == 5
        from schubert_galois.schubert import count_solutions

        for node in stats["nodes"]:
            sub = problem.with_mu(node["nu"])
            assert node["expected"] == count_solutions(sub)
            if not node["base"]:
                child_total = sum(
                    count_solutions(problem.with_mu(c)) for c in node["children"]
                )
                assert node["paths"] == child_total == node["expected"]

    def test_solves_a_named_condition_problem(self):
        problem = SimpleSchubertProblem(2, 5, (2,), (1,))
        instance = random_instance(problem, 5)
        master = solve_master(instance)
        assert len(master.solutions) == 3
        assert verify_master(master).ok


class TestVerifyMaster:
    def test_accepts_good_master(self, pinned_master):
        report = verify_master(pinned_master)
        assert report.ok
        assert report.expected_count == report.actual_count == 2
        assert report.residual_max < 1e-8
        assert report.min_separation > 1e-3
        assert report.issues == []

    def test_flags_perturbed_solution(self, pinned_master):
        bad = [s.copy() for s in pinned_master.solutions]
        bad[0] += 1e-3
        report = verify_master(
            MasterSet(pinned_master.instance, bad, pinned_master.residual_max)
        )
        assert not report.ok
        assert any("residual" in issue for issue in report.issues)

    def test_flags_duplicate_solutions(self, pinned_master):
        twice = [pinned_master.solutions[0], pinned_master.solutions[0] + 1e-9]
        report = verify_master(
            MasterSet(pinned_master.instance, twice, pinned_master.residual_max)
        )
        assert not report.ok
        assert any("separation" in issue for issue in report.issues)

    def test_flags_missing_solutions(self, pinned_master):
        short = [pinned_master.solutions[0]]
        report = verify_master(
            MasterSet(pinned_master.instance, short, pinned_master.residual_max)
        )
        assert not report.ok
        assert any("count" in issue for issue in report.issues)
