import numpy as np
import pytest

from andersolve.errors import EvaluationError
from andersolve.library import (
    ChandrasekharConfig,
    beh_problem,
    chandrasekhar,
    get_problem,
    singular_toy,
)
from andersolve.problem import fd_jacobian


def test_chandrasekhar_zero_field():
    p = chandrasekhar(ChandrasekharConfig(0.7, 10))
    np.testing.assert_array_equal(p.f(np.zeros(10)), -np.ones(10))


def test_chandrasekhar_decoupled_limit():
    p = chandrasekhar(ChandrasekharConfig(0.0, 10))
    np.testing.assert_array_equal(p.f(np.ones(10)), np.zeros(10))


def test_chandrasekhar_two_nodes_by_hand():
    p = chandrasekhar(ChandrasekharConfig(1.0, 2))
    np.testing.assert_allclose(p.f(np.ones(2)), [-3 / 13, -5 / 11], rtol=1e-14)


def test_chandrasekhar_jacobian_fd_near_one():
    p = chandrasekhar(ChandrasekharConfig(1.0, 50))
    rng = np.random.default_rng(5)
    for _ in range(3):
        H = 1 + 0.05 * rng.standard_normal(50)
        np.testing.assert_allclose(p.jac(H), fd_jacobian(p, H), atol=1e-5)


def test_chandrasekhar_vanishing_denominator():
    p = chandrasekhar(ChandrasekharConfig(1.0, 2))
    # choose H so that 1 - S_1 = 0 exactly: S_1 = (1/4)(H_1/2 + H_2/4)
    with pytest.raises(EvaluationError):
        p.f(np.array([8.0, 0.0]))


def test_chandrasekhar_validation():
    with pytest.raises(ValueError):
        ChandrasekharConfig(1.5, 10)
    with pytest.raises(ValueError):
        ChandrasekharConfig(0.5, 1)


def test_chandrasekhar_random_start_is_seeded():
    p = chandrasekhar(ChandrasekharConfig(1.0, 20))
    a = p.sample_x0(np.random.default_rng(3))
    b = p.sample_x0(np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0


def test_beh1_values():
    p = beh_problem(1)
    np.testing.assert_allclose(p.f(np.array([1.0, 0.0])), [0.0, -8.0])
    x2sq = 5.0009 + 0.06 * np.sqrt(5)
    np.testing.assert_allclose(p.f(p.x0), [x2sq - 1, x2sq - 9], rtol=1e-14)
    # 0.06 * sqrt(5) = 0.1341641, so the first entry is 4.1350641
    assert p.f(p.x0)[0] == pytest.approx(4.135066, abs=5e-6)


def test_beh4_origin():
    np.testing.assert_array_equal(beh_problem(4).f(np.zeros(2)), [-1.0, 1.0])


@pytest.mark.parametrize("ident", [1, 2, 3, 4])
def test_beh_jacobians_match_fd(ident):
    p = beh_problem(ident)
    x = np.array([0.7, -0.4])
    np.testing.assert_allclose(p.jac(x), fd_jacobian(p, x), atol=1e-6)
    assert p.gradient_norm_termination


def test_beh_parameter_choices():
    assert str(beh_problem(1).mu_schedule) == "gradnorm"
    assert str(beh_problem(2).mu_schedule) == "gradnorm"
    assert str(beh_problem(3).mu_schedule) == "constant:0.2"
    assert str(beh_problem(4).mu_schedule) == "constant:5"
    with pytest.raises(ValueError):
        beh_problem(5)


def test_singular_toy():
    p, diag = singular_toy()
    np.testing.assert_array_equal(p.f(np.ones(2)), [1.0, 1.0])
    np.testing.assert_array_equal(diag.null_projection(np.array([3.0, 4.0])), [3.0, 0.0])
    np.testing.assert_array_equal(diag.range_projection(np.array([3.0, 4.0])), [0.0, 4.0])
    np.testing.assert_array_equal(p.x0, [1.0, 0.0])


def test_get_problem_names():
    assert get_problem("beh3").name == "beh3"
    assert get_problem("toy-singular").dimension == 2
    assert get_problem("chandrasekhar", 0.5, 8).dimension == 8
    with pytest.raises(ValueError):
        get_problem("rosenbrock")
