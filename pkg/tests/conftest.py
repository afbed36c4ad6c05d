"""Shared fixtures: the worked models and seeded random model factories."""

import numpy as np
import pytest

from symplind import JumpOperator, LindbladModel, assemble_liouvillian


def parametric_oscillator(gamma=1.0, detuning=0.0, drive=0.4, nbar=0.0):
    """Single damped mode with two-photon (parametric) driving.

    Hamiltonian ``(detuning/2) a^dag a + i (drive/4)(a^dag^2 - a^2)`` with
    thermal loss at rate ``gamma`` and occupation ``nbar``.  At
    ``drive = detuning`` the generator is defective.
    """
    return LindbladModel(
        m=1,
        h=[[detuning / 2.0]],
        delta=[[-0.5j * drive]],
        alpha=[0.0],
        jumps=(
            JumpOperator(v=[np.sqrt(gamma * (nbar + 1))], w=[0.0]),
            JumpOperator(v=[0.0], w=[np.sqrt(gamma * nbar)]),
        ),
    )


def coupled_gain_loss(g=1.0, gamma_l=0.5, gamma_g=0.5):
    """Two linearly coupled modes, one lossy and one with gain."""
    return LindbladModel(
        m=2,
        h=[[0.0, g / 2.0], [g / 2.0, 0.0]],
        delta=np.zeros((2, 2)),
        alpha=[0.0, 0.0],
        jumps=(
            JumpOperator(v=[np.sqrt(gamma_l), 0.0], w=[0.0, 0.0]),
            JumpOperator(v=[0.0, 0.0], w=[0.0, np.sqrt(gamma_g)]),
        ),
    )


def thermal_cavity(gamma=1.0, nbar=0.5):
    return LindbladModel(
        m=1,
        h=[[0.0]],
        delta=[[0.0]],
        alpha=[0.0],
        jumps=(
            JumpOperator(v=[np.sqrt(gamma * (nbar + 1))], w=[0.0]),
            JumpOperator(v=[0.0], w=[np.sqrt(gamma * nbar)]),
        ),
    )


def driven_cavity(gamma=1.0, alpha=0.5):
    return LindbladModel(
        m=1,
        h=[[0.0]],
        delta=[[0.0]],
        alpha=[alpha],
        jumps=(JumpOperator(v=[np.sqrt(gamma)], w=[0.0]),),
    )


def damped_mode(gamma=1.0):
    return LindbladModel(
        m=1, h=[[0.0]], delta=[[0.0]], alpha=[0.0],
        jumps=(JumpOperator(v=[np.sqrt(gamma)], w=[0.0]),),
    )


def random_symmetric(n2, seed):
    """Random dense complex symmetric matrix of size n2 x n2."""
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n2, n2)) + 1j * rng.normal(size=(n2, n2))
    return 0.5 * (M + M.T)


def random_stable_model(seed):
    """Seeded single-mode model, loss dominated and mildly driven.

    Parameter ranges keep every damping rate above ~0.35 and the stationary
    occupation below ~0.5 quanta, so truncated-Fock references at cutoff 25
    resolve the low-lying spectrum to well under 1e-6.
    """
    rng = np.random.default_rng(seed)
    gl = 0.9 + rng.uniform(0.0, 0.7)
    gg = rng.uniform(0.0, 0.15) * gl
    h = rng.uniform(-0.4, 0.4)
    dp = rng.uniform(-0.08, 0.08) + 1j * rng.uniform(-0.08, 0.08)
    al = rng.uniform(-0.15, 0.15) + 1j * rng.uniform(-0.15, 0.15)
    return LindbladModel(
        m=1, h=[[h]], delta=[[dp]], alpha=[al],
        jumps=(
            JumpOperator(v=[np.sqrt(gl)], w=[0.0]),
            JumpOperator(v=[0.0], w=[np.sqrt(gg)]),
        ),
    )


@pytest.fixture(scope="session")
def thermal_blocks():
    return assemble_liouvillian(thermal_cavity())


@pytest.fixture(scope="session")
def driven_blocks():
    return assemble_liouvillian(driven_cavity())


@pytest.fixture(scope="session")
def coupled_blocks():
    return assemble_liouvillian(coupled_gain_loss())


@pytest.fixture(scope="session")
def ep_blocks():
    return assemble_liouvillian(parametric_oscillator(1.0, 0.5, 0.5, 0.0))
