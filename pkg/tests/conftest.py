import pytest

from stringsens import RationalTF

from oracles import oscillator_coeffs, platoon_coeffs


@pytest.fixture(scope="session")
def platoon():
    """Double-integrator platoon plant with a lead compensator: the loop
    (2s+1) / (s^2 (0.1s+1)(0.05s+1)), double pole at the origin."""
    num, den = platoon_coeffs()
    return RationalTF(num, den)


@pytest.fixture(scope="session")
def oscillator():
    """Resonant loop (s+1)^4 / (s^2+1)^2 with double poles at +/- j."""
    num, den = oscillator_coeffs()
    return RationalTF(num, den)
